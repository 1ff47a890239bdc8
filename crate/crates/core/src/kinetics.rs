//! Detailed-balance relaxation of level occupancies toward the Fermi law.
//!
//! Levels exchange quanta through energy-conserving pair collisions
//! `(j₁, j₂) ↔ (j₃, j₄)` with forward rate `w n₁n₂(1−n₃)(1−n₄)`. A reservoir
//! channel pulls selected levels toward `q_j = e^(−βε_j)`. The stationary
//! state of pair exchange is `q_j = e^(−α−β′ε_j)`; one anchored level fixes
//! only `α + β′ε₀`, so at least two anchors with distinct energies are needed
//! to single out `α = 0`, `β′ = β`.

use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::io::format_float;
use crate::scalar::{lit, pow2, Real};

/// Energy-conservation tolerance for quadruples.
pub const CONSERVATION_TOL: f64 = 1e-12;

/// Largest supported ladder.
pub const MAX_LADDER_LEVELS: usize = 512;

/// Default damping factor of the fixed-point update.
pub const DEFAULT_DAMPING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    /// `ε_j = j + 1`.
    Linear,
    /// `ε_j = 2^j`.
    Dyadic,
    /// Caller-supplied, strictly increasing.
    Custom,
}

impl std::str::FromStr for LadderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "dyadic" => Ok(Self::Dyadic),
            "custom" => Ok(Self::Custom),
            other => invalid(format!("unknown ladder kind '{other}' (expected linear, dyadic or custom)")),
        }
    }
}

/// Index quadruple `(j₁, j₂; j₃, j₄)` with `ε_{j₁} + ε_{j₂} = ε_{j₃} + ε_{j₄}`.
pub type Quadruple = [usize; 4];

/// Energy levels (units of `hν`) and their conserving quadruples.
///
/// Quadruples are stored once per symmetry class: `j₁ ≤ j₂`, `j₃ ≤ j₄`,
/// `(j₁, j₂) < (j₃, j₄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLadder<F> {
    levels: Vec<F>,
    quadruples: Vec<Quadruple>,
}

impl<F: Real> EnergyLadder<F> {
    pub fn new(levels: Vec<F>) -> Result<Self> {
        if levels.len() < 2 {
            return invalid(format!("a ladder needs at least 2 levels, got {}", levels.len()));
        }
        if levels.len() > MAX_LADDER_LEVELS {
            return Err(Error::Capacity(format!("{} levels exceed the limit of {MAX_LADDER_LEVELS}", levels.len())));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return invalid("ladder energies must be finite");
        }
        if let Some(w) = levels.windows(2).find(|w| !(w[0] < w[1])) {
            return invalid(format!("ladder energies must be strictly increasing ({} then {})", w[0], w[1]));
        }
        let quadruples = enumerate_quadruples(&levels);
        Ok(Self { levels, quadruples })
    }

    pub fn levels(&self) -> &[F] {
        &self.levels
    }

    pub fn quadruples(&self) -> &[Quadruple] {
        &self.quadruples
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Levels appearing in at least one quadruple.
    fn coupled(&self) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        for q in &self.quadruples {
            q.iter().for_each(|&j| out[j] = true);
        }
        out
    }
}

fn enumerate_quadruples<F: Real>(levels: &[F]) -> Vec<Quadruple> {
    let tol: F = lit(CONSERVATION_TOL);
    let mut pairs: Vec<(F, usize, usize)> = Vec::new();
    for a in 0..levels.len() {
        for b in a..levels.len() {
            pairs.push((levels[a] + levels[b], a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut out = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if pairs[j].0 - pairs[i].0 > tol {
                break;
            }
            let (p, q) = ((pairs[i].1, pairs[i].2), (pairs[j].1, pairs[j].2));
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            out.push([lo.0, lo.1, hi.0, hi.1]);
        }
    }
    out.sort_unstable();
    out
}

/// Builds a linear, dyadic or custom ladder with `count` levels.
pub fn build_ladder<F: Real>(kind: LadderKind, count: usize, levels: Option<&[F]>) -> Result<EnergyLadder<F>> {
    let energies = match (kind, levels) {
        (LadderKind::Custom, Some(l)) => {
            if l.len() != count {
                return invalid(format!("custom ladder lists {} levels but {count} were requested", l.len()));
            }
            l.to_vec()
        }
        (LadderKind::Custom, None) => return invalid("custom ladder requires explicit levels"),
        (_, Some(_)) => return invalid("explicit levels are only accepted for a custom ladder"),
        (LadderKind::Linear, None) => (1..=count).map(|j| F::from_usize(j).unwrap()).collect(),
        (LadderKind::Dyadic, None) => {
            if count > 64 {
                return Err(Error::Capacity(format!("dyadic ladder supports at most 64 levels, got {count}")));
            }
            (0..count as u32).map(pow2).collect()
        }
    };
    EnergyLadder::new(energies)
}

/// Mean occupancies `n_j ∈ [0, 1]` and the chemical-potential parameter `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyState<F> {
    n: Vec<F>,
    pub alpha: F,
}

impl<F: Real> OccupancyState<F> {
    pub fn new(n: Vec<F>) -> Result<Self> {
        if let Some((j, v)) = n.iter().enumerate().find(|(_, v)| !(**v >= F::zero() && **v <= F::one())) {
            return invalid(format!("occupancy n[{j}] = {v} outside [0, 1]"));
        }
        Ok(Self { n, alpha: F::zero() })
    }

    /// Same value on every level.
    pub fn uniform(count: usize, value: F) -> Result<Self> {
        Self::new(vec![value; count])
    }

    /// `n_j = 1/(e^(βε_j) + 1)`.
    pub fn fermi(ladder: &EnergyLadder<F>, beta: F) -> Self {
        Self { n: ladder.levels.iter().map(|&e| fermi(beta * e)).collect(), alpha: F::zero() }
    }

    pub fn occupancies(&self) -> &[F] {
        &self.n
    }
}

/// `1/(e^x + 1)` without overflow.
fn fermi<F: Real>(x: F) -> F {
    if x > F::zero() {
        let e = (-x).exp();
        e / (F::one() + e)
    } else {
        (F::one() + x.exp()).recip()
    }
}

/// Forward `w n₁n₂(1−n₃)(1−n₄)` and backward `w n₃n₄(1−n₁)(1−n₂)` rates.
pub fn rates<F: Real>(state: &OccupancyState<F>, quad: &Quadruple, w: F) -> (F, F) {
    let n = |k: usize| state.n[quad[k]];
    let h = |k: usize| F::one() - state.n[quad[k]];
    (w * n(0) * n(1) * h(2) * h(3), w * n(2) * n(3) * h(0) * h(1))
}

/// `q_j = n_j/(1 − n_j)`.
pub fn q_transform<F: Real>(state: &OccupancyState<F>) -> Result<Vec<F>> {
    state
        .n
        .iter()
        .map(|&n| {
            if n >= F::one() {
                Err(Error::Domain { what: "occupancy", value: n.to_f64().unwrap_or(f64::NAN), domain: "[0, 1)" })
            } else {
                Ok(n / (F::one() - n))
            }
        })
        .collect()
}

/// `n = q/(1 + q)`.
pub fn q_inverse<F: Real>(q: &[F]) -> Result<OccupancyState<F>> {
    OccupancyState::new(q.iter().map(|&q| q / (F::one() + q)).collect())
}

/// `max |q_{j₁}q_{j₂} − q_{j₃}q_{j₄}|` over the ladder's quadruples (0 if none).
pub fn verify_q_invariant<F: Real>(state: &OccupancyState<F>, ladder: &EnergyLadder<F>) -> Result<F> {
    check_len(state, ladder)?;
    let q = q_transform(state)?;
    Ok(ladder
        .quadruples
        .iter()
        .map(|&[a, b, c, d]| (q[a] * q[b] - q[c] * q[d]).abs())
        .fold(F::zero(), F::max))
}

/// `max |forward − backward|` over the ladder's quadruples at `w = 1`.
pub fn max_rate_imbalance<F: Real>(state: &OccupancyState<F>, ladder: &EnergyLadder<F>) -> Result<F> {
    check_len(state, ladder)?;
    Ok(ladder
        .quadruples
        .iter()
        .map(|quad| {
            let (f, b) = rates(state, quad, F::one());
            (f - b).abs()
        })
        .fold(F::zero(), F::max))
}

fn check_len<F: Real>(state: &OccupancyState<F>, ladder: &EnergyLadder<F>) -> Result<()> {
    if state.n.len() != ladder.len() {
        return invalid(format!("state has {} levels, ladder has {}", state.n.len(), ladder.len()));
    }
    Ok(())
}

/// Which levels exchange quanta with the heat reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReservoirCoupling {
    /// Lowest and highest level, plus every level no quadruple touches.
    /// On a dyadic ladder this is every level; on a linear one, the two ends.
    #[default]
    Anchors,
    /// Lowest level only. Leaves a one-parameter family of stationary states
    /// on ladders with quadruples; kept to exhibit that degeneracy.
    LowestOnly,
    All,
}

impl ReservoirCoupling {
    fn mask<F: Real>(self, ladder: &EnergyLadder<F>) -> Vec<bool> {
        let count = ladder.len();
        match self {
            Self::All => vec![true; count],
            Self::LowestOnly => (0..count).map(|j| j == 0).collect(),
            Self::Anchors => {
                let coupled = ladder.coupled();
                (0..count).map(|j| j == 0 || j == count - 1 || !coupled[j]).collect()
            }
        }
    }
}

/// Settings for [`relax_to_equilibrium`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions<F> {
    /// Stop when the largest per-level change of one update falls below this.
    pub tol: F,
    pub max_iter: usize,
    pub damping: F,
    /// Pair-exchange rate constant `w`.
    pub w: F,
    /// Reservoir rate constant.
    pub gamma: F,
    pub coupling: ReservoirCoupling,
}

impl<F: Real> RelaxOptions<F> {
    pub fn new(tol: F, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            damping: lit(DEFAULT_DAMPING),
            w: F::one(),
            gamma: F::one(),
            coupling: ReservoirCoupling::default(),
        }
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<F> {
    pub iteration: usize,
    /// `max_j |n_j − Fermi_j|` after this iteration.
    pub max_error: F,
    pub n: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation<F> {
    /// Final occupancies; `alpha` holds the fitted chemical potential.
    pub state: OccupancyState<F>,
    /// Updates applied before the stopping rule fired (0 for a stationary start).
    pub iterations: usize,
    /// Row 0 is the initial state.
    pub trace: Vec<TraceRow<F>>,
}

impl<F: Real> Relaxation<F> {
    pub fn final_error(&self) -> F {
        self.trace.last().map(|r| r.max_error).unwrap_or(F::zero())
    }

    /// CSV with columns `iteration,max_error,n0,…`.
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let levels = self.state.n.len();
        let mut header = vec!["iteration".to_string(), "max_error".to_string()];
        header.extend((0..levels).map(|j| format!("n{j}")));
        w.write_record(&header)?;
        for row in &self.trace {
            let mut rec = vec![row.iteration.to_string(), fmt(row.max_error)];
            rec.extend(row.n.iter().map(|&x| fmt(x)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt<F: Real>(x: F) -> String {
    format_float(x.to_f64().unwrap_or(f64::NAN))
}

/// Damped fixed-point iteration of the master equation.
///
/// Each level's balance reads `G_j(1 − n_j) = L_j n_j`, with `G_j`, `L_j`
/// collected from every quadruple slot the level occupies and from the
/// reservoir (`γe^(−βε_j)` and `γ`). The update
/// `n_j ← (1 − ω)n_j + ω G_j/(G_j + L_j)` is a convex combination of points
/// in `[0, 1]`, so iterates never leave it.
pub fn relax_to_equilibrium<F: Real>(
    ladder: &EnergyLadder<F>,
    beta: F,
    init: &OccupancyState<F>,
    options: &RelaxOptions<F>,
) -> Result<Relaxation<F>> {
    check_len(init, ladder)?;
    if !(beta > F::zero() && beta.is_finite()) {
        return invalid(format!("beta must be positive and finite, got {beta}"));
    }
    if !(options.tol > F::zero()) {
        return invalid(format!("tolerance must be positive, got {}", options.tol));
    }
    if !(options.damping > F::zero() && options.damping <= F::one()) {
        return invalid(format!("damping must lie in (0, 1], got {}", options.damping));
    }
    if !(options.w > F::zero() && options.gamma > F::zero()) {
        return invalid("rate constants must be positive");
    }
    if let Some(v) = init.n.iter().find(|&&v| !(v > F::zero() && v < F::one())) {
        return invalid(format!("initial occupancies must lie in (0, 1), got {v}"));
    }
    let anchored = options.coupling.mask(ladder);
    let coupled = ladder.coupled();
    if let Some(j) = (0..ladder.len()).find(|&j| !anchored[j] && !coupled[j]) {
        return invalid(format!("level {j} is coupled to neither a quadruple nor the reservoir"));
    }

    let target = OccupancyState::fermi(ladder, beta);
    let boltzmann: Vec<F> = ladder.levels.iter().map(|&e| (-beta * e).exp()).collect();
    let error = |n: &[F]| n.iter().zip(&target.n).map(|(&a, &b)| (a - b).abs()).fold(F::zero(), F::max);
    let omega = options.damping;
    let mut n = init.n.clone();
    let mut trace = vec![TraceRow { iteration: 0, max_error: error(&n), n: n.clone() }];
    let (mut gain, mut loss) = (vec![F::zero(); n.len()], vec![F::zero(); n.len()]);

    for iteration in 0..options.max_iter {
        gain.iter_mut().for_each(|g| *g = F::zero());
        loss.iter_mut().for_each(|l| *l = F::zero());
        for &[a, b, c, d] in &ladder.quadruples {
            let h = |k: usize| F::one() - n[k];
            let w = options.w;
            // slot k: gain from the reverse process, loss from the forward one
            for (me, partner, other1, other2) in [(a, b, c, d), (b, a, c, d), (c, d, a, b), (d, c, a, b)] {
                gain[me] = gain[me] + w * n[other1] * n[other2] * h(partner);
                loss[me] = loss[me] + w * n[partner] * h(other1) * h(other2);
            }
        }
        for j in 0..n.len() {
            if anchored[j] {
                gain[j] = gain[j] + options.gamma * boltzmann[j];
                loss[j] = loss[j] + options.gamma;
            }
        }
        let mut change = F::zero();
        let next: Vec<F> = (0..n.len())
            .map(|j| {
                let total = gain[j] + loss[j];
                let fixed = if total > F::zero() { gain[j] / total } else { n[j] };
                let v = (F::one() - omega) * n[j] + omega * fixed;
                change = change.max((v - n[j]).abs());
                v
            })
            .collect();
        if change < options.tol {
            let mut state = OccupancyState { n, alpha: F::zero() };
            state.alpha = fit_chemical_potential(&state, ladder)?.alpha;
            return Ok(Relaxation { state, iterations: iteration, trace });
        }
        n = next;
        trace.push(TraceRow { iteration: iteration + 1, max_error: error(&n), n: n.clone() });
    }
    Err(Error::NonConvergence {
        iterations: options.max_iter,
        last_error: trace.last().unwrap().max_error.to_f64().unwrap_or(f64::NAN),
        trace: trace.iter().map(|r| r.max_error.to_f64().unwrap_or(f64::NAN)).collect(),
    })
}

/// Least-squares fit of `ln q_j = −α − β′ε_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemicalPotentialFit<F> {
    pub alpha: F,
    pub beta: F,
    /// Largest absolute residual of the fit.
    pub max_residual: F,
}

pub fn fit_chemical_potential<F: Real>(
    state: &OccupancyState<F>,
    ladder: &EnergyLadder<F>,
) -> Result<ChemicalPotentialFit<F>> {
    check_len(state, ladder)?;
    if let Some(v) = state.n.iter().find(|&&v| !(v > F::zero() && v < F::one())) {
        return Err(Error::Fit(format!("ln q undefined at occupancy {v}")));
    }
    // ln q = ln n − ln(1 − n)
    let y: Vec<F> = state.n.iter().map(|&n| n.ln() - (-n).ln_1p()).collect();
    let x = &ladder.levels;
    let count = F::from_usize(x.len()).unwrap();
    let mx = x.iter().fold(F::zero(), |s, &v| s + v) / count;
    let my = y.iter().fold(F::zero(), |s, &v| s + v) / count;
    let sxx = x.iter().fold(F::zero(), |s, &v| s + (v - mx) * (v - mx));
    let sxy = x.iter().zip(&y).fold(F::zero(), |s, (&a, &b)| s + (a - mx) * (b - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = x
        .iter()
        .zip(&y)
        .map(|(&a, &b)| (b - intercept - slope * a).abs())
        .fold(F::zero(), F::max);
    Ok(ChemicalPotentialFit { alpha: -intercept, beta: -slope, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(count: usize) -> EnergyLadder<f64> {
        build_ladder(LadderKind::Linear, count, None).unwrap()
    }

    /// Brute-force enumeration over all ordered index 4-tuples.
    fn brute_force(levels: &[f64]) -> Vec<Quadruple> {
        let j = levels.len();
        let mut out = Vec::new();
        for a in 0..j {
            for b in a..j {
                for c in 0..j {
                    for d in c..j {
                        if (a, b) < (c, d) && (levels[a] + levels[b] - levels[c] - levels[d]).abs() <= 1e-12 {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn ladder_quadruples() {
        let lin = linear(4);
        assert!(lin.quadruples().contains(&[0, 3, 1, 2]));
        assert_eq!(lin.quadruples(), brute_force(lin.levels()).as_slice());
        let dy = build_ladder::<f64>(LadderKind::Dyadic, 5, None).unwrap();
        assert!(dy.quadruples().is_empty());
        let custom = build_ladder(LadderKind::Custom, 3, Some(&[1.0, 2.0, 2.5])).unwrap();
        assert!(custom.quadruples().is_empty());
        let l8 = linear(8);
        assert_eq!(l8.quadruples(), brute_force(l8.levels()).as_slice());
        for &[a, b, c, d] in l8.quadruples() {
            assert_eq!(l8.levels()[a] + l8.levels()[b], l8.levels()[c] + l8.levels()[d]);
        }
    }

    #[test]
    fn ladder_validation() {
        assert!(build_ladder(LadderKind::Custom, 3, Some(&[1.0, 2.0, 2.0])).is_err());
        assert!(build_ladder(LadderKind::Custom, 2, Some(&[2.0, 1.0])).is_err());
        assert!(build_ladder::<f64>(LadderKind::Custom, 2, None).is_err());
        assert!(build_ladder::<f64>(LadderKind::Linear, 1, None).is_err());
        assert!(build_ladder(LadderKind::Linear, 3, Some(&[1.0, 2.0, 3.0])).is_err());
        assert!("cubic".parse::<LadderKind>().is_err());
    }

    #[test]
    fn rate_examples() {
        let quad = [0, 3, 1, 2];
        let zero = OccupancyState::uniform(4, 0.0).unwrap();
        assert_eq!(rates(&zero, &quad, 1.0), (0.0, 0.0));
        let half = OccupancyState::uniform(4, 0.5).unwrap();
        assert_eq!(rates(&half, &quad, 1.0), (1.0 / 16.0, 1.0 / 16.0));
        let lad = linear(4);
        let f = OccupancyState::fermi(&lad, 1.0);
        for q in lad.quadruples() {
            let (a, b) = rates(&f, q, 1.0);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn q_examples() {
        let s = OccupancyState::new(vec![0.5_f64, 1.0 / 3.0]).unwrap();
        let q = q_transform(&s).unwrap();
        assert_eq!(q[0], 1.0);
        assert!((q[1] - 0.5).abs() < 1e-16);
        let back = q_inverse(&q).unwrap();
        assert!((back.occupancies()[1] - 1.0 / 3.0).abs() < 1e-16);
        let ln2 = build_ladder(LadderKind::Custom, 2, Some(&[std::f64::consts::LN_2, 1.0])).unwrap();
        let f = OccupancyState::fermi(&ln2, 1.0);
        assert!((q_transform(&f).unwrap()[0] - 0.5).abs() < 1e-15);
        let one = OccupancyState::new(vec![1.0, 0.2]).unwrap();
        assert!(matches!(q_transform(&one), Err(Error::Domain { .. })));
        assert!(OccupancyState::new(vec![1.5]).is_err());
    }

    #[test]
    fn q_invariant_examples() {
        let lad = linear(8);
        let f = OccupancyState::fermi(&lad, 1.0);
        assert!(verify_q_invariant(&f, &lad).unwrap() < 1e-14);
        let half = OccupancyState::uniform(8, 0.5).unwrap();
        assert_eq!(verify_q_invariant(&half, &lad).unwrap(), 0.0);
        let mut n = f.occupancies().to_vec();
        n[2] += 1e-3;
        let bumped = OccupancyState::new(n).unwrap();
        let v = verify_q_invariant(&bumped, &lad).unwrap();
        // dq₂ = dn/(1 − n)², times the largest partner q among quadruples touching level 2
        assert!(v > 1e-4 && v < 1e-2, "{v}");
    }

    #[test]
    fn stationary_start_takes_no_iterations() {
        let lad = linear(8);
        let f = OccupancyState::fermi(&lad, 1.0);
        let r = relax_to_equilibrium(&lad, 1.0, &f, &RelaxOptions::new(1e-12, 10)).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn linear_ladder_reaches_fermi() {
        let lad = linear(8);
        let init = OccupancyState::uniform(8, 0.5).unwrap();
        let opts = RelaxOptions::new(1e-13, 100_000);
        let r = relax_to_equilibrium(&lad, 1.0, &init, &opts).unwrap();
        assert!(r.final_error() < 1e-8, "{}", r.final_error());
        assert!(verify_q_invariant(&r.state, &lad).unwrap() < 1e-12);
        assert!(max_rate_imbalance(&r.state, &lad).unwrap() < 10.0 * opts.tol);
        assert!(r.state.alpha.abs() < 1e-8);
        let fit = fit_chemical_potential(&r.state, &lad).unwrap();
        assert!((fit.beta - 1.0).abs() < 1e-8);
        // damping keeps every iterate inside [0, 1]
        assert!(r.trace.iter().all(|row| row.n.iter().all(|&x| (0.0..=1.0).contains(&x))));
    }

    #[test]
    fn single_anchor_leaves_chemical_potential_free() {
        let lad = linear(8);
        let init = OccupancyState::uniform(8, 0.5).unwrap();
        let opts = RelaxOptions { coupling: ReservoirCoupling::LowestOnly, ..RelaxOptions::new(1e-13, 100_000) };
        let r = relax_to_equilibrium(&lad, 1.0, &init, &opts).unwrap();
        // still a detailed-balance state, but not the Fermi one
        assert!(verify_q_invariant(&r.state, &lad).unwrap() < 1e-10);
        assert!(r.final_error() > 0.1);
        let fit = fit_chemical_potential(&r.state, &lad).unwrap();
        assert!(fit.alpha.abs() > 0.1);
        assert!((fit.alpha + fit.beta - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dyadic_ladder_thermalizes_through_reservoir() {
        let lad = build_ladder::<f64>(LadderKind::Dyadic, 6, None).unwrap();
        let init = OccupancyState::uniform(6, 0.3).unwrap();
        let r = relax_to_equilibrium(&lad, 0.5, &init, &RelaxOptions::new(1e-14, 10_000)).unwrap();
        assert!(r.final_error() < 1e-12);
        // with no quadruples each level relaxes independently: error shrinks by exactly 1 − ω per step
        let e0 = r.trace[0].n[0] - OccupancyState::fermi(&lad, 0.5).occupancies()[0];
        let e1 = r.trace[1].n[0] - OccupancyState::fermi(&lad, 0.5).occupancies()[0];
        assert!((e1 / e0 - 0.9).abs() < 1e-12);
    }

    #[test]
    fn random_starts_converge() {
        use rand::{Rng, SeedableRng};
        let lad = linear(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let n: Vec<f64> = (0..8).map(|_| rng.random_range(0.01..0.99)).collect();
            let init = OccupancyState::new(n).unwrap();
            let r = relax_to_equilibrium(&lad, 1.0, &init, &RelaxOptions::new(1e-14, 100_000)).unwrap();
            assert!(r.final_error() < 1e-10, "{}", r.final_error());
        }
    }

    #[test]
    fn relaxation_errors() {
        let lad = linear(4);
        let init = OccupancyState::uniform(4, 0.5).unwrap();
        match relax_to_equilibrium(&lad, 1.0, &init, &RelaxOptions::new(1e-15, 3)) {
            Err(Error::NonConvergence { iterations, trace, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(trace.len(), 4);
            }
            other => panic!("{other:?}"),
        }
        let edge = OccupancyState::uniform(4, 0.0).unwrap();
        assert!(relax_to_equilibrium(&lad, 1.0, &edge, &RelaxOptions::new(1e-10, 10)).is_err());
        assert!(relax_to_equilibrium(&lad, 1.0, &init, &RelaxOptions::new(0.0, 10)).is_err());
        assert!(relax_to_equilibrium(&lad, 0.0, &init, &RelaxOptions::new(1e-10, 10)).is_err());
        let custom = build_ladder(LadderKind::Custom, 3, Some(&[1.0, 2.0, 2.5])).unwrap();
        let opts = RelaxOptions { coupling: ReservoirCoupling::LowestOnly, ..RelaxOptions::new(1e-10, 10) };
        let three = OccupancyState::uniform(3, 0.5).unwrap();
        assert!(relax_to_equilibrium(&custom, 1.0, &three, &opts).is_err());
    }

    #[test]
    fn trace_csv() {
        let lad = build_ladder::<f64>(LadderKind::Dyadic, 2, None).unwrap();
        let f = OccupancyState::fermi(&lad, 1.0);
        let r = relax_to_equilibrium(&lad, 1.0, &f, &RelaxOptions::new(1e-12, 10)).unwrap();
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,max_error,n0,n1\n0,0,"));
    }

    #[test]
    fn single_precision_fermi() {
        let lad = build_ladder::<f32>(LadderKind::Linear, 4, None).unwrap();
        let f = OccupancyState::fermi(&lad, 1.0_f32);
        assert!(verify_q_invariant(&f, &lad).unwrap() < 1e-6);
    }
}
