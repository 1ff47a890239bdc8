//! Seeded sampling of the mode energy and its decomposition.
//!
//! A Gauss sample `η` is split into `ξ = ⌊η⌋` (Planck part), `ζ = η − ξ`
//! (dark part) and the base-2 digits of `ξ` (binary photons). The
//! [`gof`] and [`independence`] submodules compare batches against the
//! closed forms in [`crate::laws`].
//!
//! Sampling runs in `f64`. Generators are ChaCha8 keyed by `(seed, stream)`,
//! which gives disjoint, platform-independent substreams.

pub mod gof;
pub mod independence;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::events::EventExpr;
use crate::io::format_float;
use crate::physconst::ModeContext;

pub use gof::{bit_frequencies, chi2_planck_test, ks_test, BitFrequency, GofReport, ReferenceLaw};
pub use independence::{empirical_independence, IndependenceReport, PairEstimate};

/// Generator key: a 64-bit seed plus a substream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// A fresh generator positioned at the start of the substream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Occupied binary-photon levels of one sample, stored as the bits of `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LevelSet(u64);

impl LevelSet {
    pub fn from_photons(xi: u64) -> Self {
        Self(xi)
    }

    /// `Σ_{s ∈ set} 2^s`.
    pub fn photons(self) -> u64 {
        self.0
    }

    pub fn contains(self, level: u32) -> bool {
        level < 64 && self.0 >> level & 1 == 1
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        (0..64).filter(move |&s| self.contains(s))
    }
}

/// Base-2 digits, least significant first, with no trailing zeros (`"0"` when empty).
impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = (64 - self.0.leading_zeros()).max(1);
        for s in 0..width {
            f.write_str(if self.contains(s) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Gauss samples with their dark, Planck and binary parts.
///
/// Constructed only through [`SampleBatch::from_eta`], so every sample
/// satisfies `ξ = ⌊η⌋`, `ζ = η − ξ` and `bits(ξ) = ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    eta: Vec<f64>,
    xi: Vec<u64>,
    zeta: Vec<f64>,
    bits: Vec<LevelSet>,
}

impl SampleBatch {
    /// Decomposes raw energies. `η` exactly at an integer gets `ζ = 0`.
    pub fn from_eta(eta: Vec<f64>) -> Result<Self> {
        let mut xi = Vec::with_capacity(eta.len());
        let mut zeta = Vec::with_capacity(eta.len());
        for (i, &y) in eta.iter().enumerate() {
            if !(y >= 0.0) {
                return invalid(format!("sample {i}: energy must be non-negative, got {y}"));
            }
            if y >= 18_446_744_073_709_551_616.0 {
                return Err(Error::Capacity(format!("sample {i}: energy {y:e} exceeds 2^64 quanta")));
            }
            let whole = y.floor();
            xi.push(whole as u64);
            // exact: y and ⌊y⌋ share the binade or ⌊y⌋ = 0
            zeta.push(y - whole);
        }
        let bits = xi.iter().map(|&n| LevelSet::from_photons(n)).collect();
        Ok(Self { eta, xi, zeta, bits })
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn xi(&self) -> &[u64] {
        &self.xi
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn bits(&self) -> &[LevelSet] {
        &self.bits
    }

    /// Re-checks the per-sample identities; returns the first offending index.
    pub fn check_decomposition(&self) -> Result<()> {
        for i in 0..self.len() {
            let (y, n, z) = (self.eta[i], self.xi[i], self.zeta[i]);
            let ok = n as f64 == y.floor()
                && z == y - y.floor()
                && (0.0..1.0).contains(&z)
                && self.bits[i].photons() == n;
            if !ok {
                return invalid(format!("sample {i} violates the decomposition (eta = {y}, xi = {n}, zeta = {z})"));
            }
        }
        Ok(())
    }

    /// Concatenates batches in order.
    pub fn concat(parts: Vec<SampleBatch>) -> Self {
        let mut out = Self { eta: vec![], xi: vec![], zeta: vec![], bits: vec![] };
        for p in parts {
            out.eta.extend(p.eta);
            out.xi.extend(p.xi);
            out.zeta.extend(p.zeta);
            out.bits.extend(p.bits);
        }
        out
    }

    /// CSV with header `eta,xi,zeta,bits`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["eta", "xi", "zeta", "bits"])?;
        for i in 0..self.len() {
            w.write_record([
                format_float(self.eta[i]),
                self.xi[i].to_string(),
                format_float(self.zeta[i]),
                self.bits[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fraction of samples whose photon number lies in `event`.
    pub fn event_frequency(&self, event: &EventExpr) -> f64 {
        let hits = self.xi.iter().filter(|&&n| event.contains(n)).count();
        hits as f64 / self.len().max(1) as f64
    }
}

fn sampling_beta(ctx: &ModeContext<f64>) -> Result<f64> {
    let beta = ctx.beta();
    if !beta.is_finite() {
        return invalid("sampling needs a finite beta (T > 0)");
    }
    Ok(beta)
}

/// `n` i.i.d. exponential energies with mean `1/β`, by inverse CDF.
fn draw_eta(n: usize, beta: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            -(-u).ln_1p() / beta
        })
        .collect()
}

/// Draws `n` Gauss energies from the substream `rng` and decomposes them.
pub fn sample_gauss(n: usize, ctx: &ModeContext<f64>, rng: RngSpec) -> Result<SampleBatch> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    let beta = sampling_beta(ctx)?;
    SampleBatch::from_eta(draw_eta(n, beta, &mut rng.generator()))
}

/// Like [`sample_gauss`], split over `workers` threads.
///
/// Worker `w` draws from stream `w` of `seed`; the first `n % workers`
/// workers take one extra sample. The result depends on `(n, seed, workers)`
/// only, never on scheduling.
pub fn sample_gauss_parallel(n: usize, ctx: &ModeContext<f64>, seed: u64, workers: usize) -> Result<SampleBatch> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    if workers == 0 {
        return invalid("worker count must be at least 1");
    }
    let beta = sampling_beta(ctx)?;
    let sizes: Vec<usize> = (0..workers).map(|w| n / workers + usize::from(w < n % workers)).collect();
    let chunks: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(w, &size)| {
                scope.spawn(move || draw_eta(size, beta, &mut RngSpec { seed, stream: w as u64 }.generator()))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
    });
    SampleBatch::from_eta(chunks.concat())
}

/// Zero-mean, unit-variance summands for the amplitude superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseDistribution {
    /// Uniform on `[−√3, √3]`.
    Uniform,
    /// `±1` with equal probability.
    Rademacher,
    /// Triangular on `[−√6, √6]`, as `(U₁ + U₂ − 1)·√6`.
    Triangular,
}

impl BaseDistribution {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::Triangular => (rng.random::<f64>() + rng.random::<f64>() - 1.0) * 6f64.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Rademacher => "rademacher",
            Self::Triangular => "triangular",
        }
    }
}

impl FromStr for BaseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "rademacher" => Ok(Self::Rademacher),
            "triangular" => Ok(Self::Triangular),
            other => invalid(format!("unknown base distribution '{other}' (expected uniform, rademacher or triangular)")),
        }
    }
}

/// Quadrature amplitudes of one mode and their phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub a_c: f64,
    pub a_s: f64,
    /// `arg(a_c + i a_s)` in `[0, 2π)`.
    pub theta: f64,
}

impl AmplitudePair {
    pub fn new(a_c: f64, a_s: f64) -> Self {
        let mut theta = a_s.atan2(a_c);
        if theta < 0.0 {
            theta += std::f64::consts::TAU;
        }
        if theta >= std::f64::consts::TAU {
            theta = 0.0;
        }
        Self { a_c, a_s, theta }
    }

    /// `(a_c² + a_s²)/2`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.a_c * self.a_c + self.a_s * self.a_s)
    }
}

/// `n_samples` amplitude pairs, each component `(x₁ + … + x_N)/√N`.
pub fn clt_superpose(n_terms: usize, n_samples: usize, base: BaseDistribution, rng: RngSpec) -> Result<Vec<AmplitudePair>> {
    if n_terms == 0 {
        return invalid("superposition needs at least one term");
    }
    let mut gen = rng.generator();
    let norm = (n_terms as f64).sqrt();
    let component = |gen: &mut ChaCha8Rng| (0..n_terms).map(|_| base.draw(gen)).sum::<f64>() / norm;
    Ok((0..n_samples)
        .map(|_| {
            let a_c = component(&mut gen);
            let a_s = component(&mut gen);
            AmplitudePair::new(a_c, a_s)
        })
        .collect())
}

/// `(energy, phase)` per pair; unit-variance amplitudes give unit-mean energies.
pub fn amplitudes_to_energy(pairs: &[AmplitudePair]) -> Vec<(f64, f64)> {
    pairs.iter().map(|p| (p.energy(), p.theta)).collect()
}

/// One empirical moment against its closed form.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MomentCheck {
    pub name: String,
    pub empirical: f64,
    pub expected: f64,
    pub standard_error: f64,
    /// Allowed deviation in standard errors.
    pub sigmas: f64,
    pub within: bool,
}

impl MomentCheck {
    fn new(name: impl Into<String>, empirical: f64, expected: f64, standard_error: f64, sigmas: f64) -> Self {
        let within = (empirical - expected).abs() <= sigmas * standard_error;
        Self { name: name.into(), empirical, expected, standard_error, sigmas, within }
    }
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

/// Means of `η`, `ζ`, `ξ` and every `2^s u_s` (4 standard errors), and the
/// variance of `ξ` (5 standard errors). Standard errors come from the laws,
/// not from the batch.
pub fn moment_checks(batch: &SampleBatch, ctx: &ModeContext<f64>) -> Result<Vec<MomentCheck>> {
    use crate::laws::{binary_levels, binary_summary, dark_summary, gauss_summary, planck_summary};
    let n = batch.len();
    if n < 2 {
        return invalid("moment checks need at least two samples");
    }
    let rn = (n as f64).sqrt();
    let gauss = gauss_summary(ctx)?;
    let dark = dark_summary(ctx)?;
    let planck = planck_summary(ctx);
    let mut out = vec![
        MomentCheck::new("mean eta", mean(batch.eta.iter().copied(), n), gauss.mean, gauss.variance.sqrt() / rn, 4.0),
        MomentCheck::new("mean zeta", mean(batch.zeta.iter().copied(), n), dark.mean, dark.variance.sqrt() / rn, 4.0),
        MomentCheck::new(
            "mean xi",
            mean(batch.xi.iter().map(|&k| k as f64), n),
            planck.mean,
            planck.variance.sqrt() / rn,
            4.0,
        ),
    ];
    for s in binary_levels(ctx).into_iter().filter(|s| s.index() < 64) {
        let summary = binary_summary(s, ctx);
        let size: f64 = s.multiplet_size();
        let m = mean(batch.bits.iter().map(|b| if b.contains(s.index()) { size } else { 0.0 }), n);
        out.push(MomentCheck::new(
            format!("mean 2^{} u_{}", s.index(), s.index()),
            m,
            summary.mean,
            summary.variance.sqrt() / rn,
            4.0,
        ));
    }
    let m1 = mean(batch.xi.iter().map(|&k| k as f64), n);
    let m2 = mean(batch.xi.iter().map(|&k| (k as f64 - m1).powi(2)), n);
    // geometric law: μ₄ = 9v² + v, so Var(s²) ≈ (μ₄ − v²)/n
    let v = planck.variance;
    out.push(MomentCheck::new("variance xi", m2, v, ((8.0 * v * v + v) / n as f64).sqrt(), 5.0));
    Ok(out)
}
