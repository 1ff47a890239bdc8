//! Closed-form laws of the four random variables of a chaotic mode.
//!
//! * `η` (Gauss variable): exponential with rate `β`, the scaled mode energy.
//! * `ζ = {η}` (dark variable): truncated exponential on `[0, 1)`.
//! * `ξ = ⌊η⌋` (Planck variable): geometric, `P(ξ = n) = (1 − b)bⁿ`.
//! * `u_s` (binary photon): two-valued on `{0, 2^s}`, `ξ = Σ_s u_s`.
//!
//! Means are in units of `hν`, entropies in units of `k_B`.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::physconst::{ModeContext, PhysicalConstants};
use crate::scalar::{lit, pow2, Real};

/// Characteristic-function value `φ(t)`.
pub type ComplexValue<F> = Complex<F>;

/// Largest binary level the crate will construct.
pub const MAX_LEVEL: u32 = 64;

/// Truncation threshold: levels are kept until `b^(2^(s+1))` drops below this.
pub const TRUNCATION_EPS: f64 = 1e-30;

/// Mean, variance and entropy of a law.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LawSummary<F> {
    pub mean: F,
    pub variance: F,
    pub entropy: F,
}

/// Index `s` of a binary-photon level; the multiplet carries `2^s` quanta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryLevel(u32);

impl BinaryLevel {
    pub fn new(s: u32) -> Result<Self> {
        if s > MAX_LEVEL {
            return Err(Error::Capacity(format!("binary level {s} exceeds {MAX_LEVEL}")));
        }
        Ok(Self(s))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// `2^s` in the working scalar.
    pub fn multiplet_size<F: Real>(self) -> F {
        pow2(self.0)
    }
}

/// One of the four laws, for generic dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    Gauss,
    Dark,
    Planck,
    Binary(BinaryLevel),
}

impl Law {
    pub fn summary<F: Real>(self, ctx: &ModeContext<F>) -> Result<LawSummary<F>> {
        match self {
            Law::Gauss => gauss_summary(ctx),
            Law::Dark => dark_summary(ctx),
            Law::Planck => Ok(planck_summary(ctx)),
            Law::Binary(s) => Ok(binary_summary(s, ctx)),
        }
    }

    pub fn cf<F: Real>(self, t: F, ctx: &ModeContext<F>) -> ComplexValue<F> {
        match self {
            Law::Gauss => cf_gauss(t, ctx),
            Law::Dark => cf_dark(t, ctx),
            Law::Planck => cf_planck(t, ctx),
            Law::Binary(s) => cf_binary(t, s, ctx),
        }
    }

    pub fn name(self) -> String {
        match self {
            Law::Gauss => "gauss".into(),
            Law::Dark => "dark".into(),
            Law::Planck => "planck".into(),
            Law::Binary(s) => format!("binary_{}", s.index()),
        }
    }
}

/// Above this β, `1/(e^β − 1)` is replaced by its asymptote `e^(−β)`.
fn asymptotic_beta<F: Real>() -> F {
    F::max_value().ln() - lit(10.0)
}

fn require_positive_beta<F: Real>(ctx: &ModeContext<F>, what: &'static str) -> Result<F> {
    let beta = ctx.beta();
    if beta > F::zero() {
        Ok(beta)
    } else {
        Err(Error::Divergence(what))
    }
}

/// Mean occupation number `n̄ = 1/(e^β − 1)`.
///
/// For `β > 1` it is evaluated as `b/(1 − b)`; since the rounded `1 − b`
/// never exceeds 1, this keeps `n̄ ≥ b` exactly in floating point.
pub fn mean_occupation<F: Real>(ctx: &ModeContext<F>) -> F {
    let beta = ctx.beta();
    if beta.is_infinite() {
        F::zero()
    } else if beta > asymptotic_beta() {
        (-beta).exp()
    } else if beta > F::one() {
        ctx.b() / ctx.one_minus_b()
    } else {
        beta.exp_m1().recip()
    }
}

/// `b^(2^s)`, evaluated as `exp(−β·2^s)`.
pub fn level_ratio<F: Real>(s: BinaryLevel, ctx: &ModeContext<F>) -> F {
    if ctx.is_vacuum() {
        return F::zero();
    }
    (-ctx.beta() * s.multiplet_size::<F>()).exp()
}

/// Density of `η`: `βe^(−βy)`.
pub fn gauss_pdf<F: Real>(y: F, ctx: &ModeContext<F>) -> Result<F> {
    if !(y >= F::zero()) {
        return Err(domain("y", y, "[0, inf)"));
    }
    let beta = require_positive_beta(ctx, "gauss density")?;
    if beta.is_infinite() {
        return invalid("gauss density is a point mass at T = 0");
    }
    Ok(beta * (-beta * y).exp())
}

/// Mean `1/β`, variance `1/β²`, differential entropy `1 − ln β`.
pub fn gauss_summary<F: Real>(ctx: &ModeContext<F>) -> Result<LawSummary<F>> {
    let beta = require_positive_beta(ctx, "gauss mean energy")?;
    let mean = beta.recip();
    Ok(LawSummary {
        mean,
        variance: mean * mean,
        entropy: F::one() - beta.ln(),
    })
}

/// Density of `ζ`: `βe^(−βz)/(1 − e^(−β))` on `[0, 1)`.
pub fn dark_pdf<F: Real>(z: F, ctx: &ModeContext<F>) -> Result<F> {
    if !(z >= F::zero() && z < F::one()) {
        return Err(domain("z", z, "[0, 1)"));
    }
    let beta = require_positive_beta(ctx, "dark density")?;
    if beta.is_infinite() {
        return invalid("dark density is a point mass at T = 0");
    }
    Ok(beta * (-beta * z).exp() / ctx.one_minus_b())
}

/// Cumulative distribution of `ζ`: `(1 − e^(−βz))/(1 − e^(−β))`.
pub fn dark_cdf<F: Real>(z: F, ctx: &ModeContext<F>) -> F {
    if z <= F::zero() {
        F::zero()
    } else if z >= F::one() || ctx.is_vacuum() {
        F::one()
    } else {
        (-ctx.beta() * z).exp_m1() / (-ctx.beta()).exp_m1()
    }
}

/// Mean `1/β − n̄`, variance `1/β² − n̄(1 + n̄)`, entropy `S_η − S_ξ`.
///
/// The variance is that of the truncated exponential; the entropy comes
/// from the closed difference (see [`dark_entropy_quadrature`] for the
/// direct integral).
pub fn dark_summary<F: Real>(ctx: &ModeContext<F>) -> Result<LawSummary<F>> {
    let gauss = gauss_summary(ctx)?;
    let planck = planck_summary(ctx);
    Ok(LawSummary {
        mean: gauss.mean - planck.mean,
        variance: gauss.variance - planck.variance,
        entropy: gauss.entropy - planck.entropy,
    })
}

/// `−∫₀¹ f_ζ ln f_ζ` by composite Simpson with `intervals` (even) panels.
///
/// Integrates in `x = βz`, where the law is `e⁻ˣ/(1 − b)` on `[0, β)` and
/// `S_ζ = H(x) − ln β`. The range is cut at `x = 64`; the omitted tail is
/// below `65 e⁻⁶⁴`.
pub fn dark_entropy_quadrature<F: Real>(ctx: &ModeContext<F>, intervals: usize) -> Result<F> {
    let beta = require_positive_beta(ctx, "dark entropy")?;
    if beta.is_infinite() {
        return invalid("dark entropy is -inf at T = 0");
    }
    let one_minus_b = ctx.one_minus_b();
    let log_norm = -one_minus_b.ln();
    let integrand = |x: F| {
        let log_p = log_norm - x;
        -log_p.exp() * log_p
    };
    let upper = beta.min(lit(64.0));
    Ok(simpson(integrand, F::zero(), upper, intervals)? - beta.ln())
}

pub(crate) fn simpson<F: Real>(f: impl Fn(F) -> F, a: F, b: F, intervals: usize) -> Result<F> {
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return invalid(format!("Simpson needs an even panel count >= 2, got {intervals}"));
    }
    let n = F::from_usize(intervals).unwrap();
    let h = (b - a) / n;
    let (two, four) = (lit::<F>(2.0), lit::<F>(4.0));
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let x = a + h * F::from_usize(i).unwrap();
        acc = acc + if i % 2 == 1 { four } else { two } * f(x);
    }
    Ok(acc * h / lit(3.0))
}

/// Planck-Bose mass `(1 − b)bⁿ`.
pub fn planck_pmf<F: Real>(n: u64, ctx: &ModeContext<F>) -> F {
    let b = ctx.b();
    let bn = if n <= i32::MAX as u64 {
        b.powi(n as i32)
    } else {
        (-ctx.beta() * F::from_u64(n).unwrap()).exp()
    };
    ctx.one_minus_b() * bn
}

/// Mean `n̄`, variance `n̄ + n̄²`, entropy `(1+n̄)ln(1+n̄) − n̄ ln n̄`.
///
/// The entropy is evaluated in the equivalent form `−ln(1 − b) + β n̄`.
pub fn planck_summary<F: Real>(ctx: &ModeContext<F>) -> LawSummary<F> {
    let nbar = mean_occupation(ctx);
    let entropy = if ctx.b() == F::zero() {
        F::zero()
    } else {
        -ctx.one_minus_b().ln() + ctx.beta() * nbar
    };
    LawSummary {
        mean: nbar,
        variance: nbar + nbar * nbar,
        entropy,
    }
}

/// `(P(u_s = 0), P(u_s = 2^s))`.
pub fn binary_pmf<F: Real>(s: BinaryLevel, ctx: &ModeContext<F>) -> (F, F) {
    let x = level_ratio(s, ctx);
    let denom = F::one() + x;
    (denom.recip(), x / denom)
}

/// Mean `2^s p₁`, variance `(2^s)² p₀ p₁`, binary entropy.
pub fn binary_summary<F: Real>(s: BinaryLevel, ctx: &ModeContext<F>) -> LawSummary<F> {
    let n: F = s.multiplet_size();
    let x = level_ratio(s, ctx);
    let (p0, p1) = binary_pmf(s, ctx);
    let entropy = if x == F::zero() {
        F::zero()
    } else {
        // -[p0 ln p0 + p1 ln p1] with ln p1 = -nβ - ln(1+x)
        x.ln_1p() + p1 * n * ctx.beta()
    };
    LawSummary {
        mean: n * p1,
        variance: n * n * p0 * p1,
        entropy,
    }
}

/// `(1 − it/β)⁻¹`.
pub fn cf_gauss<F: Real>(t: F, ctx: &ModeContext<F>) -> ComplexValue<F> {
    if ctx.is_vacuum() {
        return Complex::new(F::one(), F::zero());
    }
    Complex::new(F::one(), -t / ctx.beta()).inv()
}

/// `(1 − it/β)⁻¹ (1 − b e^{it}) / (1 − b)`.
pub fn cf_dark<F: Real>(t: F, ctx: &ModeContext<F>) -> ComplexValue<F> {
    if ctx.is_vacuum() {
        return Complex::new(F::one(), F::zero());
    }
    cf_gauss(t, ctx) * (one_minus_b_phase(t, ctx) / ctx.one_minus_b())
}

/// `(1 − b)/(1 − b e^{it})`.
pub fn cf_planck<F: Real>(t: F, ctx: &ModeContext<F>) -> ComplexValue<F> {
    let om = ctx.one_minus_b();
    let z = one_minus_b_phase(t, ctx);
    let d = z.norm_sqr();
    Complex::new(om * z.re / d, -om * z.im / d)
}

/// `1 − b e^{it}` with the real part written as `(1 − b) + 2b sin²(t/2)`,
/// which stays accurate when `b → 1` and `t → 0`.
fn one_minus_b_phase<F: Real>(t: F, ctx: &ModeContext<F>) -> ComplexValue<F> {
    let b = ctx.b();
    let half_sin = (t / lit(2.0)).sin();
    Complex::new(
        ctx.one_minus_b() + lit::<F>(2.0) * b * half_sin * half_sin,
        -b * t.sin(),
    )
}

/// `(1 + bⁿ e^{int})/(1 + bⁿ)` with `n = 2^s`.
pub fn cf_binary<F: Real>(t: F, s: BinaryLevel, ctx: &ModeContext<F>) -> ComplexValue<F> {
    let x = level_ratio(s, ctx);
    let one = Complex::new(F::one(), F::zero());
    if x == F::zero() {
        return one;
    }
    let n: F = s.multiplet_size();
    (one + Complex::from_polar(x, n * t)) / (F::one() + x)
}

/// `max_t |φ_η(t) − φ_ξ(t)φ_ζ(t)|` over the grid.
pub fn cf_factorization_residual<F: Real>(t_grid: &[F], ctx: &ModeContext<F>) -> F {
    t_grid
        .iter()
        .map(|&t| (cf_gauss(t, ctx) - cf_planck(t, ctx) * cf_dark(t, ctx)).norm())
        .fold(F::zero(), F::max)
}

/// `max_t |φ_ξ(t) − Π_{s≤S} φ_{u_s}(t)|` over the grid.
pub fn cf_product_truncation_residual<F: Real>(
    t_grid: &[F],
    truncation: u32,
    ctx: &ModeContext<F>,
) -> Result<F> {
    let levels = (0..=truncation)
        .map(BinaryLevel::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let product = levels
                .iter()
                .fold(Complex::new(F::one(), F::zero()), |acc, &s| acc * cf_binary(t, s, ctx));
            (cf_planck(t, ctx) - product).norm()
        })
        .fold(F::zero(), F::max))
}

/// Analytic bound `2c/(1 − c)`, `c = b^(2^(S+1))`, on the truncation residual.
pub fn truncation_bound<F: Real>(truncation: u32, ctx: &ModeContext<F>) -> Result<F> {
    let c = level_ratio(BinaryLevel::new(truncation + 1)?, ctx);
    Ok(lit::<F>(2.0) * c / (F::one() - c))
}

/// Smallest `s` with `b^(2^(s+1)) < 1e-30`, capped at [`MAX_LEVEL`].
pub fn truncation_level<F: Real>(ctx: &ModeContext<F>) -> u32 {
    if ctx.is_vacuum() {
        return 0;
    }
    // b^(2^(s+1)) < eps  <=>  β·2^(s+1) > -ln eps
    let target = -lit::<F>(TRUNCATION_EPS).ln();
    (0..MAX_LEVEL)
        .find(|&s| ctx.beta() * pow2::<F>(s + 1) > target)
        .unwrap_or(MAX_LEVEL)
}

/// Levels `0..=truncation_level(ctx)`.
pub fn binary_levels<F: Real>(ctx: &ModeContext<F>) -> Vec<BinaryLevel> {
    (0..=truncation_level(ctx)).map(BinaryLevel).collect()
}

/// Equipartition mean energy `U′ = kT`, in units of `hν` (`1/β`).
pub fn mean_energy_classical<F: Real>(ctx: &ModeContext<F>) -> Result<F> {
    finite_temperature(ctx)?;
    Ok(ctx.beta().recip())
}

/// Mean energy over the sub-quantum range `0 < E < hν`:
/// `U″ = kT − hν/(e^β − 1)`, in units of `hν`.
pub fn mean_energy_sub_eps0<F: Real>(ctx: &ModeContext<F>) -> Result<F> {
    finite_temperature(ctx)?;
    Ok(ctx.beta().recip() - mean_occupation(ctx))
}

/// Mean energy with the sub-quantum range cut out but the full normalization
/// kept: `Ũ = (kT + hν)e^(−β)`, in units of `hν`.
pub fn mean_energy_schweikert<F: Real>(ctx: &ModeContext<F>) -> Result<F> {
    finite_temperature(ctx)?;
    Ok((ctx.beta().recip() + F::one()) * ctx.b())
}

/// Discretized Boltzmann mean `Σ n bⁿ / Σ bⁿ` over the first `terms` levels,
/// in units of `hν`. Converges to `n̄`.
pub fn mean_energy_discrete<F: Real>(ctx: &ModeContext<F>, terms: usize) -> Result<F> {
    if terms == 0 {
        return invalid("at least one term is required");
    }
    let b = ctx.b();
    let (mut num, mut den, mut w) = (F::zero(), F::zero(), F::one());
    for n in 0..terms {
        num = num + F::from_usize(n).unwrap() * w;
        den = den + w;
        w = w * b;
    }
    Ok(num / den)
}

fn finite_temperature<F: Real>(ctx: &ModeContext<F>) -> Result<()> {
    if ctx.is_vacuum() {
        Err(Error::Divergence("mean energy in units of kT at T = 0"))
    } else {
        Ok(())
    }
}

/// Entropy per mode `ln C(M, P) / M` of distributing `P` fermionic
/// excitations over `M` modes.
pub fn combinatorial_entropy<F: Real>(modes: u64, excitations: u64) -> Result<F> {
    if excitations == 0 || excitations >= modes {
        return invalid(format!(
            "excitation count must lie strictly between 0 and {modes}, got {excitations}"
        ));
    }
    use statrs::function::gamma::ln_gamma;
    let k = excitations.min(modes - excitations);
    let m = modes as f64;
    let ln_binom = if k <= 1000 {
        // ln C(M, k) = Σ_{i=1..k} ln((M − k + i)/i)
        (1..=k).map(|i| ((modes - k + i) as f64 / i as f64).ln()).sum()
    } else {
        let p = excitations as f64;
        ln_gamma(m + 1.0) - ln_gamma(p + 1.0) - ln_gamma(m - p + 1.0)
    };
    Ok(lit(ln_binom / m))
}

/// `T · (dS/dT)/(dE/dT)` by central differences with step `1e-4·T`, where
/// `E = hν·mean` and `S = k_B·entropy`. Equals 1 for every law.
pub fn temperature_consistency<F: Real>(
    law: Law,
    ctx: &ModeContext<F>,
    constants: &PhysicalConstants<F>,
) -> Result<F> {
    let (temp, e0) = match (ctx.temperature(), ctx.epsilon0()) {
        (Some(t), Some(e0)) if t > F::zero() => (t, e0),
        _ => return invalid("temperature consistency needs a physical context with T > 0"),
    };
    let step = lit::<F>(1e-4) * temp;
    let hi = law.summary(&ctx.with_temperature(temp + step, constants)?)?;
    let lo = law.summary(&ctx.with_temperature(temp - step, constants)?)?;
    let d_entropy = constants.k_b * (hi.entropy - lo.entropy);
    let d_energy = e0 * (hi.mean - lo.mean);
    Ok(temp * d_entropy / d_energy)
}

fn domain<F: Real>(what: &'static str, value: F, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value: value.to_f64().unwrap_or(f64::NAN),
        domain,
    }
}
