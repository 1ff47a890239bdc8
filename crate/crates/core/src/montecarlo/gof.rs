//! Kolmogorov-Smirnov and Pearson chi-square checks at the fixed level α = 0.01.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};
use crate::laws::{binary_pmf, dark_cdf, planck_pmf, BinaryLevel};
use crate::physconst::ModeContext;

use super::SampleBatch;

/// Test level shared by every check.
pub const ALPHA: f64 = 0.01;

/// Asymptotic KS critical value `c(α)` at α = 0.01; threshold is `c/√n`.
pub const KS_CRITICAL: f64 = 1.628;

pub const KS_MIN_SAMPLES: usize = 100;
pub const CHI2_MIN_SAMPLES: usize = 10_000;

/// Smallest expected count per chi-square cell.
pub const CHI2_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub threshold: f64,
    pub n: usize,
    /// `statistic > threshold`.
    pub rejected: bool,
}

impl GofReport {
    pub fn new(statistic: f64, threshold: f64, n: usize) -> Self {
        Self { statistic, threshold, n, rejected: statistic > threshold }
    }
}

/// Continuous reference distributions for [`ks_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceLaw {
    /// Exponential with rate `β`.
    Gauss(ModeContext<f64>),
    /// Exponential truncated to `[0, 1)`.
    Dark(ModeContext<f64>),
    StandardNormal,
    /// Uniform on `[0, 1)`.
    Uniform,
    /// Uniform on `[0, 2π)`.
    Phase,
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Gauss(ctx) => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-ctx.beta() * x).exp_m1()
                }
            }
            Self::Dark(ctx) => dark_cdf(x, ctx),
            Self::StandardNormal => 0.5 * erfc(-x / std::f64::consts::SQRT_2),
            Self::Uniform => x.clamp(0.0, 1.0),
            Self::Phase => (x / std::f64::consts::TAU).clamp(0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Gauss(ctx) | Self::Dark(ctx) if ctx.is_vacuum() => {
                invalid("reference law is a point mass at T = 0")
            }
            _ => Ok(()),
        }
    }
}

/// One-sample KS test; the input need not be sorted.
pub fn ks_test(samples: &[f64], law: &ReferenceLaw) -> Result<GofReport> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return invalid(format!("KS test needs at least {KS_MIN_SAMPLES} samples, got {n}"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return invalid("KS input contains NaN");
    }
    law.validate()?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = law.cdf(x);
        d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
    });
    Ok(GofReport::new(d, KS_CRITICAL / nf.sqrt(), n))
}

/// Upper `1 − α` quantile of chi-square with `dof` degrees of freedom.
pub fn chi2_threshold(dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Binning(e.to_string()))?;
    Ok(dist.inverse_cdf(1.0 - ALPHA))
}

/// Pearson goodness of fit of photon counts against `(1 − b)bⁿ`.
///
/// Cells are `0, 1, …, K−1` and the pooled tail `n ≥ K`, with `K` the largest
/// value keeping every expected count at least 5. Degrees of freedom: `K`.
pub fn chi2_planck_test(xi: &[u64], ctx: &ModeContext<f64>) -> Result<GofReport> {
    let n = xi.len();
    if n < CHI2_MIN_SAMPLES {
        return invalid(format!("chi-square test needs at least {CHI2_MIN_SAMPLES} samples, got {n}"));
    }
    if xi.iter().all(|&k| k == 0) && ctx.b() > 0.5 {
        return Err(Error::Binning(format!(
            "all {n} counts are zero although b = {:e} > 0.5; input looks miscalibrated",
            ctx.b()
        )));
    }
    let nf = n as f64;
    // expected cell k is n(1-b)b^k, tail beyond K-1 is n b^K; both decrease in K
    let mut k_cells = 0usize;
    while nf * planck_pmf(k_cells as u64, ctx) >= CHI2_MIN_EXPECTED
        && nf * tail_mass(k_cells as u64 + 1, ctx) >= CHI2_MIN_EXPECTED
    {
        k_cells += 1;
    }
    if k_cells == 0 {
        return Err(Error::Binning(format!(
            "no binning of {n} samples keeps expected counts >= {CHI2_MIN_EXPECTED} at b = {:e}",
            ctx.b()
        )));
    }
    let mut observed = vec![0u64; k_cells + 1];
    for &k in xi {
        observed[(k as usize).min(k_cells)] += 1;
    }
    let statistic = observed
        .iter()
        .enumerate()
        .map(|(k, &o)| {
            let e = if k < k_cells { nf * planck_pmf(k as u64, ctx) } else { nf * tail_mass(k as u64, ctx) };
            (o as f64 - e).powi(2) / e
        })
        .sum();
    Ok(GofReport::new(statistic, chi2_threshold(k_cells)?, n))
}

/// `P(ξ ≥ k) = b^k`.
fn tail_mass(k: u64, ctx: &ModeContext<f64>) -> f64 {
    if ctx.is_vacuum() {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-ctx.beta() * k as f64).exp()
}

/// Occupancy frequency of one level against `P(A_s)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BitFrequency {
    pub level: u32,
    pub observed: f64,
    pub expected: f64,
    /// `4√(p(1 − p)/n)`.
    pub band: f64,
    pub within: bool,
}

/// Empirical `P(A_s)` for `s ≤ max_level`.
pub fn bit_frequencies(batch: &SampleBatch, ctx: &ModeContext<f64>, max_level: u32) -> Result<Vec<BitFrequency>> {
    if batch.is_empty() {
        return invalid("empty batch");
    }
    let nf = batch.len() as f64;
    (0..=max_level)
        .map(|s| {
            let (_, p) = binary_pmf(BinaryLevel::new(s)?, ctx);
            let observed = batch.bits().iter().filter(|b| b.contains(s)).count() as f64 / nf;
            let band = 4.0 * (p * (1.0 - p) / nf).sqrt();
            Ok(BitFrequency { level: s, observed, expected: p, band, within: (observed - p).abs() <= band })
        })
        .collect()
}

/// Pearson statistic of phases over `bins` equal cells of `[0, 2π)`, uniform null.
pub fn chi2_uniform_phase(phases: &[f64], bins: usize) -> Result<GofReport> {
    let n = phases.len();
    if bins < 2 {
        return invalid("phase test needs at least two bins");
    }
    let expected = n as f64 / bins as f64;
    if expected < CHI2_MIN_EXPECTED {
        return Err(Error::Binning(format!("{n} phases over {bins} bins leave fewer than {CHI2_MIN_EXPECTED} per bin")));
    }
    let mut counts = vec![0u64; bins];
    for &th in phases {
        if !(0.0..std::f64::consts::TAU).contains(&th) {
            return invalid(format!("phase {th} outside [0, 2π)"));
        }
        let k = ((th / std::f64::consts::TAU) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let statistic = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    Ok(GofReport::new(statistic, chi2_threshold(bins - 1)?, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{amplitudes_to_energy, clt_superpose, sample_gauss, BaseDistribution, RngSpec};

    fn ctx(beta: f64) -> ModeContext<f64> {
        ModeContext::from_beta(beta).unwrap()
    }

    #[test]
    fn chi2_quantiles() {
        // upper 1% points of chi-square, standard tables
        assert!((chi2_threshold(1).unwrap() - 6.634_896_601).abs() < 1e-6);
        assert!((chi2_threshold(10).unwrap() - 23.209_251_159).abs() < 1e-6);
        assert!((chi2_threshold(35).unwrap() - 57.342_073_433).abs() < 1e-6);
    }

    #[test]
    fn ks_accepts_own_law() {
        let c = ctx(0.8);
        let batch = sample_gauss(20_000, &c, RngSpec::new(17)).unwrap();
        assert!(!ks_test(batch.eta(), &ReferenceLaw::Gauss(c)).unwrap().rejected);
        assert!(!ks_test(batch.zeta(), &ReferenceLaw::Dark(c)).unwrap().rejected);
    }

    #[test]
    fn ks_rejects_uniform_as_exponential() {
        let mut rng = RngSpec::new(4).generator();
        let xs: Vec<f64> = (0..10_000).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let r = ks_test(&xs, &ReferenceLaw::Gauss(ctx(1.0))).unwrap();
        assert!(r.rejected);
        // sup |x − (1 − e^−x)| on [0,1] is e^−1
        assert!((r.statistic - (-1f64).exp()).abs() < 0.02, "{}", r.statistic);
        assert!(!ks_test(&xs, &ReferenceLaw::Uniform).unwrap().rejected);
    }

    #[test]
    fn ks_preconditions() {
        assert!(ks_test(&[0.5; 99], &ReferenceLaw::Uniform).is_err());
        let mut xs = vec![0.5; 100];
        xs[3] = f64::NAN;
        assert!(ks_test(&xs, &ReferenceLaw::Uniform).is_err());
        let vac = ModeContext::from_ratio(0.0).unwrap();
        assert!(ks_test(&[0.0; 100], &ReferenceLaw::Gauss(vac)).is_err());
    }

    #[test]
    fn ks_statistic_exact_small_case() {
        // points at (i + 0.5)/n against U(0,1) give D = 0.5/n
        let xs: Vec<f64> = (0..200).rev().map(|i| (i as f64 + 0.5) / 200.0).collect();
        let r = ks_test(&xs, &ReferenceLaw::Uniform).unwrap();
        assert!((r.statistic - 0.0025).abs() < 1e-15);
        assert!((r.threshold - 1.628 / 200f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planck_counts() {
        let c = ctx(std::f64::consts::LN_2);
        let batch = sample_gauss(1_000_000, &c, RngSpec::new(99)).unwrap();
        let r = chi2_planck_test(batch.xi(), &c).unwrap();
        assert!(!r.rejected, "{r:?}");
        assert!(chi2_planck_test(&vec![0; 1_000_000], &c).unwrap().rejected);
        for f in bit_frequencies(&batch, &c, 4).unwrap() {
            assert!(f.within, "{f:?}");
        }
    }

    #[test]
    fn planck_binning_errors() {
        assert!(chi2_planck_test(&[0; 9_999], &ctx(1.0)).is_err());
        let hot = ctx(0.1);
        assert!(matches!(chi2_planck_test(&vec![0; 10_000], &hot), Err(Error::Binning(_))));
        let vac = ModeContext::from_ratio(0.0).unwrap();
        assert!(matches!(chi2_planck_test(&vec![0; 10_000], &vac), Err(Error::Binning(_))));
    }

    #[test]
    fn clt_pipeline_is_gaussian() {
        let pairs = clt_superpose(64, 100_000, BaseDistribution::Uniform, RngSpec::new(8)).unwrap();
        let a_c: Vec<f64> = pairs.iter().map(|p| p.a_c).collect();
        assert!(!ks_test(&a_c, &ReferenceLaw::StandardNormal).unwrap().rejected);
        let (energy, phase): (Vec<f64>, Vec<f64>) = amplitudes_to_energy(&pairs).into_iter().unzip();
        assert!(!ks_test(&energy, &ReferenceLaw::Gauss(ctx(1.0))).unwrap().rejected);
        assert!(!chi2_uniform_phase(&phase, 36).unwrap().rejected);
        assert!(!ks_test(&phase, &ReferenceLaw::Phase).unwrap().rejected);
    }
}
