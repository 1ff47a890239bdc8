//! Empirical independence of the dark part, the Planck part and the binary photons.

use crate::error::{invalid, Result};

use super::SampleBatch;

/// Highest binary level included in the pairwise checks.
pub const MAX_CHECKED_LEVEL: u32 = 4;

pub const MIN_SAMPLES: usize = 10_000;

/// Bins used to discretize `ζ` and `ξ` for the mutual-information estimate.
const MI_BINS: usize = 10;

/// Correlation and plug-in mutual information (nats) of one pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairEstimate {
    pub label: String,
    /// `None` when either variable is constant in the batch.
    pub correlation: Option<f64>,
    pub mutual_information: f64,
    /// `|corr| ≥ band`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    /// Acceptance band `4/√n` on `|corr|`.
    pub band: f64,
    /// `(ζ, ξ)` first, then bit pairs `(s, s′)`, `s < s′ ≤ 4`.
    pub pairs: Vec<PairEstimate>,
}

impl IndependenceReport {
    /// Some pair has an undefined correlation (a constant variable).
    pub fn degenerate(&self) -> bool {
        self.pairs.iter().any(|p| p.correlation.is_none())
    }

    pub fn flagged(&self) -> bool {
        self.pairs.iter().any(|p| p.flagged)
    }

    pub fn max_abs_correlation(&self) -> Option<f64> {
        self.pairs.iter().filter_map(|p| p.correlation).map(f64::abs).reduce(f64::max)
    }
}

fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Plug-in `Σ p(a,b) ln(p(a,b)/(p(a)p(b)))` over discrete labels `< k`.
fn mutual_information(x: &[usize], y: &[usize], k: usize) -> f64 {
    let n = x.len() as f64;
    let mut joint = vec![0u64; k * k];
    for (&a, &b) in x.iter().zip(y) {
        joint[a * k + b] += 1;
    }
    let px: Vec<u64> = (0..k).map(|a| (0..k).map(|b| joint[a * k + b]).sum()).collect();
    let py: Vec<u64> = (0..k).map(|b| (0..k).map(|a| joint[a * k + b]).sum()).collect();
    let mut mi = 0.0;
    for a in 0..k {
        for b in 0..k {
            let c = joint[a * k + b];
            if c > 0 {
                mi += c as f64 / n * (c as f64 * n / (px[a] as f64 * py[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

fn estimate(label: String, x: &[f64], y: &[f64], lx: &[usize], ly: &[usize], k: usize, band: f64) -> PairEstimate {
    let correlation = correlation(x, y);
    PairEstimate {
        label,
        correlation,
        mutual_information: mutual_information(lx, ly, k),
        flagged: correlation.is_some_and(|r| r.abs() >= band),
    }
}

/// Pairwise correlation and mutual information of `(ζ, ξ)` and of the bits
/// `(u_s, u_s′)`, `s ≠ s′ ≤ 4`.
pub fn empirical_independence(batch: &SampleBatch) -> Result<IndependenceReport> {
    let n = batch.len();
    if n < MIN_SAMPLES {
        return invalid(format!("independence check needs at least {MIN_SAMPLES} samples, got {n}"));
    }
    let band = 4.0 / (n as f64).sqrt();
    let zeta = batch.zeta();
    let xi: Vec<f64> = batch.xi().iter().map(|&k| k as f64).collect();
    let zeta_bin: Vec<usize> = zeta.iter().map(|z| ((z * MI_BINS as f64) as usize).min(MI_BINS - 1)).collect();
    let xi_bin: Vec<usize> = batch.xi().iter().map(|&k| (k as usize).min(MI_BINS - 1)).collect();
    let mut pairs = vec![estimate("zeta,xi".into(), zeta, &xi, &zeta_bin, &xi_bin, MI_BINS, band)];

    let bit = |s: u32| -> Vec<usize> { batch.bits().iter().map(|b| usize::from(b.contains(s))).collect() };
    let bits: Vec<Vec<usize>> = (0..=MAX_CHECKED_LEVEL).map(bit).collect();
    let bits_f: Vec<Vec<f64>> = bits.iter().map(|v| v.iter().map(|&u| u as f64).collect()).collect();
    for s in 0..bits.len() {
        for t in s + 1..bits.len() {
            pairs.push(estimate(format!("bit{s},bit{t}"), &bits_f[s], &bits_f[t], &bits[s], &bits[t], 2, band));
        }
    }
    Ok(IndependenceReport { n, band, pairs })
}
