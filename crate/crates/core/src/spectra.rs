//! Radiation laws in cgs, energy fluctuations in a sub-volume, the Wien
//! peak and temperature fits to spectrum tables.
//!
//! Spectral energy densities are per unit volume and unit frequency
//! [erg·cm⁻³·Hz⁻¹]: the mode density `Z_ν = 8πν²/c³` times a mean energy per mode.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::io::format_float;
use crate::laws::{dark_summary, mean_occupation};
use crate::physconst::{mode_density, ModeContext, PhysicalConstants};
use crate::scalar::{lit, Real};

/// CSV header of spectrum tables.
pub const TABLE_HEADER: [&str; 2] = ["nu_hz", "u_erg_per_cm3_hz"];

/// Relative difference above which two variance forms count as inconsistent.
pub const CONSISTENCY_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralLaw {
    /// `Z_ν hν n̄`.
    Planck,
    /// `Z_ν kT`.
    RayleighJeans,
    /// `Z_ν hν e^(−β)`.
    Wien,
    /// `Z_ν (kT + hν) e^(−β)`.
    Schweikert,
}

impl SpectralLaw {
    pub const ALL: [SpectralLaw; 4] = [Self::Planck, Self::RayleighJeans, Self::Wien, Self::Schweikert];

    pub fn name(self) -> &'static str {
        match self {
            Self::Planck => "planck",
            Self::RayleighJeans => "rayleigh_jeans",
            Self::Wien => "wien",
            Self::Schweikert => "schweikert",
        }
    }
}

impl FromStr for SpectralLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "unknown spectral law '{s}' (expected planck, rayleigh_jeans, wien or schweikert)"
                ))
            })
    }
}

/// Spectral energy density `u(ν, T)` of `law`.
pub fn spectral_density<F: Real>(law: SpectralLaw, nu: F, temperature: F, constants: &PhysicalConstants<F>) -> Result<F> {
    if !(temperature > F::zero()) {
        return invalid(format!("temperature must be positive, got {temperature}"));
    }
    let ctx = ModeContext::new(nu, temperature, constants)?;
    let z = mode_density(nu, constants);
    let h_nu = constants.h * nu;
    let kt = constants.k_b * temperature;
    let boltzmann = (-ctx.beta()).exp();
    Ok(z * match law {
        SpectralLaw::Planck => h_nu * mean_occupation(&ctx),
        SpectralLaw::RayleighJeans => kt,
        SpectralLaw::Wien => h_nu * boltzmann,
        SpectralLaw::Schweikert => (kt + h_nu) * boltzmann,
    })
}

/// Positive root of `x = 3(1 − e^(−x))`, the peak of `x³/(eˣ − 1)`.
pub fn wien_peak_x<F: Real>() -> F {
    let three: F = lit(3.0);
    let mut x = three;
    for _ in 0..100 {
        let e = (-x).exp();
        let step = (x - three * (F::one() - e)) / (F::one() - three * e);
        x = x - step;
        if step.abs() <= F::epsilon() * x {
            break;
        }
    }
    x
}

/// Frequency of the Planck peak, `x* kT/h` [Hz].
pub fn peak_frequency<F: Real>(temperature: F, constants: &PhysicalConstants<F>) -> Result<F> {
    if !(temperature > F::zero()) {
        return invalid(format!("temperature must be positive, got {temperature}"));
    }
    Ok(wien_peak_x::<F>() * constants.k_b * temperature / constants.h)
}

/// A sub-volume and frequency band; `modes = V Z_ν dν` is kept real-valued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationParams<F> {
    pub modes: F,
    /// [cm³]
    pub volume: Option<F>,
    /// [Hz]
    pub nu: Option<F>,
    /// [Hz]
    pub dnu: Option<F>,
}

impl<F: Real> FluctuationParams<F> {
    pub fn new(volume: F, nu: F, dnu: F, constants: &PhysicalConstants<F>) -> Result<Self> {
        for (name, v) in [("volume", volume), ("nu", nu), ("dnu", dnu)] {
            if !(v > F::zero() && v.is_finite()) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self { modes: volume * mode_density(nu, constants) * dnu, volume: Some(volume), nu: Some(nu), dnu: Some(dnu) })
    }

    /// Bare mode count.
    pub fn from_modes(modes: F) -> Result<Self> {
        if !(modes > F::zero() && modes.is_finite()) {
            return invalid(format!("mode count must be positive and finite, got {modes}"));
        }
        Ok(Self { modes, volume: None, nu: None, dnu: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationLaw {
    Gauss,
    Planck,
    Dark,
}

impl FromStr for FluctuationLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" => Ok(Self::Gauss),
            "planck" => Ok(Self::Planck),
            "dark" => Ok(Self::Dark),
            other => invalid(format!("unknown fluctuation law '{other}' (expected gauss, planck or dark)")),
        }
    }
}

/// Total energy and its variance over `M` modes.
///
/// Energies are in erg for a physical context and in units of `hν` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FluctuationReport<F> {
    pub law: FluctuationLaw,
    pub mean_energy: F,
    /// Variance of the summed energy from the law itself.
    pub variance: F,
    /// Dark law only: `(2n̄ − 1)hνĒ + Ē²/M`, a second closed form that does
    /// not agree with the direct variance.
    pub variance_alt: Option<F>,
    /// Set when `variance_alt` differs from `variance` by more than [`CONSISTENCY_RTOL`].
    pub inconsistent: bool,
}

pub fn energy_fluctuation<F: Real>(
    law: FluctuationLaw,
    params: &FluctuationParams<F>,
    ctx: &ModeContext<F>,
) -> Result<FluctuationReport<F>> {
    let m = params.modes;
    if !(m > F::zero()) {
        return invalid(format!("mode count must be positive, got {m}"));
    }
    let quantum = ctx.epsilon0().unwrap_or(F::one());
    let report = |mean_energy, variance| FluctuationReport { law, mean_energy, variance, variance_alt: None, inconsistent: false };
    match law {
        FluctuationLaw::Gauss => {
            let mean = m * quantum / ctx.beta();
            Ok(report(mean, mean * mean / m))
        }
        FluctuationLaw::Planck => {
            let mean = m * quantum * mean_occupation(ctx);
            Ok(report(mean, quantum * mean + mean * mean / m))
        }
        FluctuationLaw::Dark => {
            let dark = dark_summary(ctx)?;
            let mean = m * quantum * dark.mean;
            let direct = m * quantum * quantum * dark.variance;
            let two: F = lit(2.0);
            let alt = (two * mean_occupation(ctx) - F::one()) * quantum * mean + mean * mean / m;
            let scale = direct.abs().max(alt.abs());
            let inconsistent = (direct - alt).abs() > lit::<F>(CONSISTENCY_RTOL) * scale;
            Ok(FluctuationReport { law, mean_energy: mean, variance: direct, variance_alt: Some(alt), inconsistent })
        }
    }
}

/// Rows `(ν [Hz], u [erg·cm⁻³·Hz⁻¹])` with optional provenance of synthetic tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    rows: Vec<(f64, f64)>,
    pub law: Option<SpectralLaw>,
    pub temperature: Option<f64>,
}

impl SpectrumTable {
    /// Validates `ν > 0` strictly increasing and finite `u ≥ 0`.
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(nu, u)) in rows.iter().enumerate() {
            if !(nu > 0.0 && nu.is_finite()) {
                return invalid(format!("row {i}: frequency must be positive and finite, got {nu}"));
            }
            if !(u >= 0.0 && u.is_finite()) {
                return invalid(format!("row {i}: spectral density must be non-negative and finite, got {u}"));
            }
            if i > 0 && !(rows[i - 1].0 < nu) {
                return invalid(format!("row {i}: frequencies must be strictly increasing"));
            }
        }
        Ok(Self { rows, law: None, temperature: None })
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TABLE_HEADER)?;
        for &(nu, u) in &self.rows {
            w.write_record([format_float(nu), format_float(u)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`SpectrumTable::write_csv`] (header required).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != TABLE_HEADER {
            return invalid(format!("expected header {}, got {}", TABLE_HEADER.join(","), header.join(",")));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<f64> {
                let s = rec.get(k).ok_or_else(|| Error::Validation(format!("row {i}: missing column {k}")))?;
                s.parse().map_err(|_| Error::Validation(format!("row {i}: cannot parse '{s}' as a number")))
            };
            rows.push((field(0)?, field(1)?));
        }
        Self::new(rows)
    }
}

/// `count` logarithmically spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
        return invalid(format!("need 0 < lo < hi and at least 2 points, got [{lo}, {hi}] with {count}"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    Ok(grid)
}

/// Evaluates `law` at temperature `temperature` over `nu_grid`.
pub fn synthesize_table(
    law: SpectralLaw,
    temperature: f64,
    nu_grid: &[f64],
    constants: &PhysicalConstants<f64>,
) -> Result<SpectrumTable> {
    let rows = nu_grid
        .iter()
        .map(|&nu| Ok((nu, spectral_density(law, nu, temperature, constants)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = SpectrumTable::new(rows)?;
    table.law = Some(law);
    table.temperature = Some(temperature);
    Ok(table)
}

/// Result of a one-parameter temperature fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TemperatureFit {
    pub law: SpectralLaw,
    #[serde(rename = "t_hat_kelvin")]
    pub t_hat: f64,
    /// `√Σ(u_model − u_i)²`.
    pub residual_l2: f64,
    pub n_rows: usize,
}

/// Points of the coarse scan that locates the basin before golden-section refinement.
const FIT_SCAN_POINTS: usize = 64;

/// Relative width in `T` at which refinement stops.
const FIT_RTOL: f64 = 1e-8;

/// Least-squares temperature by golden-section search inside `bracket`.
///
/// A coarse logarithmic scan picks the best interior grid point; a minimum at
/// either end of the bracket is a fit error.
pub fn fit_temperature(
    table: &SpectrumTable,
    law: SpectralLaw,
    bracket: (f64, f64),
    constants: &PhysicalConstants<f64>,
) -> Result<TemperatureFit> {
    let (lo, hi) = bracket;
    if table.len() < 3 {
        return invalid(format!("a fit needs at least 3 rows, got {}", table.len()));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return invalid(format!("temperature bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]"));
    }
    let scale = table.rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let sse = |t: f64| -> Result<f64> {
        table.rows.iter().try_fold(0.0, |acc, &(nu, u)| {
            let r = (spectral_density(law, nu, t, constants)? - u) / scale;
            Ok(acc + r * r)
        })
    };

    let grid = log_grid(lo, hi, FIT_SCAN_POINTS)?;
    let values = grid.iter().map(|&t| sse(t)).collect::<Result<Vec<_>>>()?;
    let best = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    if best == 0 || best == values.len() - 1 {
        return Err(Error::Fit(format!(
            "least-squares minimum sits at the bracket edge T = {} K; widen the bracket",
            grid[best]
        )));
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (sse(c)?, sse(d)?);
    while b - a > FIT_RTOL * 0.5 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sse(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sse(d)?;
        }
    }
    let t_hat = 0.5 * (a + b);
    Ok(TemperatureFit { law, t_hat, residual_l2: sse(t_hat)?.sqrt() * scale, n_rows: table.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{mean_energy_classical, mean_energy_sub_eps0};

    fn consts() -> PhysicalConstants<f64> {
        PhysicalConstants::default()
    }

    /// Frequency giving `β` at temperature `t`.
    fn nu_at(beta: f64, t: f64) -> f64 {
        let c = consts();
        beta * c.k_b * t / c.h
    }

    #[test]
    fn law_limits() {
        let c = consts();
        let t = 300.0;
        let nu = nu_at(std::f64::consts::LN_2, t);
        let u = spectral_density(SpectralLaw::Planck, nu, t, &c).unwrap();
        assert!((u / (mode_density(nu, &c) * c.h * nu) - 1.0).abs() < 1e-14);

        let nu = nu_at(1e-6, t);
        let p = spectral_density(SpectralLaw::Planck, nu, t, &c).unwrap();
        let rj = spectral_density(SpectralLaw::RayleighJeans, nu, t, &c).unwrap();
        assert!((p / rj - 1.0).abs() < 1e-6);

        let nu = nu_at(20.0, t);
        let p = spectral_density(SpectralLaw::Planck, nu, t, &c).unwrap();
        let w = spectral_density(SpectralLaw::Wien, nu, t, &c).unwrap();
        assert!((p / w - 1.0).abs() < 2.0 * (-20f64).exp());
    }

    #[test]
    fn schweikert_interpolates() {
        let (c, t) = (consts(), 50.0);
        let s = |beta| spectral_density(SpectralLaw::Schweikert, nu_at(beta, t), t, &c).unwrap();
        let rj = spectral_density(SpectralLaw::RayleighJeans, nu_at(1e-6, t), t, &c).unwrap();
        let w = spectral_density(SpectralLaw::Wien, nu_at(30.0, t), t, &c).unwrap();
        assert!((s(1e-6) / rj - 1.0).abs() < 1e-5);
        // ratio to Wien is 1 + 1/β, so the β = 30 check holds only to that order
        assert!((s(30.0) / w - 1.0 - 1.0 / 30.0).abs() < 1e-5);
    }

    #[test]
    fn ordering_and_scaling() {
        let c = consts();
        let t = 2.728;
        for nu in log_grid(1e9, 1e13, 200).unwrap() {
            let [p, rj, w, _] = SpectralLaw::ALL.map(|l| spectral_density(l, nu, t, &c).unwrap());
            assert!(w <= p && p <= rj, "nu = {nu}");
        }
        for law in SpectralLaw::ALL {
            for lambda in [2.0, 10.0] {
                let u = spectral_density(law, 1.3e11, t, &c).unwrap();
                let v = spectral_density(law, lambda * 1.3e11, lambda * t, &c).unwrap();
                assert!((v / (lambda.powi(3) * u) - 1.0).abs() < 1e-12, "{law:?} {lambda}");
            }
        }
    }

    #[test]
    fn planck_is_classical_minus_dark() {
        let c = consts();
        for (nu, t) in [(1e11, 2.728), (5e13, 300.0), (1e9, 1000.0)] {
            let ctx = ModeContext::new(nu, t, &c).unwrap();
            let h_nu = c.h * nu;
            let gap = mean_energy_classical(&ctx).unwrap() - mean_energy_sub_eps0(&ctx).unwrap();
            let u = mode_density(nu, &c) * h_nu * gap;
            let p = spectral_density(SpectralLaw::Planck, nu, t, &c).unwrap();
            assert!((u / p - 1.0).abs() < 1e-13, "{nu} {t}");
        }
    }

    #[test]
    fn density_rejects_bad_input() {
        let c = consts();
        assert!(spectral_density(SpectralLaw::Planck, 1e11, 0.0, &c).is_err());
        assert!(spectral_density(SpectralLaw::Planck, 1e11, -1.0, &c).is_err());
        assert!(spectral_density(SpectralLaw::Planck, 0.0, 1.0, &c).is_err());
        assert!("jeans".parse::<SpectralLaw>().is_err());
        assert_eq!("rayleigh-jeans".parse::<SpectralLaw>().unwrap(), SpectralLaw::RayleighJeans);
    }

    #[test]
    fn wien_peak() {
        // bisection oracle on [2, 3]
        let g = |x: f64| x - 3.0 * (1.0 - (-x).exp());
        let (mut a, mut b) = (2.0_f64, 3.0_f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a) * g(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        let x: f64 = wien_peak_x();
        assert!((x - a).abs() < 1e-12);
        assert!((x - 2.821_439_372_122_079).abs() < 1e-12);
        assert!(g(x).abs() < 1e-12);
        let nu = peak_frequency(2.728, &consts()).unwrap();
        assert!((nu / 1.6038e11 - 1.0).abs() < 1e-4, "{nu}");
        assert!((wien_peak_x::<f32>() - 2.821_439).abs() < 1e-5);
    }

    #[test]
    fn fluctuation_examples() {
        let half = ModeContext::from_ratio(0.5_f64).unwrap();
        let p = energy_fluctuation(FluctuationLaw::Planck, &FluctuationParams::from_modes(100.0).unwrap(), &half).unwrap();
        assert!((p.variance - 200.0).abs() < 1e-12);
        assert!((p.mean_energy - 100.0).abs() < 1e-12);

        let one = FluctuationParams::from_modes(1.0).unwrap();
        let g = energy_fluctuation(FluctuationLaw::Gauss, &one, &half).unwrap();
        assert!((g.variance - g.mean_energy.powi(2)).abs() < 1e-15);

        let d = energy_fluctuation(FluctuationLaw::Dark, &one, &half).unwrap();
        assert!((d.variance - 0.081_368_981_0).abs() < 1e-10);
        assert!((d.variance_alt.unwrap() - 0.638_673_940_116_64).abs() < 1e-12);
        assert!(d.inconsistent);
        assert!(g.variance_alt.is_none() && !g.inconsistent);
    }

    #[test]
    fn fluctuation_in_physical_units() {
        let c = consts();
        let params = FluctuationParams::new(1.0, 1e14, 1e9, &c).unwrap();
        assert!((params.modes / (9.327_768_324_616_944e-3 * 1e9) - 1.0).abs() < 1e-14);
        let ctx = ModeContext::new(1e14, 5000.0, &c).unwrap();
        let r = energy_fluctuation(FluctuationLaw::Planck, &params, &ctx).unwrap();
        let h_nu = c.h * 1e14;
        let nbar = mean_occupation(&ctx);
        // M (hν)² (n̄ + n̄²)
        assert!((r.variance / (params.modes * h_nu * h_nu * (nbar + nbar * nbar)) - 1.0).abs() < 1e-13);
        assert!(FluctuationParams::new(0.0, 1e14, 1e9, &c).is_err());
        assert!(FluctuationParams::<f64>::from_modes(0.0).is_err());
    }

    #[test]
    fn table_shape() {
        let c = consts();
        let grid = log_grid(1e10, 1e12, 200).unwrap();
        let table = synthesize_table(SpectralLaw::Planck, 2.728, &grid, &c).unwrap();
        let peak = peak_frequency(2.728, &c).unwrap();
        let rows = table.rows();
        let argmax = (0..rows.len()).max_by(|&a, &b| rows[a].1.total_cmp(&rows[b].1)).unwrap();
        assert!(rows[..=argmax].windows(2).all(|w| w[0].1 < w[1].1));
        assert!(rows[argmax..].windows(2).all(|w| w[0].1 > w[1].1));
        let ratio = grid[1] / grid[0];
        assert!(rows[argmax].0 / peak < ratio && peak / rows[argmax].0 < ratio);
        let rj = synthesize_table(SpectralLaw::RayleighJeans, 2.728, &grid, &c).unwrap();
        let wien = synthesize_table(SpectralLaw::Wien, 2.728, &grid, &c).unwrap();
        for ((w, p), r) in wien.rows().iter().zip(rows).zip(rj.rows()) {
            assert!(w.1 <= p.1 && p.1 <= r.1);
        }
    }

    #[test]
    fn table_csv_round_trip() {
        let grid = log_grid(1e10, 1e12, 50).unwrap();
        let table = synthesize_table(SpectralLaw::Planck, 2.728, &grid, &consts()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("nu_hz,u_erg_per_cm3_hz\n10000000000,"));
        let back = SpectrumTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows(), table.rows());
        assert!(SpectrumTable::read_csv("nu,u\n1,2\n".as_bytes()).is_err());
        assert!(SpectrumTable::read_csv("nu_hz,u_erg_per_cm3_hz\n1,-2\n".as_bytes()).is_err());
        assert!(SpectrumTable::read_csv("nu_hz,u_erg_per_cm3_hz\n2,1\n1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn noiseless_fit() {
        let c = consts();
        let grid = log_grid(1e10, 1e12, 200).unwrap();
        let table = synthesize_table(SpectralLaw::Planck, 2.728, &grid, &c).unwrap();
        let fit = fit_temperature(&table, SpectralLaw::Planck, (1.0, 10.0), &c).unwrap();
        assert!((fit.t_hat - 2.728).abs() < 1e-6, "{}", fit.t_hat);
        assert_eq!(fit.n_rows, 200);
    }

    #[test]
    fn noisy_fit() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let c = consts();
        let grid = log_grid(1e10, 1e12, 200).unwrap();
        let clean = synthesize_table(SpectralLaw::Planck, 2.728, &grid, &c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let rows = clean.rows().iter().map(|&(nu, u)| (nu, u * (1.0 + noise.sample(&mut rng)))).collect();
        let noisy = SpectrumTable::new(rows).unwrap();
        let fit = fit_temperature(&noisy, SpectralLaw::Planck, (1.0, 10.0), &c).unwrap();
        assert!((fit.t_hat - 2.728).abs() < 1e-2, "{}", fit.t_hat);
    }

    #[test]
    fn rayleigh_jeans_region_fit() {
        let c = consts();
        let t = 2.728;
        let grid = log_grid(nu_at(1e-5, t), nu_at(1e-3, t), 50).unwrap();
        let table = synthesize_table(SpectralLaw::RayleighJeans, t, &grid, &c).unwrap();
        let fit = fit_temperature(&table, SpectralLaw::Planck, (1.0, 10.0), &c).unwrap();
        assert!((fit.t_hat / t - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fit_errors() {
        let c = consts();
        let grid = log_grid(1e10, 1e12, 20).unwrap();
        let table = synthesize_table(SpectralLaw::Planck, 2.728, &grid, &c).unwrap();
        assert!(matches!(fit_temperature(&table, SpectralLaw::Planck, (5.0, 10.0), &c), Err(Error::Fit(_))));
        assert!(fit_temperature(&table, SpectralLaw::Planck, (3.0, 1.0), &c).is_err());
        let short = SpectrumTable::new(table.rows()[..2].to_vec()).unwrap();
        assert!(fit_temperature(&short, SpectralLaw::Planck, (1.0, 10.0), &c).is_err());
    }
}
