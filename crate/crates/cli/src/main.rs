//! Command-line frontend: every subcommand emits one CSV table or one JSON object.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chaotic_mode::events::parse_event;
use chaotic_mode::io::format_float;
use chaotic_mode::kinetics::{
    build_ladder, fit_chemical_potential, relax_to_equilibrium, verify_q_invariant, LadderKind, OccupancyState,
    RelaxOptions, ReservoirCoupling,
};
use chaotic_mode::laws::{self, BinaryLevel, Law};
use chaotic_mode::montecarlo::gof::chi2_uniform_phase;
use chaotic_mode::montecarlo::{
    amplitudes_to_energy, bit_frequencies, chi2_planck_test, clt_superpose, empirical_independence, ks_test,
    moment_checks, sample_gauss_parallel, BaseDistribution, ReferenceLaw, RngSpec,
};
use chaotic_mode::physconst::make_mode_context;
use chaotic_mode::spectra::{
    fit_temperature, log_grid, peak_frequency, synthesize_table, SpectralLaw, SpectrumTable,
};
use chaotic_mode::verify::{run_all, VerifyConfig};
use chaotic_mode::{Constants, Context, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

const EVENT_GRAMMAR: &str = "\
Event grammar:
  A<s>             level s holds its 2^s quanta
  !e               negation
  e & f, e | f     conjunction, disjunction (& binds tighter)
  ( e )            grouping
  & ...rest-empty  every level above the highest named one is empty
Example: (A0|A3)&!A1&!A2&...rest-empty";

#[derive(Parser)]
#[command(name = "chaotic-mode", version, about = "Dark part, Planck part and binary photons of a thermal field mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean, variance and entropy of the gauss, dark, planck and binary laws.
    Laws {
        #[command(flatten)]
        mode: ModeArgs,
        /// Highest binary level to list (default: truncation level).
        #[arg(long)]
        levels: Option<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Seeded samples of the mode energy with their decomposition (CSV) or moment checks (JSON).
    Sample {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling threads; the output depends on this count.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Goodness-of-fit and independence statistics of a seeded decomposition.
    Decompose {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Highest binary level whose frequency is tested.
        #[arg(long, default_value_t = 4)]
        levels: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Probability of a binary-photon event.
    #[command(after_help = EVENT_GRAMMAR)]
    Events {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        expr: String,
        /// Also report the frequency in this many seeded samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Relaxation of a fermionic ladder to its Fermi distribution.
    Kinetics {
        #[command(flatten)]
        mode: ModeArgs,
        /// Number of ladder levels J.
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Ladder spacing.
        #[arg(long, value_enum, default_value_t = Ladder::Linear)]
        law: Ladder,
        #[arg(long, value_enum, default_value_t = Coupling::Anchors)]
        coupling: Coupling,
        /// Initial occupancy of every level.
        #[arg(long, default_value_t = 0.5)]
        init: f64,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spectral energy density table on a logarithmic frequency grid.
    Spectrum {
        /// [K]
        #[arg(long)]
        temp: f64,
        #[arg(long, default_value = "planck")]
        law: SpectralLaw,
        /// [Hz], default one hundredth of the peak frequency.
        #[arg(long)]
        nu_min: Option<f64>,
        /// [Hz], default a hundred times the peak frequency.
        #[arg(long)]
        nu_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[command(flatten)]
        constants: ConstantArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Least-squares temperature of a spectrum table.
    Fit {
        /// CSV with header nu_hz,u_erg_per_cm3_hz.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "planck")]
        law: SpectralLaw,
        /// Lower end of the temperature bracket [K].
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        /// Upper end of the temperature bracket [K].
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[command(flatten)]
        constants: ConstantArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Amplitudes and energies of superposed random oscillators.
    Clt {
        /// Base distribution of each term: uniform, rademacher or triangular.
        #[arg(long, default_value = "uniform")]
        law: BaseDistribution,
        #[arg(long, default_value_t = 64)]
        terms: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Runs every invariant suite; exits 2 if a check fails.
    Verify {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Either `--beta`, or `--nu` with `--temp`.
#[derive(Args)]
struct ModeArgs {
    /// Mode frequency [Hz].
    #[arg(long, requires = "temp", conflicts_with = "beta")]
    nu: Option<f64>,
    /// Temperature [K].
    #[arg(long, requires = "nu", conflicts_with = "beta")]
    temp: Option<f64>,
    /// Dimensionless h nu / k T.
    #[arg(long, required_unless_present = "nu")]
    beta: Option<f64>,
    #[command(flatten)]
    constants: ConstantArgs,
}

impl ModeArgs {
    fn context(&self) -> Result<Context> {
        match (self.beta, self.nu, self.temp) {
            (Some(beta), None, None) => Context::from_beta(beta),
            (None, Some(nu), Some(t)) => make_mode_context(nu, t, &self.constants.resolve()?),
            _ => Err(Error::Validation("give either --beta or both --nu and --temp".into())),
        }
    }
}

/// cgs overrides of the default constants.
#[derive(Args)]
struct ConstantArgs {
    /// Planck constant [erg s].
    #[arg(long = "h")]
    h: Option<f64>,
    /// Boltzmann constant [erg/K].
    #[arg(long = "kb")]
    kb: Option<f64>,
    /// Speed of light [cm/s].
    #[arg(long = "c")]
    c: Option<f64>,
    /// Gravitational constant [cm^3 g^-1 s^-2].
    #[arg(long = "g")]
    g: Option<f64>,
}

impl ConstantArgs {
    fn resolve(&self) -> Result<Constants> {
        let d = Constants::default();
        Constants::new(self.h.unwrap_or(d.h), self.kb.unwrap_or(d.k_b), self.c.unwrap_or(d.c), self.g.unwrap_or(d.g))
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ladder {
    Linear,
    Dyadic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coupling {
    Anchors,
    Lowest,
    All,
}

/// A finished artifact in one of the two formats.
enum Artifact {
    Csv(Vec<u8>),
    Json(Value),
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_with(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Artifact> {
    let mut buf = vec![];
    write(&mut buf)?;
    Ok(Artifact::Csv(buf))
}

fn json_object(mut body: Value) -> Artifact {
    let mut obj = serde_json::Map::new();
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    if let Value::Object(fields) = body.take() {
        obj.extend(fields);
    }
    Artifact::Json(Value::Object(obj))
}

fn emit(artifact: &Artifact, out: &OutArgs) -> Result<()> {
    let mut sink: Box<dyn Write> = match &out.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match artifact {
        Artifact::Csv(bytes) => sink.write_all(bytes)?,
        Artifact::Json(v) => {
            serde_json::to_writer_pretty(&mut sink, v).map_err(io::Error::from)?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn f(x: f64) -> String {
    format_float(x)
}

fn mode_fields(ctx: &Context) -> Value {
    json!({ "beta": ctx.beta(), "b": ctx.b(), "nu_hz": ctx.nu(), "temperature_kelvin": ctx.temperature() })
}

fn laws_cmd(mode: &ModeArgs, levels: Option<u32>, format: Format) -> Result<Artifact> {
    let ctx = mode.context()?;
    let top = levels.unwrap_or_else(|| laws::truncation_level(&ctx));
    let mut all = vec![Law::Gauss, Law::Dark, Law::Planck];
    for s in 0..=top {
        all.push(Law::Binary(BinaryLevel::new(s)?));
    }
    let rows = all.iter().map(|&law| Ok((law.name(), law.summary(&ctx)?))).collect::<Result<Vec<_>>>()?;
    match format {
        Format::Csv => Ok(Artifact::Csv(csv_rows(
            &["law", "mean", "variance", "entropy"],
            rows.iter().map(|(name, s)| vec![name.clone(), f(s.mean), f(s.variance), f(s.entropy)]),
        )?)),
        Format::Json => {
            let mut body = mode_fields(&ctx);
            let map: serde_json::Map<String, Value> = rows
                .iter()
                .map(|(name, s)| (name.clone(), json!({ "mean": s.mean, "variance": s.variance, "entropy": s.entropy })))
                .collect();
            body["laws"] = Value::Object(map);
            Ok(json_object(body))
        }
    }
}

fn sample_cmd(mode: &ModeArgs, samples: usize, seed: u64, workers: usize, format: Format) -> Result<Artifact> {
    let ctx = mode.context()?;
    let batch = sample_gauss_parallel(samples, &ctx, seed, workers)?;
    match format {
        Format::Csv => csv_with(|buf| batch.write_csv(buf)),
        Format::Json => {
            let mut body = mode_fields(&ctx);
            body["samples"] = json!(samples);
            body["seed"] = json!(seed);
            body["workers"] = json!(workers);
            body["moments"] = json!(moment_checks(&batch, &ctx)?);
            Ok(json_object(body))
        }
    }
}

fn decompose_cmd(mode: &ModeArgs, samples: usize, seed: u64, levels: u32, format: Format) -> Result<Artifact> {
    let ctx = mode.context()?;
    let batch = sample_gauss_parallel(samples, &ctx, seed, 1)?;
    let ks_zeta = ks_test(batch.zeta(), &ReferenceLaw::Dark(ctx))?;
    let ks_eta = ks_test(batch.eta(), &ReferenceLaw::Gauss(ctx))?;
    let chi2 = chi2_planck_test(batch.xi(), &ctx)?;
    let bits = bit_frequencies(&batch, &ctx, levels)?;
    let indep = empirical_independence(&batch)?;
    match format {
        Format::Csv => {
            let mut rows = vec![];
            for (name, g) in [("ks_zeta", ks_zeta), ("ks_eta", ks_eta), ("chi2_xi", chi2)] {
                rows.push(vec![name.to_string(), f(g.statistic), f(g.threshold), (!g.rejected).to_string()]);
            }
            for b in &bits {
                rows.push(vec![
                    format!("bit_frequency_{}", b.level),
                    f((b.observed - b.expected).abs()),
                    f(b.band),
                    b.within.to_string(),
                ]);
            }
            for p in &indep.pairs {
                let value = p.correlation.map(|c| f(c.abs())).unwrap_or_default();
                rows.push(vec![format!("corr_{}", p.label.replace(',', "_")), value, f(indep.band), (!p.flagged).to_string()]);
            }
            Ok(Artifact::Csv(csv_rows(&["check", "value", "limit", "pass"], rows)?))
        }
        Format::Json => {
            let mut body = mode_fields(&ctx);
            body["samples"] = json!(samples);
            body["seed"] = json!(seed);
            body["ks_zeta"] = json!(ks_zeta);
            body["ks_eta"] = json!(ks_eta);
            body["chi2_xi"] = json!(chi2);
            body["bit_frequencies"] = json!(bits);
            body["independence"] = json!(indep);
            Ok(json_object(body))
        }
    }
}

fn events_cmd(mode: &ModeArgs, expr: &str, samples: Option<usize>, seed: u64, format: Format) -> Result<Artifact> {
    let ctx = mode.context()?;
    let event = parse_event(expr)?;
    let p: f64 = chaotic_mode::events::eval_prob(&event, &ctx.b())?;
    let empirical = match samples {
        Some(n) => Some(sample_gauss_parallel(n, &ctx, seed, 1)?.event_frequency(&event)),
        None => None,
    };
    match format {
        Format::Csv => {
            let mut header = vec!["expr", "b", "probability"];
            let mut row = vec![expr.to_string(), f(ctx.b()), f(p)];
            if let (Some(freq), Some(n)) = (empirical, samples) {
                header.extend(["frequency", "samples", "seed"]);
                row.extend([f(freq), n.to_string(), seed.to_string()]);
            }
            Ok(Artifact::Csv(csv_rows(&header, [row])?))
        }
        Format::Json => {
            let mut body = mode_fields(&ctx);
            body["expr"] = json!(expr);
            body["probability"] = json!(p);
            if let Some(freq) = empirical {
                body["frequency"] = json!(freq);
                body["samples"] = json!(samples);
                body["seed"] = json!(seed);
            }
            Ok(json_object(body))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn kinetics_cmd(
    mode: &ModeArgs,
    levels: usize,
    ladder: Ladder,
    coupling: Coupling,
    init: f64,
    tol: f64,
    max_iter: usize,
    format: Format,
) -> Result<Artifact> {
    let beta = mode.context()?.beta();
    let kind = match ladder {
        Ladder::Linear => LadderKind::Linear,
        Ladder::Dyadic => LadderKind::Dyadic,
    };
    let ladder = build_ladder::<f64>(kind, levels, None)?;
    let mut options = RelaxOptions::new(tol, max_iter);
    options.coupling = match coupling {
        Coupling::Anchors => ReservoirCoupling::Anchors,
        Coupling::Lowest => ReservoirCoupling::LowestOnly,
        Coupling::All => ReservoirCoupling::All,
    };
    let relaxed = relax_to_equilibrium(&ladder, beta, &OccupancyState::uniform(levels, init)?, &options)?;
    match format {
        Format::Csv => csv_with(|buf| relaxed.write_trace_csv(buf)),
        Format::Json => {
            let fermi = OccupancyState::fermi(&ladder, beta);
            let fit = fit_chemical_potential(&relaxed.state, &ladder).ok();
            Ok(json_object(json!({
                "beta": beta,
                "levels": ladder.levels(),
                "iterations": relaxed.iterations,
                "final_error": relaxed.final_error(),
                "occupancies": relaxed.state.occupancies(),
                "fermi": fermi.occupancies(),
                "q_residual": verify_q_invariant(&relaxed.state, &ladder)?,
                "fitted_alpha": fit.map(|x| x.alpha),
                "fitted_beta": fit.map(|x| x.beta),
            })))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn spectrum_cmd(
    temp: f64,
    law: SpectralLaw,
    nu_min: Option<f64>,
    nu_max: Option<f64>,
    points: usize,
    constants: &ConstantArgs,
    format: Format,
) -> Result<Artifact> {
    let consts = constants.resolve()?;
    let peak = peak_frequency(temp, &consts)?;
    let grid = log_grid(nu_min.unwrap_or(peak / 100.0), nu_max.unwrap_or(peak * 100.0), points)?;
    let table = synthesize_table(law, temp, &grid, &consts)?;
    match format {
        Format::Csv => csv_with(|buf| table.write_csv(buf)),
        Format::Json => {
            let (nu, u): (Vec<f64>, Vec<f64>) = table.rows().iter().copied().unzip();
            Ok(json_object(json!({
                "law": law,
                "temperature_kelvin": temp,
                "peak_nu_hz": peak,
                "nu_hz": nu,
                "u_erg_per_cm3_hz": u,
            })))
        }
    }
}

fn fit_cmd(input: &PathBuf, law: SpectralLaw, bracket: (f64, f64), constants: &ConstantArgs, format: Format) -> Result<Artifact> {
    let table = SpectrumTable::read_csv(File::open(input)?)?;
    let fit = fit_temperature(&table, law, bracket, &constants.resolve()?)?;
    match format {
        Format::Csv => Ok(Artifact::Csv(csv_rows(
            &["law", "t_hat_kelvin", "residual_l2", "n_rows"],
            [vec![law.name().to_string(), f(fit.t_hat), f(fit.residual_l2), fit.n_rows.to_string()]],
        )?)),
        Format::Json => Ok(json_object(json!(fit))),
    }
}

fn clt_cmd(base: BaseDistribution, terms: usize, samples: usize, seed: u64, format: Format) -> Result<Artifact> {
    let pairs = clt_superpose(terms, samples, base, RngSpec::new(seed))?;
    let energies = amplitudes_to_energy(&pairs);
    match format {
        Format::Csv => Ok(Artifact::Csv(csv_rows(
            &["a_c", "a_s", "energy", "theta"],
            pairs.iter().zip(&energies).map(|(p, &(e, th))| vec![f(p.a_c), f(p.a_s), f(e), f(th)]),
        )?)),
        Format::Json => {
            let a_c: Vec<f64> = pairs.iter().map(|p| p.a_c).collect();
            let a_s: Vec<f64> = pairs.iter().map(|p| p.a_s).collect();
            let (energy, phase): (Vec<f64>, Vec<f64>) = energies.into_iter().unzip();
            Ok(json_object(json!({
                "base": base.name(),
                "terms": terms,
                "samples": samples,
                "seed": seed,
                "ks_a_c_normal": ks_test(&a_c, &ReferenceLaw::StandardNormal)?,
                "ks_a_s_normal": ks_test(&a_s, &ReferenceLaw::StandardNormal)?,
                "ks_energy_exponential": ks_test(&energy, &ReferenceLaw::Gauss(Context::from_beta(1.0)?))?,
                "chi2_phase_uniform": chi2_uniform_phase(&phase, 36)?,
            })))
        }
    }
}

/// Returns the artifact and whether every verification check held.
fn verify_cmd(mode: &ModeArgs, samples: usize, seed: u64, format: Format) -> Result<(Artifact, bool)> {
    let ctx = mode.context()?;
    let config = VerifyConfig { beta: ctx.beta(), samples, seed, constants: mode.constants.resolve()? };
    let report = run_all(&config)?;
    for c in report.failures() {
        eprintln!("FAIL {}: {} {}", c.suite, c.name, c.detail);
    }
    let artifact = match format {
        Format::Csv => Artifact::Csv(csv_rows(
            &["suite", "name", "status", "value", "limit", "detail"],
            report.checks.iter().map(|c| {
                vec![
                    c.suite.to_string(),
                    c.name.clone(),
                    serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    c.value.map(f).unwrap_or_default(),
                    c.limit.map(f).unwrap_or_default(),
                    c.detail.clone(),
                ]
            }),
        )?),
        Format::Json => {
            let mut body = json!(report);
            body["passed"] = json!(report.passed());
            json_object(body)
        }
    };
    Ok((artifact, report.passed()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (artifact, out, ok) = match &cli.command {
        Command::Laws { mode, levels, out } => (laws_cmd(mode, *levels, out.format)?, out, true),
        Command::Sample { mode, samples, seed, workers, out } => {
            (sample_cmd(mode, *samples, *seed, *workers, out.format)?, out, true)
        }
        Command::Decompose { mode, samples, seed, levels, out } => {
            (decompose_cmd(mode, *samples, *seed, *levels, out.format)?, out, true)
        }
        Command::Events { mode, expr, samples, seed, out } => (events_cmd(mode, expr, *samples, *seed, out.format)?, out, true),
        Command::Kinetics { mode, levels, law, coupling, init, tol, max_iter, out } => {
            (kinetics_cmd(mode, *levels, *law, *coupling, *init, *tol, *max_iter, out.format)?, out, true)
        }
        Command::Spectrum { temp, law, nu_min, nu_max, points, constants, out } => {
            (spectrum_cmd(*temp, *law, *nu_min, *nu_max, *points, constants, out.format)?, out, true)
        }
        Command::Fit { input, law, t_min, t_max, constants, out } => {
            (fit_cmd(input, *law, (*t_min, *t_max), constants, out.format)?, out, true)
        }
        Command::Clt { law, terms, samples, seed, out } => (clt_cmd(*law, *terms, *samples, *seed, out.format)?, out, true),
        Command::Verify { mode, samples, seed, out } => {
            let (artifact, passed) = verify_cmd(mode, *samples, *seed, out.format)?;
            (artifact, out, passed)
        }
    };
    emit(&artifact, out)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
