//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, ErrorKind};
use crate::frft::{dtfrft_on_axis, inverse_dtfrft, ComplexSignal, FrftAngle, FrftSpectrum, TimeAxis};
use crate::io::{self, FormatError, RunConfig, SpikeFile, GRID_TOL};
use crate::modulo::{FoldedSamples, ModuloParams};
use crate::reconstruction::{band_index_for, reconstruct, recover_residual_auto, CriterionDecision, SamplingCriterion};
use crate::testbench::{self, SignalSpec, SweepBase, SweepGrid, PASS_RMSE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_CRITERION: i32 = 4;
pub const EXIT_ESTIMATION: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "modfrft", version, about = "Modulo sampling and recovery of fractional-Fourier bandlimited signals")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a signal, fold it, and write truth.csv, folded.csv, residual.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recover a signal from folded samples.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Folded samples (index,t,re,im).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Ground truth to score against.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run the trial grid of the config's `sweep` section.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Discrete fractional Fourier transform of a sample file.
    Frft {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Direction,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Schema(String),
    Pipeline(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Pipeline(e) => match e.kind() {
                ErrorKind::Input => EXIT_CONFIG,
                ErrorKind::Criterion => EXIT_CRITERION,
                ErrorKind::Estimation => EXIT_ESTIMATION,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Pipeline(e) => write!(f, "{e}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io(m) => CliError::Io(m),
            FormatError::Schema(m) => CliError::Schema(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Pipeline(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command, reports errors on stderr, and returns
/// the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("MODFRFT_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Command::Reconstruct { config, input, out, truth } => cmd_reconstruct(&config, &input, &out, truth.as_deref()),
        Command::Sweep { config, out, seed, format } => cmd_sweep(&config, &out, seed, format, cli.jobs),
        Command::Frft { input, alpha, direction, out } => cmd_frft(&input, alpha, direction, &out),
    }
}

/// A config with every derived quantity resolved and checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub raw: RunConfig,
    pub alpha: FrftAngle<f64>,
    pub band_index: usize,
}

impl Resolved {
    fn spec(&self) -> SignalSpec {
        SignalSpec {
            alpha: self.raw.alpha,
            sigma: self.raw.sigma,
            band_index: self.band_index,
            amplitude_scale: self.raw.amplitude_scale,
            seed: self.raw.seed,
            model: self.raw.model,
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{name}` must be positive and finite, got {v}")))
    }
}

pub fn load_config(path: &Path) -> CliResult<Resolved> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    resolve_config(io::parse_config(&text).map_err(CliError::Config)?)
}

pub fn resolve_config(raw: RunConfig) -> CliResult<Resolved> {
    positive("sigma", raw.sigma)?;
    positive("lambda", raw.lambda)?;
    positive("amplitude_scale", raw.amplitude_scale)?;
    if raw.q == 0 {
        return Err(CliError::Config("`q` must be at least 1".into()));
    }
    let alpha = FrftAngle::new(raw.alpha).map_err(|e| CliError::Config(format!("`alpha`: {e}")))?;
    if alpha.degenerate().is_some() {
        return Err(CliError::Config(format!("`alpha` = {} is a multiple of pi; the band condition is undefined there", raw.alpha)));
    }
    let band_index = match (raw.band_index, raw.omega_alpha) {
        (Some(r), None) => r,
        (None, Some(w)) => {
            positive("omega_alpha", w)?;
            band_index_for(w, raw.sigma, alpha)
        }
        _ => return Err(CliError::Config("exactly one of `band_index` and `omega_alpha` must be given".into())),
    };
    Ok(Resolved { raw, alpha, band_index })
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.raw.seed = s;
    }
    let sim = testbench::simulate(&cfg.spec(), cfg.raw.q, cfg.raw.lambda)?;
    info!("simulated q={} with {} folds per period", cfg.raw.q, sim.realized_folds);
    ensure_dir(out)?;
    let residual = ComplexSignal { samples: sim.residual.values.clone(), axis: sim.truth.axis, sigma: sim.truth.sigma };
    io::write_text(&out.join("truth.csv"), &io::format_signal(&sim.truth))?;
    io::write_text(&out.join("folded.csv"), &io::format_signal(&sim.folded.to_signal()))?;
    io::write_text(&out.join("residual.csv"), &io::format_signal(&residual))?;
    Ok(())
}

#[derive(Serialize)]
struct TruthScore {
    rel_rmse: f64,
    offset: [f64; 2],
    passes: bool,
}

#[derive(Serialize)]
struct Summary {
    passed: bool,
    failure: Option<String>,
    alpha: f64,
    sigma: f64,
    lambda: f64,
    q: usize,
    band_index: usize,
    m_budget: Option<usize>,
    m_source: &'static str,
    criterion: Option<CriterionDecision>,
    spikes_found: usize,
    annihilation_residual: Option<f64>,
    toeplitz_residual: Option<f64>,
    constant_offset: Option<[f64; 2]>,
    refold_error: Option<f64>,
    truth: Option<TruthScore>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn read_period_signal(path: &Path, cfg: &Resolved) -> CliResult<ComplexSignal<f64>> {
    let x = io::read_signal(path)?;
    if x.len() != cfg.raw.q {
        return Err(CliError::Schema(format!("{}: {} rows, config has q = {}", path.display(), x.len(), cfg.raw.q)));
    }
    if (x.sigma - cfg.raw.sigma).abs() > GRID_TOL * cfg.raw.sigma {
        return Err(CliError::Schema(format!("{}: time grid spans {}, config has sigma = {}", path.display(), x.sigma, cfg.raw.sigma)));
    }
    Ok(ComplexSignal { samples: x.samples, axis: TimeAxis::period(cfg.raw.sigma, cfg.raw.q), sigma: cfg.raw.sigma })
}

fn cmd_reconstruct(config: &Path, input: &Path, out: &Path, truth: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(config)?;
    let (q, r, lambda) = (cfg.raw.q, cfg.band_index, cfg.raw.lambda);
    let x = read_period_signal(input, &cfg)?;
    let params = ModuloParams::new(lambda)?;
    let h = FoldedSamples::from_measurements(x, params).map_err(|e| CliError::Schema(format!("{}: {e}", input.display())))?;
    let truth = truth.map(|p| read_period_signal(p, &cfg)).transpose()?;
    ensure_dir(out)?;

    let mut summary = Summary {
        passed: false,
        failure: None,
        alpha: cfg.raw.alpha,
        sigma: cfg.raw.sigma,
        lambda,
        q,
        band_index: r,
        m_budget: cfg.raw.m_budget,
        m_source: if cfg.raw.m_budget.is_some() { "config" } else { "auto" },
        criterion: None,
        spikes_found: 0,
        annihilation_residual: None,
        toeplitz_residual: None,
        constant_offset: None,
        refold_error: None,
        truth: None,
    };
    let outcome = (|| {
        let m = match cfg.raw.m_budget {
            Some(m) => m,
            None => {
                let m_max = q.saturating_sub(2 * r + 1) / 2;
                let (m, _) = recover_residual_auto(&h, cfg.alpha, r, m_max)?;
                info!("selected fold budget M = {m}");
                m
            }
        };
        let criterion = SamplingCriterion::from_band_index(r, cfg.raw.sigma, cfg.alpha, m, q)?;
        reconstruct(&h, &criterion).map(|rep| (m, rep))
    })();
    let result = match outcome {
        Ok((m, rep)) => {
            summary.m_budget = Some(m);
            summary.criterion = Some(rep.criterion);
            summary.spikes_found = rep.spikes.count();
            summary.annihilation_residual = Some(rep.annihilation_residual);
            summary.toeplitz_residual = Some(rep.toeplitz_residual);
            summary.constant_offset = Some(pair(rep.constant_offset));
            summary.refold_error = Some(testbench::refold_error(&rep.recovered.samples, &h.samples, lambda));
            summary.passed = true;
            if let Some(t) = &truth {
                let offset = testbench::truth_alignment(&rep.recovered.samples, &t.samples, lambda);
                let aligned: Vec<Complex64> = rep.recovered.samples.iter().map(|z| z + offset).collect();
                let rel = testbench::rel_rmse(&aligned, &t.samples)?;
                summary.passed = rel < PASS_RMSE;
                summary.truth = Some(TruthScore { rel_rmse: rel, offset: pair(offset), passes: rel < PASS_RMSE });
                if !summary.passed {
                    warn!("relative RMSE {rel:e} exceeds {PASS_RMSE:e}");
                    summary.failure = Some("accuracy_exceeded".into());
                }
            }
            io::write_text(&out.join("recovered.csv"), &io::format_signal(&rep.recovered))?;
            io::write_text(&out.join("spikes.json"), &io::to_json(&SpikeFile::new(&rep.spikes, h.axis, lambda)))?;
            Ok(())
        }
        Err(e) => {
            summary.failure = Some(e.tag().into());
            Err(CliError::Pipeline(e))
        }
    };
    io::write_text(&out.join("summary.json"), &io::to_json(&summary))?;
    result
}

fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_sweep(config: &Path, out: &Path, seed: Option<u64>, format: Format, jobs: Option<usize>) -> CliResult<()> {
    let cfg = load_config(config)?;
    let raw = &cfg.raw;
    let s = raw.sweep.clone().unwrap_or_default();
    let grid = SweepGrid {
        amplitude_scales: s.amplitude_scales.unwrap_or_else(|| vec![raw.amplitude_scale]),
        qs: s.qs.unwrap_or_else(|| vec![raw.q]),
        m_budgets: s.m_budgets.unwrap_or_else(|| vec![raw.m_budget]),
        alphas: s.alphas.unwrap_or_else(|| vec![raw.alpha]),
        seeds: seed.map(|v| vec![v]).or(s.seeds).unwrap_or_else(|| vec![raw.seed]),
    };
    for &a in &grid.alphas {
        let angle = FrftAngle::new(a).map_err(|e| CliError::Config(format!("`sweep.alphas`: {e}")))?;
        if angle.degenerate().is_some() {
            return Err(CliError::Config(format!("`sweep.alphas` contains the degenerate angle {a}")));
        }
    }
    if grid.amplitude_scales.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(CliError::Config("`sweep.amplitude_scales` must be positive".into()));
    }
    let base = SweepBase { sigma: raw.sigma, band_index: cfg.band_index, lambda: raw.lambda, model: raw.model };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("`--jobs`: {e}")))?;
    let rows = pool.install(|| testbench::sweep(&base, &grid)).map_err(|e| CliError::Config(e.to_string()))?;
    info!("sweep finished: {} cells", rows.len());
    ensure_dir(out)?;
    match format {
        Format::Csv => write_csv(&out.join("sweep.csv"), &rows)?,
        Format::Json => io::write_text(&out.join("sweep.json"), &io::to_json(&rows))?,
    }
    write_csv(&out.join("plot_pass_rate_vs_q.csv"), &testbench::pass_rate_vs_q(&rows))?;
    write_csv(&out.join("plot_rmse_vs_beta.csv"), &testbench::rmse_vs_beta(&rows))?;
    Ok(())
}

fn cmd_frft(input: &Path, alpha: f64, direction: Direction, out: &Path) -> CliResult<()> {
    let angle = FrftAngle::new(alpha).map_err(|e| CliError::Config(format!("`--alpha`: {e}")))?;
    let degenerate = angle.degenerate();
    if let Some(kind) = degenerate {
        eprintln!(
            "note: alpha = {alpha} is a multiple of pi; the transform reduces to {kind:?} and the coordinate column is passed through"
        );
    }
    let (in_col, out_col, name) = match direction {
        Direction::Forward => ("t", "u", "frft_forward.csv"),
        Direction::Inverse => ("u", "t", "frft_inverse.csv"),
    };
    let table = io::read_table(input, in_col)?;
    let n = table.values.len();
    let text = if degenerate.is_some() {
        let spec = dtfrft_on_axis(&table.values, angle, TimeAxis::index())?;
        io::format_table(out_col, &table.coord, &spec.coeffs)
    } else {
        match direction {
            Direction::Forward => {
                let x = io::table_to_signal(table)?;
                let spec = dtfrft_on_axis(&x.samples, angle, x.axis)?;
                let u: Vec<f64> = (0..n).map(|k| k as f64 * spec.freq_step).collect();
                io::format_table("u", &u, &spec.coeffs)
            }
            Direction::Inverse => {
                let du = if n >= 2 { table.coord[1] - table.coord[0] } else { f64::NAN };
                if !(du.abs() > 0.0) || table.coord[0] != 0.0 {
                    return Err(CliError::Schema("frequency column must be u_n = n*du starting at 0 with at least two rows".into()));
                }
                for (k, &u) in table.coord.iter().enumerate() {
                    if (u - k as f64 * du).abs() > GRID_TOL * du.abs() * n as f64 {
                        return Err(CliError::Schema(format!("row {}: u = {u} is off the grid n*du", k + 1)));
                    }
                }
                let step = 2.0 * std::f64::consts::PI * angle.sin() / (n as f64 * du);
                if !(step > 0.0) {
                    return Err(CliError::Schema("frequency step has the wrong sign for this alpha".into()));
                }
                let axis = TimeAxis::period(step * n as f64, n);
                let spec = FrftSpectrum { coeffs: table.values, alpha: angle, freq_step: du, axis };
                io::format_signal(&inverse_dtfrft(&spec)?)
            }
        }
    };
    ensure_dir(out)?;
    io::write_text(&out.join(name), &text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(json: &str) -> RunConfig {
        io::parse_config(json).unwrap()
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(CliError::Pipeline(Error::CriterionViolation { required_q: 10, q: 8 }).exit_code(), EXIT_CRITERION);
        assert_eq!(CliError::Pipeline(Error::EstimationFailure { residual: 0.1 }).exit_code(), EXIT_ESTIMATION);
        assert_eq!(CliError::Pipeline(Error::DegenerateAngle { alpha: 0.0 }).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(FormatError::Schema("x".into())).exit_code(), EXIT_SCHEMA);
        assert_eq!(CliError::from(FormatError::Io("x".into())).exit_code(), EXIT_IO);
    }

    #[test]
    fn band_from_omega() {
        let r = resolve_config(raw(r#"{"alpha":1.5707963267948966,"sigma":1,"omega_alpha":18,"lambda":1,"q":20,"amplitude_scale":2}"#))
            .unwrap();
        assert_eq!(r.band_index, 3);
        let both = raw(r#"{"alpha":1,"sigma":1,"omega_alpha":18,"band_index":2,"lambda":1,"q":20,"amplitude_scale":2}"#);
        assert!(matches!(resolve_config(both), Err(CliError::Config(_))));
        let zero = raw(r#"{"alpha":0,"sigma":1,"band_index":2,"lambda":1,"q":20,"amplitude_scale":2}"#);
        assert!(matches!(resolve_config(zero), Err(CliError::Config(_))));
    }

    const QUARTER: &str =
        r#"{"alpha":1.5707963267948966,"sigma":1.0,"band_index":3,"lambda":1.0,"q":40,"m_budget":12,"amplitude_scale":3.0,"seed":7}"#;

    struct Work {
        dir: tempfile::TempDir,
    }

    impl Work {
        fn new() -> Self {
            Work { dir: tempfile::tempdir().unwrap() }
        }

        fn path(&self, name: &str) -> String {
            self.dir.path().join(name).to_string_lossy().into_owned()
        }

        fn file(&self, name: &str, text: &str) -> String {
            let p = self.path(name);
            fs::write(&p, text).unwrap();
            p
        }

        fn run(&self, args: &[&str]) -> i32 {
            main_with_args(std::iter::once("modfrft").chain(args.iter().copied()))
        }

        fn read(&self, name: &str) -> String {
            fs::read_to_string(self.dir.path().join(name)).unwrap()
        }
    }

    #[test]
    fn simulate_then_reconstruct_passes() {
        let w = Work::new();
        let cfg = w.file("c.json", QUARTER);
        assert_eq!(w.run(&["simulate", "--config", &cfg, "--out", &w.path("sim")]), EXIT_OK);
        let args = [
            "reconstruct",
            "--config",
            &cfg,
            "--input",
            &w.path("sim/folded.csv"),
            "--truth",
            &w.path("sim/truth.csv"),
            "--out",
            &w.path("rec"),
        ];
        assert_eq!(w.run(&args), EXIT_OK);
        let summary: serde_json::Value = serde_json::from_str(&w.read("rec/summary.json")).unwrap();
        assert_eq!(summary["passed"], true);
        assert!(summary["truth"]["rel_rmse"].as_f64().unwrap() < PASS_RMSE);
        let first = w.read("rec/recovered.csv");
        assert_eq!(w.run(&args), EXIT_OK);
        assert_eq!(first, w.read("rec/recovered.csv"));
    }

    #[test]
    fn small_amplitude_is_not_folded() {
        let w = Work::new();
        let cfg = w.file("c.json", &QUARTER.replace("\"amplitude_scale\":3.0", "\"amplitude_scale\":0.5"));
        assert_eq!(w.run(&["simulate", "--config", &cfg, "--out", &w.path("o")]), EXIT_OK);
        assert_eq!(w.read("o/truth.csv"), w.read("o/folded.csv"));
    }

    #[test]
    fn config_and_io_errors() {
        let w = Work::new();
        let bad = w.file("bad.json", &QUARTER.replace("\"seed\":7", "\"seed\":7,\"threshold\":1"));
        assert_eq!(w.run(&["simulate", "--config", &bad, "--out", &w.path("o")]), EXIT_CONFIG);
        assert_eq!(w.run(&["simulate", "--config", &w.path("missing.json"), "--out", &w.path("o")]), EXIT_IO);
        assert_eq!(w.run(&["simulate", "--bogus"]), EXIT_CONFIG);
    }

    #[test]
    fn truncated_input_is_schema_error() {
        let w = Work::new();
        let cfg = w.file("c.json", QUARTER);
        assert_eq!(w.run(&["simulate", "--config", &cfg, "--out", &w.path("sim")]), EXIT_OK);
        let mut text = w.read("sim/folded.csv");
        text.truncate(text.len() - 30);
        let cut = w.file("cut.csv", &text);
        assert_eq!(w.run(&["reconstruct", "--config", &cfg, "--input", &cut, "--out", &w.path("rec")]), EXIT_SCHEMA);
    }

    #[test]
    fn below_bound_is_criterion_exit() {
        let w = Work::new();
        let cfg = w.file("c.json", QUARTER);
        assert_eq!(w.run(&["simulate", "--config", &cfg, "--out", &w.path("sim")]), EXIT_OK);
        let tight = w.file("t.json", &QUARTER.replace("\"m_budget\":12", "\"m_budget\":17"));
        let args = ["reconstruct", "--config", &tight, "--input", &w.path("sim/folded.csv"), "--out", &w.path("rec")];
        assert_eq!(w.run(&args), EXIT_CRITERION);
        let summary: serde_json::Value = serde_json::from_str(&w.read("rec/summary.json")).unwrap();
        assert_eq!(summary["failure"], "criterion_violation");
    }

    #[test]
    fn unstructured_input_is_estimation_exit() {
        let w = Work::new();
        let samples: Vec<Complex64> =
            (0..40).map(|k| Complex64::new(((k * 37) % 19) as f64 / 10.0 - 0.95, ((k * 11) % 7) as f64 / 4.0 - 0.9)).collect();
        let noise = w.file("noise.csv", &io::format_signal(&ComplexSignal::on_period(samples, 1.0).unwrap()));
        let cfg = w.file("c.json", &QUARTER.replace("\"m_budget\":12", "\"m_budget\":2"));
        assert_eq!(w.run(&["reconstruct", "--config", &cfg, "--input", &noise, "--out", &w.path("rec")]), EXIT_ESTIMATION);
    }

    #[test]
    fn frft_round_trip_and_identity() {
        let w = Work::new();
        let samples: Vec<Complex64> = (0..17).map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 0.3).cos())).collect();
        let x = ComplexSignal::on_period(samples, 2.0).unwrap();
        let input = w.file("x.csv", &io::format_signal(&x));
        assert_eq!(w.run(&["frft", "--input", &input, "--alpha", "0.9", "--out", &w.path("f")]), EXIT_OK);
        let fwd = w.path("f/frft_forward.csv");
        assert_eq!(w.run(&["frft", "--input", &fwd, "--alpha", "0.9", "--direction", "inverse", "--out", &w.path("g")]), EXIT_OK);
        let back = io::read_signal(&w.dir.path().join("g/frft_inverse.csv")).unwrap();
        for (a, b) in back.samples.iter().zip(&x.samples) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!((back.sigma - 2.0).abs() < 1e-10);
        assert_eq!(w.run(&["frft", "--input", &input, "--alpha", "0", "--out", &w.path("z")]), EXIT_OK);
        assert_eq!(w.read("z/frft_forward.csv").replacen("index,u,", "index,t,", 1), w.read("x.csv"));
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let w = Work::new();
        let cfg = w.file(
            "s.json",
            &QUARTER.replace(
                "\"seed\":7",
                "\"seed\":7,\"sweep\":{\"amplitude_scales\":[0.5,3.0],\"qs\":[24,40],\"m_budgets\":[null,12],\"seeds\":[1,2]}",
            ),
        );
        assert_eq!(w.run(&["sweep", "--config", &cfg, "--out", &w.path("a"), "--jobs", "1"]), EXIT_OK);
        assert_eq!(w.run(&["sweep", "--config", &cfg, "--out", &w.path("b"), "--jobs", "4"]), EXIT_OK);
        for f in ["sweep.csv", "plot_pass_rate_vs_q.csv", "plot_rmse_vs_beta.csv"] {
            assert_eq!(w.read(&format!("a/{f}")), w.read(&format!("b/{f}")));
        }
        assert_eq!(w.read("a/sweep.csv").lines().count(), 9);
        assert_eq!(w.run(&["sweep", "--config", &cfg, "--out", &w.path("j"), "--format", "json", "--seed", "5"]), EXIT_OK);
        let rows: serde_json::Value = serde_json::from_str(&w.read("j/sweep.json")).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 8);
        assert_eq!(rows[0]["trials"], 1);
    }
}
