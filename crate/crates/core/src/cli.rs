//! Command-line front end. The `typecpd` binary is a thin wrapper around
//! [`run`].
//!
//! Exit codes: 0 success, 2 input error, 3 configuration error, 4 internal
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::detector::detect_detailed;
use crate::divergence::{chi2, gjs, kl, sym_chi2};
use crate::error::{Error, Result};
use crate::io::{format_sig6, parse_distribution, parse_real_list, read_sequence, unify_alphabet};
use crate::manifest::{sha256_file, RunManifest};
use crate::model::{ProblemConfig, ThresholdMode};
use crate::resolution::{optimal_resolution_ld, optimal_resolution_md, RegimeQuery};
use crate::simulator::{
    estimate, phase_transition_sweep, ChangeFraction, SweepRow, TrialSpec, DEFAULT_GRID_POINTS,
};

/// Environment variable naming the directory that relative `--out` paths
/// are resolved against.
pub const OUT_DIR_ENV: &str = "TYPECPD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "typecpd",
    version,
    about = "Change-point detection with training sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal normalized resolution over a grid of exponents.
    Resolution(ResolutionArgs),
    /// Run the decoder on sequence files.
    Detect(DetectArgs),
    /// Monte Carlo estimates of undetected-error and erasure rates.
    Simulate(SimulateArgs),
    /// Print divergences between two distributions.
    Divergence(DivergenceArgs),
    /// Re-run a command from its manifest and compare output checksums.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    Ld,
    Md,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdArg {
    Raw,
    LargeDevAchievability,
    ModerateDev,
}

impl From<ThresholdArg> for ThresholdMode {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Raw => ThresholdMode::Raw,
            ThresholdArg::LargeDevAchievability => ThresholdMode::LargeDevAchievability,
            ThresholdArg::ModerateDev => ThresholdMode::ModerateDev,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ResolutionArgs {
    /// Distribution before the change: `bern:p` or a JSON list file.
    #[arg(long)]
    pub p1: String,
    /// Distribution after the change.
    #[arg(long)]
    pub p2: String,
    /// One or more comma-separated values in (0, 1/2).
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    /// Training-to-test length ratio; comma-separated values allowed.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, value_enum, default_value = "ld")]
    pub regime: RegimeArg,
    /// Moderate-deviations exponent; ignored for `ld`.
    #[arg(long, default_value_t = 0.25)]
    pub t: f64,
    /// `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub lambda_grid: String,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub test_file: PathBuf,
    #[arg(long)]
    pub train1_file: PathBuf,
    #[arg(long)]
    pub train2_file: PathBuf,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub delta: usize,
    #[arg(long, value_enum, default_value = "raw")]
    pub threshold_mode: ThresholdArg,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("resolution").required(true).args(["delta_bar_grid", "delta"])))]
pub struct SimulateArgs {
    #[arg(long)]
    pub p1: String,
    #[arg(long)]
    pub p2: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Defaults to `large-dev-achievability` for t = 0, `moderate-dev` otherwise.
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ThresholdArg>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; does not affect results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Fixed change fraction. Without it, or `--alpha-grid`, the worst case
    /// over an evenly spaced grid is reported.
    #[arg(long, conflicts_with = "alpha_grid")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Normalized resolutions, `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub delta_bar_grid: Option<String>,
    /// A single physical resolution.
    #[arg(long)]
    pub delta: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct DivergenceArgs {
    pub p1: String,
    pub p2: String,
    /// GJS weight; defaults to `beta / r` when both are given, else 1.
    #[arg(long, conflicts_with_all = ["beta", "r"])]
    pub a: Option<f64>,
    #[arg(long, requires = "r")]
    pub beta: Option<f64>,
    #[arg(long, requires = "beta")]
    pub r: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Directory for the replayed outputs; defaults to a fresh temporary one.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Resolves a relative output path against `TYPECPD_OUT_DIR` when set.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes `content` to the output file (plus manifest) or to `stdout`.
fn emit<P: Serialize>(
    stdout: &mut dyn Write,
    command: &str,
    args: &P,
    out: Option<&Path>,
    seed: Option<u64>,
    content: &str,
) -> Result<()> {
    match out {
        None => stdout.write_all(content.as_bytes())?,
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, content)?;
            let params = serde_json::to_value(args)
                .map_err(|e| Error::Internal(format!("cannot record parameters: {e}")))?;
            let mut manifest = RunManifest::new(command, params, seed);
            manifest.add_output(&path)?;
            let written = manifest.write_beside(&path)?;
            writeln!(stdout, "wrote {} ({})", path.display(), written.display())?;
        }
    }
    Ok(())
}

pub fn render_resolution(args: &ResolutionArgs) -> Result<String> {
    let p1 = parse_distribution(&args.p1)?;
    let p2 = parse_distribution(&args.p2)?;
    let lambdas = parse_real_list(&args.lambda_grid, "lambda-grid")?;
    if lambdas.is_empty() {
        return Err(Error::param("lambda-grid", "no values"));
    }
    let t = match args.regime {
        RegimeArg::Ld => 0.0,
        RegimeArg::Md => args.t,
    };
    let mut csv = String::from("lambda,delta_bar_star,regime,saturated,theta,r\n");
    for &theta in &args.theta {
        for &r in &args.r {
            let q = RegimeQuery::new(p1.clone(), p2.clone(), r, theta, 0.0, t)?;
            for &lambda in &lambdas {
                let q = q.with_lambda(lambda);
                let res = match args.regime {
                    RegimeArg::Ld => optimal_resolution_ld(&q)?,
                    RegimeArg::Md => optimal_resolution_md(&q)?,
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    format_sig6(lambda),
                    format_sig6(res.normalized_resolution),
                    res.regime.as_str(),
                    res.saturated,
                    format_sig6(theta),
                    format_sig6(r),
                ));
            }
        }
    }
    Ok(csv)
}

pub fn render_detect(args: &DetectArgs) -> Result<String> {
    let raw = [
        read_sequence(&args.test_file)?,
        read_sequence(&args.train1_file)?,
        read_sequence(&args.train2_file)?,
    ];
    let seqs = unify_alphabet(&raw)?;
    let (x, y1, y2) = (&seqs[0], &seqs[1], &seqs[2]);
    let config = ProblemConfig {
        n: x.len(),
        r: y1.len() as f64 / x.len() as f64,
        theta: args.theta,
        lambda: args.lambda,
        t: args.t,
        delta: args.delta,
        threshold_mode: args.threshold_mode.into(),
        seed: 0,
    };
    let verdict = detect_detailed(x, y1, y2, &config)?;
    let text = serde_json::to_string_pretty(&verdict)
        .map_err(|e| Error::Internal(format!("cannot serialize verdict: {e}")))?;
    Ok(text + "\n")
}

fn simulate_rows(args: &SimulateArgs) -> Result<Vec<SweepRow>> {
    let p1 = parse_distribution(&args.p1)?;
    let p2 = parse_distribution(&args.p2)?;
    let change_fraction = match (&args.alpha, &args.alpha_grid) {
        (Some(a), _) => ChangeFraction::Fixed(*a),
        (None, Some(g)) => ChangeFraction::WorstCaseGrid(parse_real_list(g, "alpha-grid")?),
        (None, None) => ChangeFraction::grid(args.theta, args.grid_points),
    };
    let spec = TrialSpec {
        p1,
        p2,
        n: args.n,
        r: args.r,
        theta: args.theta,
        change_fraction,
        trials: args.trials as usize,
        seed: args.seed,
    };
    let mode = args
        .threshold_mode
        .map(ThresholdMode::from)
        .unwrap_or(if args.t == 0.0 {
            ThresholdMode::LargeDevAchievability
        } else {
            ThresholdMode::ModerateDev
        });
    let config = ProblemConfig {
        n: args.n,
        r: args.r,
        theta: args.theta,
        lambda: args.lambda,
        t: args.t,
        delta: 0,
        threshold_mode: mode,
        seed: args.seed,
    };
    let run = || -> Result<Vec<SweepRow>> {
        match (&args.delta_bar_grid, args.delta) {
            (Some(grid), _) => {
                let grid = parse_real_list(grid, "delta-bar-grid")?;
                phase_transition_sweep(&spec, &config, &grid)
            }
            (None, Some(delta)) => {
                let config = ProblemConfig {
                    delta,
                    ..config.clone()
                };
                let scale = (args.n as f64).powf(1.0 - args.t / 2.0);
                Ok(vec![SweepRow {
                    delta_bar: delta as f64 / scale,
                    delta,
                    n: args.n,
                    lambda: args.lambda,
                    report: estimate(&spec, &config)?,
                }])
            }
            (None, None) => Err(Error::param("delta", "give --delta-bar-grid or --delta")),
        }
    };
    match args.workers {
        None => run(),
        Some(0) => Err(Error::param("workers", "must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?
            .install(run),
    }
}

pub fn render_simulate(args: &SimulateArgs) -> Result<String> {
    let rows = simulate_rows(args)?;
    match args.format {
        Format::Csv => {
            let mut csv =
                String::from("delta_bar,n,lambda,undetected_rate,erasure_rate,wilson_halfwidth\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    format_sig6(row.delta_bar),
                    row.n,
                    format_sig6(row.lambda),
                    format_sig6(row.report.worst_undetected_rate),
                    format_sig6(row.report.worst_erasure_rate),
                    format_sig6(row.report.worst_wilson_95_halfwidth),
                ));
            }
            Ok(csv)
        }
        Format::Json => serde_json::to_string_pretty(&rows)
            .map(|s| s + "\n")
            .map_err(|e| Error::Internal(format!("cannot serialize report: {e}"))),
    }
}

pub fn render_divergence(args: &DivergenceArgs) -> Result<String> {
    let p1 = parse_distribution(&args.p1)?;
    let p2 = parse_distribution(&args.p2)?;
    let a = match (args.a, args.beta, args.r) {
        (Some(a), _, _) => a,
        (None, Some(beta), Some(r)) => {
            if r.is_nan() || r <= 0.0 {
                return Err(Error::param("r", format!("{r} must be positive")));
            }
            beta / r
        }
        _ => 1.0,
    };
    let lines: [(&str, Result<f64>); 6] = [
        ("kl_forward", kl(&p1, &p2).map(f64::from)),
        ("kl_reverse", kl(&p2, &p1).map(f64::from)),
        ("gjs", gjs(&p1, &p2, a).map(f64::from)),
        ("chi2_forward", chi2(&p1, &p2).map(f64::from)),
        ("chi2_reverse", chi2(&p2, &p1).map(f64::from)),
        ("sym_chi2", sym_chi2(&p1, &p2).map(f64::from)),
    ];
    let mut text = String::new();
    for (name, value) in lines {
        match value {
            Ok(v) => text.push_str(&format!("{name} {}\n", format_sig6(v))),
            Err(Error::AlphabetMismatch { left, right }) => {
                return Err(Error::AlphabetMismatch { left, right })
            }
            Err(e) => text.push_str(&format!("{name} error: {e}\n")),
        }
    }
    Ok(text)
}

fn replay(args: &ReplayArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    let temp;
    let dir = match &args.out_dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            d.clone()
        }
        None => {
            temp = std::env::temp_dir().join(format!("typecpd-replay-{}", std::process::id()));
            std::fs::create_dir_all(&temp)?;
            temp
        }
    };
    let original = manifest
        .outputs
        .first()
        .ok_or_else(|| Error::param("manifest", "records no outputs"))?;
    let file_name = Path::new(&original.path)
        .file_name()
        .ok_or_else(|| Error::param("manifest", "output path has no file name"))?;
    let target = std::path::absolute(dir.join(file_name))?;
    let bad_params =
        |e: serde_json::Error| Error::param("manifest", format!("bad parameters: {e}"));
    let mut sink = Vec::new();
    match manifest.command.as_str() {
        "resolution" => {
            let mut a: ResolutionArgs =
                serde_json::from_value(manifest.params.clone()).map_err(bad_params)?;
            a.out = Some(target.clone());
            execute_resolution(&a, &mut sink)?;
        }
        "detect" => {
            let mut a: DetectArgs =
                serde_json::from_value(manifest.params.clone()).map_err(bad_params)?;
            a.out = Some(target.clone());
            execute_detect(&a, &mut sink)?;
        }
        "simulate" => {
            let mut a: SimulateArgs =
                serde_json::from_value(manifest.params.clone()).map_err(bad_params)?;
            a.out = Some(target.clone());
            execute_simulate(&a, &mut sink)?;
        }
        "divergence" => {
            let mut a: DivergenceArgs =
                serde_json::from_value(manifest.params.clone()).map_err(bad_params)?;
            a.out = Some(target.clone());
            execute_divergence(&a, &mut sink)?;
        }
        other => {
            return Err(Error::param(
                "manifest",
                format!("unknown command `{other}`"),
            ))
        }
    }
    let replayed = sha256_file(&target)?;
    if replayed == original.sha256 {
        writeln!(stdout, "match {} {}", target.display(), replayed)?;
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "checksum mismatch for {}: recorded {}, replayed {}",
            target.display(),
            original.sha256,
            replayed
        )))
    }
}

fn execute_resolution(a: &ResolutionArgs, stdout: &mut dyn Write) -> Result<()> {
    let csv = render_resolution(a)?;
    emit(stdout, "resolution", a, a.out.as_deref(), None, &csv)
}

fn execute_detect(a: &DetectArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = render_detect(a)?;
    emit(stdout, "detect", a, a.out.as_deref(), None, &text)
}

fn execute_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = render_simulate(a)?;
    emit(stdout, "simulate", a, a.out.as_deref(), Some(a.seed), &text)
}

fn execute_divergence(a: &DivergenceArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = render_divergence(a)?;
    emit(stdout, "divergence", a, a.out.as_deref(), None, &text)
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Resolution(a) => execute_resolution(a, stdout),
        Command::Detect(a) => execute_detect(a, stdout),
        Command::Simulate(a) => execute_simulate(a, stdout),
        Command::Divergence(a) => execute_divergence(a, stdout),
        Command::Replay(a) => replay(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{}", rendered.ansi())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
