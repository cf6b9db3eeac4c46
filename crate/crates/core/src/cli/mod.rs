//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 parse error (command
//! line or circuit file), 3 capability or domain error, 4 configuration
//! error.

mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algorithms::dj::{dj_run, DJOracle, DEFAULT_SQUEEZE};
use crate::algorithms::grover::{grover_measure, grover_search, GroverProblem, WindowOracle};
use crate::circuit::{self, Backend, Circuit, ExecutionResult, FinalState, Outcome};
use crate::error::{CvError, CvResult};
use crate::fock::DEFAULT_CUTOFF;
use crate::numerics::{Grid, HBar, DEFAULT_HBAR};
use crate::rng::SimRng;
use crate::wigner::{
    default_axis, wigner_from_fock, wigner_from_gaussian, wigner_from_grid,
    DEFAULT_AXIS_HALF_WIDTHS, DEFAULT_AXIS_POINTS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAPABILITY: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

pub const DEFAULT_GRID_POINTS: usize = 1024;

#[derive(Parser, Debug)]
#[command(name = "cvqsim", version, about = "Continuous-variable quantum circuit simulator")]
pub struct Cli {
    /// Value of hbar shared by every backend
    #[arg(long, global = true, default_value_t = DEFAULT_HBAR, allow_negative_numbers = true)]
    pub hbar: f64,
    /// Seed for all sampling
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file for the main result (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute a .cvq circuit and write the result as JSON
    Run(RunArgs),
    /// Execute a circuit and write the Wigner function of one mode
    Wigner(WignerArgs),
    /// Grover search along one continuous variable
    Grover(GroverArgs),
    /// Deutsch-Jozsa decision for a reference or user oracle
    Dj(DjArgs),
    /// Run the built-in invariant checks
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Grid,
    Gaussian,
    Fock,
}

#[derive(Args, Debug, Clone)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Gaussian)]
    pub backend: BackendKind,
    /// Grid points per mode
    #[arg(long = "n", default_value_t = DEFAULT_GRID_POINTS)]
    pub n_points: usize,
    /// Grid extent L (self-dual when absent)
    #[arg(long = "extent")]
    pub extent: Option<f64>,
    /// Fock cutoff per mode
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
}

impl BackendArgs {
    fn grid(&self, hbar: HBar) -> CvResult<Grid> {
        match self.extent {
            Some(l) => Grid::new(self.n_points, l, hbar),
            None => Grid::self_dual(self.n_points, hbar),
        }
    }

    fn backend(&self, hbar: HBar) -> CvResult<Backend> {
        Ok(match self.backend {
            BackendKind::Grid => Backend::Grid(self.grid(hbar)?),
            BackendKind::Gaussian => Backend::Gaussian { hbar },
            BackendKind::Fock => Backend::Fock { cutoff: self.cutoff, hbar },
        })
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Independent executions; shot i uses stream i of the seed
    #[arg(long, default_value_t = 1)]
    pub shots: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value_t = 0)]
    pub mode: usize,
    /// Samples per axis
    #[arg(long, default_value_t = DEFAULT_AXIS_POINTS)]
    pub points: usize,
    /// Axis half-width in vacuum standard deviations sqrt(hbar/2)
    #[arg(long, default_value_t = DEFAULT_AXIS_HALF_WIDTHS)]
    pub half_width: f64,
    /// Centre of the x axis
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_center: f64,
    /// Centre of the p axis
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p_center: f64,
    #[arg(long, value_enum, default_value_t = WignerFormat::Csv)]
    pub format: WignerFormat,
    /// Also write a grayscale PGM heatmap here
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GroverArgs {
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    /// Defaults to floor(pi/4 sqrt(N))
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Start from a Gaussian instead of a grid delta
    #[arg(long)]
    pub realistic: bool,
    /// Squeeze factor of the realistic start state (99% inside one bin when absent)
    #[arg(long = "R")]
    pub squeeze_factor: Option<f64>,
    /// Write the per-iteration trace CSV here
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DjArgs {
    /// constant, constant-shift, balanced, or a path to a one-mode .cvq oracle
    #[arg(long, default_value = "constant")]
    pub oracle: String,
    #[arg(long, default_value_t = 100)]
    pub shots: usize,
    #[arg(long, default_value_t = DEFAULT_SQUEEZE)]
    pub squeeze: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Machine-readable report
    #[arg(long)]
    pub json: bool,
    /// Deliberately break one check: hbar-mismatch
    #[arg(long)]
    pub inject: Option<String>,
}

/// Exit code for an error.
pub fn exit_code(e: &CvError) -> i32 {
    match e {
        CvError::Parse(_) => EXIT_PARSE,
        CvError::Config(_) | CvError::Resource(_) | CvError::Io(_) | CvError::Json(_) => EXIT_CONFIG,
        _ => EXIT_CAPABILITY,
    }
}

/// Run the CLI on `args` (including the program name), writing to the given sinks.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CvResult<i32> {
    let hbar = HBar::new(cli.hbar).map_err(|e| CvError::Config(e.to_string()))?;
    let out = Output { path: cli.out.as_deref() };
    match &cli.command {
        Command::Run(a) => cmd_run(a, hbar, cli.seed, &out, stdout),
        Command::Wigner(a) => cmd_wigner(a, hbar, cli.seed, &out, stdout, stderr),
        Command::Grover(a) => cmd_grover(a, hbar, cli.seed, &out, stdout),
        Command::Dj(a) => cmd_dj(a, hbar, cli.seed, &out, stdout),
        Command::Verify(a) => verify::cmd_verify(a, hbar, &out, stdout),
    }
}

struct Output<'a> {
    path: Option<&'a Path>,
}

impl Output<'_> {
    fn write(&self, stdout: &mut dyn Write, bytes: &[u8]) -> CvResult<()> {
        match self.path {
            Some(p) => fs::write(p, bytes)?,
            None => stdout.write_all(bytes)?,
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, stdout: &mut dyn Write, value: &T) -> CvResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(stdout, s.as_bytes())
    }
}

fn load_circuit(path: &Path) -> CvResult<Circuit> {
    let src = fs::read_to_string(path)?;
    circuit::parse(&src).map_err(|e| {
        let mut e = e;
        e.msg = format!("{}: {}", path.display(), e.msg);
        CvError::Parse(e)
    })
}

#[derive(Serialize)]
struct RunOutput {
    #[serde(flatten)]
    result: ExecutionResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    shot_outcomes: Vec<Vec<Outcome>>,
}

fn cmd_run(a: &RunArgs, hbar: HBar, seed: u64, out: &Output, stdout: &mut dyn Write) -> CvResult<i32> {
    let c = load_circuit(&a.input)?;
    let backend = a.backend.backend(hbar)?;
    if a.shots == 0 {
        return Err(CvError::Config("shots must be at least 1".into()));
    }
    let root = SimRng::seed_from(seed);
    let result = circuit::execute(&c, &backend, &mut root.stream(0))?;
    let mut shot_outcomes = Vec::new();
    if a.shots > 1 {
        shot_outcomes.push(result.outcomes.clone());
        for i in 1..a.shots {
            let (o, _) = circuit::run(&c, &backend, &mut root.stream(i as u64))?;
            shot_outcomes.push(o);
        }
    }
    out.json(stdout, &RunOutput { result, shot_outcomes })?;
    Ok(EXIT_OK)
}

fn cmd_wigner(
    a: &WignerArgs,
    hbar: HBar,
    seed: u64,
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CvResult<i32> {
    let c = load_circuit(&a.input)?;
    if a.mode >= c.mode_count() {
        return Err(CvError::Domain(format!("mode {} out of range for {} mode(s)", a.mode, c.mode_count())));
    }
    if a.points < 2 {
        return Err(CvError::Config("need at least 2 points per axis".into()));
    }
    let backend = a.backend.backend(hbar)?;
    let axis = default_axis(hbar, a.half_width, a.points);
    let xs: Vec<f64> = axis.iter().map(|v| v + a.x_center).collect();
    let ps: Vec<f64> = axis.iter().map(|v| v + a.p_center).collect();
    let (_, state) = circuit::run(&c, &backend, &mut SimRng::seed_from(seed).stream(0))?;
    let w = match state {
        FinalState::Grid(s) => wigner_from_grid(&s, &xs, &ps)?,
        FinalState::Gaussian { state, mode_map } => {
            let k = mode_map[a.mode]
                .ok_or_else(|| CvError::Domain(format!("mode {} was measured and traced out", a.mode)))?;
            wigner_from_gaussian(&state, k, &xs, &ps)?
        }
        FinalState::Fock(s) => wigner_from_fock(&s, a.backend.grid(hbar)?, &xs, &ps)?,
    };
    let mut bytes = Vec::new();
    match a.format {
        WignerFormat::Csv => w.write_csv(&mut bytes)?,
        WignerFormat::Json => {
            bytes = w.to_json()?.into_bytes();
            bytes.push(b'\n');
        }
    }
    out.write(stdout, &bytes)?;
    if let Some(p) = &a.pgm {
        let mut f = fs::File::create(p)?;
        w.write_pgm(&mut f)?;
    }
    writeln!(stderr, "normalization: {:.10}", w.normalization())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GroverSummary {
    success_prob_final: f64,
    iterations: usize,
    measured_bin: usize,
    target_bin: usize,
    realistic: bool,
}

fn cmd_grover(a: &GroverArgs, hbar: HBar, seed: u64, out: &Output, stdout: &mut dyn Write) -> CvResult<i32> {
    let problem = GroverProblem::new(a.bins, a.target, hbar)?;
    let oracle = WindowOracle::for_problem(&problem);
    let realistic = if a.realistic {
        Some(a.squeeze_factor.unwrap_or_else(|| problem.realistic_squeeze_factor()))
    } else {
        if a.squeeze_factor.is_some() {
            return Err(CvError::Config("--R only applies with --realistic".into()));
        }
        None
    };
    let trace = grover_search(&problem, &oracle, a.iterations, realistic)?;
    let measured_bin = grover_measure(&problem, &oracle, a.iterations, realistic, &mut SimRng::seed_from(seed))?;
    if let Some(p) = &a.trace {
        let mut bytes = Vec::new();
        trace.write_csv(&mut bytes)?;
        fs::write(p, bytes)?;
    }
    out.json(
        stdout,
        &GroverSummary {
            success_prob_final: trace.success_prob_final,
            iterations: trace.iterations_run,
            measured_bin,
            target_bin: a.target,
            realistic: a.realistic,
        },
    )?;
    Ok(EXIT_OK)
}

fn cmd_dj(a: &DjArgs, hbar: HBar, seed: u64, out: &Output, stdout: &mut dyn Write) -> CvResult<i32> {
    let oracle = match a.oracle.as_str() {
        "constant" => DJOracle::constant(),
        "constant-shift" => DJOracle::constant_shift(1.0),
        "balanced" => DJOracle::balanced(),
        path => DJOracle::from_circuit(&load_circuit(Path::new(path))?)?,
    };
    let result = dj_run(&oracle, a.squeeze, hbar, &mut SimRng::seed_from(seed), a.shots)?;
    out.json(stdout, &result)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run_cli(std::iter::once("cvqsim").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn bad_flags_exit_2() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_PARSE);
        assert_eq!(run(&["grover", "--bins", "x"]).0, EXIT_PARSE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn grover_config_errors_exit_4() {
        assert_eq!(run(&["grover", "--bins", "63"]).0, EXIT_CONFIG);
        assert_eq!(run(&["--hbar", "-1", "dj"]).0, EXIT_CONFIG);
    }

    #[test]
    fn dj_reports_verdict() {
        let (code, out, _) = run(&["dj", "--oracle", "balanced", "--shots", "20"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "balanced");
    }
}
