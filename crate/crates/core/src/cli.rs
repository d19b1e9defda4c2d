//! `relimon` command-line front end.
//!
//! Exit codes: 0 in control (or success), 1 error, 2 out of control.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::failure_data::{
    musa_fixture, parse_failure_data, serialize_failure_data, FailureSeries, InputFormat,
};
use crate::go_model::GoParams;
use crate::mle::SolverConfig;
use crate::report::{run_pipeline, FitSummary, ModelSource, Pipeline, RunReport};
use crate::simulate::{simulate_epochs, Horizon, SimConfig, RNG_ALGORITHM};
use crate::spc::{MScale, Verdict};
use crate::svg::{render_chart, SvgOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OUT_OF_CONTROL: i32 = 2;

/// Input sentinel for the bundled Musa (1975) data set.
pub const MUSA_SENTINEL: &str = "musa";

const PRECEDENCE: &str = "Settings precedence: command-line flag > environment \
(RELIMON_BRACKET_LO, RELIMON_BRACKET_HI, RELIMON_TOL) > built-in default.\n\
Exit codes: 0 in control / success, 1 error, 2 out of control.";

#[derive(Debug, Parser)]
#[command(
    name = "relimon",
    version,
    about = "Software reliability monitoring with order-statistics mean value charts",
    after_help = PRECEDENCE
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit (a, b) by maximum likelihood and print the estimates as JSON.
    Fit(FitCmd),
    /// Fit (or take --a/--b), then print the control limits as JSON.
    Limits(LimitsCmd),
    /// Fit and print the mean value chart as CSV.
    Chart(ChartCmd),
    /// Fit, chart and classify points; exit 2 when out of control.
    Detect(ChartCmd),
    /// Draw an NHPP sample path and print it in the plain input format.
    Simulate(SimulateCmd),
    /// Run the whole pipeline and write report.json, chart.csv and chart.svg.
    Report(ReportCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Plain,
    Csv,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Plain => InputFormat::Plain,
            FormatArg::Csv => InputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Base,
    Ordered,
}

impl From<ScaleArg> for MScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Base => MScale::Base,
            ScaleArg::Ordered => MScale::Ordered,
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input file, `-` for stdin, or `musa` for the bundled data set.
    #[arg(long, default_value = MUSA_SENTINEL)]
    input: String,

    #[arg(long, value_enum, default_value = "plain")]
    format: FormatArg,

    /// Subgroup size r.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Lower end of the search bracket for b (default 1e-6 / s_n).
    #[arg(long, env = "RELIMON_BRACKET_LO")]
    bracket_lo: Option<f64>,

    /// Upper end of the search bracket for b (default 50 / s_n).
    #[arg(long, env = "RELIMON_BRACKET_HI")]
    bracket_hi: Option<f64>,

    /// Relative score tolerance: stop when |g(b)| <= tol * n / b.
    #[arg(long, env = "RELIMON_TOL", default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

/// Known parameters: skip estimation and chart with these.
#[derive(Debug, Args)]
struct KnownArgs {
    /// Known a (requires --b).
    #[arg(long = "a", requires = "known_b")]
    known_a: Option<f64>,

    /// Known b (requires --a).
    #[arg(long = "b", id = "known_b", requires = "known_a")]
    known_b: Option<f64>,
}

impl KnownArgs {
    fn params(&self) -> Result<Option<GoParams>> {
        match (self.known_a, self.known_b) {
            (Some(a), Some(b)) => Ok(Some(GoParams::new(a, b)?)),
            _ => Ok(None),
        }
    }
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            bracket_lo: self.bracket_lo,
            bracket_hi: self.bracket_hi,
            score_tol: self.tol,
            max_iterations: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct ChartArgs {
    /// Difference the base mean value a(1-e^{-bt}) or the ordered [a(1-e^{-bt})]^r.
    #[arg(long, value_enum, default_value = "base")]
    m_scale: ScaleArg,

    /// Log-scale y axis in SVG output (the default).
    #[arg(long, overrides_with = "linear_y")]
    log_y: bool,

    /// Linear y axis in SVG output.
    #[arg(long, overrides_with = "log_y")]
    linear_y: bool,
}

impl ChartArgs {
    fn svg_options(&self) -> SvgOptions {
        SvgOptions {
            log_y: !self.linear_y,
            ..SvgOptions::default()
        }
    }
}

#[derive(Debug, Args)]
struct FitCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct LimitsCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    known: KnownArgs,
}

#[derive(Debug, Args)]
struct ChartCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    known: KnownArgs,
    #[command(flatten)]
    chart: ChartArgs,
    /// Also write chart.csv and chart.svg into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    known: KnownArgs,
    #[command(flatten)]
    chart: ChartArgs,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("stop").required(true).args(["horizon", "expected", "count"])))]
struct SimulateCmd {
    /// Expected total number of failures.
    #[arg(long)]
    a: f64,
    /// Failure detection rate.
    #[arg(long)]
    b: f64,
    /// Observation horizon in time units.
    #[arg(long)]
    horizon: Option<f64>,
    /// Horizon chosen so that m(horizon) equals this expected count.
    #[arg(long)]
    expected: Option<f64>,
    /// Stop after this many failures.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    replications: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Fit(cmd) => cmd_fit(&cmd, out),
        Command::Limits(cmd) => cmd_limits(&cmd, out),
        Command::Chart(cmd) => cmd_chart(&cmd, out),
        Command::Detect(cmd) => cmd_detect(&cmd, out),
        Command::Simulate(cmd) => cmd_simulate(&cmd, out),
        Command::Report(cmd) => cmd_report(&cmd, out),
    }
}

fn load_series(data: &DataArgs) -> Result<FailureSeries> {
    if data.input == MUSA_SENTINEL {
        return Ok(musa_fixture());
    }
    let text = if data.input == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(&data.input)
            .map_err(|e| Error::Io(format!("reading {}: {e}", data.input)))?
    };
    parse_failure_data(&text, data.format.into(), data.input.as_str())
}

fn pipeline(
    data: &DataArgs,
    solver: &SolverArgs,
    known: Option<&KnownArgs>,
    m_scale: MScale,
) -> Result<(FailureSeries, Pipeline)> {
    let source = match known.map(KnownArgs::params).transpose()?.flatten() {
        Some(params) => ModelSource::Known(params),
        None => ModelSource::Fit(solver.config()),
    };
    let series = load_series(data)?;
    let p = run_pipeline(&series, data.order as usize, &source, m_scale)?;
    Ok((series, p))
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{text}")?;
    Ok(())
}

fn not_converged(p: &Pipeline) -> i32 {
    if let Some(fit) = &p.fit {
        eprintln!(
            "error: solver did not converge after {} iterations (|g(b)| = {:e})",
            fit.iterations, fit.residual
        );
    }
    EXIT_ERROR
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::InControl => EXIT_OK,
        Verdict::OutOfControl => EXIT_OUT_OF_CONTROL,
    }
}

fn cmd_fit(cmd: &FitCmd, out: &mut dyn Write) -> Result<i32> {
    let (_, p) = pipeline(&cmd.data, &cmd.solver, None, MScale::Base)?;
    let fit = p.fit.as_ref().expect("fit command always estimates");
    write_json(out, &FitSummary::from(fit))?;
    Ok(if p.converged() {
        EXIT_OK
    } else {
        not_converged(&p)
    })
}

fn cmd_limits(cmd: &LimitsCmd, out: &mut dyn Write) -> Result<i32> {
    let (_, p) = pipeline(&cmd.data, &cmd.solver, Some(&cmd.known), MScale::Base)?;
    if !p.converged() {
        return Ok(not_converged(&p));
    }
    let params = p.model.params();
    write_json(
        out,
        &serde_json::json!({
            "model": { "a": params.a(), "b": params.b(), "r": p.model.order_r() },
            "limits": p.limits,
        }),
    )?;
    Ok(EXIT_OK)
}

fn write_chart_files(dir: &Path, p: &Pipeline, opts: &SvgOptions) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("creating {}: {e}", dir.display())))?;
    write_file(&dir.join("chart.csv"), &p.chart.to_csv())?;
    write_file(&dir.join("chart.svg"), &render_chart(&p.chart, opts))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

fn cmd_chart(cmd: &ChartCmd, out: &mut dyn Write) -> Result<i32> {
    let (_, p) = pipeline(
        &cmd.data,
        &cmd.solver,
        Some(&cmd.known),
        cmd.chart.m_scale.into(),
    )?;
    if !p.converged() {
        return Ok(not_converged(&p));
    }
    out.write_all(p.chart.to_csv().as_bytes())?;
    if let Some(dir) = &cmd.out {
        write_chart_files(dir, &p, &cmd.chart.svg_options())?;
    }
    Ok(EXIT_OK)
}

fn cmd_detect(cmd: &ChartCmd, out: &mut dyn Write) -> Result<i32> {
    let (_, p) = pipeline(
        &cmd.data,
        &cmd.solver,
        Some(&cmd.known),
        cmd.chart.m_scale.into(),
    )?;
    if !p.converged() {
        return Ok(not_converged(&p));
    }
    write_json(out, &p.detection)?;
    if let Some(dir) = &cmd.out {
        write_chart_files(dir, &p, &cmd.chart.svg_options())?;
    }
    Ok(verdict_code(p.detection.verdict))
}

fn cmd_report(cmd: &ReportCmd, out: &mut dyn Write) -> Result<i32> {
    let (series, p) = pipeline(
        &cmd.data,
        &cmd.solver,
        Some(&cmd.known),
        cmd.chart.m_scale.into(),
    )?;
    if !p.converged() {
        return Ok(not_converged(&p));
    }
    let report = RunReport::new(&series, &p);
    write_chart_files(&cmd.out, &p, &cmd.chart.svg_options())?;
    write_file(&cmd.out.join("report.json"), &report.to_json())?;
    writeln!(
        out,
        "{}: {} points, {} alarm(s), {} above UCL -> {}",
        cmd.out.display(),
        report.summary.points,
        report.summary.alarms,
        report.summary.above_ucl,
        report.summary.verdict.as_str()
    )?;
    Ok(verdict_code(p.detection.verdict))
}

fn cmd_simulate(cmd: &SimulateCmd, out: &mut dyn Write) -> Result<i32> {
    let params = GoParams::new(cmd.a, cmd.b)?;
    let horizon = match (cmd.horizon, cmd.expected, cmd.count) {
        (Some(t), None, None) => Horizon::Time(t),
        (None, Some(m), None) => Horizon::Time(SimConfig::time_for_expected(params, m)?),
        (None, None, Some(k)) => Horizon::Failures(k),
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --horizon, --expected, --count".into(),
            ))
        }
    };
    let cfg = SimConfig::new(params, horizon, cmd.seed, cmd.replications as usize)?;

    writeln!(
        out,
        "# relimon simulate a={} b={} horizon={} seed={} rng={}",
        cmd.a,
        cmd.b,
        match horizon {
            Horizon::Time(t) => format!("t:{t}"),
            Horizon::Failures(k) => format!("failures:{k}"),
        },
        cmd.seed,
        RNG_ALGORITHM
    )?;
    for k in 0..cfg.replications {
        let epochs = simulate_epochs(&cfg, k);
        if cfg.replications > 1 {
            writeln!(out, "# replication {k}: {} failures", epochs.len())?;
        }
        if epochs.is_empty() {
            continue;
        }
        let mut prev = 0.0;
        let deltas: Vec<f64> = epochs
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect();
        let series = FailureSeries::new(deltas, "simulated")?;
        out.write_all(serialize_failure_data(&series, InputFormat::Plain).as_bytes())?;
    }
    Ok(EXIT_OK)
}
