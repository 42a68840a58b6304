//! The `seedbench` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 trial failure. Output is assembled in memory and written only once
//! the command has succeeded, so a failing command leaves nothing behind.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::demo::demo_registry;
use crate::error::{Error, Result};
use crate::model::PairwiseMethod;
use crate::ranking::{cd_analysis, CdResult};
use crate::render::{render_cd_svg, render_cells_svg, CdStyle};
use crate::report::{
    cache_load, cd_text, pairwise_table, pairwise_text, summary_table, summary_text, to_latex,
    BenchmarkReport, LatexOptions, LatexTable,
};
use crate::runner::{run_benchmark, Registry, RunConfig};
use crate::synthetic::{estimate_fwer, NullDesign};

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "BENCH_CACHE_DIR";
const DEFAULT_CACHE_NAME: &str = "report.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_TRIAL: i32 = 3;

#[derive(Parser)]
#[command(name = "seedbench", version, about = "Multi-seed benchmark statistics", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a config and cache the report.
    Run(RunArgs),
    /// Print the summary table of a cached report.
    Report(ReportArgs),
    /// Print the Holm-corrected pairwise comparisons.
    Pairwise(PairwiseArgs),
    /// Print the Friedman/Nemenyi analysis and optionally draw it.
    Cd(CdArgs),
    /// Write a LaTeX table or an SVG figure.
    Export(ExportArgs),
    /// Estimate the family-wise error rate on simulated null benchmarks.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Cache file to write; defaults to the config's `cache`, then
    /// `$BENCH_CACHE_DIR/report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InputArgs {
    /// Cached report; defaults to `$BENCH_CACHE_DIR/report.json`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    T,
    Wilcoxon,
    Both,
}

impl From<MethodArg> for PairwiseMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::T => PairwiseMethod::T,
            MethodArg::Wilcoxon => PairwiseMethod::Wilcoxon,
            MethodArg::Both => PairwiseMethod::Both,
        }
    }
}

#[derive(Args)]
struct PairwiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    /// Restrict to one task.
    #[arg(long)]
    task: Option<String>,
}

#[derive(Args)]
struct CdArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Significance level; recomputes the analysis if it differs from the
    /// report's.
    #[arg(long)]
    alpha: Option<f64>,
    /// Write the diagram here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Latex,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Summary,
    Pairwise,
    Cd,
    Cells,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: FormatArg,
    #[arg(long, value_enum)]
    which: WhichArg,
    /// Task for `--which cells`.
    #[arg(long)]
    task: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    /// LaTeX macro wrapping winning cells.
    #[arg(long)]
    winner_macro: Option<String>,
    /// LaTeX macro wrapping tied cells.
    #[arg(long)]
    tie_macro: Option<String>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 2000)]
    runs: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "t")]
    method: MethodArg,
    /// Models per simulated benchmark.
    #[arg(long, default_value_t = 4)]
    models: usize,
    #[arg(long, default_value_t = 1)]
    tasks: usize,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A run config file: a [`RunConfig`] plus an optional inline registry.
/// Without one, the built-in demo registry is used.
#[derive(Deserialize)]
struct ConfigFile {
    #[serde(flatten)]
    run: RunConfig,
    #[serde(default)]
    registry: Option<Registry>,
}

enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Files to create and text for stdout, committed only on success.
#[derive(Default)]
struct Output {
    stdout: String,
    files: Vec<(PathBuf, String)>,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().ok_or_else(|| {
        Error::InvalidArgument(format!("`{}` is not a file path", path.display()))
    })?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn default_path(
    given: Option<PathBuf>,
    cache_dir: Option<&Path>,
    what: &str,
) -> CmdResult<PathBuf> {
    given
        .or_else(|| cache_dir.map(|d| d.join(DEFAULT_CACHE_NAME)))
        .ok_or_else(|| Failure::Usage(format!("{what} is required (or set {CACHE_DIR_ENV})")))
}

fn load(input: Option<PathBuf>, cache_dir: Option<&Path>) -> CmdResult<BenchmarkReport> {
    let path = default_path(input, cache_dir, "--in")?;
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no such file: {}", path.display()),
        ))
        .into());
    }
    Ok(cache_load(&path)?)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn cmd_run(a: RunArgs, cache_dir: Option<&Path>) -> CmdResult<Output> {
    let text = fs::read_to_string(&a.config).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", a.config.display()),
        ))
    })?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(Error::from)?;
    let mut config = file.run;
    if let Some(seeds) = a.seed_list {
        config.seeds = seeds;
    }
    if let Some(alpha) = a.alpha {
        config.report.alpha = alpha;
    }
    if let Some(p) = a.parallelism {
        config.parallelism = p;
    }
    let out = match a.out.or_else(|| config.cache.clone()) {
        Some(p) => p,
        None => default_path(None, cache_dir, "--out")?,
    };
    config.cache = Some(out);
    let registry = file.registry.unwrap_or_else(demo_registry);
    let executor = config.build_executor()?;
    let report = run_benchmark(&config, &registry, &executor)?;
    Ok(Output {
        stdout: if a.json {
            json(&summary_table(&report))
        } else {
            summary_text(&report)
        },
        files: Vec::new(),
    })
}

fn cmd_report(a: ReportArgs, cache_dir: Option<&Path>) -> CmdResult<Output> {
    let report = load(a.input.input, cache_dir)?;
    let stdout = if a.input.json {
        json(&summary_table(&report))
    } else {
        summary_text(&report)
    };
    Ok(Output {
        stdout,
        files: Vec::new(),
    })
}

fn filter_task(report: &mut BenchmarkReport, task: Option<&str>) -> CmdResult<()> {
    if let Some(task) = task {
        report.tensor.task(task)?;
        report.pairwise.retain(|p| p.task == task);
    }
    Ok(())
}

fn cmd_pairwise(a: PairwiseArgs, cache_dir: Option<&Path>) -> CmdResult<Output> {
    let mut report = load(a.input.input, cache_dir)?;
    filter_task(&mut report, a.task.as_deref())?;
    let method = a.method.into();
    let stdout = if a.input.json {
        json(&pairwise_table(&report, method))
    } else {
        pairwise_text(&report, method)
    };
    Ok(Output {
        stdout,
        files: Vec::new(),
    })
}

fn cd_for(report: &BenchmarkReport, alpha: Option<f64>) -> CmdResult<CdResult> {
    match (&report.cd, alpha) {
        (Some(cd), None) => Ok(cd.clone()),
        (Some(cd), Some(a)) if a == cd.alpha => Ok(cd.clone()),
        (Some(cd), Some(a)) => Ok(CdResult::from_table(cd.table.clone(), a)?),
        (None, a) => Ok(cd_analysis(
            &report.tensor,
            a.unwrap_or(report.config.alpha),
        )?),
    }
}

fn cmd_cd(a: CdArgs, cache_dir: Option<&Path>) -> CmdResult<Output> {
    let report = load(a.input.input, cache_dir)?;
    let cd = cd_for(&report, a.alpha)?;
    let stdout = if a.input.json {
        json(&cd)
    } else {
        cd_text(&cd)
    };
    let files = a
        .svg
        .map(|p| (p, render_cd_svg(&cd, &CdStyle::default())))
        .into_iter()
        .collect();
    Ok(Output { stdout, files })
}

fn cmd_export(a: ExportArgs, cache_dir: Option<&Path>) -> CmdResult<Output> {
    let report = load(a.input, cache_dir)?;
    let text = match (a.format, a.which) {
        (FormatArg::Latex, WhichArg::Summary) | (FormatArg::Latex, WhichArg::Pairwise) => {
            let opts = LatexOptions {
                winner_macro: a.winner_macro,
                tie_macro: a.tie_macro,
            };
            let which = if a.which == WhichArg::Summary {
                LatexTable::Summary
            } else {
                LatexTable::Pairwise(a.method.into())
            };
            to_latex(&report, which, &opts)
        }
        (FormatArg::Svg, WhichArg::Cd) => {
            render_cd_svg(&cd_for(&report, None)?, &CdStyle::default())
        }
        (FormatArg::Svg, WhichArg::Cells) => {
            let task = a
                .task
                .ok_or_else(|| Failure::Usage("--which cells needs --task".into()))?;
            report.tensor.task(&task)?;
            let rows: Vec<_> = summary_table(&report)
                .into_iter()
                .filter(|r| r.task == task)
                .collect();
            render_cells_svg(&rows)
        }
        (FormatArg::Latex, _) => {
            return Err(Failure::Usage(
                "LaTeX export supports --which summary|pairwise".into(),
            ))
        }
        (FormatArg::Svg, _) => {
            return Err(Failure::Usage(
                "SVG export supports --which cd|cells".into(),
            ))
        }
    };
    Ok(match a.out {
        Some(p) => Output {
            stdout: String::new(),
            files: vec![(p, text)],
        },
        None => Output {
            stdout: text,
            files: Vec::new(),
        },
    })
}

fn cmd_calibrate(a: CalibrateArgs) -> CmdResult<Output> {
    let design = NullDesign {
        k: a.models,
        n_tasks: a.tasks,
        seeds: a.seeds,
        noise_sd: a.noise_sd,
    };
    let est = estimate_fwer(a.runs, design, a.alpha, a.method.into(), a.seed)?;
    Ok(Output {
        stdout: json(&est),
        files: Vec::new(),
    })
}

fn exit_code(e: &Error) -> i32 {
    if e.is_trial_failure() {
        EXIT_TRIAL
    } else {
        EXIT_DATA
    }
}

/// Runs one invocation with an explicit default cache directory.
pub fn dispatch_with<I, T>(
    args: I,
    cache_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, cache_dir),
        Command::Report(a) => cmd_report(a, cache_dir),
        Command::Pairwise(a) => cmd_pairwise(a, cache_dir),
        Command::Cd(a) => cmd_cd(a, cache_dir),
        Command::Export(a) => cmd_export(a, cache_dir),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    let commit = result.and_then(|o| {
        for (path, text) in &o.files {
            write_atomic(path, text)?;
        }
        Ok(o.stdout)
    });
    match commit {
        Ok(stdout) => match out.write_all(stdout.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_DATA
            }
        },
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Engine(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one invocation, taking the default cache directory from
/// `BENCH_CACHE_DIR`.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let dir = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from);
    dispatch_with(args, dir.as_deref(), out, err)
}
