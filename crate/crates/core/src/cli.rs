//! `p3p` command line: `solve`, `bench`, `time` and `ablate`.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 degenerate geometry.
//! Results go to standard output (or `--out`); diagnostics to standard error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{
    run_ablation, run_benchmark_with, run_timing, AblationColumn, AggregateReport, TimingStats,
    TrialSpec, TABLE_ROWS,
};
use crate::error::Error;
use crate::geometry::{P3pProblem, Solution};
use crate::p3p::{solve, DepthSource, SolverConfig, MAX_GN_ITERATIONS};
use crate::quartic::QuarticMethod;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "p3p",
    version,
    about = "Three-point absolute pose solver and its synthetic benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem read from a JSON file and print the candidate poses.
    Solve(SolveArgs),
    /// Accuracy benchmark on synthetic problems.
    Bench(BenchArgs),
    /// Per-call timing on synthetic problems (single-threaded).
    Time(TimeArgs),
    /// Run the benchmark once per heuristic ablation.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Adaptive,
    /// Ferrari–Lagrange only
    Fl,
    /// Classical Ferrari only
    Cf,
}

impl From<VariantArg> for QuarticMethod {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Adaptive => QuarticMethod::Adaptive,
            VariantArg::Fl => QuarticMethod::FerrariLagrange,
            VariantArg::Cf => QuarticMethod::Classical,
        }
    }
}

/// Which squared distance (s12, s13, s23) fixes the scale `d3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthArg {
    #[value(name = "eq14", alias = "s12")]
    S12,
    #[value(name = "eq15", alias = "s13")]
    S13,
    #[value(name = "eq16", alias = "s23")]
    S23,
}

impl From<DepthArg> for DepthSource {
    fn from(d: DepthArg) -> Self {
        match d {
            DepthArg::S12 => DepthSource::Distance12,
            DepthArg::S13 => DepthSource::Distance13,
            DepthArg::S23 => DepthSource::Distance23,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Gauss–Newton iterations on the depths.
    #[arg(long = "gn-iters", default_value_t = 2,
          value_parser = clap::value_parser!(u32).range(0..=MAX_GN_ITERATIONS as i64))]
    pub gn_iters: u32,
    /// Quartic solver selection.
    #[arg(long, value_enum, default_value_t = VariantArg::Adaptive)]
    pub variant: VariantArg,
    /// Keep the input order instead of relabeling by bearing cosines.
    #[arg(long = "no-reindex")]
    pub no_reindex: bool,
    /// Law-of-cosines identity used to recover d3.
    #[arg(long, value_enum, default_value_t = DepthArg::S23)]
    pub d3: DepthArg,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            gn_iterations: self.gn_iters,
            force_variant: self.variant.into(),
            reindex_enabled: !self.no_reindex,
            d3_source: self.d3.into(),
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// JSON problem file.
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..4097))]
    pub threads: Option<u64>,
    /// Also write one JSON line per trial to this file.
    #[arg(long = "dump-trials")]
    pub dump_trials: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Consecutive solves per problem.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeats: u32,
    /// Accepted for symmetry with `bench`; timing always runs on one thread.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..4097))]
    pub threads: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..4097))]
    pub threads: Option<u64>,
}

/// Failure of one subcommand, already mapped to its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_degenerate_geometry() {
            EXIT_DEGENERATE
        } else {
            EXIT_USAGE
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

#[derive(Serialize)]
struct BenchDocument<'a> {
    command: &'static str,
    spec: TrialSpec,
    config: SolverConfig,
    report: &'a AggregateReport,
}

#[derive(Serialize)]
struct AblationDocument<'a> {
    command: &'static str,
    spec: TrialSpec,
    trials: u64,
    columns: &'a [AblationColumn],
}

#[derive(Serialize)]
struct TimingDocument<'a> {
    command: &'static str,
    spec: TrialSpec,
    config: SolverConfig,
    timing: &'a TimingStats,
}

#[derive(Serialize)]
struct DumpLine<'a> {
    trial: u64,
    #[serde(flatten)]
    record: &'a crate::bench::TrialRecord,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Time(a) => cmd_time(a, stdout),
        Command::Ablate(a) => cmd_ablate(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let problem = P3pProblem::from_json(&text)?;
    let solutions: Vec<Solution> = solve(&problem, &args.solver.config())?
        .into_iter()
        .collect();
    let json = serde_json::to_string_pretty(&solutions).map_err(Error::from)?;
    writeln!(stdout, "{json}")?;
    Ok(())
}

fn threads(t: Option<u64>) -> usize {
    t.map_or(0, |t| t as usize)
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
            f.write_all(body.as_bytes())?;
        }
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn json_body<T: Serialize>(doc: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(doc).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Rows in accuracy-table order, one column per report.
pub fn table_csv(columns: &[(&str, &AggregateReport)]) -> String {
    let mut s = String::from("category");
    for (name, _) in columns {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (row, label) in TABLE_ROWS.iter().enumerate() {
        s.push_str(label);
        for (_, r) in columns {
            s.push_str(&format!(",{}", r.table_column()[row]));
        }
        s.push('\n');
    }
    s
}

fn open_dump(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))
}

fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = TrialSpec::with_seed(args.run.seed);
    let config = args.run.solver.config();
    let mut dump = args.dump_trials.as_deref().map(open_dump).transpose()?;
    let report = run_benchmark_with(
        &spec,
        args.run.trials,
        &config,
        threads(args.threads),
        |i, r| {
            if let Some(w) = dump.as_mut() {
                serde_json::to_writer(
                    &mut *w,
                    &DumpLine {
                        trial: i,
                        record: r,
                    },
                )?;
                w.write_all(b"\n")?;
            }
            Ok(())
        },
    )?;
    if let Some(mut w) = dump {
        w.flush()?;
    }
    let body = match args.run.format {
        FormatArg::Json => json_body(&BenchDocument {
            command: "bench",
            spec,
            config,
            report: &report,
        })?,
        FormatArg::Csv => table_csv(&[("count", &report)]),
    };
    emit(&args.run.out, stdout, &body)
}

fn cmd_time(args: &TimeArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if args.threads.is_some_and(|t| t != 1) {
        return Err(usage(
            "timing runs are single-threaded; --threads must be 1",
        ));
    }
    let spec = TrialSpec::with_seed(args.run.seed);
    let config = args.run.solver.config();
    let timing = run_timing(&spec, args.run.trials, args.repeats, &config)?;
    let body = match args.run.format {
        FormatArg::Json => json_body(&TimingDocument {
            command: "time",
            spec,
            config,
            timing: &timing,
        })?,
        FormatArg::Csv => format!(
            "statistic,ns\nMean,{}\nMedian,{}\nMinimum,{}\nMaximum,{}\n",
            timing.mean_ns, timing.median_ns, timing.min_ns, timing.max_ns
        ),
    };
    emit(&args.run.out, stdout, &body)
}

fn cmd_ablate(args: &AblateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = TrialSpec::with_seed(args.run.seed);
    let columns = run_ablation(
        &spec,
        args.run.trials,
        &args.run.solver.config(),
        threads(args.threads),
    )?;
    let body = match args.run.format {
        FormatArg::Json => json_body(&AblationDocument {
            command: "ablate",
            spec,
            trials: args.run.trials,
            columns: &columns,
        })?,
        FormatArg::Csv => {
            let cols: Vec<(&str, &AggregateReport)> =
                columns.iter().map(|c| (c.name, &c.report)).collect();
            table_csv(&cols)
        }
    };
    emit(&args.run.out, stdout, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("p3p").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn rejects_unknown_flags_and_subcommands() {
        assert_eq!(run_capture(&["bench", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bench", "--repeats", "3"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["ablate", "--dump-trials", "x"]).0, EXIT_USAGE);
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert_eq!(run_capture(&["bench", "--trials", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bench", "--gn-iters", "17"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bench", "--variant", "x"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["time", "--trials", "5", "--threads", "4"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("ablate"));
    }

    #[test]
    fn value_names() {
        let cli = Cli::try_parse_from([
            "p3p",
            "bench",
            "--variant",
            "cf",
            "--d3",
            "eq14",
            "--no-reindex",
        ])
        .unwrap();
        let Command::Bench(b) = cli.command else {
            panic!()
        };
        let c = b.run.solver.config();
        assert_eq!(c.force_variant, QuarticMethod::Classical);
        assert_eq!(c.d3_source, DepthSource::Distance12);
        assert!(!c.reindex_enabled);
        assert_eq!(b.run.trials, 1_000_000);
        assert_eq!(b.run.seed, 0);
    }

    #[test]
    fn csv_layout() {
        let (code, out, _) = run_capture(&[
            "bench",
            "--trials",
            "20",
            "--format",
            "csv",
            "--threads",
            "1",
        ]);
        assert_eq!(code, EXIT_OK);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "category,count");
        let labels: Vec<&str> = lines[1..]
            .iter()
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(labels, TABLE_ROWS);
    }
}
