//! Command-line front end: `analyze` and `sweep`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::assemble::Pattern;
use crate::error::{Error, Result};
use crate::matops::{RankTol, Tolerances};
use crate::netmodel::{parse_network_spec, MultilayerNetwork};
use crate::report::{csv_row, render_report, CSV_HEADER};
use crate::verdicts::{analyze, AnalysisOutcome, AnalysisRequest, MethodChoice};

/// Exit code for any error (I/O, parse, validation, numerical failure).
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "netsamp",
    version,
    about = "Controllability of multilayer networked sampled-data systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze one sampling configuration.
    Analyze(AnalyzeArgs),
    /// Sweep the base sampling period over a range.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Network specification (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Rate ratio between slow and fast channels.
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// single, slow-inter, multiscale or fast-control.
    #[arg(long, default_value = "single")]
    pattern: String,
    /// auto, kalman, pbh, theorem1..theorem5, corollary2, corollary3.
    #[arg(long, default_value = "auto")]
    method: String,
    /// Write CSV output to this path instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Base sampling period.
    #[arg(long)]
    h: f64,
    /// Absolute singular-value threshold (default: automatic).
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Relative eigenvalue merge tolerance.
    #[arg(long)]
    tol_eig: Option<f64>,
    /// Also write the report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    h_min: f64,
    #[arg(long)]
    h_max: f64,
    #[arg(long)]
    steps: usize,
    /// Logarithmic instead of linear spacing.
    #[arg(long)]
    log: bool,
}

/// Sampling periods of a sweep in ascending order, duplicates removed.
pub fn sweep_points(h_min: f64, h_max: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Argument(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    if !(h_min > 0.0) || !h_min.is_finite() || !h_max.is_finite() {
        return Err(Error::Argument(format!(
            "--h-min must be positive, got {h_min}"
        )));
    }
    if h_max < h_min {
        return Err(Error::Argument(format!(
            "--h-max ({h_max}) is below --h-min ({h_min})"
        )));
    }
    let last = (steps - 1) as f64;
    let mut hs: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            match (i, log) {
                (0, _) => h_min,
                (i, _) if i == steps - 1 => h_max,
                (_, true) => (h_min.ln() + t * (h_max.ln() - h_min.ln())).exp(),
                (_, false) => h_min + t * (h_max - h_min),
            }
        })
        .collect();
    hs.dedup();
    Ok(hs)
}

fn load(path: &Path) -> Result<MultilayerNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_network_spec(&text)
}

fn request(common: &Common, h: f64) -> Result<AnalysisRequest> {
    Ok(AnalysisRequest {
        h,
        l: common.l,
        pattern: Pattern::parse(&common.pattern)?,
        method: MethodChoice::parse(&common.method)?,
        tol: Tolerances::default(),
    })
}

fn write_csv(path: Option<&Path>, rows: &[String], stdout: &mut dyn Write) -> Result<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let net = load(&args.common.input)?;
    let mut req = request(&args.common, args.h)?;
    if let Some(t) = args.tol_rank {
        if !(t >= 0.0) {
            return Err(Error::Argument(format!(
                "--tol-rank must be non-negative, got {t}"
            )));
        }
        req.tol.rank = RankTol::Absolute(t);
    }
    if let Some(t) = args.tol_eig {
        if !(t > 0.0) {
            return Err(Error::Argument(format!(
                "--tol-eig must be positive, got {t}"
            )));
        }
        req.tol.eig = t;
    }
    let outcome = analyze(&net, &req)?;
    let report = render_report(&args.common.input.display().to_string(), &outcome);
    stdout.write_all(report.as_bytes())?;
    if let Some(p) = &args.report {
        std::fs::write(p, &report)?;
    }
    if let Some(p) = &args.common.csv {
        write_csv(Some(p), &[csv_row(&outcome)], stdout)?;
    }
    Ok(outcome.status.exit_code())
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let net = load(&args.common.input)?;
    let hs = sweep_points(args.h_min, args.h_max, args.steps, args.log)?;
    let reqs = hs
        .iter()
        .map(|&h| request(&args.common, h))
        .collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<AnalysisOutcome> = reqs
        .par_iter()
        .map(|r| analyze(&net, r))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<String> = outcomes.iter().map(csv_row).collect();
    write_csv(args.common.csv.as_deref(), &rows, stdout)?;
    Ok(0)
}

/// Run the CLI on `args` (including the program name) and return the exit
/// code: 0 Controllable, 1 Uncontrollable, 2 Inconclusive, 3 error. `sweep`
/// returns 0 on success.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Sweep(s) => cmd_sweep(s, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_points() {
        let lin = sweep_points(1.0, 2.0, 3, false).unwrap();
        assert_eq!(lin, vec![1.0, 1.5, 2.0]);
        let log = sweep_points(0.1, 10.0, 3, true).unwrap();
        assert_eq!(log[0], 0.1);
        assert!((log[1] - 1.0).abs() < 1e-12);
        assert_eq!(log[2], 10.0);
    }

    #[test]
    fn degenerate_range_collapses() {
        assert_eq!(sweep_points(0.5, 0.5, 4, false).unwrap(), vec![0.5]);
    }

    #[test]
    fn invalid_ranges() {
        assert!(sweep_points(0.1, 1.0, 1, false).is_err());
        assert!(sweep_points(0.0, 1.0, 3, false).is_err());
        assert!(sweep_points(2.0, 1.0, 3, false).is_err());
    }

    #[test]
    fn usage_error_exits_three() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["netsamp", "analyze"], &mut o, &mut e), EXIT_ERROR);
        assert_eq!(run(["netsamp", "--help"], &mut o, &mut e), 0);
    }
}
