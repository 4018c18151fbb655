//! `cw`: counterexample generation, condition audits, extension and
//! verification of Whitney fields in the free step-2 Carnot groups.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! invalid input or I/O errors. `CW_THREADS` caps the worker threads.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cw_core::cli::{cmd_audit, cmd_counterexample, cmd_extend, cmd_verify, with_thread_pool, RunConfig};
use cw_core::io::to_json_string;
use cw_core::Result;

#[derive(Parser, Debug)]
#[command(name = "cw", version, about = "C^m horizontal Whitney extension in free step-2 Carnot groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the truncated counterexample field.
    Counterexample {
        /// Truncation depth N (number of intervals).
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Jet order.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Output field file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the compatibility, remainder and A/V audits of a field.
    Audit {
        /// Input field file.
        #[arg(long)]
        input: PathBuf,
        /// JSON report.
        #[arg(long)]
        report: PathBuf,
        /// Optional CSV mirror of the per-pair records.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Coefficient bound of the generalized audit.
        #[arg(long, default_value_t = 4.0)]
        cbound: f64,
        /// Grid step of the generalized audit.
        #[arg(long, default_value_t = 0.25)]
        grid: f64,
    },
    /// Extend a field to a horizontal curve and verify it.
    Extend {
        /// Input field file.
        #[arg(long)]
        input: PathBuf,
        /// Output curve file.
        #[arg(long)]
        curve: PathBuf,
        /// JSON report.
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        tolerances: ToleranceArgs,
    },
    /// Verify a curve file against a field file.
    Verify {
        /// Curve file.
        #[arg(long)]
        curve: PathBuf,
        /// Field file.
        #[arg(long)]
        input: PathBuf,
        /// JSON report; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
    },
}

/// Overrides of the extension tolerances.
#[derive(Args, Debug)]
struct ToleranceArgs {
    /// Relative tolerance of the vertical targets.
    #[arg(long)]
    area_tol: Option<f64>,
    /// Relative tolerance of the orthogonality checks.
    #[arg(long)]
    ortho_tol: Option<f64>,
    /// Relative tolerance of derivative jumps at knots.
    #[arg(long)]
    smooth_tol: Option<f64>,
    /// Relative tolerance of jet matching on K.
    #[arg(long)]
    jet_tol: Option<f64>,
    /// Relative tolerance of the horizontality residual.
    #[arg(long)]
    horiz_tol: Option<f64>,
    /// Gaps shorter than this fraction of diam K are not perturbed.
    #[arg(long)]
    gap_floor: Option<f64>,
}

impl ToleranceArgs {
    fn apply(&self, config: &mut RunConfig) {
        let e = &mut config.extend;
        let fields = [
            (self.area_tol, &mut e.area_tol),
            (self.ortho_tol, &mut e.ortho_tol),
            (self.smooth_tol, &mut e.smooth_tol),
            (self.jet_tol, &mut e.jet_tol),
            (self.horiz_tol, &mut e.horiz_tol),
            (self.gap_floor, &mut e.gap_floor),
        ];
        for (value, slot) in fields {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
}

fn report_line(name: &str, pass: bool) {
    eprintln!("{name}: {}", if pass { "pass" } else { "FAIL" });
}

fn run(cli: Cli) -> Result<bool> {
    let mut config = RunConfig::default();
    match cli.command {
        Command::Counterexample { levels, m, out } => {
            config.levels = levels;
            config.m = m;
            config.validate()?;
            let field = cmd_counterexample(levels, m, &out)?;
            eprintln!("wrote counterexample with {} elements of K to {}", field.k.len(), out.display());
            Ok(true)
        }
        Command::Audit {
            input,
            report,
            csv,
            cbound,
            grid,
        } => {
            config.audit.cbound = cbound;
            config.audit.grid_step = grid;
            config.validate()?;
            let out = with_thread_pool(|| cmd_audit(&input, &report, csv.as_deref(), &config.audit))??;
            eprintln!(
                "compatibility {}, component-wise trend {:?}, generalized trend {:?}",
                if out.compatibility.pass { "ok" } else { "violated" },
                out.componentwise.trend,
                out.generalized.trend
            );
            report_line("audit", out.pass);
            Ok(out.pass)
        }
        Command::Extend {
            input,
            curve,
            report,
            tolerances,
        } => {
            tolerances.apply(&mut config);
            config.validate()?;
            let out = with_thread_pool(|| cmd_extend(&input, &curve, &report, &config.extend))??;
            for f in &out.failures {
                eprintln!("gap failure: {f}");
            }
            report_line("extend", out.pass);
            Ok(out.pass)
        }
        Command::Verify {
            curve,
            input,
            report,
            tolerances,
        } => {
            tolerances.apply(&mut config);
            config.validate()?;
            let out = with_thread_pool(|| cmd_verify(&curve, &input, report.as_deref(), &config.extend))??;
            if report.is_none() {
                print!("{}", to_json_string(&out)?);
            }
            report_line("verify", out.pass);
            Ok(out.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
