use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teichlab::Error;
use teichlab_cli::commands::{self, exit};
use teichlab_cli::config::{RunConfig, OUT_DIR_ENV};

/// Coupled continued-fraction slopes and probes of their Teichmüller ray.
#[derive(Parser)]
#[command(name = "teichlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set levels=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct WithFamily {
    #[command(flatten)]
    common: Common,
    /// Family file; defaults to `family.txt` in the output directory.
    #[arg(long, short)]
    family: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a slope family and print its condition summary.
    Generate(Common),
    /// Write a length-report CSV for a curve list over a time grid.
    Trace {
        #[command(flatten)]
        args: WithFamily,
        /// Curve-list file, one literal per line.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        times: Option<String>,
    },
    /// Probe the ray at the sampled levels and write ratio, decay and simplex datasets.
    LimitReport(WithFamily),
    /// Run the verification suites.
    Verify(WithFamily),
}

fn load(common: &Common, extra: Vec<String>) -> teichlab::Result<RunConfig> {
    let mut overrides = common.overrides.clone();
    overrides.extend(extra);
    RunConfig::load(common.config.as_deref(), std::env::var(OUT_DIR_ENV).ok(), &overrides)
}

fn family_path(cfg: &RunConfig, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cfg.family_path())
}

fn run(cli: Cli) -> teichlab::Result<i32> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load(&common, Vec::new())?;
            match commands::generate(&cfg) {
                Ok(g) => {
                    print!("{}", g.summary);
                    println!("wrote {}", g.path.display());
                    Ok(exit::OK)
                }
                Err(Error::BudgetExceeded(overflow)) => {
                    eprintln!("error: {}", Error::BudgetExceeded(overflow.clone()));
                    eprintln!(
                        "level {} odd coefficients would be near 2^{:.3e}",
                        overflow.level,
                        overflow.approx.log_odd.iter().map(|x| x.to_f64()).fold(0.0, f64::max) / std::f64::consts::LN_2
                    );
                    eprintln!("partial family saved to {}", cfg.family_path().display());
                    Ok(exit::BUDGET_EXCEEDED)
                }
                Err(e) => Err(e),
            }
        }
        Command::Trace { args, curves, times } => {
            let mut extra = Vec::new();
            if let Some(c) = curves {
                extra.push(format!("curves={}", c.display()));
            }
            if let Some(t) = times {
                extra.push(format!("times={t}"));
            }
            let cfg = load(&args.common, extra)?;
            let path = commands::trace(&cfg, &family_path(&cfg, &args.family))?;
            println!("wrote {}", path.display());
            Ok(exit::OK)
        }
        Command::LimitReport(args) => {
            let cfg = load(&args.common, Vec::new())?;
            let out = commands::limit(&cfg, &family_path(&cfg, &args.family))?;
            let report = &out.report;
            println!("mode={} d={} levels={:?}", report.mode, report.d, report.spec.levels);
            for l in &report.levels {
                println!(
                    "n={} t={} |LHS/RHS-1|={} collar gap={} reliable={}",
                    l.probe.n(),
                    l.probe.t().mid_string(8),
                    l.ratio.lhs_rhs_gap.mid_string(4),
                    l.ratio.collar_gap.mid_string(4),
                    l.probe.reliable && l.ratio.reliable && l.simplex.reliable
                );
            }
            println!("ratio trend holds: {}", report.ratio_trend().holds());
            println!("collar trend holds: {}", report.collar_trend().holds());
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            let bad = report.unreliable_accepted();
            if bad.is_empty() {
                Ok(exit::OK)
            } else {
                eprintln!("error: accepted probes at n={bad:?} are unreliable");
                Ok(exit::UNRELIABLE_PROBE)
            }
        }
        Command::Verify(args) => {
            let cfg = load(&args.common, Vec::new())?;
            let results = commands::verify(&cfg, &family_path(&cfg, &args.family))?;
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| r.failed()).count();
            println!("{} suites, {failed} failed", results.len());
            Ok(if failed == 0 { exit::OK } else { exit::SUITE_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit::ERROR
    });
    ExitCode::from(code as u8)
}
