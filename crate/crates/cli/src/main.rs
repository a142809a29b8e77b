use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hkm_cli::plot::write_plots;
use hkm_cli::suites::{gram, load_action};
use hkm_cli::{init_threads, run, Report, RunError, Suite, SuiteConfig, UsageError};

#[derive(Parser)]
#[command(name = "hkm", version, about = "Numerical checks for hyper-Kähler moment maps and harmonic morphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or all of them, and print a line per check.
    Verify {
        target: Target,
        #[command(flatten)]
        common: Common,
        /// Killing field for the moment suite (JSON).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Gram-matrix conformality analysis of a commuting action (JSON).
    Gram {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every suite and write the JSON report.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Write convergence and dilation CSVs.
    Plot {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated suites; only moment and gibbons have plots.
        #[arg(long, value_delimiter = ',', default_value = "moment,gibbons")]
        suites: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Projective,
    Calabi,
    Moment,
    Gibbons,
    Conformality,
    Calibration,
    All,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Override the tolerance of every finite-difference check.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Gibbons–Hawking parameter (default sweeps 0.5, 1, 2).
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
}

impl Common {
    fn config(&self, suites: Vec<Suite>) -> SuiteConfig {
        SuiteConfig {
            n: self.n,
            samples: self.samples,
            seed: self.seed,
            step: self.step,
            tol: self.tol,
            suites,
            killing_spec: None,
            action_spec: None,
            gh_a: self.a,
            killing_field: None,
        }
    }
}

fn print(report: &Report) {
    for c in &report.checks {
        println!("{}", c.line());
    }
    let failed = report.checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {} failed", report.checks.len(), failed);
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    init_threads()?;
    match cli.command {
        Command::Verify { target, common, spec } => {
            let suites = match target {
                Target::Projective => vec![Suite::Projective],
                Target::Calabi => vec![Suite::Calabi],
                Target::Moment => vec![Suite::Moment],
                Target::Gibbons => vec![Suite::Gibbons],
                Target::Conformality => vec![Suite::Conformality],
                Target::Calibration => vec![Suite::Calibration],
                Target::All => Suite::ALL.to_vec(),
            };
            let mut cfg = common.config(suites);
            cfg.killing_spec = spec;
            let report = run(&cfg)?;
            print(&report);
            Ok(report.exit_code())
        }
        Command::Gram { spec, common } => {
            let mut cfg = common.config(Vec::new());
            cfg.action_spec = Some(spec);
            cfg.validate()?;
            let action = load_action(&cfg)?.expect("spec path given");
            let checks = gram(&cfg, &action)?;
            let ok = checks.iter().all(|c| c.passed());
            for c in &checks {
                println!("{}", c.line());
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Report { out, common, spec } => {
            let mut cfg = common.config(Suite::ALL.to_vec());
            cfg.killing_spec = spec;
            let report = run(&cfg)?;
            std::fs::write(&out, report.to_json()).map_err(|e| UsageError(format!("{}: {e}", out.display())))?;
            print(&report);
            Ok(report.exit_code())
        }
        Command::Plot { out, suites, common } => {
            let parsed = suites
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<Suite>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(UsageError)?;
            let cfg = common.config(parsed);
            for p in write_plots(&cfg, &out)? {
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hkm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
