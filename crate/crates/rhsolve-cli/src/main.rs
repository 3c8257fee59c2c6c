use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rhsolve::toy::ToyBump;
use rhsolve_cli::compare::{compare, read_rows};
use rhsolve_cli::config::{Check, ExperimentConfig, ProblemKind, SCHEMA_VERSION};
use rhsolve_cli::output::Manifest;
use rhsolve_cli::run::thread_count;
use rhsolve_cli::{emit, execute};

#[derive(Parser)]
#[command(name = "rh", version, about = "Riemann-Hilbert solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Outputs {
    /// CSV output (stdout when omitted); overrides the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Manifest output; overrides the config.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run any config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
    /// Run a Painleve II config.
    Pii {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
    /// Run an mKdV config.
    Mkdv {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
    /// Solve the toy scalar problem at one xi.
    Toy {
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Exponent p of the bump 1/2 (1 - x^2)^p; 0 selects the exp bump.
        #[arg(long, default_value_t = 3)]
        p: u32,
    },
    /// Built-in diagnostics.
    Diag {
        #[arg(long, value_enum)]
        check: DiagCheck,
    },
    /// Compare two CSV runs row by row.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagCheck {
    Plemelj,
    Product,
    Coupling,
    Cauchy,
}

fn base(problem: ProblemKind) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: String::new(),
        problem,
        x: Vec::new(),
        x_range: None,
        t: Vec::new(),
        t_range: None,
        c: None,
        stokes: None,
        orders: Vec::new(),
        method: Default::default(),
        rho: Default::default(),
        xi: Vec::new(),
        bump: Default::default(),
        geometry: None,
        custom: None,
        output: Default::default(),
        residual_samples: 0,
        checks: Vec::new(),
    }
}

fn report(m: &Manifest) {
    for f in &m.failures {
        eprintln!("row {} failed [{}]: {}", f.row, f.error.code, f.error.message);
    }
    for c in &m.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        eprintln!("{tag} {}: {:.6e} (limit {}) {}", c.kind, c.value, c.limit, c.detail);
    }
    eprintln!("{} rows in {:.1} ms on {} threads", m.rows, m.runtime_ms, m.threads);
}

fn run_config(cfg: ExperimentConfig, out: &Outputs) -> Result<ExitCode> {
    let threads = thread_count();
    let (rows, manifest) = execute(&cfg, threads)?;
    let csv = out.csv.clone().or(cfg.output.csv.clone());
    let mpath = out.manifest.clone().or(cfg.output.manifest.clone());
    emit(&rows, &manifest, csv.as_deref(), mpath.as_deref())?;
    report(&manifest);
    Ok(if manifest.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn load(path: &PathBuf, want: Option<ProblemKind>) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(w) = want {
        if cfg.problem != w {
            bail!("{} is a {} config", path.display(), cfg.problem.name());
        }
    }
    Ok(cfg)
}

fn main() -> Result<ExitCode> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => run_config(load(&config, None)?, &out),
        Command::Pii { config, out } => run_config(load(&config, Some(ProblemKind::Pii))?, &out),
        Command::Mkdv { config, out } => run_config(load(&config, Some(ProblemKind::Mkdv))?, &out),
        Command::Toy { xi, n, p } => {
            let mut cfg = base(ProblemKind::Toy);
            cfg.xi = vec![xi];
            cfg.orders = vec![n];
            cfg.bump = if p == 0 { ToyBump::Exp } else { ToyBump::Poly(p) };
            cfg.validate()?;
            let out = Outputs { csv: None, manifest: None };
            run_config(cfg, &out)
        }
        Command::Diag { check } => {
            let mut cfg = base(ProblemKind::Diag);
            cfg.checks = vec![match check {
                DiagCheck::Plemelj => Check::Plemelj {
                    orders: vec![8, 16, 32, 64],
                    max: 1e-10,
                    samples: 50,
                },
                DiagCheck::Product => Check::Product { max: 1e-10 },
                DiagCheck::Coupling => Check::CouplingSlope {
                    eps: vec![1e-1, 1e-2, 1e-3],
                    target: 1.0,
                    tol: 0.05,
                },
                DiagCheck::Cauchy => Check::Cauchy { max: 1e-9, samples: 20 },
            }];
            let (_, manifest) = execute(&cfg, thread_count())?;
            report(&manifest);
            Ok(if manifest.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Compare { a, b, tol } => {
            let open = |p: &PathBuf| std::fs::File::open(p).with_context(|| format!("opening {}", p.display()));
            let report = compare(&read_rows(open(&a)?)?, &read_rows(open(&b)?)?, tol)?;
            println!("problem,x,t,n_a,n_b,deviation");
            for r in &report.rows {
                println!("{},{},{},{},{},{:.3e}", r.problem, r.x, r.t, r.n_a, r.n_b, r.deviation);
            }
            eprintln!("max deviation {:.3e} (tolerance {:e})", report.max_deviation, report.tolerance);
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
