//! Command-line front end. Exit codes: 0 pass, 1 scientific failure or
//! runtime error, 2 usage or configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::barriers::{BarrierEval, BarrierKind, Classification};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::output;
use crate::solver::{Scheme, Solver, SolverConfig};
use crate::verify::{run_suites, Suite, VerifyOptions};
use crate::viscosity::{check_point, lattice, Regime};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hmcf", version, about = "Horizontal mean curvature flow on step-two Carnot groups")]
pub struct Cli {
    /// Worker threads; affects speed only.
    #[arg(long, global = true, env = "HMCF_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML experiment configuration; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `run.output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite to run (repeatable); defaults to `verify.suites`.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Tabulate a barrier's operator and verdict on a lattice.
    Barrier {
        #[command(flatten)]
        common: Common,
        /// Barrier kind, overriding `barrier.kind`.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Evolve the configured initial condition and write snapshots and fronts.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Evolve and report the numerical extinction time.
    Extinction {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: worker count must be positive");
            return EXIT_CONFIG;
        }
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_FAIL;
        }
    };
    let result = pool.install(|| dispatch(&cli.command));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_FAIL,
            }
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        Some(p) => ExperimentConfig::from_path(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| cfg.run.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Verify { common, suites } => cmd_verify(common, suites),
        Command::Barrier { common, kind } => cmd_barrier(common, kind.as_deref()),
        Command::Evolve { common } => cmd_evolve(common),
        Command::Extinction { common } => cmd_extinction(common),
    }
}

fn cmd_verify(common: &Common, names: &[String]) -> Result<i32> {
    let cfg = load(common)?;
    let suites: Vec<Suite> = if names.is_empty() {
        cfg.verify.suites.clone()
    } else {
        names.iter().map(|s| s.parse().map_err(|e: Error| Error::Config(e.to_string()))).collect::<Result<_>>()?
    };
    let opts = VerifyOptions {
        samples: cfg.verify.samples,
        tolerance: cfg.verify.tolerance,
        seed: cfg.verify.seed,
        constants: cfg.verify.constants,
    };
    let reports = run_suites(&suites, &cfg.group_spec()?, &opts)?;
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        write!(stdout, "{}", r.render())?;
    }
    let passed = reports.iter().all(|r| r.passed);
    writeln!(stdout, "{}", if passed { "all suites passed" } else { "some suites FAILED" })?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_barrier(common: &Common, kind: Option<&str>) -> Result<i32> {
    let mut cfg = load(common)?;
    if let Some(k) = kind {
        cfg.barrier.kind = k.parse::<BarrierKind>().map_err(|e| Error::Config(e.to_string()))?;
    }
    let g = cfg.group_spec()?;
    let b = BarrierEval::new(cfg.barrier_spec(), &g).map_err(|e| Error::Config(format!("barrier: {e}")))?;
    let dir = out_dir(common, &cfg)?;
    let path = dir.join(format!("barrier_{}.csv", cfg.barrier.kind));
    let mut w = output::create(&path)?;
    let n = g.n();
    let cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    writeln!(w, "{},closed_form,computed,regime,verdict", cols.join(","))?;
    let (bc, t, tol) = (&cfg.barrier, cfg.barrier.t, cfg.barrier.tolerance);
    let (mut excluded, mut violated, mut mismatched, mut rows) = (0usize, 0usize, 0usize, 0usize);
    for x in lattice(n, -bc.half_width, bc.half_width, bc.lattice) {
        if !b.is_valid(&x) {
            excluded += 1;
            continue;
        }
        let v = check_point(&g, b.field(), &x, t, crate::viscosity::DEFAULT_EPS_SING)?;
        let closed = b.operator_closed_form(&x);
        let computed = match v.regime {
            Regime::Regular => Some(v.sub_residual),
            _ => None,
        };
        if let (Some(a), Some(c)) = (closed, computed) {
            if (a - c).abs() > tol * a.abs().max(c.abs()).max(1.0) {
                mismatched += 1;
            }
        }
        let claim = b.classification_at(&x);
        let ok = !(claim.claims_sub() && v.sub_residual > tol) && !(claim.claims_super() && v.super_residual < -tol);
        let verdict = match claim {
            Classification::Unclaimed => "unclaimed",
            _ if !ok => "violated",
            c => c.name(),
        };
        if verdict == "violated" {
            violated += 1;
        }
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let coords: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{},{},{},{},{verdict}", coords.join(","), fmt(closed), fmt(computed), v.regime.name())?;
        rows += 1;
    }
    w.flush()?;
    println!("{}", b.describe_claims());
    println!("{rows} lattice points written to {}", path.display());
    if excluded > 0 {
        println!(
            "{excluded} points excluded within {:e} of the origin (not differentiable there)",
            crate::barriers::SQRT_GAUGE_EXCLUSION
        );
    }
    println!("{violated} verdict violations, {mismatched} closed-form mismatches (tol {tol:e})");
    Ok(if violated == 0 && mismatched == 0 { EXIT_PASS } else { EXIT_FAIL })
}

fn run_to_dir(solver: &Solver, dir: &Path) -> Result<crate::solver::Evolution> {
    std::fs::create_dir_all(dir)?;
    let mut index = 0;
    solver.evolve_from(solver.init()?, |_, _| Ok(()), |grid| {
        output::write_snapshot_pair(dir, index, grid)?;
        index += 1;
        Ok(())
    })
}

fn describe_run(label: &str, evo: &crate::solver::Evolution) -> String {
    match evo.extinction_time {
        Some(t) => format!("{label}: {} snapshots, {} steps, extinction at t = {t:.6}", evo.snapshots.len(), evo.steps),
        None => format!("{label}: {} snapshots, {} steps, no extinction before t_end", evo.snapshots.len(), evo.steps),
    }
}

fn cmd_evolve(common: &Common) -> Result<i32> {
    let cfg = load(common)?;
    let dir = out_dir(common, &cfg)?;
    std::fs::write(dir.join("config.toml"), cfg.effective()?.to_toml_string()?)?;
    let base = cfg.solver_config()?;
    if !cfg.scheme.sandwich {
        let solver = Solver::new(base)?;
        let evo = run_to_dir(&solver, &dir)?;
        println!("{}", describe_run(solver.config().scheme.name(), &evo));
        return Ok(EXIT_PASS);
    }
    let with = |scheme: Scheme| SolverConfig { scheme, ..base.clone() };
    let reg = Solver::new(with(Scheme::Regularized))?;
    let (evo, report) = reg.evolve_sandwiched()?;
    let reg_dir = dir.join(Scheme::Regularized.name());
    std::fs::create_dir_all(&reg_dir)?;
    for (i, s) in evo.snapshots.iter().enumerate() {
        output::write_snapshot_pair(&reg_dir, i, s)?;
    }
    println!("{}", describe_run(Scheme::Regularized.name(), &evo));
    for scheme in [Scheme::EnvelopeMin, Scheme::EnvelopeMax] {
        let solver = Solver::new(with(scheme))?;
        let evo = run_to_dir(&solver, &dir.join(scheme.name()))?;
        println!("{}", describe_run(scheme.name(), &evo));
    }
    let mut w = output::create(&dir.join("sandwich.csv"))?;
    output::write_sandwich(&mut w, &report)?;
    w.flush()?;
    let ok = report.passed(SANDWICH_TOL);
    println!("sandwich: {} -> {}", report.summary(), if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

/// Node-wise tolerance of the sandwich comparison.
pub const SANDWICH_TOL: f64 = 1e-12;

fn cmd_extinction(common: &Common) -> Result<i32> {
    let cfg = load(common)?;
    let solver = Solver::new(cfg.solver_config()?)?;
    let evo = solver.evolve()?;
    match evo.extinction_time {
        Some(t) => println!("extinction time {t:.6} ({} steps, dt {:.3e})", evo.steps, evo.dt),
        None => println!("no extinction before t_end = {}", cfg.run.t_end),
    }
    Ok(EXIT_PASS)
}
