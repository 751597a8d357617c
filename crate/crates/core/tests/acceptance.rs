//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hmcf::barriers::{BarrierEval, BarrierKind, BarrierSpec, CatalogConstants};
use hmcf::calculus::envelopes;
use hmcf::expr::Relabel;
use hmcf::grid::GridField;
use hmcf::solver::{
    convergence_rate, extract_front, hausdorff_distance, residual_on_exact, Evolution, ResidualOptions, Solver,
    SolverConfig,
};
use hmcf::verify::{five_dim_spec, run_suite, Suite, VerifyOptions};
use hmcf::viscosity::check_norm_lemma;
use hmcf::GroupSpec;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn suite(s: Suite, g: &GroupSpec, samples: usize, tol: f64) -> hmcf::verify::SuiteReport {
    let opts = VerifyOptions {
        samples: Some(samples),
        tolerance: Some(tol),
        seed: SEED,
        constants: CatalogConstants::default(),
    };
    run_suite(s, g, &opts).expect("suite runs")
}

fn suite_outcome(s: Suite, samples: usize, tol: f64, limit: Duration) -> Outcome {
    let start = Instant::now();
    let r = suite(s, &GroupSpec::heisenberg(), samples, tol);
    let elapsed = start.elapsed();
    if !r.passed {
        eprint!("{}", r.render());
    }
    outcome(
        r.passed && within(elapsed, limit),
        format!("{} checks, {:.2} s (limit {} s)", r.lines.len(), elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn norm_lemma() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut zero_failures = 0;
    let mut ok = true;
    for g in [GroupSpec::heisenberg(), five_dim_spec()] {
        let r = check_norm_lemma(&g, 1000, SEED, 1e-10).expect("norm lemma runs");
        worst = worst.max(r.worst());
        zero_failures += r.zero_set_failures + r.distance_zero_set_failures;
        ok &= r.passed;
    }
    let elapsed = start.elapsed();
    outcome(
        ok && worst <= 1e-10 && zero_failures == 0 && within(elapsed, Duration::from_secs(5)),
        format!("worst {worst:.1e}, zero-set failures {zero_failures}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn barrier_identities() -> Outcome {
    let start = Instant::now();
    let g = GroupSpec::heisenberg();
    let r = suite(Suite::Barriers, &g, 500, 1e-9);
    let cyl = BarrierEval::new(BarrierSpec::new(BarrierKind::Cylinder, -2.0, 1.0), &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut residual: f64 = 0.0;
    let mut counted = 0;
    while counted < 500 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let t = rng.gen_range(0.0..0.4);
        if let Some(v) = cyl.operator_computed(&x, t).unwrap() {
            residual = residual.max(v.abs());
            counted += 1;
        }
    }
    let elapsed = start.elapsed();
    if !r.passed {
        eprint!("{}", r.render());
    }
    outcome(
        r.passed && residual <= 1e-12 && within(elapsed, Duration::from_secs(10)),
        format!("{} checks, exact cylinder residual {residual:.1e}, {:.2} s", r.lines.len(), elapsed.as_secs_f64()),
    )
}

/// Directions on the unit circle or a Fibonacci lattice on the unit sphere.
fn sphere(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => unreachable!(),
    }
}

fn envelope_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for m in [2, 3] {
        let dirs = sphere(m, 10_000);
        for _ in 0..100 {
            let mut a = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let v = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            let tr = a.trace();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for d in &dirs {
                let q = nalgebra::DVector::from_column_slice(d);
                let f = -tr + q.dot(&(&a * &q));
                lo = lo.min(f);
                hi = hi.max(f);
            }
            let e = envelopes(&a);
            worst = worst.max((e.lower - lo).abs()).max((e.upper - hi).abs());
        }
    }
    let elapsed = start.elapsed();
    let lib = suite(Suite::EnvelopeOracle, &GroupSpec::heisenberg(), 100, 1e-3);
    outcome(
        worst <= 1e-3 && lib.passed && within(elapsed, Duration::from_secs(10)),
        format!("worst {worst:.1e} over 200 matrices, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn cylinder_run(relabel: Relabel, t_end: f64) -> Evolution {
    let mut c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 64, 1.0);
    c.initial = c.initial.with_relabel(relabel);
    c.t_end = t_end;
    c.snapshot_every = 0.05;
    Solver::new(c).unwrap().evolve().expect("cylinder run")
}

fn front_radii(grid: &GridField) -> (f64, f64) {
    extract_front(grid, 0.0)
        .points
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .fold((f64::INFINITY, 0.0), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

fn extinction(evo: &Evolution, elapsed: Duration) -> Outcome {
    let Some(t) = evo.extinction_time else {
        return outcome(false, "no extinction before t = 0.6".into());
    };
    let mut worst_radius: f64 = 0.0;
    for s in evo.snapshots.iter().filter(|s| s.time() <= 0.4 + 1e-12) {
        let exact = (1.0 - 2.0 * s.time()).sqrt();
        let (lo, hi) = front_radii(s);
        worst_radius = worst_radius.max((lo - exact).abs() / exact).max((hi - exact).abs() / exact);
    }
    let rel = (t - 0.5).abs() / 0.5;
    outcome(
        rel <= 0.1 && worst_radius <= 0.1,
        format!(
            "extinction {t:.4} ({:.2}% off), worst radius error {:.2}%, {} steps, {:.0} s",
            100.0 * rel,
            100.0 * worst_radius,
            evo.steps,
            elapsed.as_secs_f64()
        ),
    )
}

fn consistency_order() -> Outcome {
    let start = Instant::now();
    let g = GroupSpec::heisenberg();
    let cyl = BarrierEval::new(BarrierSpec::new(BarrierKind::Cylinder, -2.0, 1.0), &g).unwrap();
    // the plain cylinder is quadratic and differenced exactly; the cubic relabeling is not
    let exact = cyl.field().relabel(Relabel::Cubic { a: 1.0 });
    let opts = ResidualOptions { times: vec![0.0, 0.1, 0.2], axis_exclusion: 0.25 };
    let reports: Vec<_> = [32, 64, 128]
        .into_iter()
        .map(|n| residual_on_exact(&exact, &SolverConfig::cylinder(g.clone(), 2.0, n, 1.0), &opts).unwrap())
        .collect();
    let rate = convergence_rate(&reports).unwrap_or(f64::NAN);
    let residuals: Vec<String> = reports.iter().map(|r| format!("{:.2e}", r.max_residual)).collect();
    outcome(
        rate >= 1.8,
        format!("rate {rate:.3}, residuals {}, {:.0} s", residuals.join(" / "), start.elapsed().as_secs_f64()),
    )
}

/// Fronts at the snapshots of the run to `RELABEL_T_END`, before the final
/// collapse onto the axis.
const RELABEL_T_END: f64 = 0.45;

fn relabel_invariance(base: &Evolution, relabeled: &Evolution) -> Outcome {
    let base: Vec<&GridField> = base.snapshots.iter().filter(|s| s.time() <= RELABEL_T_END).collect();
    if base.len() != relabeled.snapshots.len() {
        return outcome(false, format!("{} vs {} snapshots", base.len(), relabeled.snapshots.len()));
    }
    let cell = base[0].max_spacing();
    let mut worst: f64 = 0.0;
    for (a, b) in base.iter().zip(&relabeled.snapshots) {
        assert_eq!(a.time(), b.time());
        worst = worst.max(hausdorff_distance(&extract_front(a, 0.0), &extract_front(b, 0.0), cell));
    }
    outcome(
        worst <= cell,
        format!("{} snapshots to t = {RELABEL_T_END}, worst Hausdorff {worst:.2e} (cell {cell:.4})", base.len()),
    )
}

fn sandwich() -> Outcome {
    let start = Instant::now();
    let c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 32, 1.0);
    let (evo, report) = Solver::new(c).unwrap().evolve_sandwiched().expect("sandwich run");
    outcome(
        report.passed(1e-12),
        format!("{} steps, {}, {:.0} s", evo.steps, report.summary(), start.elapsed().as_secs_f64()),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let name = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((name, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("det.toml");
    fs::write(
        &cfg,
        "[domain]\nmin = [-2.0, -2.0, -2.0]\nmax = [2.0, 2.0, 2.0]\nresolution = [20, 20, 12]\n\
         [scheme]\nsandwich = true\n[run]\nt_end = 0.2\nsnapshot_every = 0.05\n",
    )
    .unwrap();
    let mut trees = Vec::new();
    for workers in [1, 4, 8] {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_hmcf"))
            .args(["evolve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("HMCF_WORKERS", workers.to_string())
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return outcome(false, format!("evolve with {workers} workers exited {status}"));
        }
        trees.push(read_tree(&out));
    }
    let files = trees[0].len();
    let identical = trees.iter().all(|t| *t == trees[0]);
    outcome(identical && files > 0, format!("{files} files compared across workers 1, 4, 8"))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };

    report("1 norm lemma", norm_lemma());
    report("2 group algebra", suite_outcome(Suite::GroupAxioms, 1000, 1e-12, Duration::from_secs(5)));
    report("3 barrier identities", barrier_identities());
    report("4 envelope oracle", envelope_oracle());
    report("5 change of variables", suite_outcome(Suite::ChangeOfVariables, 200, 1e-9, Duration::from_secs(5)));

    let start = Instant::now();
    let base = cylinder_run(Relabel::Identity, 0.6);
    report("6 extinction reproduction", extinction(&base, start.elapsed()));
    report("7 consistency order", consistency_order());
    let relabeled = cylinder_run(Relabel::Cubic { a: 1.0 }, RELABEL_T_END);
    report("8 relabel invariance", relabel_invariance(&base, &relabeled));
    report("9 sandwich", sandwich());
    report("10 determinism", determinism());

    let failed = results.iter().filter(|(_, o)| !o.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
