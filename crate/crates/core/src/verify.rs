//! Verification suites run by `hmcf verify`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barriers::{
    euclid_closed_forms, gauge_closed_forms, BarrierEval, BarrierKind, BarrierSpec, CatalogConstants,
};
use crate::calculus::{envelopes, horizontal_gradient, horizontal_hessian, mcf_operator, Envelopes};
use crate::error::{Error, Result};
use crate::expr::{Expr, Relabel, ScalarField};
use crate::group::{GroupSpec, HeisenbergLikeSpec};
use crate::viscosity::{check_norm_lemma, gauge_field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GroupAxioms,
    NormLemma,
    Barriers,
    EnvelopeOracle,
    ChangeOfVariables,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::GroupAxioms, Suite::NormLemma, Suite::Barriers, Suite::EnvelopeOracle, Suite::ChangeOfVariables];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::GroupAxioms => "group-axioms",
            Suite::NormLemma => "norm-lemma",
            Suite::Barriers => "barriers",
            Suite::EnvelopeOracle => "envelope-oracle",
            Suite::ChangeOfVariables => "change-of-variables",
        }
    }

    pub fn default_samples(&self) -> usize {
        match self {
            Suite::GroupAxioms | Suite::NormLemma => 1000,
            Suite::Barriers => 500,
            Suite::EnvelopeOracle => 100,
            Suite::ChangeOfVariables => 200,
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            Suite::GroupAxioms => 1e-12,
            Suite::NormLemma => 1e-10,
            Suite::Barriers | Suite::ChangeOfVariables => 1e-9,
            Suite::EnvelopeOracle => 1e-3,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub constants: CatalogConstants,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: None, tolerance: None, seed: 20240601, constants: CatalogConstants::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub lines: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "[{}] {} ({:.2} s)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.elapsed.as_secs_f64()
        );
        for l in &self.lines {
            out.push_str("  ");
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

/// Collects named worst-case deviations against one tolerance.
struct Checks {
    tol: f64,
    lines: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new(tol: f64) -> Self {
        Checks { tol, lines: Vec::new(), passed: true }
    }

    fn worst(&mut self, label: &str, value: f64) {
        let ok = value <= self.tol;
        self.passed &= ok;
        self.lines.push(format!("{} {label}: worst {value:.3e} (tol {:.0e})", if ok { "ok  " } else { "FAIL" }, self.tol));
    }

    fn flag(&mut self, label: &str, ok: bool, detail: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {label}: {detail}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |w, (x, y)| w.max((x - y).abs())) / scale
}

fn draw(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

/// A step-two group with `m = 3`, `n = 5` and independent skew structure matrices.
pub fn five_dim_spec() -> GroupSpec {
    GroupSpec::from_rows(
        3,
        5,
        &[
            vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
            vec![vec![0.0, 0.0, 0.5], vec![0.0, 0.0, 1.0], vec![-0.5, -1.0, 0.0]],
        ],
    )
    .expect("valid structure")
}

/// Runs one suite on `g` (and on the fixed `m = 3, n = 5` group where the
/// suite is not specific to Heisenberg-like groups).
pub fn run_suite(suite: Suite, g: &GroupSpec, opts: &VerifyOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let samples = opts.samples.unwrap_or(suite.default_samples());
    let tol = opts.tolerance.unwrap_or(suite.default_tolerance());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (suite as u64).wrapping_mul(0x9e37_79b9));
    let checks = match suite {
        Suite::GroupAxioms => group_axioms(g, samples, tol, &mut rng)?,
        Suite::NormLemma => norm_lemma(g, samples, tol, opts.seed)?,
        Suite::Barriers => barrier_identities(g, samples, tol, &opts.constants, &mut rng)?,
        Suite::EnvelopeOracle => envelope_oracle(samples, tol, &mut rng),
        Suite::ChangeOfVariables => change_of_variables(g, samples, tol, &mut rng)?,
    };
    Ok(SuiteReport { suite, passed: checks.passed, lines: checks.lines, elapsed: start.elapsed() })
}

fn groups_for(g: &GroupSpec) -> Vec<(String, GroupSpec)> {
    let mut out = vec![(format!("m={} n={}", g.m(), g.n()), g.clone())];
    let five = five_dim_spec();
    if *g != five {
        out.push(("m=3 n=5".into(), five));
    }
    out
}

fn heisenberg_like_for(g: &GroupSpec) -> Vec<(String, HeisenbergLikeSpec)> {
    let mut out = Vec::new();
    if let Ok(h) = HeisenbergLikeSpec::new(g.clone()) {
        out.push((format!("m={} n={}", g.m(), g.n()), h));
    }
    for h in [HeisenbergLikeSpec::heisenberg(), HeisenbergLikeSpec::symplectic(2).expect("valid")] {
        if !out.iter().any(|(_, o)| *o == h) {
            out.push((format!("m={} n={}", h.m(), h.n()), h));
        }
    }
    out
}

fn group_axioms(g: &GroupSpec, samples: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<Checks> {
    let mut c = Checks::new(tol);
    for (label, g) in groups_for(g) {
        let n = g.n();
        let zero = vec![0.0; n];
        let (mut assoc, mut ident, mut inv, mut hom, mut left, mut homog) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let (x, y, z) = (draw(rng, n, 1.0), draw(rng, n, 1.0), draw(rng, n, 1.0));
            let lambda = rng.gen_range(0.1..3.0);
            let xy = g.compose(&x, &y)?;
            let lhs = g.compose(&xy, &z)?;
            let rhs = g.compose(&x, &g.compose(&y, &z)?)?;
            assoc = assoc.max(rel_vec(&lhs, &rhs));
            ident = ident.max(rel_vec(&g.compose(&x, &zero)?, &x)).max(rel_vec(&g.compose(&zero, &x)?, &x));
            inv = inv
                .max(rel_vec(&g.compose(&x, &g.inverse(&x))?, &zero))
                .max(rel_vec(&g.compose(&g.inverse(&x), &x)?, &zero));
            let d_xy = g.dilate(lambda, &xy)?;
            let dx_dy = g.compose(&g.dilate(lambda, &x)?, &g.dilate(lambda, &y)?)?;
            hom = hom.max(rel_vec(&d_xy, &dx_dy));
            let dist = g.gauge_distance(&x, &y)?;
            let moved = g.gauge_distance(&g.compose(&z, &x)?, &g.compose(&z, &y)?)?;
            left = left.max(rel(dist, moved));
            homog = homog.max(rel(g.homogeneous_norm(&g.dilate(lambda, &x)?), lambda * g.homogeneous_norm(&x)));
        }
        c.worst(&format!("{label} associativity"), assoc);
        c.worst(&format!("{label} identity"), ident);
        c.worst(&format!("{label} inverse"), inv);
        c.worst(&format!("{label} dilations are automorphisms"), hom);
        c.worst(&format!("{label} left-invariance of d_G"), left);
        c.worst(&format!("{label} norm homogeneity"), homog);
    }
    Ok(c)
}

fn norm_lemma(g: &GroupSpec, samples: usize, tol: f64, seed: u64) -> Result<Checks> {
    let mut c = Checks::new(tol);
    for (label, g) in groups_for(g) {
        let r = check_norm_lemma(&g, samples, seed, tol)?;
        c.worst(&format!("{label} XN closed form"), r.gradient_formula);
        c.worst(&format!("{label} |XN|^2 closed form"), r.gradient_norm_formula);
        c.worst(&format!("{label} |XN|^2 >= 16|x_h|^6"), r.lower_bound_violation);
        c.worst(&format!("{label} X^2N closed form"), r.hessian_formula);
        c.worst(&format!("{label} |X_x d^4| = |X_y d^4|"), r.distance_gradient_symmetry);
        c.worst(&format!("{label} X_x^2 d^4 = X_y^2 d^4"), r.distance_hessian_symmetry);
        c.flag(
            &format!("{label} zero sets on the axis"),
            r.zero_set_failures == 0 && r.distance_zero_set_failures == 0,
            format!("{} gauge and {} distance mismatches", r.zero_set_failures, r.distance_zero_set_failures),
        );
    }
    Ok(c)
}

fn nonsingular_point(rng: &mut ChaCha8Rng, g: &GroupSpec, half: f64) -> Vec<f64> {
    loop {
        let x = draw(rng, g.n(), half);
        if g.horizontal(&x).iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-2 {
            return x;
        }
    }
}

fn barrier_identities(
    g: &GroupSpec,
    samples: usize,
    tol: f64,
    k: &CatalogConstants,
    rng: &mut ChaCha8Rng,
) -> Result<Checks> {
    let mut c = Checks::new(tol);
    let operator_dev = |b: &BarrierEval, rng: &mut ChaCha8Rng| -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x = nonsingular_point(rng, b.group(), 1.5);
            let t = rng.gen_range(0.0..1.0);
            let closed = b.operator_closed_form_with(&x, k).expect("nonsingular");
            let computed = b.operator_computed(&x, t)?.ok_or_else(|| Error::Singular(format!("{x:?}")))?;
            worst = worst.max(rel(closed, computed));
        }
        Ok(worst)
    };
    for (label, g) in groups_for(g) {
        let critical = -2.0 * (g.m() as f64 - 1.0);
        let cyl = BarrierEval::cylinder(&g, rng.gen_range(-4.0..4.0), 1.0);
        c.worst(&format!("{label} cylinder operator"), operator_dev(&cyl, rng)?);
        let exact = BarrierEval::cylinder(&g, critical, 1.0);
        let mut resid = 0.0f64;
        for _ in 0..samples {
            let x = nonsingular_point(rng, &g, 1.5);
            resid = resid.max(exact.operator_computed(&x, rng.gen_range(0.0..1.0))?.unwrap_or(f64::INFINITY).abs());
        }
        c.flag(
            &format!("{label} cylinder c = {critical} is an exact solution"),
            resid <= 1e-12,
            format!("worst residual {resid:.3e} (tol 1e-12)"),
        );
    }
    for (label, h) in heisenberg_like_for(g) {
        for kind in [BarrierKind::Gauge, BarrierKind::EuclidBall, BarrierKind::SqrtGauge] {
            let b = BarrierEval::new(BarrierSpec::new(kind, rng.gen_range(-8.0..4.0), 1.0), &h)?;
            c.worst(&format!("{label} {kind} operator"), operator_dev(&b, rng)?);
        }
        let gauge_profile = BarrierEval::gauge(&h, 0.0, 0.0);
        let euclid = BarrierEval::euclid_ball(&h, 0.0, 0.0);
        let (mut xg, mut xg2, mut x2g, mut cubic, mut xw, mut xw2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let x = nonsingular_point(rng, &h, 1.5);
            let cf = gauge_closed_forms(&h, &x, k);
            let jet = gauge_profile.profile().jet(&x, 0.0)?;
            let q = horizontal_gradient(&h, &jet, &x);
            let a = horizontal_hessian(&h, &jet, &x);
            xg = xg.max(rel_vec(q.as_slice(), cf.xg.as_slice()));
            xg2 = xg2.max(rel(q.norm_squared(), cf.xg_norm_sq));
            x2g = x2g.max(rel_vec(a.as_slice(), cf.x2g.as_slice()));
            cubic = cubic.max(rel(q.dot(&(&a * &q)), cf.cubic));
            let (cxw, cxw2) = euclid_closed_forms(&h, &x, k);
            let jw = euclid.field().jet(&x, 0.0)?;
            let qw = horizontal_gradient(&h, &jw, &x);
            xw = xw.max(rel_vec(qw.as_slice(), cxw.as_slice()));
            xw2 = xw2.max(rel(qw.norm_squared(), cxw2));
        }
        c.worst(&format!("{label} gauge XG"), xg);
        c.worst(&format!("{label} gauge |XG|^2"), xg2);
        c.worst(&format!("{label} gauge X^2G"), x2g);
        c.worst(&format!("{label} gauge XG.X^2G XG"), cubic);
        c.worst(&format!("{label} euclid_ball Xw"), xw);
        c.worst(&format!("{label} euclid_ball |Xw|^2"), xw2);
    }
    Ok(c)
}

/// `count` unit vectors in `R^m`: equally spaced on the circle for `m = 2`, a
/// Fibonacci lattice for `m = 3`, normalized Gaussians otherwise.
pub fn sphere_directions(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match m {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..m)
                        .map(|_| {
                            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen_range(0.0..1.0));
                            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                        })
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

/// Envelopes as the extremes of `F(e, A)` over the sampled unit directions `e`.
pub fn sphere_envelopes(a: &DMatrix<f64>, directions: &[Vec<f64>]) -> Envelopes {
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for e in directions {
        let q = nalgebra::DVector::from_column_slice(e);
        let f = mcf_operator(&q, a).expect("unit direction");
        lower = lower.min(f);
        upper = upper.max(f);
    }
    Envelopes { lower, upper }
}

fn envelope_oracle(samples: usize, tol: f64, rng: &mut ChaCha8Rng) -> Checks {
    let mut c = Checks::new(tol);
    for m in [2usize, 3] {
        let dirs = sphere_directions(m, 10_000, 0);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let mut a = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            a = (&a + a.transpose()) * 0.5;
            let exact = envelopes(&a);
            let sampled = sphere_envelopes(&a, &dirs);
            lo = lo.max((exact.lower - sampled.lower).abs());
            hi = hi.max((exact.upper - sampled.upper).abs());
        }
        c.worst(&format!("m={m} F_* against 10^4 directions"), lo);
        c.worst(&format!("m={m} F^* against 10^4 directions"), hi);
    }
    c
}

/// Profiles `U` used by the change-of-variables suite.
pub fn profile_family(g: &GroupSpec) -> Vec<(&'static str, ScalarField)> {
    let (m, n) = (g.m(), g.n());
    let field = |e: Expr| ScalarField::new(e, n).expect("group coordinates");
    vec![
        ("|x_h|^2", field(Expr::squared_norm(0..m))),
        ("|x|^2", field(Expr::squared_norm(0..n))),
        ("|x_h|^4 + |x_v|^2", gauge_field(g)),
        ("|x_h|^4 + 4|x_v|^2", field(Expr::squared_norm(0..m).powi(2) + 4.0 * Expr::squared_norm(m..n))),
        ("(|x_h|^4 + 4|x_v|^2)^(1/2)", field((Expr::squared_norm(0..m).powi(2) + 4.0 * Expr::squared_norm(m..n)).sqrt())),
        ("exp(x_1) + |x_h|^2 x_n", field(Expr::var(0).exp() + Expr::squared_norm(0..m) * Expr::var(n - 1))),
    ]
}

/// A random increasing relabeling.
pub fn random_relabel(rng: &mut ChaCha8Rng) -> Relabel {
    match rng.gen_range(0..4) {
        0 => Relabel::Affine { a: rng.gen_range(0.5..3.0), b: rng.gen_range(-1.0..1.0) },
        1 => Relabel::Cubic { a: rng.gen_range(0.0..2.0) },
        2 => Relabel::Exp { a: rng.gen_range(0.2..2.0) },
        _ => Relabel::Power { p: rng.gen_range(1.5..3.0) },
    }
}

fn change_of_variables(g: &GroupSpec, samples: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<Checks> {
    let mut c = Checks::new(tol);
    for (label, g) in groups_for(g) {
        let family = profile_family(&g);
        let mut worst = 0.0f64;
        let mut drawn = 0;
        while drawn < samples {
            let (_, u) = &family[rng.gen_range(0..family.len())];
            let psi = random_relabel(rng);
            let x = nonsingular_point(rng, &g, 1.5);
            let value = u.value(&x, 0.0)?;
            if !psi.is_increasing_at(value) {
                continue;
            }
            match crate::barriers::change_of_variables_check(&g, u, psi, &x) {
                Ok(r) => {
                    worst = worst.max(r.relative);
                    drawn += 1;
                }
                Err(Error::Singular(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        c.worst(&format!("{label} curv(psi(U)) = psi'(U) curv(U) over {samples} draws"), worst);
    }
    Ok(c)
}

/// Runs the suites in order.
pub fn run_suites(suites: &[Suite], g: &GroupSpec, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    suites.iter().map(|&s| run_suite(s, g, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn sphere_oracle_brackets_eigen_envelopes() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]);
        let e = envelopes(&a);
        let s = sphere_envelopes(&a, &sphere_directions(2, 10_000, 0));
        assert!(s.lower >= e.lower - 1e-15 && s.upper <= e.upper + 1e-15);
        assert!((s.lower - e.lower).abs() < 1e-6);
    }

    #[test]
    fn broken_constant_fails_barrier_suite() {
        let mut opts = VerifyOptions { samples: Some(20), ..VerifyOptions::default() };
        opts.constants.euclid_grad_norm = -4.0;
        let r = run_suite(Suite::Barriers, &GroupSpec::heisenberg(), &opts).unwrap();
        assert!(!r.passed);
        assert!(r.lines.iter().any(|l| l.starts_with("FAIL") && l.contains("|Xw|^2")));
    }
}
