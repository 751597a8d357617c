//! Point-wise sub/supersolution verdicts for smooth candidate fields.
//!
//! At a regular point (`|Xf| > eps`) the field is its own test function and
//! the residual is `f_t + F(Xf, X^2 f)`. At a characteristic point two cases
//! are distinguished: when `X^2 f` vanishes as well only the sign of `f_t`
//! matters; otherwise the residuals use the envelopes `F_*`/`F^*` and are only
//! necessary conditions ("envelope bound").

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::barriers::{BarrierEval, Classification};
use crate::calculus::{envelopes, horizontal_gradient, horizontal_hessian, mcf_operator};
use crate::error::{Error, Result};
use crate::expr::{Expr, ScalarField};
use crate::group::{GroupSpec, Point};

/// Characteristic threshold for closed-form fields; exact jets make the set sharp.
pub const DEFAULT_EPS_SING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Regular,
    CharacteristicNullHessian,
    CharacteristicNonnullHessian,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Regular => "regular",
            Regime::CharacteristicNullHessian => "characteristic-null-hessian",
            Regime::CharacteristicNonnullHessian => "characteristic-nonnull-hessian",
        }
    }

    /// Residuals at such points are necessary conditions only.
    pub fn is_envelope_bound(&self) -> bool {
        matches!(self, Regime::CharacteristicNonnullHessian)
    }
}

/// `sub_residual <= 0` passes the subsolution test, `super_residual >= 0` the supersolution test.
#[derive(Debug, Clone, PartialEq)]
pub struct PointVerdict {
    pub x: Point,
    pub t: f64,
    pub regime: Regime,
    pub sub_residual: f64,
    pub super_residual: f64,
}

/// Verdict for a smooth field at `(x, t)`.
pub fn check_point(g: &GroupSpec, f: &ScalarField, x: &[f64], t: f64, eps_sing: f64) -> Result<PointVerdict> {
    let jet = f.jet(x, t)?;
    let ft = jet.dt.unwrap_or(0.0);
    let q = horizontal_gradient(g, &jet, x);
    let a = horizontal_hessian(g, &jet, x);
    let (regime, sub, sup) = if q.norm() > eps_sing {
        let v = ft + mcf_operator(&q, &a).expect("nonzero gradient");
        (Regime::Regular, v, v)
    } else if a.amax() <= eps_sing {
        (Regime::CharacteristicNullHessian, ft, ft)
    } else {
        let env = envelopes(&a);
        (Regime::CharacteristicNonnullHessian, ft + env.lower, ft + env.upper)
    };
    Ok(PointVerdict { x: Point::from(x), t, regime, sub_residual: sub, super_residual: sup })
}

/// Like [`check_point`], refusing points outside the barrier's validity region.
pub fn check_barrier_point(b: &BarrierEval, x: &[f64], t: f64, eps_sing: f64) -> Result<PointVerdict> {
    if !b.is_valid(x) {
        return Err(Error::OutsideRegion(format!("{x:?} for {}", b.spec().kind)));
    }
    check_point(b.group(), b.field(), x, t, eps_sing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub samples: usize,
    /// Samples outside every declared claim, not checked.
    pub unclaimed: usize,
    pub regular: usize,
    pub null_hessian: usize,
    pub nonnull_hessian: usize,
    /// Largest `sub_residual` among samples claimed to be subsolution points.
    pub worst_sub: Option<(f64, Point)>,
    /// Smallest `super_residual` among samples claimed to be supersolution points.
    pub worst_super: Option<(f64, Point)>,
    pub tolerance: f64,
    pub passed: bool,
}

impl SweepReport {
    pub fn summary(&self) -> String {
        let fmt = |w: &Option<(f64, Point)>| match w {
            Some((v, _)) => format!("{v:.3e}"),
            None => "-".to_string(),
        };
        format!(
            "{} samples ({} regular, {} null-hessian, {} envelope-bound, {} unclaimed); worst sub {} worst super {}; {}",
            self.samples,
            self.regular,
            self.null_hessian,
            self.nonnull_hessian,
            self.unclaimed,
            fmt(&self.worst_sub),
            fmt(&self.worst_super),
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Aggregates [`check_point`] over samples; `classify` returns the declared
/// claim at each point.
pub fn sweep_with<C>(
    g: &GroupSpec,
    f: &ScalarField,
    samples: &[Point],
    t: f64,
    eps_sing: f64,
    tolerance: f64,
    classify: C,
) -> Result<SweepReport>
where
    C: Fn(&[f64]) -> Classification,
{
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one sample".into()));
    }
    let mut rep = SweepReport {
        samples: samples.len(),
        unclaimed: 0,
        regular: 0,
        null_hessian: 0,
        nonnull_hessian: 0,
        worst_sub: None,
        worst_super: None,
        tolerance,
        passed: true,
    };
    for x in samples {
        let claim = classify(x);
        if claim == Classification::Unclaimed {
            rep.unclaimed += 1;
            continue;
        }
        let v = check_point(g, f, x, t, eps_sing)?;
        match v.regime {
            Regime::Regular => rep.regular += 1,
            Regime::CharacteristicNullHessian => rep.null_hessian += 1,
            Regime::CharacteristicNonnullHessian => rep.nonnull_hessian += 1,
        }
        if claim.claims_sub() && rep.worst_sub.as_ref().is_none_or(|(w, _)| v.sub_residual > *w) {
            rep.worst_sub = Some((v.sub_residual, v.x.clone()));
        }
        if claim.claims_super() && rep.worst_super.as_ref().is_none_or(|(w, _)| v.super_residual < *w) {
            rep.worst_super = Some((v.super_residual, v.x.clone()));
        }
    }
    let sub_ok = rep.worst_sub.as_ref().is_none_or(|(w, _)| *w <= tolerance);
    let sup_ok = rep.worst_super.as_ref().is_none_or(|(w, _)| *w >= -tolerance);
    rep.passed = sub_ok && sup_ok;
    Ok(rep)
}

/// Sweep of a barrier against its own declared classification.
pub fn sweep(b: &BarrierEval, samples: &[Point], t: f64, eps_sing: f64, tolerance: f64) -> Result<SweepReport> {
    if let Some(bad) = samples.iter().find(|x| !b.is_valid(x)) {
        return Err(Error::OutsideRegion(format!("sample {:?} for {}", bad.as_slice(), b.spec().kind)));
    }
    sweep_with(b.group(), b.field(), samples, t, eps_sing, tolerance, |x| b.classification_at(x))
}

/// Whether `f` belongs to the restricted test class near `(x, t)`: at every
/// sampled point where `|Xf| <= eps_sing`, also `X^2 f` vanishes. Samples are
/// the point itself, axis offsets of size `radius` and points on the vertical
/// fibre through `x`.
pub fn restricted_test_class_filter(
    g: &GroupSpec,
    f: &ScalarField,
    x: &[f64],
    t: f64,
    eps_sing: f64,
    radius: f64,
) -> Result<bool> {
    let n = g.n();
    let mut samples = vec![x.to_vec()];
    for a in 0..n {
        for s in [-1.0, -0.5, 0.5, 1.0] {
            let mut y = x.to_vec();
            y[a] += s * radius;
            samples.push(y);
        }
    }
    for y in &samples {
        let jet = f.jet(y, t)?;
        let q = horizontal_gradient(g, &jet, y);
        if q.norm() <= eps_sing && horizontal_hessian(g, &jet, y).amax() > eps_sing {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `N(x) = |x_h|^4 + |x_v|^2` as a field on `R^n`.
pub fn gauge_field(g: &GroupSpec) -> ScalarField {
    let m = g.m();
    ScalarField::new(Expr::squared_norm(0..m).powi(2) + Expr::squared_norm(m..g.n()), g.n())
        .expect("gauge uses group coordinates")
}

/// `d_G(x, y)^4` as a field on `R^n x R^n`, `x` first.
pub fn distance4_field(g: &GroupSpec) -> ScalarField {
    let (m, n) = (g.m(), g.n());
    let horizontal = Expr::sum_of_squares((0..m).map(|i| Expr::var(n + i) - Expr::var(i)).collect()).powi(2);
    let vertical = Expr::sum_of_squares(
        (0..n - m)
            .map(|k| {
                let bk = &g.structure_matrices()[k];
                let mut bracket = Vec::new();
                for i in 0..m {
                    for j in 0..m {
                        if bk[(i, j)] != 0.0 {
                            bracket.push(bk[(i, j)] * (Expr::var(j) * Expr::var(n + i)));
                        }
                    }
                }
                Expr::var(n + m + k) - Expr::var(m + k) - Expr::Sum(bracket)
            })
            .collect(),
    );
    ScalarField::new(horizontal + vertical, 2 * n).expect("distance uses 2n coordinates")
}

/// Worst deviations of the gauge-norm identities.
#[derive(Debug, Clone, PartialEq)]
pub struct NormLemmaReport {
    pub points: usize,
    /// `XN` against `4|x_h|^2 x_h + 2 sum_k (x_v)_k B^(k) x_h`, relative.
    pub gradient_formula: f64,
    /// `|XN|^2` against `16|x_h|^6 + 4|sum_k (x_v)_k B^(k) x_h|^2`, relative.
    pub gradient_norm_formula: f64,
    /// Largest relative violation of `|XN|^2 >= 16|x_h|^6` (zero when it holds).
    pub lower_bound_violation: f64,
    /// `X^2 N` against `4|x_h|^2 I + 8 x_h (x) x_h + 2 sum_k B^(k)x_h (x) B^(k)x_h`, relative.
    pub hessian_formula: f64,
    /// Axis points where `XN` or `X^2 N` is not exactly zero, plus off-axis points where either vanishes.
    pub zero_set_failures: usize,
    /// `| |X_x d^4| - |X_y d^4| |`, relative.
    pub distance_gradient_symmetry: f64,
    /// `X_x^2 d^4 - X_y^2 d^4`, relative max-entry.
    pub distance_hessian_symmetry: f64,
    /// Pairs with `x_h = y_h` where the distance derivatives exceed `tolerance`, plus pairs with `x_h != y_h` where they vanish.
    pub distance_zero_set_failures: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl NormLemmaReport {
    pub fn worst(&self) -> f64 {
        [
            self.gradient_formula,
            self.gradient_norm_formula,
            self.lower_bound_violation,
            self.hessian_formula,
            self.distance_gradient_symmetry,
            self.distance_hessian_symmetry,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Checks the gauge-norm identities at `count` random points (and as many
/// axis points and `x_h = y_h` pairs) drawn from `[-1.5, 1.5]^n`.
pub fn check_norm_lemma(g: &GroupSpec, count: usize, seed: u64, tolerance: f64) -> Result<NormLemmaReport> {
    let (m, n) = (g.m(), g.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect() };
    let nf = gauge_field(g);
    let d4 = distance4_field(g);
    let mut rep = NormLemmaReport {
        points: count,
        gradient_formula: 0.0,
        gradient_norm_formula: 0.0,
        lower_bound_violation: 0.0,
        hessian_formula: 0.0,
        zero_set_failures: 0,
        distance_gradient_symmetry: 0.0,
        distance_hessian_symmetry: 0.0,
        distance_zero_set_failures: 0,
        tolerance,
        passed: false,
    };
    for _ in 0..count {
        let x = draw(&mut rng);
        let xh = &x[..m];
        let h2: f64 = xh.iter().map(|v| v * v).sum();
        let mut mixed = vec![0.0; m];
        for k in 0..n - m {
            let bx = g.apply_b(k, xh);
            for i in 0..m {
                mixed[i] += x[m + k] * bx[i];
            }
        }
        let jet = nf.jet(&x, 0.0)?;
        let q = horizontal_gradient(g, &jet, &x);
        let a = horizontal_hessian(g, &jet, &x);
        for i in 0..m {
            let closed = 4.0 * h2 * xh[i] + 2.0 * mixed[i];
            rep.gradient_formula = rep.gradient_formula.max(rel(q[i], closed));
        }
        let q2 = q.norm_squared();
        let mixed2: f64 = mixed.iter().map(|v| v * v).sum();
        rep.gradient_norm_formula = rep.gradient_norm_formula.max(rel(q2, 16.0 * h2.powi(3) + 4.0 * mixed2));
        let bound = 16.0 * h2.powi(3);
        if q2 < bound {
            rep.lower_bound_violation = rep.lower_bound_violation.max((bound - q2) / bound.max(1.0));
        }
        let mut closed = nalgebra::DMatrix::identity(m, m) * (4.0 * h2);
        for i in 0..m {
            for j in 0..m {
                closed[(i, j)] += 8.0 * xh[i] * xh[j];
            }
        }
        for k in 0..n - m {
            let bx = g.apply_b(k, xh);
            for i in 0..m {
                for j in 0..m {
                    closed[(i, j)] += 2.0 * bx[i] * bx[j];
                }
            }
        }
        let hdev = (&a - &closed).amax() / a.amax().max(closed.amax()).max(1.0);
        rep.hessian_formula = rep.hessian_formula.max(hdev);
        if h2 > 0.0 && (q2 == 0.0 || a.amax() == 0.0) {
            rep.zero_set_failures += 1;
        }

        // Same point pushed onto the axis.
        let mut axis = x.clone();
        axis[..m].iter_mut().for_each(|v| *v = 0.0);
        let ja = nf.jet(&axis, 0.0)?;
        let qa = horizontal_gradient(g, &ja, &axis);
        let aa = horizontal_hessian(g, &ja, &axis);
        if qa.iter().any(|v| *v != 0.0) || aa.iter().any(|v| *v != 0.0) {
            rep.zero_set_failures += 1;
        }

        // Distance symmetry on a random pair and on a pair sharing x_h.
        let y = draw(&mut rng);
        let (dg, dh, zero_x, zero_y) = distance_pair(g, &d4, &x, &y)?;
        rep.distance_gradient_symmetry = rep.distance_gradient_symmetry.max(dg);
        rep.distance_hessian_symmetry = rep.distance_hessian_symmetry.max(dh);
        if zero_x || zero_y {
            rep.distance_zero_set_failures += 1;
        }
        let mut y_same = y.clone();
        y_same[..m].copy_from_slice(&x[..m]);
        let (dg, dh, _, _) = distance_pair(g, &d4, &x, &y_same)?;
        rep.distance_gradient_symmetry = rep.distance_gradient_symmetry.max(dg);
        rep.distance_hessian_symmetry = rep.distance_hessian_symmetry.max(dh);
        let mut xy = x.clone();
        xy.extend_from_slice(&y_same);
        let jet = d4.jet(&xy, 0.0)?;
        let jx = jet.block(0, n);
        let jy = jet.block(n, n);
        let small = |p: &[f64], j: &crate::calculus::Jet| {
            horizontal_gradient(g, j, p).amax() <= tolerance && horizontal_hessian(g, j, p).amax() <= tolerance
        };
        if !small(&x, &jx) || !small(&y_same, &jy) {
            rep.distance_zero_set_failures += 1;
        }
    }
    rep.passed = rep.worst() <= tolerance && rep.zero_set_failures == 0 && rep.distance_zero_set_failures == 0;
    Ok(rep)
}

/// Relative gradient-norm and Hessian asymmetry of `d^4` in `x` versus `y`,
/// plus flags for derivatives vanishing where `x_h != y_h`.
fn distance_pair(g: &GroupSpec, d4: &ScalarField, x: &[f64], y: &[f64]) -> Result<(f64, f64, bool, bool)> {
    let n = g.n();
    let mut xy = x.to_vec();
    xy.extend_from_slice(y);
    let jet = d4.jet(&xy, 0.0)?;
    let jx = jet.block(0, n);
    let jy = jet.block(n, n);
    let qx = horizontal_gradient(g, &jx, x);
    let qy = horizontal_gradient(g, &jy, y);
    let ax = horizontal_hessian(g, &jx, x);
    let ay = horizontal_hessian(g, &jy, y);
    let dg = rel(qx.norm(), qy.norm());
    let dh = (&ax - &ay).amax() / ax.amax().max(ay.amax()).max(1.0);
    let differ = (0..g.m()).any(|i| x[i] != y[i]);
    let zero_x = differ && (qx.amax() == 0.0 || ax.amax() == 0.0);
    let zero_y = differ && (qy.amax() == 0.0 || ay.amax() == 0.0);
    Ok((dg, dh, zero_x, zero_y))
}

/// Uniform random points in a box, optionally rejecting some.
pub fn random_points<F>(n: usize, lo: f64, hi: f64, count: usize, seed: u64, accept: F) -> Vec<Point>
where
    F: Fn(&[f64]) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        if accept(&x) {
            out.push(Point::new(x));
        }
    }
    out
}

/// Cell-centred lattice with `per_axis` points per axis over `[lo, hi]^n`.
pub fn lattice(n: usize, lo: f64, hi: f64, per_axis: usize) -> Vec<Point> {
    let h = (hi - lo) / per_axis as f64;
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut flat| {
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                x[a] = lo + ((flat % per_axis) as f64 + 0.5) * h;
                flat /= per_axis;
            }
            Point::new(x)
        })
        .collect()
}
