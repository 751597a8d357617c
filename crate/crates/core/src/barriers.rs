//! Explicit sub- and supersolutions of the horizontal mean curvature flow.
//!
//! Every barrier has the separated form `u(x, t) = c t - U(x) + r`, so the
//! operator `u_t + F(Xu, X^2 u)` reduces to `c + F(-XU, -X^2 U)` and has a
//! closed form at non-characteristic points. The catalog:
//!
//! | kind          | `U(x)`                      | operator (for `x_h != 0`)            |
//! |---------------|-----------------------------|--------------------------------------|
//! | `cylinder`    | `|x_h|^2`                   | `c + 2(m-1)`                         |
//! | `gauge`       | `G = |x_h|^4 + 4 x_v^2`     | `c + 4n |x_h|^2`                     |
//! | `euclid_ball` | `|x|^2`                     | `c + 2(m-1) + 2|x_h|^2 / (1 + x_v^2)` |
//! | `sqrt_gauge`  | `G^(1/2)`                   | `c + 4n |x_h|^2 / (2 G^(1/2))`        |
//!
//! All but the cylinder need a Heisenberg-like group.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{self, horizontal_gradient, horizontal_hessian, mcf_operator, Jet};
use crate::error::{Error, Result};
use crate::expr::{Expr, Relabel, ScalarField};
use crate::group::{GroupSpec, HeisenbergLikeSpec, Point};

/// Radius (in gauge distance) around the origin where `sqrt_gauge` jets are refused.
pub const SQRT_GAUGE_EXCLUSION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Cylinder,
    Gauge,
    EuclidBall,
    SqrtGauge,
}

impl BarrierKind {
    pub const ALL: [BarrierKind; 4] =
        [BarrierKind::Cylinder, BarrierKind::Gauge, BarrierKind::EuclidBall, BarrierKind::SqrtGauge];

    pub fn name(&self) -> &'static str {
        match self {
            BarrierKind::Cylinder => "cylinder",
            BarrierKind::Gauge => "gauge",
            BarrierKind::EuclidBall => "euclid_ball",
            BarrierKind::SqrtGauge => "sqrt_gauge",
        }
    }
}

impl fmt::Display for BarrierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BarrierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cylinder" => Ok(BarrierKind::Cylinder),
            "gauge" | "gauge_ball" => Ok(BarrierKind::Gauge),
            "euclid_ball" => Ok(BarrierKind::EuclidBall),
            "sqrt_gauge" => Ok(BarrierKind::SqrtGauge),
            other => Err(Error::InvalidArgument(format!(
                "unknown barrier kind '{other}' (expected cylinder, gauge, euclid_ball or sqrt_gauge)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub kind: BarrierKind,
    pub c: f64,
    pub r: f64,
}

impl BarrierSpec {
    pub fn new(kind: BarrierKind, c: f64, r: f64) -> Self {
        BarrierSpec { kind, c, r }
    }
}

/// What a barrier is claimed to be at a given point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Solution,
    Supersolution,
    Subsolution,
    /// No claim at this point (outside the validity region of the declared one).
    Unclaimed,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Solution => "solution",
            Classification::Supersolution => "supersolution",
            Classification::Subsolution => "subsolution",
            Classification::Unclaimed => "unclaimed",
        }
    }

    pub fn claims_super(&self) -> bool {
        matches!(self, Classification::Solution | Classification::Supersolution)
    }

    pub fn claims_sub(&self) -> bool {
        matches!(self, Classification::Solution | Classification::Subsolution)
    }
}

/// Constants of the closed-form operator values and identities. The defaults
/// are the catalog values; overriding them lets the verification suite check
/// alternative (e.g. misprinted) constants and report the mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogConstants {
    /// `k` in `c + k(m-1)` for the cylinder.
    pub cylinder_operator: f64,
    /// `k` in `c + k n |x_h|^2` for the gauge.
    pub gauge_operator: f64,
    /// `k` in `|XG|^2 = k |x_h|^2 G`.
    pub gauge_grad_norm: f64,
    /// `k` in `XG . X^2G XG = k |x_h|^4 G`.
    pub gauge_cubic: f64,
    /// `k` in `|Xw|^2 = k |x_h|^2 (1 + x_v^2)` for `w = ct - |x|^2 + r`.
    pub euclid_grad_norm: f64,
    /// `k` in `c + k(m-1) + k |x_h|^2 / (1 + x_v^2)`.
    pub euclid_operator: f64,
    /// `k` in `c + k n |x_h|^2 / (2 G^(1/2))`.
    pub sqrt_gauge_operator: f64,
}

impl Default for CatalogConstants {
    fn default() -> Self {
        CatalogConstants {
            cylinder_operator: 2.0,
            gauge_operator: 4.0,
            gauge_grad_norm: 16.0,
            gauge_cubic: 192.0,
            euclid_grad_norm: 4.0,
            euclid_operator: 2.0,
            sqrt_gauge_operator: 4.0,
        }
    }
}

/// A barrier instance: field, closed-form operator and declared classification.
#[derive(Debug, Clone)]
pub struct BarrierEval {
    spec: BarrierSpec,
    group: GroupSpec,
    profile: ScalarField,
    field: ScalarField,
}

fn sq_norm(range: std::ops::Range<usize>) -> Expr {
    Expr::squared_norm(range)
}

fn gauge_expr(m: usize) -> Expr {
    sq_norm(0..m).powi(2) + 4.0 * Expr::var(m).powi(2)
}

impl BarrierEval {
    pub fn new(spec: BarrierSpec, group: &GroupSpec) -> Result<Self> {
        match spec.kind {
            BarrierKind::Cylinder => Ok(Self::cylinder(group, spec.c, spec.r)),
            kind => {
                let h = HeisenbergLikeSpec::new(group.clone())?;
                Ok(match kind {
                    BarrierKind::Gauge => Self::gauge(&h, spec.c, spec.r),
                    BarrierKind::EuclidBall => Self::euclid_ball(&h, spec.c, spec.r),
                    BarrierKind::SqrtGauge => Self::sqrt_gauge(&h, spec.c, spec.r),
                    BarrierKind::Cylinder => unreachable!(),
                })
            }
        }
    }

    /// `w = ct - |x_h|^2 + r`; an exact solution for `c = -2(m-1)`.
    pub fn cylinder(g: &GroupSpec, c: f64, r: f64) -> Self {
        Self::from_profile(BarrierSpec::new(BarrierKind::Cylinder, c, r), g.clone(), sq_norm(0..g.m()))
    }

    /// `u = ct - G + r` with `G = |x_h|^4 + 4 |x_v|^2`.
    pub fn gauge(h: &HeisenbergLikeSpec, c: f64, r: f64) -> Self {
        Self::from_profile(BarrierSpec::new(BarrierKind::Gauge, c, r), h.group().clone(), gauge_expr(h.m()))
    }

    /// `w = ct - |x|^2 + r`.
    pub fn euclid_ball(h: &HeisenbergLikeSpec, c: f64, r: f64) -> Self {
        Self::from_profile(BarrierSpec::new(BarrierKind::EuclidBall, c, r), h.group().clone(), sq_norm(0..h.n()))
    }

    /// `v = ct - G^(1/2) + r`; not differentiable at `x = 0`.
    pub fn sqrt_gauge(h: &HeisenbergLikeSpec, c: f64, r: f64) -> Self {
        Self::from_profile(
            BarrierSpec::new(BarrierKind::SqrtGauge, c, r),
            h.group().clone(),
            gauge_expr(h.m()).sqrt(),
        )
    }

    fn from_profile(spec: BarrierSpec, group: GroupSpec, profile: Expr) -> Self {
        let n = group.n();
        let field = spec.c * Expr::time() - profile.clone() + spec.r;
        BarrierEval {
            spec,
            profile: ScalarField::new(profile, n).expect("profile uses group coordinates"),
            field: ScalarField::new(field, n).expect("field uses group coordinates"),
            group,
        }
    }

    pub fn spec(&self) -> &BarrierSpec {
        &self.spec
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// `u(x, t)`.
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// The spatial profile `U` with `u = ct - U + r`.
    pub fn profile(&self) -> &ScalarField {
        &self.profile
    }

    /// Initial datum `u(x, 0) = r - U(x)`.
    pub fn initial_value(&self, x: &[f64]) -> Result<f64> {
        self.field.value(x, 0.0)
    }

    /// Whether exact jets may be taken at `x`.
    pub fn is_valid(&self, x: &[f64]) -> bool {
        match self.spec.kind {
            BarrierKind::SqrtGauge => self.group.homogeneous_norm(x) > SQRT_GAUGE_EXCLUSION,
            _ => true,
        }
    }

    pub fn jet(&self, x: &[f64], t: f64) -> Result<Jet> {
        if !self.is_valid(x) {
            return Err(Error::OutsideRegion(format!(
                "{} is not differentiable within {SQRT_GAUGE_EXCLUSION:e} of the origin",
                self.spec.kind
            )));
        }
        self.field.jet(x, t)
    }

    fn horizontal_sq(&self, x: &[f64]) -> f64 {
        self.group.horizontal(x).iter().map(|v| v * v).sum()
    }

    /// Closed-form `u_t + F(Xu, X^2 u)`; `None` at characteristic points (`x_h = 0`).
    pub fn operator_closed_form(&self, x: &[f64]) -> Option<f64> {
        self.operator_closed_form_with(x, &CatalogConstants::default())
    }

    pub fn operator_closed_form_with(&self, x: &[f64], k: &CatalogConstants) -> Option<f64> {
        let h2 = self.horizontal_sq(x);
        if h2 == 0.0 {
            return None;
        }
        let (m, n, c) = (self.group.m() as f64, self.group.n() as f64, self.spec.c);
        Some(match self.spec.kind {
            BarrierKind::Cylinder => c + k.cylinder_operator * (m - 1.0),
            BarrierKind::Gauge => c + k.gauge_operator * n * h2,
            BarrierKind::EuclidBall => {
                let xv = x[self.group.m()];
                c + k.euclid_operator * (m - 1.0) + k.euclid_operator * h2 / (1.0 + xv * xv)
            }
            BarrierKind::SqrtGauge => {
                let gv = gauge_value(&self.group, x);
                c + k.sqrt_gauge_operator * n * h2 / (2.0 * gv.sqrt())
            }
        })
    }

    /// `u_t + F(Xu, X^2 u)` recomputed from exact jets; `None` where `Xu = 0`.
    pub fn operator_computed(&self, x: &[f64], t: f64) -> Result<Option<f64>> {
        let jet = self.jet(x, t)?;
        let q = horizontal_gradient(&self.group, &jet, x);
        let a = horizontal_hessian(&self.group, &jet, x);
        Ok(mcf_operator(&q, &a).map(|f| jet.dt.unwrap_or(0.0) + f))
    }

    /// Declared classification at `x`, including validity regions.
    pub fn classification_at(&self, x: &[f64]) -> Classification {
        let (m, n, c) = (self.group.m() as f64, self.group.n() as f64, self.spec.c);
        let critical = -2.0 * (m - 1.0);
        match self.spec.kind {
            BarrierKind::Cylinder => {
                if (c - critical).abs() <= 1e-12 * critical.abs() {
                    Classification::Solution
                } else if c > critical {
                    Classification::Supersolution
                } else {
                    Classification::Subsolution
                }
            }
            BarrierKind::Gauge => {
                if c >= 0.0 {
                    Classification::Supersolution
                } else if self.horizontal_sq(x) < -c / (4.0 * n) {
                    Classification::Subsolution
                } else {
                    Classification::Unclaimed
                }
            }
            BarrierKind::EuclidBall => {
                if c >= critical {
                    Classification::Supersolution
                } else {
                    let eps = (-c + critical) / 2.0;
                    let xv = x[self.group.m()];
                    if self.horizontal_sq(x) < eps * (1.0 + xv * xv) {
                        Classification::Subsolution
                    } else {
                        Classification::Unclaimed
                    }
                }
            }
            BarrierKind::SqrtGauge => {
                if c >= 0.0 {
                    Classification::Supersolution
                } else if c <= -2.0 * n {
                    Classification::Subsolution
                } else {
                    Classification::Unclaimed
                }
            }
        }
    }

    /// Human-readable statement of the declared claims.
    pub fn describe_claims(&self) -> String {
        let (m, n, c) = (self.group.m() as f64, self.group.n() as f64, self.spec.c);
        let critical = -2.0 * (m - 1.0);
        match self.spec.kind {
            BarrierKind::Cylinder => format!("cylinder c={c}: {}", self.classification_at(&vec![1.0; self.group.n()]).name()),
            BarrierKind::Gauge if c >= 0.0 => format!("gauge c={c}: global supersolution"),
            BarrierKind::Gauge => format!("gauge c={c}: subsolution on |x_h| < {}", (-c / (4.0 * n)).sqrt()),
            BarrierKind::EuclidBall if c >= critical => format!("euclid_ball c={c}: global supersolution"),
            BarrierKind::EuclidBall => {
                format!("euclid_ball c={c}: subsolution on |x_h|^2 < {} (1 + x_v^2)", (-c + critical) / 2.0)
            }
            BarrierKind::SqrtGauge if c >= 0.0 => format!("sqrt_gauge c={c}: global supersolution"),
            BarrierKind::SqrtGauge if c <= -2.0 * n => format!("sqrt_gauge c={c}: global subsolution"),
            BarrierKind::SqrtGauge => format!("sqrt_gauge c={c}: no claim"),
        }
    }

    /// Time at which the zero level set `{U = r + ct}` of the barrier disappears.
    pub fn extinction_time(&self) -> Result<f64> {
        extinction_time(&self.spec, &self.group)
    }
}

/// `G(x) = |x_h|^4 + 4 |x_v|^2`.
pub fn gauge_value(g: &GroupSpec, x: &[f64]) -> f64 {
    let h2: f64 = g.horizontal(x).iter().map(|v| v * v).sum();
    let v2: f64 = g.vertical(x).iter().map(|v| v * v).sum();
    h2 * h2 + 4.0 * v2
}

/// Extinction time of a barrier's zero level set: `-r/c` for every kind with
/// `c < 0`, `r > 0`. For the cylinder at `c = -2(m-1)` this is `r / (2(m-1))`,
/// for `sqrt_gauge` at `c = -2n` it is `r / (2n)`. The gauge barrier is a
/// subsolution on its front only when `-c > 4n sqrt(r)`.
pub fn extinction_time(spec: &BarrierSpec, g: &GroupSpec) -> Result<f64> {
    let (c, r) = (spec.c, spec.r);
    if !(r > 0.0) {
        return Err(Error::NoExtinction(format!("offset r = {r} must be positive")));
    }
    if !(c < 0.0) {
        return Err(Error::NoExtinction(format!("drift c = {c} must be negative")));
    }
    if spec.kind == BarrierKind::Gauge {
        let n = g.n() as f64;
        if !(-c > 4.0 * n * r.sqrt()) {
            return Err(Error::NoExtinction(format!(
                "gauge front leaves the subsolution cylinder unless -c > 4n sqrt(r) = {}",
                4.0 * n * r.sqrt()
            )));
        }
    }
    Ok(-r / c)
}

/// Closed forms of the gauge identities at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeClosedForms {
    pub xg: DVector<f64>,
    pub xg_norm_sq: f64,
    pub x2g: DMatrix<f64>,
    pub cubic: f64,
}

pub fn gauge_closed_forms(h: &HeisenbergLikeSpec, x: &[f64], k: &CatalogConstants) -> GaugeClosedForms {
    let m = h.m();
    let xh = DVector::from_column_slice(&x[..m]);
    let xv = x[m];
    let bx = h.b() * &xh;
    let h2 = xh.norm_squared();
    let g = gauge_value(h, x);
    GaugeClosedForms {
        xg: &xh * (4.0 * h2) + &bx * (8.0 * xv),
        xg_norm_sq: k.gauge_grad_norm * h2 * g,
        x2g: &xh * xh.transpose() * 8.0 + DMatrix::identity(m, m) * (4.0 * h2) + &bx * bx.transpose() * 8.0,
        cubic: k.gauge_cubic * h2 * h2 * g,
    }
}

/// Closed forms for `w = ct - |x|^2 + r`: `Xw` and `|Xw|^2`.
pub fn euclid_closed_forms(h: &HeisenbergLikeSpec, x: &[f64], k: &CatalogConstants) -> (DVector<f64>, f64) {
    let m = h.m();
    let xh = DVector::from_column_slice(&x[..m]);
    let xv = x[m];
    let bx = h.b() * &xh;
    let xw = -(&xh * 2.0 + &bx * (2.0 * xv));
    (xw, k.euclid_grad_norm * xh.norm_squared() * (1.0 + xv * xv))
}

/// Outcome of the change-of-variables identity
/// `curv(psi(U)) = psi'(U) curv(U)` with `curv(U) = -tr[(I - q^ (x) q^) X^2 U]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeOfVariables {
    pub relabeled: f64,
    pub scaled: f64,
    pub residual: f64,
    pub relative: f64,
}

pub fn change_of_variables_check(
    g: &GroupSpec,
    u: &ScalarField,
    psi: Relabel,
    x: &[f64],
) -> Result<ChangeOfVariables> {
    let ju = u.jet(x, 0.0)?;
    let q = horizontal_gradient(g, &ju, x);
    let a = horizontal_hessian(g, &ju, x);
    let curv_u = mcf_operator(&q, &a).ok_or_else(|| Error::Singular(format!("XU = 0 at {x:?}")))?;
    if !psi.is_increasing_at(ju.value) {
        return Err(Error::InvalidArgument(format!("psi = {psi:?} is not increasing at U = {}", ju.value)));
    }
    let w = u.relabel(psi);
    let jw = w.jet(x, 0.0)?;
    let qw = horizontal_gradient(g, &jw, x);
    let aw = horizontal_hessian(g, &jw, x);
    let relabeled = mcf_operator(&qw, &aw).ok_or_else(|| Error::Singular(format!("XW = 0 at {x:?}")))?;
    let scaled = psi.derivative(ju.value) * curv_u;
    let residual = (relabeled - scaled).abs();
    let relative = residual / relabeled.abs().max(scaled.abs()).max(1.0);
    Ok(ChangeOfVariables { relabeled, scaled, residual, relative })
}

/// `min` over the samples of `lambda_min(X^2 U)`; a lower bound for the
/// v-convexity constant of a smooth `U` on the sampled region.
pub fn v_convexity_witness(g: &GroupSpec, u: &ScalarField, samples: &[Point]) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for x in samples {
        let jet = u.jet(x, 0.0)?;
        let a = horizontal_hessian(g, &jet, x);
        alpha = alpha.min(calculus::eigen_extremes(&a).0);
    }
    Ok(alpha)
}
