//! Horizontal derivatives, the mean-curvature operator and its envelopes.
//!
//! Gradients are row vectors: `Xu = grad(u) sigma(x)` and
//! `X^2 u = ^t sigma(x) D^2 u sigma(x)`. In step two the first-order terms of
//! `X_i X_j u` are antisymmetric in `(i, j)` and drop out of the symmetrized
//! Hessian, so the sandwich with `sigma` is exact.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::grid::GridField;
use crate::group::GroupSpec;

/// Horizontal gradient, length `m`.
pub type HVec = DVector<f64>;
/// Symmetric horizontal Hessian, `m x m`.
pub type HMat = DMatrix<f64>;

/// Value, full spatial gradient and Hessian (and optionally `u_t`) at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub dt: Option<f64>,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Restriction to the variables `start .. start + len`, e.g. one factor of a
    /// function on `R^n x R^n`.
    pub fn block(&self, start: usize, len: usize) -> Jet {
        Jet {
            value: self.value,
            grad: self.grad[start..start + len].to_vec(),
            hess: self.hess.view((start, start), (len, len)).into_owned(),
            dt: self.dt,
        }
    }
}

/// `Xu = grad(u) sigma(x)`.
pub fn horizontal_gradient(g: &GroupSpec, jet: &Jet, x: &[f64]) -> HVec {
    let s = g.sigma(x);
    let grad = DVector::from_column_slice(&jet.grad);
    s.tr_mul(&grad)
}

/// `X^2 u = ^t sigma D^2 u sigma`.
pub fn horizontal_hessian(g: &GroupSpec, jet: &Jet, x: &[f64]) -> HMat {
    let s = g.sigma(x);
    let a = s.tr_mul(&jet.hess) * &s;
    symmetrize(a)
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    let t = a.transpose();
    (a + t) * 0.5
}

/// `F(q, A) = -tr[(I - q/|q| (x) q/|q|) A]`; `None` when `q = 0`.
pub fn mcf_operator(q: &HVec, a: &HMat) -> Option<f64> {
    let q2 = q.norm_squared();
    if q2 == 0.0 {
        return None;
    }
    Some(-a.trace() + q.dot(&(a * q)) / q2)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_extremes(a: &HMat) -> (f64, f64) {
    if a.nrows() == 2 {
        let (p, r, s) = (a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)]);
        let mean = 0.5 * (p + s);
        let rad = (0.25 * (p - s) * (p - s) + r * r).sqrt();
        return (mean - rad, mean + rad);
    }
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    (eig.min(), eig.max())
}

/// Lower and upper semicontinuous envelopes of `F` at `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelopes {
    pub lower: f64,
    pub upper: f64,
}

/// `F_*(0, A) = -tr A + lambda_min(A)`, `F^*(0, A) = -tr A + lambda_max(A)`.
pub fn envelopes(a: &HMat) -> Envelopes {
    let (lo, hi) = eigen_extremes(a);
    let tr = a.trace();
    Envelopes { lower: -tr + lo, upper: -tr + hi }
}

pub fn envelope_lower(a: &HMat) -> f64 {
    envelopes(a).lower
}

pub fn envelope_upper(a: &HMat) -> f64 {
    envelopes(a).upper
}

/// The operator `G(x, grad u, D^2 u) = F(Xu, X^2 u)` or, at a characteristic
/// point, the envelope pair that brackets its semicontinuous extensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorValue {
    Regular(f64),
    Singular(Envelopes),
}

impl OperatorValue {
    pub fn regular(&self) -> Option<f64> {
        match self {
            OperatorValue::Regular(v) => Some(*v),
            OperatorValue::Singular(_) => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, OperatorValue::Singular(_))
    }
}

/// Evaluates `G` at `x`; the point is characteristic when `|Xu| <= eps_sing`.
pub fn full_operator(g: &GroupSpec, x: &[f64], jet: &Jet, eps_sing: f64) -> OperatorValue {
    let q = horizontal_gradient(g, jet, x);
    let a = horizontal_hessian(g, jet, x);
    if q.norm() <= eps_sing {
        return OperatorValue::Singular(envelopes(&a));
    }
    match mcf_operator(&q, &a) {
        Some(v) => OperatorValue::Regular(v),
        None => OperatorValue::Singular(envelopes(&a)),
    }
}

/// Exact jet of a closed-form field.
pub fn exact_jet(f: &ScalarField, x: &[f64], t: f64) -> Result<Jet> {
    f.jet(x, t)
}

/// Second-order central differences at an interior node. Mixed derivatives use
/// the symmetric four-point stencil, so the Hessian is symmetric by construction.
pub fn numeric_jet(grid: &GridField, idx: &[usize]) -> Result<Jet> {
    if idx.len() != grid.dim() {
        return Err(Error::Dimension(format!("index has {} axes, grid has {}", idx.len(), grid.dim())));
    }
    if !grid.is_interior(idx) {
        return Err(Error::BoundaryNode(idx.to_vec()));
    }
    let n = grid.dim();
    let v = grid.values();
    let st = grid.strides();
    let h = grid.spacing();
    let c = grid.flat_index(idx);
    let u0 = v[c];
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    for a in 0..n {
        let (up, um) = (v[c + st[a]], v[c - st[a]]);
        grad[a] = (up - um) / (2.0 * h[a]);
        hess[(a, a)] = (up - 2.0 * u0 + um) / (h[a] * h[a]);
        for b in a + 1..n {
            let d = (v[c + st[a] + st[b]] - v[c + st[a] - st[b]] - v[c - st[a] + st[b]] + v[c - st[a] - st[b]])
                / (4.0 * h[a] * h[b]);
            hess[(a, b)] = d;
            hess[(b, a)] = d;
        }
    }
    Ok(Jet { value: u0, grad, hess, dt: None })
}
