//! Step-two Carnot groups in exponential coordinates.
//!
//! A group is determined by the horizontal dimension `m`, the total dimension
//! `n` and `n - m` skew-symmetric, linearly independent `m x m` matrices
//! `B^(k)`. Points are stored as plain length-`n` vectors; the split into the
//! horizontal block `x_h` (first `m` entries) and the vertical block `x_v`
//! (last `n - m` entries) is carried by the [`GroupSpec`].
//!
//! The group law is `x o y = (x_h + y_h, x_v + y_v + <B x_h, y_h>)` where the
//! `k`-th component of the bracket is `B^(k) x_h . y_h`. The generating vector
//! fields are the columns of `sigma(x) = (I_m ; (B x_h)^T)`.

use std::ops::{Deref, Index};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `|B + B^T|` entries.
pub const SKEW_TOL: f64 = 1e-12;
/// Lower bound on the smallest eigenvalue of the normalized Gram matrix of the flattened `B^(k)`.
pub const INDEPENDENCE_TOL: f64 = 1e-10;
/// Tolerance on `B B^T = I` for Heisenberg-like groups.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

/// A point of `R^n`, stored as one contiguous vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A validated step-two Carnot group structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    m: usize,
    n: usize,
    b: Vec<DMatrix<f64>>,
}

impl GroupSpec {
    /// Validates dimensions, skew-symmetry and linear independence of the structure matrices.
    pub fn new(m: usize, n: usize, b: Vec<DMatrix<f64>>) -> Result<Self> {
        if m < 2 {
            return Err(Error::Dimension(format!("horizontal dimension m = {m} must be at least 2")));
        }
        if n <= m {
            return Err(Error::Dimension(format!("total dimension n = {n} must exceed m = {m}")));
        }
        if b.len() != n - m {
            return Err(Error::Dimension(format!(
                "expected n - m = {} structure matrices, got {}",
                n - m,
                b.len()
            )));
        }
        for (k, bk) in b.iter().enumerate() {
            if bk.nrows() != m || bk.ncols() != m {
                return Err(Error::Dimension(format!(
                    "B^({}) is {}x{}, expected {m}x{m}",
                    k + 1,
                    bk.nrows(),
                    bk.ncols()
                )));
            }
            let deviation = (bk + bk.transpose()).amax();
            if !(deviation <= SKEW_TOL) {
                return Err(Error::NotSkew { index: k + 1, deviation });
            }
        }
        let smallest = normalized_gram_min_eigenvalue(&b);
        if !(smallest > INDEPENDENCE_TOL) {
            return Err(Error::LinearlyDependent(smallest));
        }
        Ok(GroupSpec { m, n, b })
    }

    /// Builds a group from row-major matrix literals, one `m x m` nested array per `B^(k)`.
    pub fn from_rows(m: usize, n: usize, rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(rows.len());
        for (k, mat) in rows.iter().enumerate() {
            if mat.len() != m || mat.iter().any(|r| r.len() != m) {
                return Err(Error::Dimension(format!("B^({}) must be a {m}x{m} row-major literal", k + 1)));
            }
            mats.push(DMatrix::from_fn(m, m, |i, j| mat[i][j]));
        }
        GroupSpec::new(m, n, mats)
    }

    /// The first Heisenberg group: `m = 2`, `n = 3`, `B = [[0, 1], [-1, 0]]`.
    pub fn heisenberg() -> Self {
        GroupSpec::new(2, 3, vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])])
            .expect("Heisenberg structure is valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of vertical coordinates, `n - m`.
    pub fn vertical_dim(&self) -> usize {
        self.n - self.m
    }

    pub fn structure_matrices(&self) -> &[DMatrix<f64>] {
        &self.b
    }

    /// Row-major literals of the structure matrices.
    pub fn to_rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.b
            .iter()
            .map(|bk| (0..self.m).map(|i| (0..self.m).map(|j| bk[(i, j)]).collect()).collect())
            .collect()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("point has {} coordinates, group has n = {}", x.len(), self.n)));
        }
        Ok(())
    }

    pub fn horizontal<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.m]
    }

    pub fn vertical<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.m..]
    }

    /// `B^(k) v` for a horizontal vector `v`.
    pub fn apply_b(&self, k: usize, v: &[f64]) -> Vec<f64> {
        let bk = &self.b[k];
        (0..self.m).map(|i| (0..self.m).map(|j| bk[(i, j)] * v[j]).sum()).collect()
    }

    /// `<B x_h, y_h>`: component `k` is `B^(k) x_h . y_h`.
    pub fn bracket(&self, xh: &[f64], yh: &[f64]) -> Vec<f64> {
        (0..self.vertical_dim())
            .map(|k| {
                let bk = &self.b[k];
                // paired so that <B x, x> and <B x^-1, x> vanish exactly
                let mut s = 0.0;
                for i in 0..self.m {
                    s += bk[(i, i)] * (xh[i] * yh[i]);
                    for j in 0..i {
                        s += bk[(i, j)] * (xh[j] * yh[i]) + bk[(j, i)] * (xh[i] * yh[j]);
                    }
                }
                s
            })
            .collect()
    }

    pub fn compose(&self, x: &[f64], y: &[f64]) -> Result<Point> {
        self.check_point(x)?;
        self.check_point(y)?;
        let br = self.bracket(self.horizontal(x), self.horizontal(y));
        let mut z = Vec::with_capacity(self.n);
        z.extend((0..self.m).map(|i| x[i] + y[i]));
        z.extend((0..self.vertical_dim()).map(|k| x[self.m + k] + y[self.m + k] + br[k]));
        Ok(Point(z))
    }

    pub fn inverse(&self, x: &[f64]) -> Point {
        Point(x.iter().map(|v| -v).collect())
    }

    /// `delta_lambda(x) = (lambda x_h, lambda^2 x_v)`.
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Result<Point> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveDilation(lambda));
        }
        self.check_point(x)?;
        let l2 = lambda * lambda;
        Ok(Point(
            x.iter().enumerate().map(|(i, v)| if i < self.m { lambda * v } else { l2 * v }).collect(),
        ))
    }

    /// The `n x m` matrix of the generating vector fields at `x`.
    pub fn sigma(&self, x: &[f64]) -> DMatrix<f64> {
        let xh = self.horizontal(x);
        let mut s = DMatrix::zeros(self.n, self.m);
        for i in 0..self.m {
            s[(i, i)] = 1.0;
        }
        for k in 0..self.vertical_dim() {
            let bx = self.apply_b(k, xh);
            for j in 0..self.m {
                s[(self.m + k, j)] = bx[j];
            }
        }
        s
    }

    /// `N(x) = |x_h|^4 + |x_v|^2`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let h2: f64 = self.horizontal(x).iter().map(|v| v * v).sum();
        let v2: f64 = self.vertical(x).iter().map(|v| v * v).sum();
        h2 * h2 + v2
    }

    /// `||x||_G = N(x)^(1/4)`, homogeneous of degree one under dilations.
    pub fn homogeneous_norm(&self, x: &[f64]) -> f64 {
        self.gauge(x).sqrt().sqrt()
    }

    /// `d_G(x, y) = ||x^{-1} o y||_G`. Left invariant, not symmetric.
    pub fn gauge_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let z = self.compose(&self.inverse(x), y)?;
        Ok(self.homogeneous_norm(&z))
    }

    /// Jacobian of the left translation `x -> alpha o x`.
    pub fn left_translation_jacobian(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.translation_jacobian(alpha, 1.0)
    }

    /// Jacobian of the right translation `x -> x o alpha`.
    pub fn right_translation_jacobian(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.translation_jacobian(alpha, -1.0)
    }

    fn translation_jacobian(&self, alpha: &[f64], sign: f64) -> DMatrix<f64> {
        let mut jac = DMatrix::identity(self.n, self.n);
        let ah = self.horizontal(alpha);
        for k in 0..self.vertical_dim() {
            let ba = self.apply_b(k, ah);
            for j in 0..self.m {
                jac[(self.m + k, j)] = sign * ba[j];
            }
        }
        jac
    }
}

fn normalized_gram_min_eigenvalue(b: &[DMatrix<f64>]) -> f64 {
    let flat: Vec<DVector<f64>> = b
        .iter()
        .map(|bk| {
            let v = DVector::from_column_slice(bk.as_slice());
            let norm = v.norm();
            if norm > 0.0 {
                v / norm
            } else {
                v
            }
        })
        .collect();
    let k = flat.len();
    let gram = DMatrix::from_fn(k, k, |i, j| flat[i].dot(&flat[j]));
    SymmetricEigen::new(gram).eigenvalues.min()
}

/// A group with one vertical direction and an orthogonal skew structure matrix,
/// `^tB = -B = B^{-1}`. Then `B x_h . x_h = 0`, `B^2 = -I` and `|B x_h| = |x_h|`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergLikeSpec(GroupSpec);

impl HeisenbergLikeSpec {
    pub fn new(group: GroupSpec) -> Result<Self> {
        if group.n != group.m + 1 {
            return Err(Error::NotHeisenbergLike(format!(
                "need n = m + 1, got m = {}, n = {}",
                group.m, group.n
            )));
        }
        let b = &group.b[0];
        let dev = (b * b.transpose() - DMatrix::identity(group.m, group.m)).amax();
        if !(dev <= ORTHOGONAL_TOL) {
            return Err(Error::NotHeisenbergLike(format!("B is not orthogonal (max |B B^T - I| = {dev:e})")));
        }
        Ok(HeisenbergLikeSpec(group))
    }

    pub fn heisenberg() -> Self {
        HeisenbergLikeSpec(GroupSpec::heisenberg())
    }

    /// The `2k`-dimensional horizontal layer with `B` the standard symplectic matrix.
    pub fn symplectic(k: usize) -> Result<Self> {
        let m = 2 * k;
        let mut b = DMatrix::zeros(m, m);
        for i in 0..k {
            b[(2 * i, 2 * i + 1)] = 1.0;
            b[(2 * i + 1, 2 * i)] = -1.0;
        }
        HeisenbergLikeSpec::new(GroupSpec::new(m, m + 1, vec![b])?)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.0
    }

    pub fn into_group(self) -> GroupSpec {
        self.0
    }

    /// The single structure matrix.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.0.b[0]
    }
}

impl Deref for HeisenbergLikeSpec {
    type Target = GroupSpec;
    fn deref(&self) -> &GroupSpec {
        &self.0
    }
}
