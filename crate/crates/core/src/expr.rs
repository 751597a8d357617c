//! Closed-form scalar fields with exact first and second derivatives.
//!
//! Fields are small expression trees over the spatial coordinates and time.
//! Evaluation propagates a second-order jet (value, gradient, Hessian) through
//! every node, so derivatives are exact up to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calculus::Jet;
use crate::error::{Error, Result};

/// Value, gradient and row-major Hessian with respect to `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Dual2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Dual2 { value, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut d = Dual2::constant(value, dim);
        d.grad[index] = 1.0;
        d
    }

    fn dim(&self) -> usize {
        self.grad.len()
    }

    fn add_assign(&mut self, other: &Dual2) {
        self.value += other.value;
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
    }

    fn scale(mut self, s: f64) -> Self {
        self.value *= s;
        self.grad.iter_mut().for_each(|g| *g *= s);
        self.hess.iter_mut().for_each(|h| *h *= s);
        self
    }

    fn mul(&self, other: &Dual2) -> Dual2 {
        let d = self.dim();
        let (a, b) = (self.value, other.value);
        let grad = (0..d).map(|i| a * other.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                hess[i * d + j] = a * other.hess[i * d + j]
                    + b * self.hess[i * d + j]
                    + self.grad[i] * other.grad[j]
                    + other.grad[i] * self.grad[j];
            }
        }
        Dual2 { value: a * b, grad, hess }
    }

    /// Chain rule for a scalar map with value `f0`, first derivative `f1`, second derivative `f2`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Dual2 {
        let d = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                hess[i * d + j] = f1 * self.hess[i * d + j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Dual2 { value: f0, grad, hess }
    }
}

/// Expression tree over coordinates `x_0 .. x_{dim-1}` and time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Time,
    Sum(Vec<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowI(Box<Expr>, i32),
    /// Real power; the base must be positive unless the exponent is a positive integer.
    PowF(Box<Expr>, f64),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn time() -> Expr {
        Expr::Time
    }

    /// `sum_i x_i^2` over the given coordinate indices.
    pub fn squared_norm<I: IntoIterator<Item = usize>>(indices: I) -> Expr {
        Expr::Sum(indices.into_iter().map(|i| Expr::Var(i).powi(2)).collect())
    }

    /// `sum_i e_i^2` over arbitrary sub-expressions.
    pub fn sum_of_squares(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms.into_iter().map(|e| e.powi(2)).collect())
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::PowI(Box::new(self), k)
    }

    pub fn powf(self, p: f64) -> Expr {
        Expr::PowF(Box::new(self), p)
    }

    pub fn sqrt(self) -> Expr {
        self.powf(0.5)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    /// Largest variable index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Time => 0,
            Expr::Var(i) => i + 1,
            Expr::Sum(terms) => terms.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Product(a, b) => a.arity().max(b.arity()),
            Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowF(a, _) | Expr::Exp(a) => a.arity(),
        }
    }

    /// Plain value without derivatives.
    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(*i).ok_or_else(|| Error::Dimension(format!("variable x{i} out of range")))?,
            Expr::Time => t,
            Expr::Sum(terms) => {
                let mut s = 0.0;
                for e in terms {
                    s += e.value(x, t)?;
                }
                s
            }
            Expr::Product(a, b) => a.value(x, t)? * b.value(x, t)?,
            Expr::Neg(a) => -a.value(x, t)?,
            Expr::PowI(a, k) => a.value(x, t)?.powi(*k),
            Expr::PowF(a, p) => {
                let base = a.value(x, t)?;
                check_powf_base(base, *p)?;
                base.powf(*p)
            }
            Expr::Exp(a) => a.value(x, t)?.exp(),
        })
    }

    /// Second-order forward propagation; variable `dim` (the last one) is time.
    pub fn eval_dual(&self, x: &[f64], t: f64) -> Result<Dual2> {
        let dim = x.len() + 1;
        self.dual(x, t, dim)
    }

    fn dual(&self, x: &[f64], t: f64, dim: usize) -> Result<Dual2> {
        Ok(match self {
            Expr::Const(c) => Dual2::constant(*c, dim),
            Expr::Var(i) => {
                let v = *x.get(*i).ok_or_else(|| Error::Dimension(format!("variable x{i} out of range")))?;
                Dual2::variable(v, *i, dim)
            }
            Expr::Time => Dual2::variable(t, dim - 1, dim),
            Expr::Sum(terms) => {
                let mut acc = Dual2::constant(0.0, dim);
                for e in terms {
                    acc.add_assign(&e.dual(x, t, dim)?);
                }
                acc
            }
            Expr::Product(a, b) => a.dual(x, t, dim)?.mul(&b.dual(x, t, dim)?),
            Expr::Neg(a) => a.dual(x, t, dim)?.scale(-1.0),
            Expr::PowI(a, k) => {
                let inner = a.dual(x, t, dim)?;
                let (u, k) = (inner.value, *k);
                let kf = k as f64;
                let f1 = if k == 0 { 0.0 } else { kf * u.powi(k - 1) };
                let f2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * u.powi(k - 2) };
                inner.chain(u.powi(k), f1, f2)
            }
            Expr::PowF(a, p) => {
                let inner = a.dual(x, t, dim)?;
                let (u, p) = (inner.value, *p);
                check_powf_base(u, p)?;
                if u == 0.0 && p < 2.0 {
                    return Err(Error::Domain(format!("x^{p} is not twice differentiable at 0")));
                }
                inner.chain(u.powf(p), p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0))
            }
            Expr::Exp(a) => {
                let inner = a.dual(x, t, dim)?;
                let e = inner.value.exp();
                inner.chain(e, e, e)
            }
        })
    }
}

fn check_powf_base(base: f64, p: f64) -> Result<()> {
    if base < 0.0 && p.fract() != 0.0 {
        return Err(Error::Domain(format!("negative base {base} raised to non-integer power {p}")));
    }
    Ok(())
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Sum(mut terms) => {
                terms.push(rhs);
                Expr::Sum(terms)
            }
            lhs => Expr::Sum(vec![lhs, rhs]),
        }
    }
}

impl Add<f64> for Expr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::Const(rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Sub<f64> for Expr {
    type Output = Expr;
    fn sub(self, rhs: f64) -> Expr {
        self + Expr::Const(-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(Box::new(self), Box::new(rhs))
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Const(self) * rhs
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// A closed-form field `u(x, t)` on `R^dim x R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: Expr,
    dim: usize,
}

impl ScalarField {
    pub fn new(expr: Expr, dim: usize) -> Result<Self> {
        if expr.arity() > dim {
            return Err(Error::Dimension(format!(
                "expression references x{} but the field has {dim} coordinates",
                expr.arity() - 1
            )));
        }
        Ok(ScalarField { expr, dim })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check(x)?;
        self.expr.value(x, t)
    }

    /// Exact jet at `(x, t)`, including the time derivative.
    pub fn jet(&self, x: &[f64], t: f64) -> Result<Jet> {
        self.check(x)?;
        let d = self.expr.eval_dual(x, t)?;
        let n = self.dim;
        let full = n + 1;
        let grad = d.grad[..n].to_vec();
        let hess = DMatrix::from_fn(n, n, |i, j| 0.5 * (d.hess[i * full + j] + d.hess[j * full + i]));
        Ok(Jet { value: d.value, grad, hess, dt: Some(d.grad[n]) })
    }

    /// `psi(u)` as a new field.
    pub fn relabel(&self, psi: Relabel) -> ScalarField {
        ScalarField { expr: psi.apply(self.expr.clone()), dim: self.dim }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("field has {} coordinates, got {}", self.dim, x.len())));
        }
        Ok(())
    }
}

/// Smooth increasing relabelings `psi` of a level-set function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relabel {
    Identity,
    /// `a s + b`, `a > 0`.
    Affine { a: f64, b: f64 },
    /// `s + a s^3`, `a >= 0`.
    Cubic { a: f64 },
    /// `s^p` on `s > 0`, `p > 0`.
    Power { p: f64 },
    /// `exp(a s)`, `a > 0`.
    Exp { a: f64 },
}

impl Relabel {
    pub fn apply(&self, e: Expr) -> Expr {
        match *self {
            Relabel::Identity => e,
            Relabel::Affine { a, b } => a * e + b,
            Relabel::Cubic { a } => e.clone() + a * e.powi(3),
            Relabel::Power { p } => {
                if p == 2.0 {
                    e.powi(2)
                } else {
                    e.powf(p)
                }
            }
            Relabel::Exp { a } => (a * e).exp(),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Relabel::Identity => s,
            Relabel::Affine { a, b } => a * s + b,
            Relabel::Cubic { a } => s + a * s * s * s,
            Relabel::Power { p } => s.powf(p),
            Relabel::Exp { a } => (a * s).exp(),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            Relabel::Identity => 1.0,
            Relabel::Affine { a, .. } => a,
            Relabel::Cubic { a } => 1.0 + 3.0 * a * s * s,
            Relabel::Power { p } => p * s.powf(p - 1.0),
            Relabel::Exp { a } => a * (a * s).exp(),
        }
    }

    /// Whether `psi` is smooth with `psi' > 0` at `s`.
    pub fn is_increasing_at(&self, s: f64) -> bool {
        match *self {
            Relabel::Power { .. } if s <= 0.0 => false,
            _ => self.derivative(s) > 0.0,
        }
    }
}
