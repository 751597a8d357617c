//! Explicit finite-difference level-set evolution of `u_t + F(Xu, X^2 u) = 0`.
//!
//! Each step reads one immutable slab and writes a fresh one. Node updates are
//! independent, so the result does not depend on how rayon schedules chunks.

mod analysis;
mod front;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barriers::{BarrierEval, BarrierKind, BarrierSpec};
use crate::calculus::eigen_extremes;
use crate::error::{Error, Result};
use crate::expr::Relabel;
use crate::grid::{DomainBox, GridField};
use crate::group::GroupSpec;

pub use analysis::{
    convergence_rate, indicator_fields, residual_on_exact, IndicatorPair, ResidualOptions, ResidualReport,
    SandwichReport, SandwichStep, SANDWICH_SEPARATION,
};
pub use front::{extract_front, hausdorff_distance, FrontCloud};

/// Nodes per rayon task.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `F` with `|Xu|^2` replaced by `|Xu|^2 + delta_reg^2` in the projection.
    Regularized,
    /// `F` away from characteristic nodes, `F_*` on them.
    EnvelopeMin,
    /// `F` away from characteristic nodes, `F^*` on them.
    EnvelopeMax,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Regularized, Scheme::EnvelopeMin, Scheme::EnvelopeMax];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Regularized => "regularized",
            Scheme::EnvelopeMin => "envelope_min",
            Scheme::EnvelopeMax => "envelope_max",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

fn identity_relabel() -> Relabel {
    Relabel::Identity
}

/// `u_0 = psi(r - U(x))` for a catalog profile `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub preset: BarrierKind,
    pub r: f64,
    #[serde(default = "identity_relabel")]
    pub relabel: Relabel,
}

impl InitialCondition {
    pub fn new(preset: BarrierKind, r: f64) -> Self {
        InitialCondition { preset, r, relabel: Relabel::Identity }
    }

    pub fn with_relabel(self, relabel: Relabel) -> Self {
        InitialCondition { relabel, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub group: GroupSpec,
    pub domain: DomainBox,
    pub resolution: Vec<usize>,
    pub initial: InitialCondition,
    pub scheme: Scheme,
    /// Defaults to `1e-6` times the domain diameter.
    pub delta_reg: Option<f64>,
    /// Defaults to `h_min^2`.
    pub eps_sing: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
}

impl SolverConfig {
    /// Cylinder `u_0 = r - |x_h|^2` on a cube, regularized scheme.
    pub fn cylinder(group: GroupSpec, half: f64, cells: usize, r: f64) -> Self {
        let n = group.n();
        SolverConfig {
            domain: DomainBox::cube(n, half),
            resolution: vec![cells; n],
            initial: InitialCondition::new(BarrierKind::Cylinder, r),
            scheme: Scheme::Regularized,
            delta_reg: None,
            eps_sing: None,
            cfl: 0.25,
            t_end: 0.5,
            snapshot_every: 0.1,
            group,
        }
    }

    pub fn delta_reg(&self) -> f64 {
        self.delta_reg.unwrap_or(1e-6 * self.domain.diameter())
    }

    pub fn eps_sing(&self) -> f64 {
        self.eps_sing.unwrap_or_else(|| {
            let h = (0..self.domain.dim())
                .map(|a| (self.domain.max[a] - self.domain.min[a]) / self.resolution.get(a).copied().unwrap_or(1) as f64)
                .fold(f64::INFINITY, f64::min);
            h * h
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.group.n();
        if self.domain.dim() != n || self.resolution.len() != n {
            return Err(Error::Dimension(format!(
                "group has {n} coordinates, box {} and resolution {}",
                self.domain.dim(),
                self.resolution.len()
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(Error::InvalidArgument(format!("snapshot_every must be > 0, got {}", self.snapshot_every)));
        }
        if let Some(d) = self.delta_reg {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!("delta_reg must be > 0, got {d}")));
            }
        }
        if let Some(e) = self.eps_sing {
            if !(e >= 0.0) {
                return Err(Error::InvalidArgument(format!("eps_sing must be >= 0, got {e}")));
            }
        }
        Ok(())
    }

    /// Snapshot times `0, every, 2 every, ...` up to `t_end`, plus `t_end` itself.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let mut k = 1u64;
        loop {
            let t = k as f64 * self.snapshot_every;
            if t > self.t_end * (1.0 + 1e-12) {
                break;
            }
            times.push(t.min(self.t_end));
            k += 1;
        }
        if *times.last().unwrap() < self.t_end {
            times.push(self.t_end);
        }
        times
    }
}

/// Per-chunk work buffers.
struct Scratch {
    idx: Vec<usize>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    w: Vec<f64>,
    q: Vec<f64>,
    a: Vec<f64>,
}

impl Scratch {
    fn new(m: usize, n: usize) -> Self {
        Scratch {
            idx: vec![0; n],
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
            w: vec![0.0; (n - m) * m],
            q: vec![0.0; m],
            a: vec![0.0; m * m],
        }
    }
}

/// Horizontal derivatives at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOperator {
    pub q_norm: f64,
    /// `-tr A`.
    pub neg_trace: f64,
    /// `q.Aq`.
    pub qaq: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl NodeOperator {
    /// `-tr A + q.Aq / (|q|^2 + delta^2)`. Can leave `[F_*, F^*]` only when
    /// `|q|` is comparable to `delta` and `A` is definite.
    pub fn regularized(&self, delta: f64) -> f64 {
        self.neg_trace + self.qaq / (self.q_norm * self.q_norm + delta * delta)
    }

    pub fn envelope(&self, upper: bool, eps_sing: f64) -> f64 {
        if self.q_norm > eps_sing {
            self.neg_trace + self.qaq / (self.q_norm * self.q_norm)
        } else if upper {
            self.neg_trace + self.lambda_max
        } else {
            self.neg_trace + self.lambda_min
        }
    }

    pub fn apply(&self, scheme: Scheme, delta: f64, eps_sing: f64) -> f64 {
        match scheme {
            Scheme::Regularized => self.regularized(delta),
            Scheme::EnvelopeMin => self.envelope(false, eps_sing),
            Scheme::EnvelopeMax => self.envelope(true, eps_sing),
        }
    }
}

/// Precomputed stepping data for one configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    geometry: GridField,
    b: Vec<f64>,
    dt: f64,
    delta: f64,
    eps_sing: f64,
}

/// Output of [`Solver::evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<GridField>,
    /// First time no interior node is strictly positive.
    pub extinction_time: Option<f64>,
    pub steps: usize,
    pub dt: f64,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let geometry = GridField::zeros(config.domain.clone(), config.resolution.clone(), 0.0)?;
        let (m, n) = (config.group.m(), config.group.n());
        let mut b = Vec::with_capacity((n - m) * m * m);
        for bk in config.group.structure_matrices() {
            for i in 0..m {
                for j in 0..m {
                    b.push(bk[(i, j)]);
                }
            }
        }
        let s2 = max_sigma_sq(&config.group, &geometry);
        let h = geometry.min_spacing();
        let dt = config.cfl * h * h / (2.0 * m as f64 * s2);
        let delta = config.delta_reg();
        let eps_sing = config.eps_sing();
        Ok(Solver { config, geometry, b, dt, delta, eps_sing })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// The stable time step `cfl h_min^2 / (2 m S^2)`.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn delta_reg(&self) -> f64 {
        self.delta
    }

    pub fn eps_sing(&self) -> f64 {
        self.eps_sing
    }

    /// An all-zero grid with the configured geometry.
    pub fn empty_grid(&self) -> GridField {
        self.geometry.clone()
    }

    /// Samples the initial condition; errors when the zero level set reaches the boundary.
    pub fn init(&self) -> Result<GridField> {
        let init = self.config.initial;
        let barrier = BarrierEval::new(BarrierSpec::new(init.preset, 0.0, init.r), &self.config.group)?;
        let grid = GridField::from_fn(self.config.domain.clone(), self.config.resolution.clone(), 0.0, |x| {
            Ok(init.relabel.value(barrier.initial_value(x)?))
        })?;
        check_front_interior(&grid)?;
        Ok(grid)
    }

    /// Horizontal derivatives of `u` at interior node `flat`.
    pub fn node_operator(&self, u: &[f64], flat: usize) -> NodeOperator {
        let (m, n) = (self.config.group.m(), self.config.group.n());
        let mut s = Scratch::new(m, n);
        let line = flat - flat % self.geometry.resolution()[n - 1];
        self.line_setup(line, &mut s);
        self.node_core(u, flat, &mut s)
    }

    /// Fills `s.idx` for the line starting at `line` and `s.w[k][i] = (B^(k) x_h)_i`.
    /// Returns false when the line lies on the boundary. Horizontal axes come
    /// before the last axis, so `w` is constant along a line.
    fn line_setup(&self, line: usize, s: &mut Scratch) -> bool {
        let g = &self.geometry;
        let (m, n) = (self.config.group.m(), self.config.group.n());
        let (st, res) = (g.strides(), g.resolution());
        let mut rem = line;
        let mut interior = true;
        for a in 0..n {
            s.idx[a] = rem / st[a];
            rem %= st[a];
            if a + 1 < n && (s.idx[a] == 0 || s.idx[a] + 1 == res[a]) {
                interior = false;
            }
        }
        for k in 0..n - m {
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += self.b[(k * m + i) * m + j] * g.coord(j, s.idx[j]);
                }
                s.w[k * m + i] = acc;
            }
        }
        interior
    }

    fn node_core(&self, u: &[f64], flat: usize, s: &mut Scratch) -> NodeOperator {
        if self.config.group.m() == 2 && self.config.group.n() == 3 {
            self.node_core_3d(u, flat, s)
        } else {
            self.node_core_generic(u, flat, s)
        }
    }

    fn node_core_generic(&self, u: &[f64], flat: usize, s: &mut Scratch) -> NodeOperator {
        let g = &self.geometry;
        let (m, n) = (self.config.group.m(), self.config.group.n());
        let st = g.strides();
        let h = g.spacing();
        let c = u[flat];
        for a in 0..n {
            let (p, q) = (u[flat + st[a]], u[flat - st[a]]);
            s.grad[a] = (p - q) / (2.0 * h[a]);
            s.hess[a * n + a] = (p - 2.0 * c + q) / (h[a] * h[a]);
            for bb in a + 1..n {
                let (sa, sb) = (st[a], st[bb]);
                let v = (u[flat + sa + sb] - u[flat + sa - sb] - u[flat - sa + sb] + u[flat - sa - sb])
                    / (4.0 * h[a] * h[bb]);
                s.hess[a * n + bb] = v;
                s.hess[bb * n + a] = v;
            }
        }
        let mut q2 = 0.0;
        for i in 0..m {
            let mut qi = s.grad[i];
            for k in 0..n - m {
                qi += s.w[k * m + i] * s.grad[m + k];
            }
            s.q[i] = qi;
            q2 += qi * qi;
        }
        for i in 0..m {
            for j in i..m {
                let mut acc = s.hess[i * n + j];
                for k in 0..n - m {
                    acc += s.hess[i * n + m + k] * s.w[k * m + j] + s.w[k * m + i] * s.hess[(m + k) * n + j];
                    for l in 0..n - m {
                        acc += s.w[k * m + i] * s.hess[(m + k) * n + m + l] * s.w[l * m + j];
                    }
                }
                s.a[i * m + j] = acc;
                s.a[j * m + i] = acc;
            }
        }
        let mut tr = 0.0;
        let mut qaq = 0.0;
        for i in 0..m {
            tr += s.a[i * m + i];
            for j in 0..m {
                qaq += s.q[i] * s.a[i * m + j] * s.q[j];
            }
        }
        let (lambda_min, lambda_max) = if m == 2 {
            let (p, r, t) = (s.a[0], s.a[1], s.a[3]);
            let mean = 0.5 * (p + t);
            let rad = (0.25 * (p - t) * (p - t) + r * r).sqrt();
            (mean - rad, mean + rad)
        } else {
            eigen_extremes(&nalgebra::DMatrix::from_row_slice(m, m, &s.a))
        };
        NodeOperator { q_norm: q2.sqrt(), neg_trace: -tr, qaq, lambda_min, lambda_max }
    }

    /// [`Solver::node_core`] unrolled for `m = 2, n = 3`, same operation order.
    fn node_core_3d(&self, u: &[f64], flat: usize, s: &Scratch) -> NodeOperator {
        let st = self.geometry.strides();
        let h = self.geometry.spacing();
        let (sx, sy, sz) = (st[0], st[1], st[2]);
        let (hx, hy, hz) = (h[0], h[1], h[2]);
        let c = u[flat];
        let (xp, xm) = (u[flat + sx], u[flat - sx]);
        let (yp, ym) = (u[flat + sy], u[flat - sy]);
        let (zp, zm) = (u[flat + sz], u[flat - sz]);
        let gx = (xp - xm) / (2.0 * hx);
        let gy = (yp - ym) / (2.0 * hy);
        let gz = (zp - zm) / (2.0 * hz);
        let hxx = (xp - 2.0 * c + xm) / (hx * hx);
        let hyy = (yp - 2.0 * c + ym) / (hy * hy);
        let hzz = (zp - 2.0 * c + zm) / (hz * hz);
        let mixed = |sa: usize, sb: usize, ha: f64, hb: f64| {
            (u[flat + sa + sb] - u[flat + sa - sb] - u[flat - sa + sb] + u[flat - sa - sb]) / (4.0 * ha * hb)
        };
        let hxy = mixed(sx, sy, hx, hy);
        let hxz = mixed(sx, sz, hx, hz);
        let hyz = mixed(sy, sz, hy, hz);
        let (w0, w1) = (s.w[0], s.w[1]);
        let q0 = gx + w0 * gz;
        let q1 = gy + w1 * gz;
        let q2 = 0.0 + q0 * q0 + q1 * q1;
        let a00 = hxx + (hxz * w0 + w0 * hxz) + w0 * hzz * w0;
        let a01 = hxy + (hxz * w1 + w0 * hyz) + w0 * hzz * w1;
        let a11 = hyy + (hyz * w1 + w1 * hyz) + w1 * hzz * w1;
        let tr = 0.0 + a00 + a11;
        let qaq = 0.0 + q0 * a00 * q0 + q0 * a01 * q1 + q1 * a01 * q0 + q1 * a11 * q1;
        let mean = 0.5 * (a00 + a11);
        let rad = (0.25 * (a00 - a11) * (a00 - a11) + a01 * a01).sqrt();
        NodeOperator { q_norm: q2.sqrt(), neg_trace: -tr, qaq, lambda_min: mean - rad, lambda_max: mean + rad }
    }

    /// Calls `f(flat, op, slot)` for every interior node, in parallel over
    /// blocks of whole lines along the last axis.
    fn for_each_interior<T, F>(&self, u: &[f64], out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &NodeOperator, &mut T) + Sync,
    {
        let (m, n) = (self.config.group.m(), self.config.group.n());
        let len = self.geometry.resolution()[n - 1];
        let block = len * (CHUNK / len).max(1);
        out.par_chunks_mut(block).enumerate().for_each(|(bi, chunk)| {
            let mut s = Scratch::new(m, n);
            for (li, line) in chunk.chunks_mut(len).enumerate() {
                let start = bi * block + li * len;
                if !self.line_setup(start, &mut s) {
                    continue;
                }
                for (j, slot) in line.iter_mut().enumerate().take(len - 1).skip(1) {
                    let op = self.node_core(u, start + j, &mut s);
                    f(start + j, &op, slot);
                }
            }
        });
    }

    /// Applies `f` to the operator data of every interior node; boundary entries are `None`.
    pub fn map_interior<T, F>(&self, u: &[f64], f: F) -> Vec<Option<T>>
    where
        T: Send,
        F: Fn(usize, &NodeOperator) -> T + Sync,
    {
        let mut out: Vec<Option<T>> = Vec::with_capacity(u.len());
        out.resize_with(u.len(), || None);
        self.for_each_interior(u, &mut out, |flat, op, slot| *slot = Some(f(flat, op)));
        out
    }

    /// One forward-Euler step of length `dt` with the given scheme.
    pub fn step_with(&self, grid: &GridField, scheme: Scheme, dt: f64) -> Result<GridField> {
        let u = grid.values();
        let res = self.geometry.resolution();
        let strides = self.geometry.strides();
        let mut next = vec![0.0; u.len()];
        let (delta, eps) = (self.delta, self.eps_sing);
        self.for_each_interior(u, &mut next, |flat, op, slot| *slot = u[flat] - dt * op.apply(scheme, delta, eps));
        extend_boundary(&mut next, strides, res);
        let t = grid.time() + dt;
        if let Some(bad) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Instability {
                time: t,
                detail: format!("non-finite value at node {:?}", self.geometry.multi_index(bad)),
            });
        }
        grid.with_values(next, t)
    }

    /// One step with the configured scheme and time step.
    pub fn step(&self, grid: &GridField) -> Result<GridField> {
        self.step_with(grid, self.config.scheme, self.dt)
    }

    /// Runs from the initial condition to `t_end` or extinction.
    pub fn evolve(&self) -> Result<Evolution> {
        self.evolve_with(|_, _| Ok(()))
    }

    /// As [`Solver::evolve`], calling `on_step(before, after)` after every step.
    pub fn evolve_with<C>(&self, on_step: C) -> Result<Evolution>
    where
        C: FnMut(&GridField, &GridField) -> Result<()>,
    {
        self.evolve_from(self.init()?, on_step, |_| Ok(()))
    }

    /// Runs from an arbitrary starting grid (its time stamp is taken as `t = 0`),
    /// calling `on_step(before, after)` after every step and `on_snapshot` on
    /// every snapshot as soon as it is taken.
    pub fn evolve_from<C, S>(&self, start: GridField, mut on_step: C, mut on_snapshot: S) -> Result<Evolution>
    where
        C: FnMut(&GridField, &GridField) -> Result<()>,
        S: FnMut(&GridField) -> Result<()>,
    {
        if start.resolution() != self.geometry.resolution() || start.bounds() != self.geometry.bounds() {
            return Err(Error::Dimension("starting grid does not match the configured geometry".into()));
        }
        let mut cur = start;
        cur.set_time(0.0);
        let times = self.config.snapshot_times();
        on_snapshot(&cur)?;
        let mut snapshots = vec![cur.clone()];
        let mut steps = 0;
        if !has_positive_interior(&cur) {
            return Ok(Evolution { snapshots, extinction_time: Some(0.0), steps, dt: self.dt });
        }
        for &target in &times[1..] {
            while cur.time() < target {
                let dt = self.dt.min(target - cur.time());
                let landing = cur.time() + dt >= target;
                let mut next = self.step_with(&cur, self.config.scheme, dt)?;
                if landing {
                    next.set_time(target);
                }
                steps += 1;
                on_step(&cur, &next)?;
                cur = next;
                if !has_positive_interior(&cur) {
                    let t = cur.time();
                    on_snapshot(&cur)?;
                    snapshots.push(cur);
                    return Ok(Evolution { snapshots, extinction_time: Some(t), steps, dt: self.dt });
                }
            }
            on_snapshot(&cur)?;
            snapshots.push(cur.clone());
        }
        Ok(Evolution { snapshots, extinction_time: None, steps, dt: self.dt })
    }

    /// Compares the three schemes' updates from the state `before` of every
    /// step of the configured run.
    pub fn evolve_sandwiched(&self) -> Result<(Evolution, SandwichReport)> {
        let mut report = SandwichReport::default();
        let evo = self.evolve_with(|before, after| {
            let dt = after.time() - before.time();
            report.push(self.sandwich_step(before, dt));
            Ok(())
        })?;
        Ok((evo, report))
    }

    /// The three schemes' updates from one common state, compared node by node.
    pub fn sandwich_step(&self, grid: &GridField, dt: f64) -> SandwichStep {
        let eps = self.eps_sing;
        let delta = self.delta;
        let per_node = self.map_interior(grid.values(), |_, op| {
            let lo = dt * op.envelope(false, eps);
            let mid = dt * op.regularized(delta);
            let hi = dt * op.envelope(true, eps);
            (op.q_norm, lo, mid, hi)
        });
        let mut s = SandwichStep { time: grid.time(), ..SandwichStep::default() };
        // Increments dt * Op: the new values are u minus these.
        for (q, lo, mid, hi) in per_node.into_iter().flatten() {
            if q <= eps {
                s.singular += 1;
                let v = (lo - mid).max(mid - hi).max(0.0);
                s.max_ordering_violation = s.max_ordering_violation.max(v);
                s.max_envelope_inversion = s.max_envelope_inversion.max((lo - hi).max(0.0));
            } else if q > SANDWICH_SEPARATION * eps {
                s.regular += 1;
                let d = (lo - mid).abs().max((hi - mid).abs());
                s.max_coincidence_gap = s.max_coincidence_gap.max(d);
            } else {
                s.transitional += 1;
            }
        }
        s
    }
}

/// `max lambda_max(^t sigma sigma) = 1 + max |W|^2` over the horizontal grid nodes.
fn max_sigma_sq(g: &GroupSpec, geometry: &GridField) -> f64 {
    let m = g.m();
    let res = &geometry.resolution()[..m];
    let total: usize = res.iter().product();
    let mut xh = vec![0.0; m];
    let mut best: f64 = 1.0;
    for mut flat in 0..total {
        for a in (0..m).rev() {
            xh[a] = geometry.coord(a, flat % res[a]);
            flat /= res[a];
        }
        let mut x = xh.clone();
        x.resize(g.n(), 0.0);
        let s = g.sigma(&x);
        let (_, hi) = eigen_extremes(&(s.transpose() * &s));
        best = best.max(hi);
    }
    best
}

/// Line start offsets along the last axis, with whether the line is interior
/// in the other axes and the start of its nearest interior line.
fn lines<'a>(strides: &'a [usize], res: &'a [usize]) -> impl Iterator<Item = (usize, bool, usize)> + 'a {
    let n = strides.len();
    let len = res[n - 1];
    let total: usize = res.iter().product();
    (0..total).step_by(len).map(move |start| {
        let mut rem = start;
        let mut src = 0;
        let mut interior = true;
        for a in 0..n - 1 {
            let i = rem / strides[a];
            rem %= strides[a];
            let j = i.clamp(1, res[a] - 2);
            interior &= j == i;
            src += j * strides[a];
        }
        (start, interior, src)
    })
}

/// Boundary nodes copy their nearest interior node.
fn extend_boundary(values: &mut [f64], strides: &[usize], res: &[usize]) {
    let len = res[res.len() - 1];
    for (start, interior, _) in lines(strides, res) {
        if interior {
            values[start] = values[start + 1];
            values[start + len - 1] = values[start + len - 2];
        }
    }
    for (start, interior, src) in lines(strides, res) {
        if !interior {
            values.copy_within(src..src + len, start);
        }
    }
}

/// True when some interior node is strictly positive.
pub fn has_positive_interior(grid: &GridField) -> bool {
    let (st, res) = (grid.strides(), grid.resolution());
    let len = res[res.len() - 1];
    let v = grid.values();
    lines(st, res).any(|(start, interior, _)| interior && v[start + 1..start + len - 1].iter().any(|&x| x > 0.0))
}

/// Boundary faces along axes the field varies on must be strictly negative.
fn check_front_interior(grid: &GridField) -> Result<()> {
    let (st, res) = (grid.strides(), grid.resolution());
    let v = grid.values();
    for a in 0..grid.dim() {
        let varies = (0..v.len()).any(|f| (f / st[a]) % res[a] + 1 < res[a] && v[f] != v[f + st[a]]);
        if !varies {
            continue;
        }
        for (f, &vf) in v.iter().enumerate() {
            let i = (f / st[a]) % res[a];
            if (i == 0 || i + 1 == res[a]) && vf >= 0.0 {
                return Err(Error::FrontOnBoundary(format!(
                    "u = {vf} at boundary node {:?} (axis {a})",
                    grid.multi_index(f)
                )));
            }
        }
    }
    Ok(())
}

/// Builds a solver and runs it.
pub fn evolve(config: &SolverConfig) -> Result<Evolution> {
    Solver::new(config.clone())?.evolve()
}

/// Samples the initial condition of `config`.
pub fn init(config: &SolverConfig) -> Result<GridField> {
    Solver::new(config.clone())?.init()
}

/// One step of `config`'s scheme from `grid`.
pub fn step(grid: &GridField, config: &SolverConfig) -> Result<GridField> {
    Solver::new(config.clone())?.step(grid)
}

/// Time at which the run first has no strictly positive interior node.
pub fn extinction_time_numeric(config: &SolverConfig) -> Result<Option<f64>> {
    Ok(evolve(config)?.extinction_time)
}
