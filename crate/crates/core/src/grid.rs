//! Uniform cell-centred grids over an axis-aligned box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[min_0, max_0] x ... x [min_{n-1}, max_{n-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl DomainBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::Dimension(format!("box bounds have lengths {} and {}", min.len(), max.len())));
        }
        for (a, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!("axis {a}: need finite min < max, got [{lo}, {hi}]")));
            }
        }
        Ok(DomainBox { min, max })
    }

    /// The cube `[-half, half]^n`.
    pub fn cube(n: usize, half: f64) -> Self {
        DomainBox { min: vec![-half; n], max: vec![half; n] }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn diameter(&self) -> f64 {
        self.min.iter().zip(&self.max).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

/// Samples of a level-set function at one time. Values sit at cell centres,
/// `x_i = min + (i + 1/2) h`, stored in row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    bounds: DomainBox,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    values: Vec<f64>,
    time: f64,
}

impl GridField {
    pub fn zeros(bounds: DomainBox, resolution: Vec<usize>, time: f64) -> Result<Self> {
        if resolution.len() != bounds.dim() {
            return Err(Error::Dimension(format!(
                "resolution has {} axes, box has {}",
                resolution.len(),
                bounds.dim()
            )));
        }
        if resolution.iter().any(|&r| r < 3) {
            return Err(Error::InvalidArgument(format!("need at least 3 cells per axis, got {resolution:?}")));
        }
        let spacing = (0..bounds.dim()).map(|a| (bounds.max[a] - bounds.min[a]) / resolution[a] as f64).collect();
        let mut strides = vec![1; resolution.len()];
        for a in (0..resolution.len() - 1).rev() {
            strides[a] = strides[a + 1] * resolution[a + 1];
        }
        let len = resolution.iter().product();
        Ok(GridField { bounds, resolution, spacing, strides, values: vec![0.0; len], time })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn<F>(bounds: DomainBox, resolution: Vec<usize>, time: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let mut g = GridField::zeros(bounds, resolution, time)?;
        let mut x = vec![0.0; g.dim()];
        for flat in 0..g.len() {
            g.coords_into(flat, &mut x);
            g.values[flat] = f(&x)?;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bounds(&self) -> &DomainBox {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Coordinate of cell `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.bounds.min[axis] + (i as f64 + 0.5) * self.spacing[axis]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (i, s) in idx.iter_mut().zip(&self.strides) {
            *i = flat / s;
            flat %= s;
        }
        idx
    }

    pub fn coords_into(&self, mut flat: usize, out: &mut [f64]) {
        for (a, (o, s)) in out.iter_mut().zip(&self.strides).enumerate() {
            *o = self.coord(a, flat / s);
            flat %= s;
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.coords_into(flat, &mut x);
        x
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    /// True when the node has a neighbour on both sides along every axis.
    pub fn is_interior(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.resolution).all(|(&i, &r)| i >= 1 && i + 1 < r)
    }

    /// Same grid geometry, new values.
    pub fn with_values(&self, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::Dimension(format!("expected {} values, got {}", self.len(), values.len())));
        }
        Ok(GridField {
            bounds: self.bounds.clone(),
            resolution: self.resolution.clone(),
            spacing: self.spacing.clone(),
            strides: self.strides.clone(),
            values,
            time,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}
