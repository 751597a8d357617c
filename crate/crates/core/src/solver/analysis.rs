use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::grid::GridField;

use super::{Solver, SolverConfig};

/// Nodes with `|Xu| > SANDWICH_SEPARATION * eps_sing` count as well separated
/// from the characteristic set in the sandwich comparison.
pub const SANDWICH_SEPARATION: f64 = 10.0;

/// `chi_upper = 1` on `{u >= 0}`, `chi_lower = 1` on `{u > 0}`, both `-1` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPair {
    pub time: f64,
    pub upper: GridField,
    pub lower: GridField,
    /// Fraction of nodes where the two differ, i.e. where `u == 0`.
    pub gap: f64,
}

pub fn indicator_fields(snapshots: &[GridField]) -> Vec<IndicatorPair> {
    snapshots
        .iter()
        .map(|s| {
            let v = s.values();
            let upper: Vec<f64> = v.iter().map(|&u| if u >= 0.0 { 1.0 } else { -1.0 }).collect();
            let lower: Vec<f64> = v.iter().map(|&u| if u > 0.0 { 1.0 } else { -1.0 }).collect();
            let differ = upper.iter().zip(&lower).filter(|(a, b)| a != b).count();
            IndicatorPair {
                time: s.time(),
                gap: differ as f64 / v.len().max(1) as f64,
                upper: s.with_values(upper, s.time()).expect("same length"),
                lower: s.with_values(lower, s.time()).expect("same length"),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOptions {
    /// Times at which the exact field is sampled.
    pub times: Vec<f64>,
    /// Nodes with `|x_h|` below this radius are excluded.
    pub axis_exclusion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub resolution: Vec<usize>,
    pub spacing: f64,
    pub max_residual: f64,
    pub worst_node: Option<(f64, Vec<f64>)>,
    pub nodes: usize,
}

/// Max of `|u_t + Op_h(u)|` over interior nodes away from the axis, where `u`
/// is the exact field sampled on the grid of `config`, `u_t` is exact and
/// `Op_h` is the configured scheme's discrete operator.
pub fn residual_on_exact(exact: &ScalarField, config: &SolverConfig, opts: &ResidualOptions) -> Result<ResidualReport> {
    if exact.dim() != config.group.n() {
        return Err(Error::Dimension(format!("field has {} coordinates, group {}", exact.dim(), config.group.n())));
    }
    let solver = Solver::new(config.clone())?;
    let m = config.group.m();
    let mut report = ResidualReport {
        resolution: config.resolution.clone(),
        spacing: solver.empty_grid().max_spacing(),
        max_residual: 0.0,
        worst_node: None,
        nodes: 0,
    };
    for &t in &opts.times {
        let grid = GridField::from_fn(config.domain.clone(), config.resolution.clone(), t, |x| exact.value(x, t))?;
        let ops = solver.map_interior(grid.values(), |_, op| op.apply(config.scheme, solver.delta_reg(), solver.eps_sing()));
        let mut x = vec![0.0; grid.dim()];
        for (flat, op) in ops.into_iter().enumerate() {
            let Some(op) = op else { continue };
            grid.coords_into(flat, &mut x);
            if x[..m].iter().map(|v| v * v).sum::<f64>().sqrt() < opts.axis_exclusion {
                continue;
            }
            let ut = exact.jet(&x, t)?.dt.unwrap_or(0.0);
            let r = (ut + op).abs();
            report.nodes += 1;
            if r > report.max_residual || report.worst_node.is_none() {
                report.max_residual = report.max_residual.max(r);
                report.worst_node = Some((t, x.clone()));
            }
        }
    }
    Ok(report)
}

/// Least-squares slope of `log residual` against `log h`.
pub fn convergence_rate(reports: &[ResidualReport]) -> Option<f64> {
    if reports.len() < 2 || reports.iter().any(|r| !(r.max_residual > 0.0)) {
        return None;
    }
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.spacing.ln(), r.max_residual.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Comparison of `dt F_*`, `dt F_delta` and `dt F^*` from one state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SandwichStep {
    pub time: f64,
    /// Nodes with `|Xu| <= eps_sing`.
    pub singular: usize,
    /// Nodes with `|Xu| > SANDWICH_SEPARATION * eps_sing`.
    pub regular: usize,
    pub transitional: usize,
    /// At singular nodes: how far the regularized increment leaves `[dt F_*, dt F^*]`.
    pub max_ordering_violation: f64,
    /// At singular nodes: `max(dt F_* - dt F^*, 0)`; zero up to roundoff.
    pub max_envelope_inversion: f64,
    /// At regular nodes: largest difference between the three increments.
    pub max_coincidence_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SandwichReport {
    pub steps: Vec<SandwichStep>,
}

impl SandwichReport {
    pub fn push(&mut self, s: SandwichStep) {
        self.steps.push(s);
    }

    pub fn max_ordering_violation(&self) -> f64 {
        self.steps.iter().map(|s| s.max_ordering_violation).fold(0.0, f64::max)
    }

    pub fn max_envelope_inversion(&self) -> f64 {
        self.steps.iter().map(|s| s.max_envelope_inversion).fold(0.0, f64::max)
    }

    pub fn max_coincidence_gap(&self) -> f64 {
        self.steps.iter().map(|s| s.max_coincidence_gap).fold(0.0, f64::max)
    }

    pub fn singular_nodes(&self) -> usize {
        self.steps.iter().map(|s| s.singular).sum()
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_ordering_violation() <= tol && self.max_envelope_inversion() <= tol && self.max_coincidence_gap() <= tol
    }

    pub fn summary(&self) -> String {
        format!(
            "{} steps, {} singular node-steps; ordering violation {:.3e}, coincidence gap {:.3e}",
            self.steps.len(),
            self.singular_nodes(),
            self.max_ordering_violation(),
            self.max_coincidence_gap()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainBox;

    #[test]
    fn indicator_gap_counts_zero_plateau() {
        let g = GridField::from_fn(DomainBox::cube(1, 1.0), vec![10], 0.0, |x| Ok(if x[0].abs() < 0.25 { 0.0 } else { x[0] }))
            .unwrap();
        let pair = &indicator_fields(&[g])[0];
        assert!((pair.gap - 0.2).abs() < 1e-15);
        let s = GridField::from_fn(DomainBox::cube(1, 1.0), vec![10], 0.0, |x| Ok(x[0])).unwrap();
        assert_eq!(indicator_fields(&[s])[0].gap, 0.0);
    }

    #[test]
    fn rate_of_exact_power_law() {
        let reps: Vec<ResidualReport> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| ResidualReport {
                resolution: vec![],
                spacing: h,
                max_residual: 3.0 * h * h,
                worst_node: None,
                nodes: 1,
            })
            .collect();
        assert!((convergence_rate(&reps).unwrap() - 2.0).abs() < 1e-12);
    }
}
