//! TOML experiment configuration.
//!
//! Every section is optional and falls back to the defaults below. Unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::barriers::{BarrierKind, BarrierSpec, CatalogConstants};
use crate::error::{Error, Result};
use crate::grid::DomainBox;
use crate::group::GroupSpec;
use crate::solver::{InitialCondition, Scheme, SolverConfig};
use crate::verify::Suite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub m: usize,
    pub n: usize,
    /// Structure matrices `B^(1..n-m)`, each as `m` rows of length `m`.
    pub b: Vec<Vec<Vec<f64>>>,
}

impl Default for GroupSection {
    fn default() -> Self {
        let g = GroupSpec::heisenberg();
        GroupSection { m: g.m(), n: g.n(), b: g.to_rows() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Cells per axis.
    pub resolution: Vec<usize>,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection { min: vec![-2.0; 3], max: vec![2.0; 3], resolution: vec![64; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Scheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_reg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_sing: Option<f64>,
    pub cfl: f64,
    /// Also run `envelope_min` and `envelope_max` and compare per step.
    pub sandwich: bool,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection { kind: Scheme::Regularized, delta_reg: None, eps_sing: None, cfl: 0.25, sandwich: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub snapshot_every: f64,
    pub output_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { t_end: 0.5, snapshot_every: 0.1, output_dir: PathBuf::from("hmcf-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub suites: Vec<Suite>,
    /// Overrides every suite's default sample count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Overrides every suite's default tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub constants: CatalogConstants,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            suites: Suite::ALL.to_vec(),
            samples: None,
            tolerance: None,
            seed: 20240601,
            constants: CatalogConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    pub kind: BarrierKind,
    pub c: f64,
    pub r: f64,
    /// Lattice points per axis.
    pub lattice: usize,
    /// The lattice covers `[-half_width, half_width]^n`.
    pub half_width: f64,
    pub t: f64,
    pub tolerance: f64,
}

impl Default for BarrierSection {
    fn default() -> Self {
        BarrierSection {
            kind: BarrierKind::Cylinder,
            c: -2.0,
            r: 1.0,
            lattice: 10,
            half_width: 1.5,
            t: 0.0,
            tolerance: 1e-9,
        }
    }
}

fn default_initial() -> InitialCondition {
    InitialCondition::new(BarrierKind::Cylinder, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub group: GroupSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default = "default_initial")]
    pub initial: InitialCondition,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub barrier: BarrierSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            group: GroupSection::default(),
            domain: DomainSection::default(),
            initial: default_initial(),
            scheme: SchemeSection::default(),
            run: RunSection::default(),
            verify: VerifySection::default(),
            barrier: BarrierSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; diagnostics carry the line and key of the failure.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        GroupSpec::from_rows(self.group.m, self.group.n, &self.group.b).map_err(|e| Error::Config(format!("group.b: {e}")))
    }

    pub fn domain_box(&self) -> Result<DomainBox> {
        DomainBox::new(self.domain.min.clone(), self.domain.max.clone()).map_err(|e| Error::Config(format!("domain: {e}")))
    }

    pub fn barrier_spec(&self) -> BarrierSpec {
        BarrierSpec::new(self.barrier.kind, self.barrier.c, self.barrier.r)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            group: self.group_spec()?,
            domain: self.domain_box()?,
            resolution: self.domain.resolution.clone(),
            initial: self.initial,
            scheme: self.scheme.kind,
            delta_reg: self.scheme.delta_reg,
            eps_sing: self.scheme.eps_sing,
            cfl: self.scheme.cfl,
            t_end: self.run.t_end,
            snapshot_every: self.run.snapshot_every,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.group_spec()?;
        self.domain_box()?;
        if self.domain.min.len() != g.n() || self.domain.resolution.len() != g.n() {
            return Err(Error::Config(format!(
                "domain: group has {} coordinates but min/max/resolution have {}/{}/{}",
                g.n(),
                self.domain.min.len(),
                self.domain.max.len(),
                self.domain.resolution.len()
            )));
        }
        if let Some(bad) = self.domain.resolution.iter().find(|&&r| r < 3) {
            return Err(Error::Config(format!("domain.resolution: need at least 3 cells per axis, got {bad}")));
        }
        self.solver_config()?;
        if self.barrier.lattice == 0 || !(self.barrier.half_width > 0.0) {
            return Err(Error::Config("barrier: lattice and half_width must be positive".into()));
        }
        if self.verify.samples == Some(0) {
            return Err(Error::Config("verify.samples must be positive".into()));
        }
        Ok(())
    }

    /// The same configuration with every implicit default made explicit.
    pub fn effective(&self) -> Result<Self> {
        let solver = self.solver_config()?;
        let mut out = self.clone();
        out.scheme.delta_reg = Some(solver.delta_reg());
        out.scheme.eps_sing = Some(solver.eps_sing());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.group_spec().unwrap(), GroupSpec::heisenberg());
    }

    #[test]
    fn effective_config_round_trips() {
        let c = ExperimentConfig::default().effective().unwrap();
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let e = ExperimentConfig::from_toml_str("[run]\nt_end = 0.3\nspeed = 2\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("speed") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn malformed_b_is_a_config_error() {
        let e = ExperimentConfig::from_toml_str("[group]\nm = 2\nn = 3\nb = [[[0.0, 1.0], [1.0, 0.0]]]\n").unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("group.b")), "{e}");
    }

    #[test]
    fn relabel_parses() {
        let c = ExperimentConfig::from_toml_str("[initial]\npreset = \"cylinder\"\nr = 1.0\nrelabel = { cubic = { a = 1.0 } }\n")
            .unwrap();
        assert_eq!(c.initial.relabel, crate::expr::Relabel::Cubic { a: 1.0 });
    }
}
