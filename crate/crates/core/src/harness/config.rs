use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::InnerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    /// 1D, `v = x(1−x)`, `f = exp(t cos 2πx)`
    A,
    /// 1D, `v = χ_(0,1/2)`, `f = exp(t cos 2πx)`
    B,
    /// 2D unit square with potential and an approximate point source
    D,
    /// 1D homogeneous problem with `v = sin(kπx)`
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Subintervals of the unit interval (1D cases).
    pub cells: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Cell counts (per side in 2D) for a spatial convergence sweep.
    pub sweep: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// Full-order solve with mesh and time step refined by `refine`.
    Refined,
    /// Mittag-Leffler series (homogeneous custom case only).
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub kind: ReferenceKind,
    #[serde(default = "default_refine")]
    pub refine: usize,
    /// Reference mesh for spatial sweeps (same time step as the sweep).
    pub cells: Option<usize>,
}

fn default_refine() -> usize {
    4
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self { kind: ReferenceKind::Refined, refine: default_refine(), cells: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PodConfig {
    #[serde(default = "default_m")]
    pub m: Vec<usize>,
    #[serde(default = "default_inner")]
    pub inner: Vec<InnerKind>,
    #[serde(default = "default_fdq")]
    pub include_fdq: Vec<bool>,
}

fn default_m() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

fn default_inner() -> Vec<InnerKind> {
    vec![InnerKind::H1, InnerKind::L2]
}

fn default_fdq() -> Vec<bool> {
    vec![true, false]
}

impl Default for PodConfig {
    fn default() -> Self {
        Self { m: default_m(), inner: default_inner(), include_fdq: default_fdq() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    /// Wavenumber of the initial sine mode.
    #[serde(default = "default_mode")]
    pub mode: usize,
}

fn default_mode() -> usize {
    1
}

impl Default for CustomConfig {
    fn default() -> Self {
        Self { mode: default_mode() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: CaseId,
    pub alpha: f64,
    pub t_final: f64,
    /// Time step counts `N`, strictly increasing.
    pub steps: Vec<usize>,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub pod: PodConfig,
    #[serde(default)]
    pub custom: CustomConfig,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final = {} must be positive", self.t_final));
        }
        if self.steps.is_empty() || self.steps[0] == 0 {
            return bad("steps must be a nonempty list of positive counts".into());
        }
        if self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("steps {:?} not strictly increasing", self.steps));
        }
        if self.pod.m.contains(&0) {
            return bad("POD ranks must be positive".into());
        }
        if self.reference.refine == 0 {
            return bad("reference.refine must be positive".into());
        }
        match self.case {
            CaseId::D => {
                if self.mesh.nx.is_none() || self.mesh.ny.is_none() {
                    return bad("case d needs mesh.nx and mesh.ny".into());
                }
            }
            _ => {
                if self.mesh.cells.is_none() && self.mesh.sweep.is_none() {
                    return bad("1D cases need mesh.cells or mesh.sweep".into());
                }
            }
        }
        if self.reference.kind == ReferenceKind::Spectral && self.case != CaseId::Custom {
            return bad("spectral reference is only available for the homogeneous custom case".into());
        }
        Ok(())
    }

    /// `key = value` lines describing every field, for report headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Ok(toml::Value::Table(t)) = toml::Value::try_from(self) {
            flatten("", &toml::Value::Table(t), &mut out);
        }
        out
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
case = "a"
alpha = 0.5
t_final = 0.1
steps = [100, 200, 400]

[mesh]
cells = 500

[reference]
kind = "refined"
refine = 4

[pod]
m = [1, 2, 3]
inner = ["h1"]
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.case, CaseId::A);
        assert_eq!(c.mesh.cells, Some(500));
        assert_eq!(c.pod.inner, vec![InnerKind::H1]);
        assert_eq!(c.pod.include_fdq, vec![true, false]);
        let echo = c.echo();
        assert!(echo.iter().any(|(k, v)| k == "alpha" && v == "0.5"));
        assert!(echo.iter().any(|(k, v)| k == "reference.refine" && v == "4"));
    }

    #[test]
    fn rejects_unsorted_steps_and_bad_alpha() {
        let t = SAMPLE.replace("[100, 200, 400]", "[200, 100]");
        assert!(matches!(ExperimentConfig::from_toml(&t), Err(Error::Config(_))));
        let t = SAMPLE.replace("alpha = 0.5", "alpha = 1.5");
        assert!(ExperimentConfig::from_toml(&t).is_err());
        let t = SAMPLE.replace("kind = \"refined\"", "kind = \"spectral\"");
        assert!(ExperimentConfig::from_toml(&t).is_err());
    }
}
