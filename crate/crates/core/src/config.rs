//! Flat key-value run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{SpaceSpec, TestNorm};
use crate::cases::CaseParams;
use crate::error::{Error, Result};
use crate::remesh::{Backend, RemeshConfig};
use crate::solve::SolverKind;
use crate::study::{AdaptSettings, Mode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: String,
    pub p: usize,
    pub dp: usize,
    pub norm: TestNorm,
    pub cycles: usize,
    /// Complexity of the first plan.
    pub n0: f64,
    pub growth: f64,
    /// Cells per unit length of the structured starting mesh.
    pub initial_divisions: usize,
    pub mode: Mode,
    pub regularize: bool,
    pub solver: SolverKind,
    pub remesher: Backend,
    pub condition: bool,
    pub out: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub xc: Option<f64>,
    pub yc: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub length_low: f64,
    pub length_high: f64,
    pub max_passes: usize,
    /// Command for the external generator, called as `cmd <mesh> <sol> <out>`.
    pub generator: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let r = RemeshConfig::default();
        Self {
            case: "boundary-layer".into(),
            p: 2,
            dp: 2,
            norm: TestNorm::Scaled,
            cycles: 10,
            n0: 32.0,
            growth: crate::continuous::DEFAULT_GROWTH,
            initial_divisions: 4,
            mode: Mode::Solution,
            regularize: false,
            solver: SolverKind::Normal,
            remesher: Backend::Builtin,
            condition: false,
            out: None,
            epsilon: None,
            alpha: None,
            gamma: None,
            theta: None,
            xc: None,
            yc: None,
            x1: None,
            x2: None,
            length_low: r.length_low,
            length_high: r.length_high,
            max_passes: r.max_passes,
            generator: None,
        }
    }
}

/// Case defaults before any overrides.
pub fn case_defaults(case: &str) -> CaseParams {
    let mut p = CaseParams::default();
    if case == "flux" {
        p.epsilon = 0.01;
        p.alpha = 50.0;
    }
    p
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_str(&text)
    }

    pub fn case_params(&self) -> CaseParams {
        let mut p = case_defaults(&self.case);
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.epsilon, self.epsilon);
        set(&mut p.alpha, self.alpha);
        set(&mut p.gamma, self.gamma);
        set(&mut p.theta, self.theta);
        set(&mut p.xc, self.xc);
        set(&mut p.yc, self.yc);
        set(&mut p.x1, self.x1);
        set(&mut p.x2, self.x2);
        p
    }

    pub fn space(&self) -> Result<SpaceSpec> {
        SpaceSpec::new(self.p, self.dp, self.norm).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn remesh_config(&self) -> RemeshConfig {
        RemeshConfig {
            length_low: self.length_low,
            length_high: self.length_high,
            max_passes: self.max_passes,
            backend: self.remesher,
            ..Default::default()
        }
    }

    pub fn settings(&self) -> Result<AdaptSettings> {
        if !(self.n0 > 0.0) || !(self.growth > 0.0) {
            return Err(Error::Config("n0 and growth must be positive".into()));
        }
        let remesh = self.remesh_config();
        remesh.validate()?;
        Ok(AdaptSettings {
            space: self.space()?,
            cycles: self.cycles,
            complexity: self.n0,
            growth: self.growth,
            mode: self.mode,
            regularize: self.regularize,
            solver: self.solver,
            remesh,
            condition: self.condition,
            keep_meshes: false,
            output: self.out.clone(),
            generator: self.generator.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_flat_file() {
        let c = RunConfig::from_str(
            "case = \"flux\"\np = 3\nnorm = \"standard\"\nregularize = true\nepsilon = 0.02\n",
        )
        .unwrap();
        assert_eq!(c.p, 3);
        assert_eq!(c.norm, TestNorm::Standard);
        let params = c.case_params();
        assert_eq!(params.epsilon, 0.02);
        assert_eq!(params.alpha, 50.0);
        assert!(RunConfig::from_str("bogus = 1").is_err());
    }

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_str(&text).unwrap(), c);
    }
}
