//! JSON inputs of the command-line tool.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gneiting::GneitingModel;
use crate::models::{BernsteinSpec, CompletelyMonotoneSpec, PseudoVariogramModel};
use crate::points::PointConfig;
use crate::simulate::SimulationPlan;
use crate::MatrixFunction;

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<PseudoVariogramModel<f64>> {
    let m: PseudoVariogramModel<f64> = read_json(path)?;
    m.validate()?;
    Ok(m)
}

pub fn load_gneiting(path: &Path) -> Result<GneitingModel<f64>> {
    let m: GneitingModel<f64> = read_json(path)?;
    m.validate()?;
    Ok(m)
}

/// Map applied by the `transform` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformPlan {
    Schoenberg {
        t: f64,
    },
    Laplace {
        t: f64,
        lambda: f64,
    },
    GeneralLaplace {
        t: f64,
        measure: CompletelyMonotoneSpec<f64>,
        draws: usize,
    },
    /// Image is a pseudo-variogram rather than a covariance.
    Bernstein {
        g: BernsteinSpec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Spectral,
    Exact,
}

/// Input of `simulate` and `estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub spatial_grid: Vec<Vec<f64>>,
    #[serde(default)]
    pub temporal_grid: Option<Vec<Vec<f64>>>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub method: Method,
    pub gamma: PseudoVariogramModel<f64>,
    #[serde(default)]
    pub phi: Option<CompletelyMonotoneSpec<f64>>,
}

/// Validated simulation input.
#[derive(Clone, Debug)]
pub enum Resolved {
    Spectral {
        plan: SimulationPlan<f64>,
        gamma: PseudoVariogramModel<f64>,
        phi: CompletelyMonotoneSpec<f64>,
    },
    Exact {
        config: PointConfig<f64>,
        gamma: PseudoVariogramModel<f64>,
        replicates: usize,
        seed: u64,
    },
}

impl SimulationFile {
    /// `seed` overrides the file; one of them must be present.
    pub fn resolve(self, seed: Option<u64>) -> Result<Resolved> {
        let seed = seed
            .or(self.seed)
            .ok_or_else(|| Error::Config("a seed is required: pass --seed or set \"seed\" in the plan".into()))?;
        self.gamma.validate()?;
        if self.replicates < 1 {
            return Err(Error::Config("\"replicates\" must be >= 1".into()));
        }
        let spatial = PointConfig::new(self.spatial_grid)?;
        match self.method {
            Method::Spectral => {
                let temporal = self
                    .temporal_grid
                    .ok_or_else(|| Error::Config("spectral simulation needs \"temporal_grid\"".into()))?;
                let phi = self
                    .phi
                    .ok_or_else(|| Error::Config("spectral simulation needs \"phi\"".into()))?;
                phi.validate()?;
                let plan = SimulationPlan {
                    spatial,
                    temporal: PointConfig::new(temporal)?,
                    variates: self.gamma.variates(),
                    replicates: self.replicates,
                    seed,
                    normalize: self.normalize,
                };
                plan.validate()?;
                Ok(Resolved::Spectral {
                    plan,
                    gamma: self.gamma,
                    phi,
                })
            }
            Method::Exact => {
                if self.temporal_grid.is_some() || self.phi.is_some() {
                    return Err(Error::Config(
                        "exact simulation uses the spatial grid only; drop \"temporal_grid\" and \"phi\"".into(),
                    ));
                }
                if self.normalize {
                    return Err(Error::Config(
                        "\"normalize\" applies to spectral simulation only".into(),
                    ));
                }
                if spatial.dim() != self.gamma.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.gamma.dim(),
                        got: spatial.dim(),
                    });
                }
                Ok(Resolved::Exact {
                    config: spatial,
                    gamma: self.gamma,
                    replicates: self.replicates,
                    seed,
                })
            }
        }
    }
}
