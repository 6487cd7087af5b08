//! The `mse` experiment description, from TOML or from flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use lpsketch::simlab::{Backend, ExperimentSpec, PairKind, PairSource, ValueDist};
use lpsketch::{EntryDistribution, EstimatorId};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MseConfig {
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_distribution")]
    pub distribution: String,
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub output: Option<PathBuf>,
    pub pair: PairConfig,
}

/// `kind` is `file` (with `path`), `gamma`, `beta`, `normal` or
/// `sparse-overlap`; numeric parameters sit alongside it.
#[derive(Debug, Clone, Deserialize)]
pub struct PairConfig {
    pub kind: String,
    pub path: Option<PathBuf>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    /// Value law for `sparse-overlap`: constant, gamma, lognormal or pareto.
    pub values: Option<String>,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

fn default_distribution() -> String {
    "normal".into()
}

fn default_backend() -> String {
    "auto".into()
}

fn default_tau() -> f64 {
    0.9
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl PairConfig {
    fn get(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        self.params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| usage(format!("pair kind `{}` needs parameter `{key}`", self.kind)))
    }

    fn value_dist(&self) -> Result<ValueDist, CliError> {
        Ok(match self.values.as_deref().unwrap_or("gamma") {
            "constant" => ValueDist::Constant(self.get("value", Some(1.0))?),
            "gamma" => ValueDist::Gamma {
                shape: self.get("value_shape", Some(1.0))?,
                scale: self.get("value_scale", Some(1.0))?,
            },
            "lognormal" => ValueDist::LogNormal {
                mu: self.get("value_mu", Some(0.0))?,
                sigma: self.get("value_sigma", Some(1.0))?,
            },
            "pareto" => ValueDist::Pareto {
                scale: self.get("value_scale", Some(1.0))?,
                shape: self.get("value_shape", Some(1.5))?,
            },
            other => return Err(usage(format!("unknown value distribution `{other}`"))),
        })
    }

    pub fn kind(&self) -> Result<PairKind, CliError> {
        Ok(match self.kind.as_str() {
            "gamma" => PairKind::Gamma {
                shape: self.get("shape", Some(2.0))?,
                scale: self.get("scale", Some(1.0))?,
                correlation: self.get("correlation", Some(0.5))?,
            },
            "beta" => PairKind::Beta {
                alpha: self.get("alpha", Some(2.0))?,
                beta: self.get("beta", Some(2.0))?,
                correlation: self.get("correlation", Some(0.5))?,
            },
            "normal" => PairKind::Normal {
                mean: self.get("mean", Some(0.0))?,
                std: self.get("std", Some(1.0))?,
                correlation: self.get("correlation", Some(0.5))?,
            },
            "sparse-overlap" => PairKind::SparseOverlap {
                sparsity_x: self.get("sparsity_x", None)?,
                sparsity_y: self.get("sparsity_y", None)?,
                overlap: self.get("overlap", None)?,
                values: self.value_dist()?,
                jitter: self.get("jitter", Some(0.0))?,
            },
            other => return Err(usage(format!("unknown pair kind `{other}`"))),
        })
    }

    pub fn source(&self) -> Result<PairSource, CliError> {
        if self.kind == "file" {
            let path = self.path.as_ref().ok_or_else(|| usage("pair kind `file` needs `path`"))?;
            let (x, y) = crate::input::pair(Some(path), None, None, self.dim)?;
            return Ok(PairSource::Given { x, y });
        }
        Ok(PairSource::Generated {
            kind: self.kind()?,
            dim: self.dim.ok_or_else(|| usage("generated pairs need `dim`"))?,
            seed: self.seed.unwrap_or(0),
        })
    }
}

impl MseConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let estimators = self
            .estimators
            .iter()
            .map(|e| e.parse::<EstimatorId>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?;
        Ok(ExperimentSpec {
            source: self.pair.source()?,
            k_grid: self.k_grid.clone(),
            trials: self.trials,
            estimators,
            distribution: self
                .distribution
                .parse::<EntryDistribution>()
                .map_err(|e| usage(e.to_string()))?,
            backend: self.backend.parse::<Backend>().map_err(|e| usage(e.to_string()))?,
            master_seed: self.seed,
            tau: self.tau,
        })
    }
}

/// `key=value` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_generated_pair() {
        let cfg = MseConfig::from_toml(
            r#"
            k_grid = [10, 100]
            trials = 500
            estimators = ["1p", "3p-m"]
            seed = 4
            [pair]
            kind = "sparse-overlap"
            dim = 200
            sparsity_x = 0.1
            sparsity_y = 0.2
            overlap = 0.5
            values = "pareto"
            value_shape = 2
            "#,
        )
        .unwrap();
        let spec = cfg.to_spec().unwrap();
        assert_eq!(spec.k_grid, vec![10, 100]);
        assert_eq!(spec.estimators, vec![EstimatorId::OneP, EstimatorId::ThreePMargin]);
        match spec.source {
            PairSource::Generated { kind: PairKind::SparseOverlap { values, .. }, dim: 200, .. } => {
                assert_eq!(values, ValueDist::Pareto { scale: 1.0, shape: 2.0 })
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknowns() {
        assert!(MseConfig::from_toml("k_grid = [1]\ntrials = 100\nestimators = []\nbogus = 1\n[pair]\nkind = \"gamma\"\n").is_err());
        let cfg = MseConfig::from_toml("k_grid = [1]\ntrials = 100\nestimators = [\"9p\"]\n[pair]\nkind = \"gamma\"\ndim = 3\n").unwrap();
        assert!(cfg.to_spec().is_err());
    }
}
