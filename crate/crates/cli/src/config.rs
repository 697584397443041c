//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use bqc::circuits::AnsatzLayout;
use bqc::datasets::{bas_patterns, BasGrid, MixtureSpec};
use bqc::trainer::{BasObjective, Mode, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    /// BQC with a fixed uniform prior trained on a bars-and-stripes grid.
    BasGenerate,
    /// Pre-fit one likelihood per mixture component, then learn the prior.
    LearnPrior,
    /// Ancilla-free RY/RZ/CNOT circuit trained on a bars-and-stripes grid.
    QcbmBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<AnsatzLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BasGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureSpec>,
    /// BAS_GENERATE only; defaults to CONDITIONAL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<BasObjective>,
    /// QCBM_BASELINE only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcbm_layers: Option<usize>,
    #[serde(default)]
    pub train: TrainConfig,
    /// LEARN_PRIOR only: settings for the likelihood fit. Defaults to
    /// `train` with the mode switched to LEARN_THETA.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pretrain: Option<TrainConfig>,
    pub output_dir: PathBuf,
}

/// The spelling used in config files, e.g. `LEARN_PRIOR`.
fn json_name<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value)
        .expect("enum serializes")
        .trim_matches('"')
        .to_string()
}

fn missing(kind: ExperimentKind, key: &str) -> CliError {
    CliError::Config(format!("{} requires `{key}`", json_name(&kind)))
}

fn unused(kind: ExperimentKind, key: &str) -> CliError {
    CliError::Config(format!("`{key}` is not used by {}", json_name(&kind)))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.resolve()
    }

    /// Checks per-experiment requirements and fills in every default so that
    /// the serialized result describes the run completely.
    pub fn resolve(mut self) -> CliResult<Self> {
        use ExperimentKind::*;
        let kind = self.experiment;
        let needs = |present: bool, key: &str, wanted: bool| -> CliResult<()> {
            match (present, wanted) {
                (false, true) => Err(missing(kind, key)),
                (true, false) => Err(unused(kind, key)),
                _ => Ok(()),
            }
        };
        needs(self.layout.is_some(), "layout", kind != QcbmBaseline)?;
        needs(self.grid.is_some(), "grid", kind != LearnPrior)?;
        needs(self.mixture.is_some(), "mixture", kind == LearnPrior)?;
        needs(self.qcbm_layers.is_some(), "qcbm_layers", kind == QcbmBaseline)?;
        if self.objective.is_some() && kind != BasGenerate {
            return Err(unused(kind, "objective"));
        }
        if self.pretrain.is_some() && kind != LearnPrior {
            return Err(unused(kind, "pretrain"));
        }

        let wanted_mode = if kind == LearnPrior { Mode::LearnGamma } else { Mode::LearnTheta };
        let mode_given = self.train.mode != Mode::default();
        if mode_given && self.train.mode != wanted_mode {
            return Err(CliError::Config(format!(
                "`train.mode` must be {} for {}",
                json_name(&wanted_mode),
                json_name(&kind)
            )));
        }
        self.train.mode = wanted_mode;
        self.train.validate()?;

        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        if let Some(layout) = &self.layout {
            layout.validate()?;
        }
        match kind {
            BasGenerate => {
                self.objective.get_or_insert(BasObjective::Conditional);
                let (grid, layout) = (self.grid.unwrap(), self.layout.unwrap());
                let patterns = bas_patterns(&grid)?.len();
                if layout.n != grid.pixels() || layout.num_latents != patterns {
                    return Err(CliError::Config(format!(
                        "`layout` must have n = {} and num_latents = {patterns} for a {}x{} grid",
                        grid.pixels(),
                        grid.rows,
                        grid.cols
                    )));
                }
            }
            LearnPrior => {
                let mixture = self.mixture.as_ref().unwrap();
                mixture.validate()?;
                let layout = self.layout.unwrap();
                if layout.n != mixture.num_qubits || layout.num_latents != mixture.components.len() {
                    return Err(CliError::Config(format!(
                        "`layout` must have n = {} and num_latents = {} for this mixture",
                        mixture.num_qubits,
                        mixture.components.len()
                    )));
                }
                let pretrain = match self.pretrain.take() {
                    Some(p) if p.mode != Mode::LearnTheta => {
                        return Err(CliError::Config(
                            "`pretrain.mode` must be LEARN_THETA".into(),
                        ))
                    }
                    Some(p) => p,
                    None => TrainConfig {
                        mode: Mode::LearnTheta,
                        ..self.train.clone()
                    },
                };
                pretrain.validate()?;
                self.pretrain = Some(pretrain);
            }
            QcbmBaseline => {
                if self.qcbm_layers == Some(0) {
                    return Err(CliError::Config("`qcbm_layers` must be at least 1".into()));
                }
            }
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
