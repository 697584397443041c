//! Files written and read by the commands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bqc::circuits::{AnsatzLayout, Circuit, ParameterSet};
use bqc::datasets::write_distribution_csv;
use bqc::probability::DiscreteDistribution;
use bqc::statevector::ShotResult;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained circuit: text serialization plus bound parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<AnsatzLayout>,
    pub circuit: String,
    pub params: ParameterSet,
}

impl ModelFile {
    pub fn new(layout: Option<AnsatzLayout>, circuit: &Circuit, params: &ParameterSet) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            layout,
            circuit: circuit.to_string(),
            params: params.clone(),
        }
    }

    /// Reads a model and checks that its parameters bind to the circuit.
    pub fn load(path: &Path) -> CliResult<(Self, Circuit)> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |message: String| CliError::Model {
            path: path.to_path_buf(),
            message,
        };
        let model: Self = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format_version {}, expected {MODEL_FORMAT_VERSION}",
                model.format_version
            )));
        }
        let circuit: Circuit = model.circuit.parse().map_err(|e: bqc::BqcError| bad(e.to_string()))?;
        let (g, t) = circuit.slot_counts();
        if model.params.gamma.len() != g || model.params.theta.len() != t {
            return Err(bad(format!(
                "circuit uses {g} gamma and {t} theta slots but params hold {} and {}",
                model.params.gamma.len(),
                model.params.theta.len()
            )));
        }
        Ok((model, circuit))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_bytes(f: impl FnOnce(&mut BufWriter<&mut Vec<u8>>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = BufWriter::new(&mut buf);
        f(&mut w).expect("writing to memory");
        w.flush().expect("writing to memory");
    }
    buf
}

pub fn distribution_csv(dist: &DiscreteDistribution) -> Vec<u8> {
    csv_bytes(|w| write_distribution_csv(dist, w))
}

pub fn loss_history_csv(history: &[f64]) -> Vec<u8> {
    csv_bytes(|w| {
        writeln!(w, "iteration,loss")?;
        for (i, l) in history.iter().enumerate() {
            writeln!(w, "{i},{l:.17e}")?;
        }
        Ok(())
    })
}

/// Observed outcomes only, in increasing order.
pub fn histogram_csv(shots: &ShotResult) -> Vec<u8> {
    csv_bytes(|w| {
        writeln!(w, "outcome,count,frequency")?;
        for (&outcome, &count) in &shots.counts {
            let freq = count as f64 / shots.total_shots as f64;
            writeln!(w, "{outcome},{count},{freq:.17e}")?;
        }
        Ok(())
    })
}

/// Paths of everything `train` writes into the output directory.
pub struct RunPaths {
    pub report: PathBuf,
    pub distribution: PathBuf,
    pub loss_history: PathBuf,
    pub config: PathBuf,
    pub model: PathBuf,
}

impl RunPaths {
    pub fn new(dir: &Path) -> Self {
        Self {
            report: dir.join("report.json"),
            distribution: dir.join("distribution.csv"),
            loss_history: dir.join("loss_history.csv"),
            config: dir.join("config.resolved.json"),
            model: dir.join("model.json"),
        }
    }
}
