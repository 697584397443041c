//! `sample` and `inspect`: read a model file and report its distributions.

use std::io::Write;
use std::path::Path;

use bqc::probability::Joint;
use bqc::statevector::sample_distribution;

use crate::artifacts::{histogram_csv, write_file, ModelFile};
use crate::error::{CliError, CliResult};

fn simulate(model_path: &Path) -> CliResult<Joint> {
    let (model, circuit) = ModelFile::load(model_path)?;
    let state = circuit.run(&model.params)?;
    Ok(Joint::from_state(&state, circuit.split())?)
}

pub fn cmd_sample(model_path: &Path, shots: u64, seed: u64, out: &Path) -> CliResult<()> {
    if shots == 0 {
        return Err(CliError::Config("`--shots` must be at least 1".into()));
    }
    let joint = simulate(model_path)?;
    let counts = sample_distribution(&joint.data_marginal(), shots, seed)?;
    write_file(out, &histogram_csv(&counts))
}

/// Writes the prior, every likelihood and optionally one posterior as
/// CSV sections separated by `# name` lines.
pub fn cmd_inspect<W: Write>(model_path: &Path, posterior_x: Option<usize>, out: &mut W) -> CliResult<()> {
    let joint = simulate(model_path)?;
    let split = joint.split();
    if let Some(x) = posterior_x {
        if x >= split.data_dim() {
            return Err(CliError::Config(format!(
                "`--posterior-x` {x} is outside 0..{}",
                split.data_dim()
            )));
        }
    }
    let io = |e| CliError::io("<stdout>", e);
    let prior = joint.prior();

    writeln!(out, "# prior").map_err(io)?;
    writeln!(out, "latent,probability").map_err(io)?;
    for (l, p) in prior.probs().iter().enumerate() {
        writeln!(out, "{l},{p:.17e}").map_err(io)?;
    }

    writeln!(out, "# likelihood").map_err(io)?;
    writeln!(out, "latent,outcome,probability").map_err(io)?;
    for l in 0..split.latent_dim() {
        match joint.likelihood(l) {
            Ok(lik) => {
                for (x, p) in lik.probs().iter().enumerate() {
                    writeln!(out, "{l},{x},{p:.17e}").map_err(io)?;
                }
            }
            Err(e) => writeln!(out, "{l},warning,{e}").map_err(io)?,
        }
    }

    if let Some(x) = posterior_x {
        writeln!(out, "# posterior x={x}").map_err(io)?;
        writeln!(out, "latent,probability").map_err(io)?;
        match joint.posterior(x) {
            Ok(post) => {
                for (l, p) in post.probs().iter().enumerate() {
                    writeln!(out, "{l},{p:.17e}").map_err(io)?;
                }
            }
            Err(e) => writeln!(out, "warning,{e}").map_err(io)?,
        }
    }
    Ok(())
}
