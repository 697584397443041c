//! End-to-end experiment recipes shared by the CLI and the test suites.

use serde::{Deserialize, Serialize};

use super::{pretrain_likelihood, train, Mode, PretrainResult, TrainConfig, TrainReport};
use crate::circuits::{
    build_likelihood_ansatz, build_prior_ansatz, build_prior_exact, build_qcbm_baseline,
    AnsatzLayout, Circuit, ParameterSet,
};
use crate::datasets::{bas_patterns, bas_target, mixture_target, BasGrid, MixtureSpec};
use crate::error::{BqcError, Result};
use crate::loss::Objective;
use crate::probability::DiscreteDistribution;

/// How BAS patterns are assigned to latent states during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BasObjective {
    /// Latent i is trained towards the i-th pattern (ascending integer order).
    #[default]
    Conditional,
    /// Only the data marginal is matched against the uniform pattern mix.
    Marginal,
}

/// A trained circuit together with its training report.
#[derive(Debug, Clone)]
pub struct Run {
    pub circuit: Circuit,
    pub report: TrainReport,
}

/// Trains a BQC with a fixed uniform prior over one latent per pattern.
pub fn train_bas(
    grid: &BasGrid,
    layout: &AnsatzLayout,
    objective: BasObjective,
    config: &TrainConfig,
) -> Result<Run> {
    let patterns = bas_patterns(grid)?;
    if layout.n != grid.pixels() {
        return Err(BqcError::Config(format!(
            "layout has n = {} data qubits but the grid has {} pixels",
            layout.n,
            grid.pixels()
        )));
    }
    if layout.num_latents != patterns.len() {
        return Err(BqcError::Config(format!(
            "layout has {} latents but the grid has {} patterns",
            layout.num_latents,
            patterns.len()
        )));
    }
    layout.validate()?;
    let k = patterns.len();
    let uniform = DiscreteDistribution::new(vec![1.0 / k as f64; k])?;
    let mut circuit = build_prior_exact(&uniform, layout.n, layout.m)?;
    circuit.append(&build_likelihood_ansatz(layout)?)?;

    let dim = 1usize << layout.n;
    let objective = match objective {
        BasObjective::Conditional => Objective::Conditional(
            patterns
                .iter()
                .map(|&p| DiscreteDistribution::point_mass(dim, p))
                .collect::<Result<_>>()?,
        ),
        BasObjective::Marginal => Objective::Marginal(bas_target(grid)?),
    };
    let params = ParameterSet {
        gamma: vec![],
        theta: vec![0.0; layout.theta_slots()],
        gamma_frozen: true,
        theta_frozen: false,
    };
    let config = TrainConfig {
        mode: Mode::LearnTheta,
        ..config.clone()
    };
    let report = train(&circuit, &params, &objective, &config)?;
    Ok(Run { circuit, report })
}

/// Trains the ancilla-free RY/RZ/CNOT baseline on the BAS target.
pub fn train_qcbm(grid: &BasGrid, layers: usize, config: &TrainConfig) -> Result<Run> {
    let circuit = build_qcbm_baseline(grid.pixels(), layers)?;
    let params = ParameterSet {
        gamma: vec![],
        theta: vec![0.0; circuit.slot_count(crate::circuits::ParamVector::Theta)],
        gamma_frozen: true,
        theta_frozen: false,
    };
    let config = TrainConfig {
        mode: Mode::LearnTheta,
        ..config.clone()
    };
    let report = train(&circuit, &params, &Objective::Marginal(bas_target(grid)?), &config)?;
    Ok(Run { circuit, report })
}

/// Result of learning a prior over pre-trained likelihood components.
#[derive(Debug, Clone)]
pub struct PriorRun {
    pub pretrain: PretrainResult,
    pub run: Run,
}

/// Fits one likelihood branch per mixture component, then freezes θ and
/// learns the prior parameters γ against the mixture.
pub fn learn_prior(
    layout: &AnsatzLayout,
    mixture: &MixtureSpec,
    pretrain_config: &TrainConfig,
    prior_config: &TrainConfig,
) -> Result<PriorRun> {
    mixture.validate()?;
    check_mixture_width(layout, mixture)?;
    let pretrain = pretrain_likelihood(layout, &mixture.component_targets()?, pretrain_config)?;
    let run = fit_prior(layout, &pretrain.params.theta, mixture, prior_config)?;
    Ok(PriorRun { pretrain, run })
}

/// Learns γ with the likelihood parameters fixed to `theta`.
pub fn fit_prior(
    layout: &AnsatzLayout,
    theta: &[f64],
    mixture: &MixtureSpec,
    config: &TrainConfig,
) -> Result<Run> {
    check_mixture_width(layout, mixture)?;
    let mut circuit = build_prior_ansatz(layout)?;
    circuit.append(&build_likelihood_ansatz(layout)?)?;
    let params = ParameterSet {
        gamma: vec![0.0; layout.gamma_slots()],
        theta: theta.to_vec(),
        gamma_frozen: false,
        theta_frozen: true,
    };
    let config = TrainConfig {
        mode: Mode::LearnGamma,
        ..config.clone()
    };
    let report = train(&circuit, &params, &Objective::Marginal(mixture_target(mixture)?), &config)?;
    Ok(Run { circuit, report })
}

fn check_mixture_width(layout: &AnsatzLayout, mixture: &MixtureSpec) -> Result<()> {
    if mixture.num_qubits != layout.n {
        return Err(BqcError::Config(format!(
            "mixture is over {} qubits but layout has n = {}",
            mixture.num_qubits, layout.n
        )));
    }
    Ok(())
}
