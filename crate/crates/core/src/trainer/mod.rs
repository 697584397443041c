//! Gradient-based training of either the prior (γ) or likelihood (θ)
//! parameters of a circuit.

mod recipes;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuits::{
    build_likelihood_ansatz, build_prior_exact, AnsatzLayout, Circuit, ParamVector, ParameterSet,
};
use crate::error::{BqcError, Result};
use crate::loss::{gradient_shift, kernel_matrix, KernelSpec, Measurement, Objective};
use crate::probability::{DiscreteDistribution, Joint};
use crate::statevector::{derive_seed, sample_distribution};

pub use recipes::{fit_prior, learn_prior, train_bas, train_qcbm, BasObjective, PriorRun, Run};

/// Which parameter family is optimized; the other stays frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    #[default]
    LearnTheta,
    LearnGamma,
}

impl Mode {
    pub fn trainable(self) -> ParamVector {
        match self {
            Mode::LearnTheta => ParamVector::Theta,
            Mode::LearnGamma => ParamVector::Gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

/// Number of measurements per circuit evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    /// Read probabilities from the amplitudes.
    #[default]
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn measurement(self, seed: u64) -> Measurement {
        match self {
            Shots::Exact => Measurement::Exact,
            Shots::Finite(shots) => Measurement::Shots { shots, seed },
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("EXACT"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("EXACT"),
            Shots::Finite(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("shots must be at least 1")),
            Raw::Count(n) => Ok(Shots::Finite(n)),
            Raw::Tag(t) if t == "EXACT" => Ok(Shots::Exact),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!(
                "shots must be a positive integer or \"EXACT\", got \"{t}\""
            ))),
        }
    }
}

fn default_max_iters() -> usize {
    3000
}
fn default_tolerance() -> f64 {
    1e-5
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_init_scale() -> f64 {
    0.1
}

/// Optimization settings. Omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Stop once the loss is at or below this value.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub shots: Shots,
    /// Seeds initialization and, in shot mode, every sampling call.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub kernel: KernelSpec,
    /// Trainable angles start uniformly in `[-init_scale, init_scale]`.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(Mode::LearnTheta)
    }
}

impl TrainConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            max_iters: default_max_iters(),
            tolerance: default_tolerance(),
            learning_rate: default_learning_rate(),
            optimizer: OptimizerKind::Adam,
            shots: Shots::Exact,
            seed: 0,
            kernel: KernelSpec::default(),
            init_scale: default_init_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(BqcError::Config("max_iters must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(BqcError::Config("tolerance must be nonnegative".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(BqcError::Config("learning_rate must be positive".into()));
        }
        if !(self.init_scale >= 0.0) {
            return Err(BqcError::Config("init_scale must be nonnegative".into()));
        }
        self.kernel.validate()
    }
}

/// First-order update rule.
pub trait Optimizer {
    fn step(&mut self, params: &mut [f64], grad: &[f64]);
}

pub struct Sgd {
    pub learning_rate: f64,
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for (p, g) in params.iter_mut().zip(grad) {
            *p -= self.learning_rate * g;
        }
    }
}

/// Adam with bias-corrected moment estimates.
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

fn make_optimizer(config: &TrainConfig, n: usize) -> Box<dyn Optimizer> {
    match config.optimizer {
        OptimizerKind::Sgd => Box::new(Sgd {
            learning_rate: config.learning_rate,
        }),
        OptimizerKind::Adam => Box::new(Adam::new(n, config.learning_rate)),
    }
}

/// Finite-shot estimates of the evaluation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMetrics {
    pub shots: u64,
    pub valid_mass: f64,
    pub total_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Probability mass on the target's support.
    pub valid_mass: f64,
    /// Total variation between the data marginal and the target.
    pub total_variation: f64,
    /// P(λ); `[1.0]` for circuits without ancillas.
    pub prior: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub empirical: Option<EmpiricalMetrics>,
}

/// Scores the circuit's data marginal against `target`.
pub fn evaluate(
    circuit: &Circuit,
    params: &ParameterSet,
    target: &DiscreteDistribution,
    shots: Shots,
    seed: u64,
) -> Result<Metrics> {
    let state = circuit.run(params)?;
    let joint = Joint::from_state(&state, circuit.split())?;
    let marginal = joint.data_marginal();
    let empirical = match shots {
        Shots::Exact => None,
        Shots::Finite(n) => {
            let counts = sample_distribution(&marginal, n, seed)?;
            let freq = counts.frequencies(marginal.len());
            Some(EmpiricalMetrics {
                shots: n,
                valid_mass: freq.mass_on_support_of(target)?,
                total_variation: freq.total_variation(target)?,
            })
        }
    };
    Ok(Metrics {
        valid_mass: marginal.mass_on_support_of(target)?,
        total_variation: marginal.total_variation(target)?,
        prior: joint.prior().probs().to_vec(),
        empirical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_history: Vec<f64>,
    pub converged: bool,
    pub final_params: ParameterSet,
    pub final_data_marginal: DiscreteDistribution,
    pub final_prior: DiscreteDistribution,
    pub metrics: Metrics,
}

impl TrainReport {
    pub fn iterations(&self) -> usize {
        self.loss_history.len()
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().expect("history is never empty")
    }
}

/// The data distribution a trained circuit should reproduce: the target
/// itself, or the prior-weighted mixture of per-latent targets.
pub fn evaluation_target(objective: &Objective, prior: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    match objective {
        Objective::Marginal(t) => Ok(t.clone()),
        Objective::Conditional(targets) => {
            let mut probs = vec![0.0; targets[0].len()];
            for (t, w) in targets.iter().zip(prior.probs()) {
                for (acc, p) in probs.iter_mut().zip(t.probs()) {
                    *acc += w * p;
                }
            }
            DiscreteDistribution::normalized(probs)
        }
    }
}

/// Minimizes the MMD objective over the trainable parameter vector.
///
/// The trainable vector is re-initialized uniformly in
/// `[-init_scale, init_scale]` from `config.seed`; the frozen vector is left
/// untouched. Iterates until the loss reaches `config.tolerance` or
/// `config.max_iters` losses have been recorded. In shot mode iteration `t`
/// samples with seeds derived from `(config.seed, t + 1)`.
pub fn train(
    circuit: &Circuit,
    params: &ParameterSet,
    objective: &Objective,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    let which = config.mode.trainable();
    let frozen_ok = match config.mode {
        Mode::LearnTheta => params.gamma_frozen && !params.theta_frozen,
        Mode::LearnGamma => params.theta_frozen && !params.gamma_frozen,
    };
    if !frozen_ok {
        return Err(BqcError::Config(format!(
            "{:?} requires only {} to be unfrozen",
            config.mode,
            which.name()
        )));
    }
    let (g, t) = circuit.slot_counts();
    if params.gamma.len() != g || params.theta.len() != t {
        return Err(BqcError::Config(format!(
            "parameter lengths (gamma {}, theta {}) do not match circuit slots (gamma {g}, theta {t})",
            params.gamma.len(),
            params.theta.len()
        )));
    }
    objective.check(circuit.split())?;
    let kernel = kernel_matrix(&config.kernel, circuit.split().data_dim())?;

    let mut params = params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.init_scale;
    for v in params.vector_mut(which).iter_mut() {
        *v = if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 };
    }

    let mut optimizer = make_optimizer(config, params.vector(which).len());
    let mut history = Vec::new();
    let mut converged = false;
    for iter in 0..config.max_iters {
        let measurement = config.shots.measurement(derive_seed(config.seed, iter as u64 + 1));
        let lv = gradient_shift(circuit, &params, objective, &kernel, measurement)?;
        if !lv.value.is_finite() {
            return Err(BqcError::Numerical(format!("loss is {} at iteration {iter}", lv.value)));
        }
        history.push(lv.value);
        if lv.value <= config.tolerance {
            converged = true;
            break;
        }
        if iter + 1 == config.max_iters {
            break;
        }
        let grad = lv.gradient.expect("gradient_shift returns a gradient");
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(BqcError::Numerical(format!("non-finite gradient at iteration {iter}")));
        }
        optimizer.step(params.vector_mut(which), &grad);
        if params.vector(which).iter().any(|p| !p.is_finite()) {
            return Err(BqcError::Numerical(format!("parameters diverged at iteration {iter}")));
        }
    }

    let state = circuit.run(&params)?;
    let joint = Joint::from_state(&state, circuit.split())?;
    let final_prior = joint.prior();
    let target = evaluation_target(objective, &final_prior)?;
    let metrics = evaluate(circuit, &params, &target, Shots::Exact, config.seed)?;
    Ok(TrainReport {
        loss_history: history,
        converged,
        final_data_marginal: joint.data_marginal(),
        final_prior,
        final_params: params,
        metrics,
    })
}

/// Likelihood parameters fitted per latent component.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainResult {
    pub params: ParameterSet,
    /// TV distance between P(x | λ_i) and `component_targets[i]`.
    pub component_tv: Vec<f64>,
    pub report: TrainReport,
}

/// Fits θ so that P(x | λ_i) approximates `component_targets[i]`.
///
/// The ancillas are prepared in a uniform superposition of the first `K`
/// latent states and θ is trained on `Σ_i MMD(P(x | λ_i), target_i) / K`.
/// Since likelihood blocks never alter the ancilla register, conditioning on
/// λ_i here gives the same data distribution as clamping the ancillas to
/// |λ_i⟩, and all components are fitted in one pass.
pub fn pretrain_likelihood(
    layout: &AnsatzLayout,
    component_targets: &[DiscreteDistribution],
    config: &TrainConfig,
) -> Result<PretrainResult> {
    layout.validate()?;
    if component_targets.len() != layout.num_latents {
        return Err(BqcError::Config(format!(
            "{} component targets for {} latent states",
            component_targets.len(),
            layout.num_latents
        )));
    }
    let k = layout.num_latents;
    let uniform = DiscreteDistribution::new(vec![1.0 / k as f64; k])?;
    let mut circuit = build_prior_exact(&uniform, layout.n, layout.m)?;
    circuit.append(&build_likelihood_ansatz(layout)?)?;

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
    let objective = Objective::Conditional(component_targets.to_vec());
    let report = train(&circuit, &params, &objective, &config)?;

    let joint = Joint::from_state(&circuit.run(&report.final_params)?, circuit.split())?;
    let component_tv = component_targets
        .iter()
        .enumerate()
        .map(|(i, t)| joint.likelihood(i)?.total_variation(t))
        .collect::<Result<Vec<f64>>>()?;
    let mut params = report.final_params.clone();
    params.theta_frozen = true;
    params.gamma_frozen = false;
    Ok(PretrainResult {
        params,
        component_tv,
        report,
    })
}
