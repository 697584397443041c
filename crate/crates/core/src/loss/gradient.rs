use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;

use super::{dot, Kernel, LossValue, Objective};
use crate::circuits::{Circuit, GateKind, ParamVector, ParameterSet};
use crate::error::{BqcError, Result};
use crate::probability::Joint;
use crate::statevector::{derive_seed, sample_distribution, StateVector};

/// How output distributions are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurement {
    /// Probabilities read directly from the amplitudes.
    Exact,
    /// Empirical frequencies of `shots` samples. Every circuit evaluation
    /// draws fresh samples from a generator seeded by `seed` and an
    /// evaluation-specific stream number.
    Shots { shots: u64, seed: u64 },
}

impl Measurement {
    fn joint(&self, state: &StateVector, circuit: &Circuit, stream: u64) -> Result<Joint> {
        let dist = match *self {
            Measurement::Exact => state.probabilities(),
            Measurement::Shots { shots, seed } => {
                sample_distribution(&state.probabilities(), shots, derive_seed(seed, stream))?
                    .frequencies(state.dim())
            }
        };
        Joint::from_distribution(dist, circuit.split())
    }
}

/// Parameter-shift formula used for one gate occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    /// `(f(θ+π/2) - f(θ-π/2)) / 2`, exact when the rotation's generator has
    /// eigenvalues ±1/2 on everything the measurement can distinguish.
    TwoTerm,
    /// Four evaluations at ±π/2 and ±3π/2, exact for controlled rotations
    /// whose generator has eigenvalues {-1/2, 0, 1/2}.
    FourTerm,
}

const FOUR_TERM_NEAR: f64 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
const FOUR_TERM_FAR: f64 = (SQRT_2 - 1.0) / (4.0 * SQRT_2);

impl ShiftRule {
    /// Chooses the rule for the rotation at `gate_index`.
    ///
    /// A controlled rotation behaves like a plain rotation inside each
    /// computational-basis branch of its controls, so the two-term rule is
    /// exact as long as no later gate rotates a control qubit out of the
    /// computational basis. Later X/CNOT/Toffoli (basis permutations) and RZ
    /// (diagonal) on a control are harmless.
    pub fn for_gate(circuit: &Circuit, gate_index: usize) -> Self {
        let gate = &circuit.gates()[gate_index];
        if gate.controls().is_empty() {
            return ShiftRule::TwoTerm;
        }
        let mixes = circuit.gates()[gate_index + 1..].iter().any(|later| {
            matches!(
                later.kind(),
                GateKind::Rx | GateKind::Ry | GateKind::Cry | GateKind::MultiCtrlRy
            ) && gate.controls().iter().any(|c| c.qubit == later.target())
        });
        if mixes {
            ShiftRule::FourTerm
        } else {
            ShiftRule::TwoTerm
        }
    }

    /// `(shift, coefficient)` pairs; the derivative of any expectation is
    /// `Σ coefficient · f(θ + shift)`.
    pub fn terms(self) -> &'static [(f64, f64)] {
        const TWO: [(f64, f64); 2] = [(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)];
        const FOUR: [(f64, f64); 4] = [
            (FRAC_PI_2, FOUR_TERM_NEAR),
            (-FRAC_PI_2, -FOUR_TERM_NEAR),
            (3.0 * FRAC_PI_2, -FOUR_TERM_FAR),
            (-3.0 * FRAC_PI_2, FOUR_TERM_FAR),
        ];
        match self {
            ShiftRule::TwoTerm => &TWO,
            ShiftRule::FourTerm => &FOUR,
        }
    }
}

/// The single unfrozen parameter vector.
pub fn trainable_vector(params: &ParameterSet) -> Result<ParamVector> {
    match (params.gamma_frozen, params.theta_frozen) {
        (true, false) => Ok(ParamVector::Theta),
        (false, true) => Ok(ParamVector::Gamma),
        _ => Err(BqcError::Config(
            "exactly one of gamma/theta must be trainable".into(),
        )),
    }
}

fn check_problem(circuit: &Circuit, objective: &Objective, kernel: &Kernel) -> Result<()> {
    objective.check(circuit.split())?;
    if kernel.size() != circuit.split().data_dim() {
        return Err(BqcError::Validation(format!(
            "kernel size {} does not match data register size {}",
            kernel.size(),
            circuit.split().data_dim()
        )));
    }
    Ok(())
}

/// Loss of the circuit output without gradients.
pub fn loss_value(
    circuit: &Circuit,
    params: &ParameterSet,
    objective: &Objective,
    kernel: &Kernel,
    measurement: Measurement,
) -> Result<f64> {
    check_problem(circuit, objective, kernel)?;
    let state = circuit.run(params)?;
    Ok(objective.value(&measurement.joint(&state, circuit, 0)?, kernel))
}

/// Loss and parameter-shift gradient over the trainable vector.
///
/// For each occurrence of a slot the circuit is re-run from a cached prefix
/// state with that gate's angle shifted. The derivative of the loss is the
/// shifted change in the joint distribution contracted with `∂L/∂P(x, λ)`;
/// for the marginal objective this is `(p⁺ - p⁻)ᵀ K (p - f)`.
pub fn gradient_shift(
    circuit: &Circuit,
    params: &ParameterSet,
    objective: &Objective,
    kernel: &Kernel,
    measurement: Measurement,
) -> Result<LossValue> {
    check_problem(circuit, objective, kernel)?;
    let which = trainable_vector(params)?;
    let angles = circuit.resolve_angles(params)?;
    let num_slots = params.vector(which).len();
    let occurrences: Vec<Vec<(usize, f64)>> = (0..num_slots)
        .map(|k| circuit.occurrences(which, k))
        .collect();

    let mut needed = vec![false; circuit.len()];
    for &(g, _) in occurrences.iter().flatten() {
        needed[g] = true;
    }
    let mut prefixes: Vec<Option<StateVector>> = vec![None; circuit.len()];
    let mut state = StateVector::zero(circuit.num_qubits())?;
    for (g, gate) in circuit.gates().iter().enumerate() {
        if needed[g] {
            prefixes[g] = Some(state.clone());
        }
        gate.apply(&mut state, angles[g])?;
    }

    let (value, weights) = objective.value_and_weights(&measurement.joint(&state, circuit, 0)?, kernel);

    let gradient = occurrences
        .par_iter()
        .enumerate()
        .map(|(k, occ)| {
            let mut grad = 0.0;
            for (o, &(g, scale)) in occ.iter().enumerate() {
                let prefix = prefixes[g].as_ref().expect("prefix cached for every occurrence");
                let rule = ShiftRule::for_gate(circuit, g);
                let mut d = 0.0;
                for (t, &(shift, coeff)) in rule.terms().iter().enumerate() {
                    let mut s = prefix.clone();
                    circuit.gates()[g].apply(&mut s, angles[g] + shift)?;
                    circuit.apply_range(&mut s, &angles, g + 1..circuit.len())?;
                    let stream = 1 + (((k as u64) << 32) | ((o as u64) << 4) | t as u64);
                    let joint = measurement.joint(&s, circuit, stream)?;
                    d += coeff * dot(joint.distribution().probs(), &weights);
                }
                // weights hold half of ∂L/∂P, hence the factor 2
                grad += 2.0 * scale * d;
            }
            Ok(grad)
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(LossValue {
        value,
        gradient: Some(gradient),
    })
}

/// Central finite differences `(L(θ_k + h) - L(θ_k - h)) / 2h` on exact
/// probabilities.
pub fn gradient_fd(
    circuit: &Circuit,
    params: &ParameterSet,
    objective: &Objective,
    kernel: &Kernel,
    h: f64,
) -> Result<LossValue> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(BqcError::Config(format!("finite-difference step {h} outside [1e-7, 1e-3]")));
    }
    let which = trainable_vector(params)?;
    let value = loss_value(circuit, params, objective, kernel, Measurement::Exact)?;
    let gradient = (0..params.vector(which).len())
        .into_par_iter()
        .map(|k| {
            let mut p = params.clone();
            let base = p.vector(which)[k];
            p.vector_mut(which)[k] = base + h;
            let plus = loss_value(circuit, &p, objective, kernel, Measurement::Exact)?;
            p.vector_mut(which)[k] = base - h;
            let minus = loss_value(circuit, &p, objective, kernel, Measurement::Exact)?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LossValue {
        value,
        gradient: Some(gradient),
    })
}
