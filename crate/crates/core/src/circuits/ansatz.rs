use serde::{Deserialize, Serialize};

use super::{Circuit, GateSpec, Slot};
use crate::error::{BqcError, Result};
use crate::probability::{DiscreteDistribution, RegisterSplit};
use crate::statevector::Control;

/// How likelihood blocks attach their controls to the ancilla register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ControlStyle {
    /// One multi-controlled RY per (latent state, data qubit), conditioned on
    /// the full ancilla register equal to the latent's binary encoding.
    #[default]
    PerLatentState,
    /// One CRY per (ancilla, data) pair plus one Toffoli per layer.
    PerAncillaQubit,
}

/// Register sizes and block counts of a Bayesian quantum circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzLayout {
    /// Data qubits.
    pub n: usize,
    /// Ancilla qubits.
    pub m: usize,
    pub num_latents: usize,
    pub prior_layers: usize,
    pub likelihood_layers: usize,
    #[serde(default)]
    pub control_style: ControlStyle,
}

impl AnsatzLayout {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(BqcError::Validation("layout needs at least one data qubit".into()));
        }
        if self.num_latents == 0 || self.prior_layers == 0 || self.likelihood_layers == 0 {
            return Err(BqcError::Validation(
                "num_latents, prior_layers and likelihood_layers must be at least 1".into(),
            ));
        }
        if self.m >= usize::BITS as usize || self.num_latents > 1 << self.m {
            return Err(BqcError::Capacity {
                latents: self.num_latents,
                ancillas: self.m,
            });
        }
        Ok(())
    }

    pub fn split(&self) -> RegisterSplit {
        RegisterSplit::new(self.n, self.m)
    }

    /// θ slots emitted by [`build_likelihood_ansatz`].
    pub fn theta_slots(&self) -> usize {
        match self.control_style {
            ControlStyle::PerLatentState => self.likelihood_layers * self.num_latents * self.n,
            ControlStyle::PerAncillaQubit => self.likelihood_layers * self.m * self.n,
        }
    }

    /// γ slots emitted by [`build_prior_ansatz`].
    pub fn gamma_slots(&self) -> usize {
        self.prior_layers * self.m
    }
}

/// Controls requiring the ancilla register (qubits `n..n+m`) to hold `value`.
fn latent_controls(n: usize, m: usize, value: usize) -> Vec<Control> {
    (0..m)
        .map(|a| Control {
            qubit: n + a,
            on: (value >> (m - 1 - a)) & 1 == 1,
        })
        .collect()
}

/// Per layer: an RY(γ) on every ancilla, then a CNOT chain down the ancillas.
pub fn build_prior_ansatz(layout: &AnsatzLayout) -> Result<Circuit> {
    layout.validate()?;
    let (n, m) = (layout.n, layout.m);
    let mut c = Circuit::new(n, m);
    for layer in 0..layout.prior_layers {
        for a in 0..m {
            c.push(GateSpec::ry(n + a, Slot::gamma(layer * m + a)))?;
        }
        for a in 1..m {
            c.push(GateSpec::cnot(n + a - 1, n + a)?)?;
        }
    }
    Ok(c)
}

/// Prepares `Σ_i √prior_i |i⟩` on the ancilla register with a binary tree of
/// uniformly controlled RY rotations. Latent indices `>= prior.len()` get
/// amplitude exactly zero.
pub fn build_prior_exact(prior: &DiscreteDistribution, n: usize, m: usize) -> Result<Circuit> {
    if m >= usize::BITS as usize || prior.len() > 1 << m {
        return Err(BqcError::Capacity {
            latents: prior.len(),
            ancillas: m,
        });
    }
    let mut probs = prior.probs().to_vec();
    probs.resize(1 << m, 0.0);

    let mut c = Circuit::new(n, m);
    for level in 0..m {
        let span = 1 << (m - level);
        for prefix in 0..(1usize << level) {
            let block = &probs[prefix * span..(prefix + 1) * span];
            let (left, right) = block.split_at(span / 2);
            let (l, r): (f64, f64) = (left.iter().sum(), right.iter().sum());
            if r == 0.0 {
                continue;
            }
            let angle = 2.0 * r.sqrt().atan2(l.sqrt());
            let target = n + level;
            let gate = if level == 0 {
                GateSpec::ry(target, angle)
            } else {
                let controls: Vec<Control> = (0..level)
                    .map(|a| Control {
                        qubit: n + a,
                        on: (prefix >> (level - 1 - a)) & 1 == 1,
                    })
                    .collect();
                GateSpec::multi_ctrl_ry(controls, target, angle)?
            };
            c.push(gate)?;
        }
    }
    Ok(c)
}

/// Ancilla-controlled rotation blocks acting on the data register.
///
/// Every controlled gate has its controls on ancillas and its target on a
/// data qubit. For [`ControlStyle::PerAncillaQubit`] the Toffoli of layer `l`
/// uses ancillas `(l mod m, (l+1) mod m)` as controls and data qubit
/// `l mod n` as target; it is omitted when `m < 2`.
pub fn build_likelihood_ansatz(layout: &AnsatzLayout) -> Result<Circuit> {
    layout.validate()?;
    let (n, m, k) = (layout.n, layout.m, layout.num_latents);
    let mut c = Circuit::new(n, m);
    match layout.control_style {
        ControlStyle::PerLatentState => {
            for layer in 0..layout.likelihood_layers {
                for latent in 0..k {
                    for q in 0..n {
                        let slot = Slot::theta((layer * k + latent) * n + q);
                        let gate = if m == 0 {
                            GateSpec::ry(q, slot)
                        } else {
                            GateSpec::multi_ctrl_ry(latent_controls(n, m, latent), q, slot)?
                        };
                        c.push(gate)?;
                    }
                }
            }
        }
        ControlStyle::PerAncillaQubit => {
            for layer in 0..layout.likelihood_layers {
                for a in 0..m {
                    for q in 0..n {
                        c.push(GateSpec::cry(n + a, q, Slot::theta((layer * m + a) * n + q))?)?;
                    }
                }
                if m >= 2 {
                    let (a0, a1) = (layer % m, (layer + 1) % m);
                    c.push(GateSpec::toffoli(n + a0, n + a1, layer % n)?)?;
                }
            }
        }
    }
    Ok(c)
}

/// Ancilla-free baseline: per layer an RY and an RZ on every qubit, then a
/// CNOT chain.
pub fn build_qcbm_baseline(n: usize, layers: usize) -> Result<Circuit> {
    if n == 0 || layers == 0 {
        return Err(BqcError::Validation("baseline needs n >= 1 and layers >= 1".into()));
    }
    let mut c = Circuit::new(n, 0);
    for layer in 0..layers {
        for q in 0..n {
            c.push(GateSpec::ry(q, Slot::theta(layer * 2 * n + 2 * q)))?;
            c.push(GateSpec::rz(q, Slot::theta(layer * 2 * n + 2 * q + 1)))?;
        }
        for q in 1..n {
            c.push(GateSpec::cnot(q - 1, q)?)?;
        }
    }
    Ok(c)
}
