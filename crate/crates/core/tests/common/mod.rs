#![allow(dead_code)]

use bqc::circuits::{AnsatzLayout, ControlStyle};
use bqc::probability::DiscreteDistribution;
use bqc::statevector::StateVector;
use num_complex::Complex64;
use rand::Rng;

pub fn random_state<R: Rng>(rng: &mut R, num_qubits: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << num_qubits)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn random_distribution<R: Rng>(rng: &mut R, size: usize) -> DiscreteDistribution {
    DiscreteDistribution::normalized((0..size).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
}

/// Largest amplitude deviation after removing a common phase.
pub fn phase_distance(a: &StateVector, b: &StateVector) -> f64 {
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

pub fn bas2x2_layout(style: ControlStyle) -> AnsatzLayout {
    AnsatzLayout {
        n: 4,
        m: 3,
        num_latents: 6,
        prior_layers: 1,
        likelihood_layers: 2,
        control_style: style,
    }
}

pub fn bas3x3_layout() -> AnsatzLayout {
    AnsatzLayout {
        n: 9,
        m: 4,
        num_latents: 14,
        prior_layers: 1,
        likelihood_layers: 1,
        control_style: ControlStyle::PerLatentState,
    }
}

pub fn prior_layout() -> AnsatzLayout {
    AnsatzLayout {
        n: 7,
        m: 1,
        num_latents: 2,
        prior_layers: 1,
        likelihood_layers: 4,
        control_style: ControlStyle::PerLatentState,
    }
}
