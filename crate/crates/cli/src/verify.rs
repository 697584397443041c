//! Fast self-check of simulator invariants.

use std::f64::consts::PI;
use std::io::Write;

use bqc::circuits::{decompose, Circuit, GateSpec, ParameterSet, Slot};
use bqc::datasets::{bas_patterns, BasGrid};
use bqc::loss::{gradient_fd, gradient_shift, kernel_matrix, KernelSpec, Measurement, Objective};
use bqc::probability::{DiscreteDistribution, Joint, RegisterSplit};
use bqc::statevector::{derive_seed, Control, StateVector};
use bqc::Result;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

/// Deterministic uniform draws from the splitmix stream.
struct Draws {
    seed: u64,
    next: u64,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Self { seed, next: 0 }
    }

    fn unit(&mut self) -> f64 {
        self.next += 1;
        (derive_seed(self.seed, self.next) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn angle(&mut self) -> f64 {
        (2.0 * self.unit() - 1.0) * PI
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }

    fn state(&mut self, num_qubits: usize) -> StateVector {
        let amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(2.0 * self.unit() - 1.0, 2.0 * self.unit() - 1.0))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
            .expect("normalized by construction")
    }
}

fn phase_distance(a: &StateVector, b: &StateVector) -> f64 {
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

fn random_gate(d: &mut Draws, nq: usize) -> Result<GateSpec> {
    let mut qubits: Vec<usize> = (0..nq).collect();
    for i in (1..nq).rev() {
        qubits.swap(i, d.below(i + 1));
    }
    let angle = d.angle();
    match d.below(7) {
        0 => Ok(GateSpec::rx(qubits[0], angle)),
        1 => Ok(GateSpec::ry(qubits[0], angle)),
        2 => Ok(GateSpec::rz(qubits[0], angle)),
        3 => GateSpec::cnot(qubits[0], qubits[1]),
        4 => GateSpec::cry(qubits[0], qubits[1], angle),
        5 => GateSpec::toffoli(qubits[0], qubits[1], qubits[2]),
        _ => {
            let k = 1 + d.below(nq - 1);
            let controls = qubits[1..=k]
                .iter()
                .map(|&q| Control { qubit: q, on: d.unit() < 0.5 })
                .collect();
            GateSpec::multi_ctrl_ry(controls, qubits[0], angle)
        }
    }
}

fn check_norms(d: &mut Draws) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut c = Circuit::new(4, 0);
        for _ in 0..20 {
            c.push(random_gate(d, 4)?)?;
        }
        let mut s = d.state(4);
        c.apply_to(&mut s, &ParameterSet::default())?;
        worst = worst.max((s.norm_sqr() - 1.0).abs());
    }
    Ok((worst <= 1e-12, format!("max |norm - 1| = {worst:.1e}")))
}

/// Shift-rule gradient of a circuit with native controlled rotations against
/// finite differences of its decomposition, so that an error in either the
/// native gates or the shift rule shows up.
fn check_gradient(d: &mut Draws) -> Result<(bool, String)> {
    let mut c = Circuit::new(3, 0);
    c.push(GateSpec::ry(0, Slot::theta(0)))?;
    c.push(GateSpec::cry(0, 1, Slot::theta(1))?)?;
    c.push(GateSpec::multi_ctrl_ry(vec![Control::on(0), Control::off(1)], 2, Slot::theta(2))?)?;
    c.push(GateSpec::cnot(2, 0)?)?;
    c.push(GateSpec::cry(2, 1, Slot::theta(3))?)?;
    c.push(GateSpec::rx(0, Slot::theta(4)))?;
    let decomposed = c.decomposed()?;
    let kernel = kernel_matrix(&KernelSpec::default(), 8)?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let params = ParameterSet {
            gamma: vec![],
            theta: (0..5).map(|_| d.angle()).collect(),
            gamma_frozen: true,
            theta_frozen: false,
        };
        let target =
            DiscreteDistribution::normalized((0..8).map(|_| d.unit() + 0.01).collect())?;
        let objective = Objective::Marginal(target);
        let shift = gradient_shift(&c, &params, &objective, &kernel, Measurement::Exact)?;
        let fd = gradient_fd(&decomposed, &params, &objective, &kernel, 1e-5)?;
        let gap = shift
            .gradient
            .unwrap()
            .iter()
            .zip(fd.gradient.unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    Ok((worst <= 1e-6, format!("max |shift - fd| = {worst:.1e}")))
}

fn check_decomposition(d: &mut Draws) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 60 {
        let gate = random_gate(d, 4)?;
        let Ok(parts) = decompose(&gate) else {
            continue;
        };
        let mut native = Circuit::new(4, 0);
        native.push(gate)?;
        let mut split = Circuit::new(4, 0);
        for g in parts {
            split.push(g)?;
        }
        let input = d.state(4);
        let (mut a, mut b) = (input.clone(), input);
        native.apply_to(&mut a, &ParameterSet::default())?;
        split.apply_to(&mut b, &ParameterSet::default())?;
        worst = worst.max(phase_distance(&a, &b));
        checked += 1;
    }
    Ok((worst <= 1e-10, format!("{checked} gates, max deviation {worst:.1e}")))
}

fn check_bas_counts() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, c) in [(2, 2), (2, 3), (3, 3), (4, 4)] {
        let grid = BasGrid::new(r, c)?;
        let patterns = bas_patterns(&grid)?;
        let expected = (1usize << r) + (1usize << c) - 2;
        ok &= patterns.len() == expected && patterns.iter().all(|&p| grid.is_pattern(p));
        parts.push(format!("{r}x{c}={}", patterns.len()));
    }
    Ok((ok, parts.join(" ")))
}

fn check_probability_laws(d: &mut Draws) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let nq = 2 + d.below(3);
        let m = 1 + d.below(nq - 1);
        let split = RegisterSplit::new(nq - m, m);
        let joint = Joint::from_state(&d.state(nq), split)?;
        let prior = joint.prior();
        let marginal = joint.data_marginal();
        worst = worst.max((joint.distribution().total() - 1.0).abs());
        for l in 0..split.latent_dim() {
            let lik = joint.likelihood(l)?;
            for x in 0..split.data_dim() {
                let post = joint.posterior(x)?;
                let chain = lik.probs()[x] * prior.probs()[l];
                worst = worst.max((chain - joint.get(x, l)).abs());
                worst = worst.max((post.probs()[l] * marginal.probs()[x] - chain).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.1e}")))
}

pub fn cmd_verify<W: Write>(out: &mut W) -> CliResult<()> {
    let mut d = Draws::new(2024);
    let checks: Vec<(&str, Result<(bool, String)>)> = vec![
        ("state norms", check_norms(&mut d)),
        ("gradient agreement", check_gradient(&mut d)),
        ("decomposition equivalence", check_decomposition(&mut d)),
        ("BAS counts", check_bas_counts()),
        ("probability laws", check_probability_laws(&mut d)),
    ];
    let mut failed = 0;
    for (name, result) in checks {
        let (pass, detail) = result.unwrap_or_else(|e| (false, e.to_string()));
        if !pass {
            failed += 1;
        }
        writeln!(out, "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" })
            .map_err(|e| CliError::io("<stdout>", e))?;
    }
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}
