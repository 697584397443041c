//! Dense state-vector simulation.
//!
//! Basis indices are big-endian: qubit 0 is the most significant bit, so in an
//! `N`-qubit register qubit `q` lives at bit position `N - 1 - q`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BqcError, Result};
use crate::probability::DiscreteDistribution;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

const UNITARY_TOL: f64 = 1e-10;

/// A 2x2 complex matrix acting on a single qubit, rows then columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[Complex64; 2]; 2]);

impl Unitary2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self(m)
    }

    fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self([
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)],
            [Complex64::new(c, 0.0), Complex64::new(d, 0.0)],
        ])
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    /// `exp(-i θ Y / 2)`: maps |0⟩ to cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::real(c, -s, s, c)
    }

    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ])
    }

    pub fn rz(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([
            [Complex64::new(c, -s), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(c, s)],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(out)
    }

    /// True when `U†U` equals the identity within `tol` per entry.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().mul(self);
        let id = Self::identity();
        (0..2).all(|r| (0..2).all(|c| (p.0[r][c] - id.0[r][c]).norm() <= tol))
    }
}

/// One control of a controlled gate: the qubit and the bit value it requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, on: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, on: false }
    }
}

/// Dense amplitude vector of a pure `num_qubits`-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state |0…0⟩.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(BqcError::Size(num_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// and the vector must be normalized within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(BqcError::Validation(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(BqcError::Size(num_qubits));
        }
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(BqcError::Validation(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    /// The computational basis state with the given index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(num_qubits)?;
        if index >= state.dim() {
            return Err(BqcError::Validation(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(BqcError::Index {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, gate: &Unitary2, qubit: usize) -> Result<()> {
        self.apply_controlled(gate, &[], qubit)
    }

    /// Applies `gate` to `target` on the subspace where every control holds
    /// its required bit. Amplitudes outside that subspace are not touched.
    pub fn apply_controlled(
        &mut self,
        gate: &Unitary2,
        controls: &[Control],
        target: usize,
    ) -> Result<()> {
        if !gate.is_unitary(UNITARY_TOL) {
            return Err(BqcError::Validation("gate matrix is not unitary".into()));
        }
        self.check_qubit(target)?;
        let mut fixed = vec![self.bit(target)];
        let mut value = 0usize;
        for c in controls {
            self.check_qubit(c.qubit)?;
            let bit = self.bit(c.qubit);
            if fixed.contains(&bit) {
                return Err(BqcError::Validation(format!(
                    "qubit {} appears more than once among controls and target",
                    c.qubit
                )));
            }
            fixed.push(bit);
            if c.on {
                value |= bit;
            }
        }
        let mask: usize = fixed.iter().sum();
        let count = 1usize << (self.num_qubits - fixed.len());
        let tbit = self.bit(target);
        let amps = &mut self.amplitudes;
        let [[m00, m01], [m10, m11]] = gate.0;
        let real = gate.0.iter().flatten().all(|z| z.im == 0.0);
        // walk every index with zeros at the fixed bits in increasing order
        let mut free = 0usize;
        for _ in 0..count {
            let i0 = free | value;
            let i1 = i0 | tbit;
            let (a0, a1) = (amps[i0], amps[i1]);
            if real {
                amps[i0] = a0 * m00.re + a1 * m01.re;
                amps[i1] = a0 * m10.re + a1 * m11.re;
            } else {
                amps[i0] = m00 * a0 + m01 * a1;
                amps[i1] = m10 * a0 + m11 * a1;
            }
            free = ((free | mask) + 1) & !mask;
        }
        Ok(())
    }

    /// Born-rule outcome probabilities `|α_i|²`.
    pub fn probabilities(&self) -> DiscreteDistribution {
        DiscreteDistribution::from_raw(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Draws `shots` i.i.d. measurement outcomes in the computational basis.
    ///
    /// The generator is ChaCha8 seeded with `seed`; each shot consumes one
    /// uniform `f64` which is located in the cumulative distribution.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<ShotResult> {
        sample_distribution(&self.probabilities(), shots, seed)
    }
}

/// Histogram of finite-shot measurement outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    pub counts: BTreeMap<usize, u64>,
    pub total_shots: u64,
}

impl ShotResult {
    /// Empirical frequencies over a support of `size` outcomes.
    pub fn frequencies(&self, size: usize) -> DiscreteDistribution {
        let mut probs = vec![0.0; size];
        for (&idx, &n) in &self.counts {
            probs[idx] = n as f64 / self.total_shots as f64;
        }
        DiscreteDistribution::from_raw(probs)
    }
}

/// Mixes a base seed with a stream number (splitmix64 finalizer) so that
/// independent sampling calls get decorrelated, reproducible seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples outcome indices from an arbitrary distribution; see [`StateVector::sample`].
pub fn sample_distribution(
    dist: &DiscreteDistribution,
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(BqcError::Validation("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cdf.push(acc);
    }
    let last_nonzero = dist.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(ShotResult {
        counts,
        total_shots: shots,
    })
}
