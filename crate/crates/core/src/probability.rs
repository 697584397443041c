//! Prior, likelihood, joint and posterior distributions read off a simulated
//! state.
//!
//! Data qubits occupy register positions `0..n` and ancilla qubits
//! `n..n+m`. With qubit 0 as the most significant bit, the joint basis index
//! of data value `x` and latent value `λ` is `x · 2^m + λ`, so the joint
//! distribution is exactly the Born distribution of the state.

use serde::{Deserialize, Serialize};

use crate::error::{BqcError, Result};
use crate::statevector::StateVector;

/// Probabilities at or below this value are treated as zero when conditioning.
pub const CONDITIONING_THRESHOLD: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Normalized probability vector indexed by outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates nonnegativity and normalization (within `1e-9`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(BqcError::Validation("distribution has no outcomes".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
            return Err(BqcError::Validation(format!(
                "probability at index {i} is {p}, expected a nonnegative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(BqcError::Validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Scales nonnegative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(BqcError::Validation(
                "weights must be nonnegative with a positive sum".into(),
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Uniform distribution over the given outcome indices of a support of `size`.
    pub fn uniform_on(size: usize, support: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; size];
        for &i in support {
            if i >= size {
                return Err(BqcError::Validation(format!(
                    "support index {i} out of range for size {size}"
                )));
            }
            probs[i] = 1.0;
        }
        Self::normalized(probs)
    }

    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        Self::uniform_on(size, &[index])
    }

    // Values computed from normalized amplitudes; skips validation.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Half the L1 distance. Fails on support-size mismatch.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        self.check_same_support(other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Probability mass on outcomes where `other` is strictly positive.
    pub fn mass_on_support_of(&self, other: &Self) -> Result<f64> {
        self.check_same_support(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .filter(|(_, q)| **q > 0.0)
            .map(|(p, _)| p)
            .sum())
    }

    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            })
            .0
    }

    pub(crate) fn check_same_support(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(BqcError::Validation(format!(
                "support sizes differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// How the register divides into `n` data qubits followed by `m` ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSplit {
    pub n: usize,
    pub m: usize,
}

impl RegisterSplit {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    pub fn num_qubits(&self) -> usize {
        self.n + self.m
    }

    pub fn data_dim(&self) -> usize {
        1 << self.n
    }

    pub fn latent_dim(&self) -> usize {
        1 << self.m
    }

    pub fn joint_index(&self, x: usize, lambda: usize) -> usize {
        (x << self.m) | lambda
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.n == 0 {
            return Err(BqcError::Validation("register split needs n >= 1".into()));
        }
        if len != 1 << self.num_qubits() {
            return Err(BqcError::Validation(format!(
                "register split n={} m={} does not match a support of size {len}",
                self.n, self.m
            )));
        }
        Ok(())
    }
}

/// The joint distribution P(x, λ) laid out row-major as `[x][λ]`.
///
/// Marginals and conditionals are computed from any joint vector, so the same
/// code serves exact probabilities and empirical shot frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    split: RegisterSplit,
    dist: DiscreteDistribution,
}

impl Joint {
    pub fn from_state(state: &StateVector, split: RegisterSplit) -> Result<Self> {
        Self::from_distribution(state.probabilities(), split)
    }

    pub fn from_distribution(dist: DiscreteDistribution, split: RegisterSplit) -> Result<Self> {
        split.check_len(dist.len())?;
        Ok(Self { split, dist })
    }

    pub fn split(&self) -> RegisterSplit {
        self.split
    }

    pub fn distribution(&self) -> &DiscreteDistribution {
        &self.dist
    }

    pub fn get(&self, x: usize, lambda: usize) -> f64 {
        self.dist.probs[self.split.joint_index(x, lambda)]
    }

    pub fn prior(&self) -> DiscreteDistribution {
        let k = self.split.latent_dim();
        let mut probs = vec![0.0; k];
        for (idx, p) in self.dist.probs.iter().enumerate() {
            probs[idx & (k - 1)] += p;
        }
        DiscreteDistribution::from_raw(probs)
    }

    pub fn data_marginal(&self) -> DiscreteDistribution {
        let m = self.split.m;
        let mut probs = vec![0.0; self.split.data_dim()];
        for (idx, p) in self.dist.probs.iter().enumerate() {
            probs[idx >> m] += p;
        }
        DiscreteDistribution::from_raw(probs)
    }

    /// P(x | λ) for the given latent index.
    pub fn likelihood(&self, lambda: usize) -> Result<DiscreteDistribution> {
        self.likelihood_with_prior(lambda, self.prior().probs[lambda])
    }

    pub(crate) fn likelihood_with_prior(
        &self,
        lambda: usize,
        prior: f64,
    ) -> Result<DiscreteDistribution> {
        if lambda >= self.split.latent_dim() {
            return Err(BqcError::Index {
                index: lambda,
                num_qubits: self.split.m,
            });
        }
        if prior <= CONDITIONING_THRESHOLD {
            return Err(BqcError::Conditioning {
                index: lambda,
                probability: prior,
            });
        }
        Ok(DiscreteDistribution::from_raw(
            (0..self.split.data_dim())
                .map(|x| self.get(x, lambda) / prior)
                .collect(),
        ))
    }

    /// P(λ | x) for the given data outcome.
    pub fn posterior(&self, x: usize) -> Result<DiscreteDistribution> {
        if x >= self.split.data_dim() {
            return Err(BqcError::Index {
                index: x,
                num_qubits: self.split.n,
            });
        }
        let k = self.split.latent_dim();
        let row = &self.dist.probs[x * k..(x + 1) * k];
        let evidence: f64 = row.iter().sum();
        if evidence <= CONDITIONING_THRESHOLD {
            return Err(BqcError::Conditioning {
                index: x,
                probability: evidence,
            });
        }
        Ok(DiscreteDistribution::from_raw(
            row.iter().map(|p| p / evidence).collect(),
        ))
    }
}

pub fn joint(state: &StateVector, split: RegisterSplit) -> Result<DiscreteDistribution> {
    Ok(Joint::from_state(state, split)?.dist)
}

pub fn prior(state: &StateVector, split: RegisterSplit) -> Result<DiscreteDistribution> {
    if split.m == 0 {
        return Err(BqcError::NoAncilla);
    }
    Ok(Joint::from_state(state, split)?.prior())
}

pub fn likelihood(
    state: &StateVector,
    split: RegisterSplit,
    lambda_index: usize,
) -> Result<DiscreteDistribution> {
    Joint::from_state(state, split)?.likelihood(lambda_index)
}

pub fn posterior(
    state: &StateVector,
    split: RegisterSplit,
    x_index: usize,
) -> Result<DiscreteDistribution> {
    Joint::from_state(state, split)?.posterior(x_index)
}

pub fn data_marginal(state: &StateVector, split: RegisterSplit) -> Result<DiscreteDistribution> {
    Ok(Joint::from_state(state, split)?.data_marginal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)])
            .unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn from_probs(probs: &[f64]) -> StateVector {
        StateVector::from_amplitudes(
            probs
                .iter()
                .map(|p| Complex64::new(p.sqrt(), 0.0))
                .collect(),
        )
        .unwrap()
    }

    const S11: RegisterSplit = RegisterSplit { n: 1, m: 1 };

    #[test]
    fn joint_of_bell_and_zero() {
        assert!(close(joint(&bell(), S11).unwrap().probs(), &[0.5, 0.0, 0.0, 0.5]));
        let z = StateVector::zero(3).unwrap();
        let j = joint(&z, RegisterSplit::new(2, 1)).unwrap();
        assert_eq!(j.probs()[0], 1.0);
    }

    #[test]
    fn split_mismatch() {
        assert!(matches!(
            joint(&bell(), RegisterSplit::new(2, 1)),
            Err(BqcError::Validation(_))
        ));
        assert_eq!(
            prior(&StateVector::zero(2).unwrap(), RegisterSplit::new(2, 0)),
            Err(BqcError::NoAncilla)
        );
    }

    #[test]
    fn marginals() {
        assert!(close(prior(&bell(), S11).unwrap().probs(), &[0.5, 0.5]));
        assert!(close(data_marginal(&bell(), S11).unwrap().probs(), &[0.5, 0.5]));

        // |x⟩ ⊗ |0⟩_λ leaves the prior at λ = 0
        let s = from_probs(&[0.2, 0.0, 0.3, 0.0, 0.1, 0.0, 0.4, 0.0]);
        assert!(close(prior(&s, RegisterSplit::new(2, 1)).unwrap().probs(), &[1.0, 0.0]));

        let s = from_probs(&[0.1, 0.2, 0.3, 0.4]);
        let dm = data_marginal(&s, RegisterSplit::new(2, 0)).unwrap();
        assert_eq!(dm, s.probabilities());
    }

    #[test]
    fn conditionals() {
        assert!(close(likelihood(&bell(), S11, 1).unwrap().probs(), &[0.0, 1.0]));
        assert!(close(posterior(&bell(), S11, 0).unwrap().probs(), &[1.0, 0.0]));

        let uniform = from_probs(&[0.25; 4]);
        for i in 0..2 {
            assert!(close(likelihood(&uniform, S11, i).unwrap().probs(), &[0.5, 0.5]));
            assert!(close(posterior(&uniform, S11, i).unwrap().probs(), &[0.5, 0.5]));
        }
    }

    #[test]
    fn posterior_matches_hand_bayes() {
        // prior (0.7, 0.3); P(x|λ0) = (0.9, 0.1); P(x|λ1) = (0.2, 0.8)
        let (pr, l0, l1) = ([0.7, 0.3], [0.9, 0.1], [0.2, 0.8]);
        let probs: Vec<f64> = (0..2)
            .flat_map(|x| [pr[0] * l0[x], pr[1] * l1[x]])
            .collect();
        let s = from_probs(&probs);
        for x in 0..2 {
            let evidence = pr[0] * l0[x] + pr[1] * l1[x];
            let expect = [pr[0] * l0[x] / evidence, pr[1] * l1[x] / evidence];
            let got = posterior(&s, S11, x).unwrap();
            assert!(close(got.probs(), &expect), "{got:?} vs {expect:?}");
        }
    }

    #[test]
    fn zero_probability_conditioning() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            likelihood(&s, S11, 1),
            Err(BqcError::Conditioning { index: 1, .. })
        ));
        assert!(matches!(
            posterior(&s, S11, 1),
            Err(BqcError::Conditioning { index: 1, .. })
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        let u = DiscreteDistribution::uniform_on(4, &[1, 3]).unwrap();
        assert_eq!(u.probs(), &[0.0, 0.5, 0.0, 0.5]);
        let tv = u
            .total_variation(&DiscreteDistribution::point_mass(4, 1).unwrap())
            .unwrap();
        assert!((tv - 0.5).abs() < 1e-15);
    }
}
