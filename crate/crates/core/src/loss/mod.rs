//! Squared maximum mean discrepancy between a circuit's output distribution
//! and a target, plus its gradients.
//!
//! The RKHS feature map is never materialized: for distributions `p` and `f`
//! over the same outcomes the loss is the quadratic form `(p - f)ᵀ K (p - f)`.

mod gradient;

pub use gradient::{gradient_fd, gradient_shift, loss_value, Measurement, ShiftRule};

use serde::{Deserialize, Serialize};

use crate::error::{BqcError, Result};
use crate::probability::{DiscreteDistribution, Joint, CONDITIONING_THRESHOLD};

/// Largest outcome domain a kernel matrix may be built for.
pub const MAX_KERNEL_DOMAIN: usize = 1 << 14;

/// Distance between outcome labels fed to the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelDistance {
    /// `(x - y)²` on integer outcome labels.
    #[default]
    Index,
    /// Number of differing bits, i.e. the squared Euclidean distance between
    /// the bitstrings.
    Hamming,
}

/// Equal-weight mixture of Gaussian kernels
/// `K(x, y) = mean_k exp(-D(x, y) / (2 σ_k²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// Kernel variances σ_k², in squared label units.
    pub bandwidths: Vec<f64>,
    #[serde(default)]
    pub distance: KernelDistance,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            bandwidths: vec![0.25, 4.0, 16.0],
            distance: KernelDistance::Index,
        }
    }
}

impl KernelSpec {
    pub fn new(bandwidths: Vec<f64>) -> Self {
        Self {
            bandwidths,
            distance: KernelDistance::Index,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidths.is_empty() {
            return Err(BqcError::Validation("kernel needs at least one bandwidth".into()));
        }
        if let Some(b) = self.bandwidths.iter().find(|b| !(**b > 0.0)) {
            return Err(BqcError::Validation(format!(
                "kernel bandwidth {b} must be positive"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: usize, y: usize) -> f64 {
        let d = match self.distance {
            KernelDistance::Index => {
                let diff = x as f64 - y as f64;
                diff * diff
            }
            KernelDistance::Hamming => (x ^ y).count_ones() as f64,
        };
        self.bandwidths
            .iter()
            .map(|s2| (-d / (2.0 * s2)).exp())
            .sum::<f64>()
            / self.bandwidths.len() as f64
    }
}

/// Dense symmetric kernel matrix over outcomes `0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    entries: Vec<f64>,
}

impl Kernel {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.size + y]
    }

    /// `K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.size)
            .map(|row| row.iter().zip(v).map(|(k, x)| k * x).sum())
            .collect()
    }

    /// `(p - f)ᵀ K (p - f)`.
    pub fn mmd(&self, p: &DiscreteDistribution, f: &DiscreteDistribution) -> Result<f64> {
        p.check_same_support(f)?;
        if p.len() != self.size {
            return Err(BqcError::Validation(format!(
                "distribution support {} does not match kernel size {}",
                p.len(),
                self.size
            )));
        }
        let d: Vec<f64> = p.probs().iter().zip(f.probs()).map(|(a, b)| a - b).collect();
        Ok(dot(&d, &self.apply(&d)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Precomputes `K[x][y]` for all outcome pairs.
pub fn kernel_matrix(spec: &KernelSpec, domain_size: usize) -> Result<Kernel> {
    spec.validate()?;
    if domain_size == 0 || domain_size > MAX_KERNEL_DOMAIN {
        return Err(BqcError::Validation(format!(
            "kernel domain {domain_size} outside 1..={MAX_KERNEL_DOMAIN}"
        )));
    }
    let mut entries = vec![0.0; domain_size * domain_size];
    for x in 0..domain_size {
        entries[x * domain_size + x] = 1.0;
        for y in 0..x {
            let k = spec.eval(x, y);
            entries[x * domain_size + y] = k;
            entries[y * domain_size + x] = k;
        }
    }
    Ok(Kernel {
        size: domain_size,
        entries,
    })
}

/// Loss value with an optional gradient over the trainable parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
}

/// Squared MMD between two distributions under `spec`.
pub fn mmd(p: &DiscreteDistribution, f: &DiscreteDistribution, spec: &KernelSpec) -> Result<LossValue> {
    p.check_same_support(f)?;
    let kernel = kernel_matrix(spec, p.len())?;
    Ok(LossValue {
        value: kernel.mmd(p, f)?,
        gradient: None,
    })
}

/// What the circuit output is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// MMD between the data-register marginal and one target.
    Marginal(DiscreteDistribution),
    /// `Σ_i P(λ_i) · MMD(P(x | λ_i), target_i)` with one target per latent
    /// index. Latents with (near) zero prior mass contribute nothing.
    Conditional(Vec<DiscreteDistribution>),
}

impl Objective {
    pub fn check(&self, joint_split: crate::probability::RegisterSplit) -> Result<()> {
        let dim = joint_split.data_dim();
        let targets: &[DiscreteDistribution] = match self {
            Objective::Marginal(t) => std::slice::from_ref(t),
            Objective::Conditional(ts) => {
                if ts.is_empty() || ts.len() > joint_split.latent_dim() {
                    return Err(BqcError::Config(format!(
                        "conditional objective has {} targets for {} latent states",
                        ts.len(),
                        joint_split.latent_dim()
                    )));
                }
                ts
            }
        };
        if let Some(t) = targets.iter().find(|t| t.len() != dim) {
            return Err(BqcError::Validation(format!(
                "target support {} does not match data register size {dim}",
                t.len()
            )));
        }
        Ok(())
    }

    /// Loss value and half its gradient with respect to each joint
    /// probability `P(x, λ)`, laid out like the joint.
    pub(crate) fn value_and_weights(&self, joint: &Joint, kernel: &Kernel) -> (f64, Vec<f64>) {
        let split = joint.split();
        let k = split.latent_dim();
        let mut weights = vec![0.0; joint.distribution().len()];
        match self {
            Objective::Marginal(target) => {
                let p = joint.data_marginal();
                let d: Vec<f64> = p.probs().iter().zip(target.probs()).map(|(a, b)| a - b).collect();
                let kd = kernel.apply(&d);
                for (idx, w) in weights.iter_mut().enumerate() {
                    *w = kd[idx / k];
                }
                (dot(&d, &kd), weights)
            }
            Objective::Conditional(targets) => {
                let prior = joint.prior();
                let mut value = 0.0;
                for (lambda, target) in targets.iter().enumerate() {
                    let pi = prior.probs()[lambda];
                    let Ok(cond) = joint.likelihood_with_prior(lambda, pi) else {
                        continue;
                    };
                    debug_assert!(pi > CONDITIONING_THRESHOLD);
                    let d: Vec<f64> =
                        cond.probs().iter().zip(target.probs()).map(|(a, b)| a - b).collect();
                    let kd = kernel.apply(&d);
                    value += pi * dot(&d, &kd);
                    // d/dJ[x,λ] of π·(c - t)ᵀK(c - t) with c = J[·,λ]/π, halved.
                    // The offset is (tᵀKt - cᵀKc)/2 rewritten in terms of Kd.
                    let offset = -dot(target.probs(), &kd) - 0.5 * dot(&d, &kd);
                    for (x, kdx) in kd.iter().enumerate() {
                        weights[split.joint_index(x, lambda)] = kdx + offset;
                    }
                }
                (value, weights)
            }
        }
    }

    pub fn value(&self, joint: &Joint, kernel: &Kernel) -> f64 {
        self.value_and_weights(joint, kernel).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::RegisterSplit;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn kernel_entries() {
        let k = kernel_matrix(&KernelSpec::default(), 16).unwrap();
        for x in 0..16 {
            assert_eq!(k.get(x, x), 1.0);
            for y in 0..16 {
                assert_eq!(k.get(x, y), k.get(y, x));
            }
        }
        let k1 = kernel_matrix(&KernelSpec::new(vec![1.0]), 4).unwrap();
        assert!((k1.get(0, 1) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k1.get(1, 0) - 0.6065306597126334).abs() < 1e-15);

        let flat = kernel_matrix(&KernelSpec::new(vec![1e300]), 8).unwrap();
        assert!(flat.entries.iter().all(|&e| (e - 1.0).abs() < 1e-12));

        let ham = KernelSpec {
            bandwidths: vec![0.5],
            distance: KernelDistance::Hamming,
        };
        assert!((ham.eval(0b0110, 0b0011) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_validation() {
        assert!(kernel_matrix(&KernelSpec::new(vec![]), 4).is_err());
        assert!(kernel_matrix(&KernelSpec::new(vec![1.0, -1.0]), 4).is_err());
        assert!(kernel_matrix(&KernelSpec::new(vec![1.0]), MAX_KERNEL_DOMAIN + 1).is_err());
    }

    #[test]
    fn mmd_examples() {
        let p = dist(&[0.1, 0.2, 0.3, 0.4]);
        assert!(mmd(&p, &p, &KernelSpec::default()).unwrap().value.abs() < 1e-12);

        let v = mmd(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), &KernelSpec::new(vec![1.0]))
            .unwrap()
            .value;
        assert!((v - 2.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((v - 0.7869).abs() < 1e-4);

        let h = dist(&[0.5, 0.5]);
        assert!(mmd(&h, &h, &KernelSpec::new(vec![2.0])).unwrap().value.abs() < 1e-12);

        assert!(matches!(
            mmd(&dist(&[1.0]), &dist(&[0.5, 0.5]), &KernelSpec::default()),
            Err(BqcError::Validation(_))
        ));
    }

    #[test]
    fn conditional_objective_sums_weighted_branches() {
        // n = 1, m = 1: P(λ) = (0.25, 0.75), P(x|λ0) = (1, 0), P(x|λ1) = (0.5, 0.5)
        let joint = Joint::from_distribution(
            dist(&[0.25, 0.375, 0.0, 0.375]),
            RegisterSplit::new(1, 1),
        )
        .unwrap();
        let spec = KernelSpec::new(vec![1.0]);
        let kernel = kernel_matrix(&spec, 2).unwrap();
        let t0 = dist(&[0.0, 1.0]);
        let t1 = dist(&[0.5, 0.5]);
        let obj = Objective::Conditional(vec![t0.clone(), t1]);
        let expect = 0.25 * mmd(&dist(&[1.0, 0.0]), &t0, &spec).unwrap().value;
        assert!((obj.value(&joint, &kernel) - expect).abs() < 1e-15);
    }

    fn arb_pair(len: usize) -> impl Strategy<Value = (DiscreteDistribution, DiscreteDistribution)> {
        let w = || proptest::collection::vec(0.0f64..1.0, len).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-6);
        (w(), w()).prop_map(|(a, b)| {
            (
                DiscreteDistribution::normalized(a).unwrap(),
                DiscreteDistribution::normalized(b).unwrap(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn mmd_is_a_symmetric_nonnegative_discrepancy((p, f) in arb_pair(16)) {
            let k = kernel_matrix(&KernelSpec::default(), 16).unwrap();
            let pf = k.mmd(&p, &f).unwrap();
            let fp = k.mmd(&f, &p).unwrap();
            prop_assert!(pf >= -1e-12);
            prop_assert!((pf - fp).abs() <= 1e-12);
            prop_assert!(k.mmd(&p, &p).unwrap().abs() <= 1e-12);
            if p.total_variation(&f).unwrap() >= 0.01 {
                prop_assert!(pf > 0.0);
            }
        }
    }
}
