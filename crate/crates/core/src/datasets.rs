//! Target distributions: bars-and-stripes images and discretized Gaussian
//! mixtures.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{BqcError, Result};
use crate::probability::DiscreteDistribution;

/// Image size of a bars-and-stripes dataset. Pixels are encoded row-major,
/// top-left pixel as the most significant bit (qubit 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasGrid {
    pub rows: usize,
    pub cols: usize,
}

impl BasGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        let g = Self { rows, cols };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.rows * self.cols > 24 {
            return Err(BqcError::Validation(format!(
                "BAS grid {}x{} must have 1..=24 pixels",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    fn pixel(&self, image: usize, r: usize, c: usize) -> bool {
        let pos = r * self.cols + c;
        (image >> (self.pixels() - 1 - pos)) & 1 == 1
    }

    /// Every column constant (vertical bars) or every row constant
    /// (horizontal stripes).
    pub fn is_pattern(&self, image: usize) -> bool {
        let bars = (0..self.cols)
            .all(|c| (1..self.rows).all(|r| self.pixel(image, r, c) == self.pixel(image, 0, c)));
        let stripes = (0..self.rows)
            .all(|r| (1..self.cols).all(|c| self.pixel(image, r, c) == self.pixel(image, r, 0)));
        bars || stripes
    }
}

/// Sorted integer encodings of all valid images; there are
/// `2^rows + 2^cols - 2` of them.
pub fn bas_patterns(grid: &BasGrid) -> Result<Vec<usize>> {
    grid.validate()?;
    let (rows, cols, n) = (grid.rows, grid.cols, grid.pixels());
    let mut out = Vec::with_capacity((1 << rows) + (1 << cols));
    // bars: one bit per column, replicated down every row
    for mask in 0..(1usize << cols) {
        let row_bits = mask;
        let image = (0..rows).fold(0, |acc, _| (acc << cols) | row_bits);
        out.push(image);
    }
    // stripes: one bit per row, replicated across the row
    let full_row = (1usize << cols) - 1;
    for mask in 0..(1usize << rows) {
        let image = (0..rows).fold(0, |acc, r| {
            let on = (mask >> (rows - 1 - r)) & 1 == 1;
            (acc << cols) | if on { full_row } else { 0 }
        });
        out.push(image);
    }
    out.sort_unstable();
    out.dedup();
    debug_assert!(out.iter().all(|&i| i < 1 << n));
    Ok(out)
}

/// Uniform distribution over the valid images.
pub fn bas_target(grid: &BasGrid) -> Result<DiscreteDistribution> {
    DiscreteDistribution::uniform_on(1 << grid.pixels(), &bas_patterns(grid)?)
}

/// One Gaussian over the integer outcomes `0..2^num_qubits`, with mean and
/// standard deviation in outcome units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean: f64,
    pub sigma: f64,
    pub num_qubits: usize,
}

impl GaussianSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > 24 {
            return Err(BqcError::Validation(format!(
                "gaussian num_qubits {} outside 1..=24",
                self.num_qubits
            )));
        }
        if !(self.mean >= 0.0 && self.mean < (1u64 << self.num_qubits) as f64) {
            return Err(BqcError::Validation(format!(
                "gaussian mean {} outside [0, 2^{})",
                self.mean, self.num_qubits
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(BqcError::Validation(format!(
                "gaussian sigma {} must be positive",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// `p(x) ∝ exp(-(x - μ)² / 2σ²)` on `0..2^n`, renormalized after truncation.
pub fn discretized_gaussian(spec: &GaussianSpec) -> Result<DiscreteDistribution> {
    spec.validate()?;
    let weights = (0..1usize << spec.num_qubits)
        .map(|x| {
            let z = (x as f64 - spec.mean) / spec.sigma;
            (-0.5 * z * z).exp()
        })
        .collect();
    DiscreteDistribution::normalized(weights)
}

/// Weighted mixture of Gaussians sharing one register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub num_qubits: usize,
    pub components: Vec<MixtureComponent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sigma: f64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(BqcError::Validation("mixture has no components".into()));
        }
        if self.components.iter().any(|c| !(c.weight >= 0.0)) {
            return Err(BqcError::Validation("mixture weights must be nonnegative".into()));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(BqcError::Validation(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        (0..self.components.len()).try_for_each(|i| self.gaussian(i).validate())
    }

    pub fn gaussian(&self, i: usize) -> GaussianSpec {
        GaussianSpec {
            mean: self.components[i].mean,
            sigma: self.components[i].sigma,
            num_qubits: self.num_qubits,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// Per-component distributions, in component order.
    pub fn component_targets(&self) -> Result<Vec<DiscreteDistribution>> {
        (0..self.components.len())
            .map(|i| discretized_gaussian(&self.gaussian(i)))
            .collect()
    }
}

pub fn mixture_target(spec: &MixtureSpec) -> Result<DiscreteDistribution> {
    spec.validate()?;
    let parts = spec.component_targets()?;
    let mut probs = vec![0.0; parts[0].len()];
    for (c, d) in spec.components.iter().zip(&parts) {
        for (acc, p) in probs.iter_mut().zip(d.probs()) {
            *acc += c.weight * p;
        }
    }
    DiscreteDistribution::normalized(probs)
}

/// Writes `index,probability` rows with a header.
pub fn write_distribution_csv<W: Write>(dist: &DiscreteDistribution, mut out: W) -> io::Result<()> {
    writeln!(out, "index,probability")?;
    for (i, p) in dist.probs().iter().enumerate() {
        writeln!(out, "{i},{p:.17e}")?;
    }
    Ok(())
}
