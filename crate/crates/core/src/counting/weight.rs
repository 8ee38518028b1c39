//! Weight functions `n(k)` biasing the count of particles outside the
//! condensate orbital.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `n(k) = k/N`, the relative particle count.
    Linear,
    /// `n(k) = (k/N)^j` for some `j > 0`.
    Power { exponent: f64 },
    /// `n(k) = k/N^γ` for `k <= N^γ` and `0` otherwise, `γ ∈ (0, 1)`.
    Truncated { gamma: f64 },
    /// Arbitrary nonnegative table.
    Custom,
}

/// A weight family materialized as a table of length `N + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    family: WeightFamily,
    particles: u32,
    table: Vec<f64>,
}

impl WeightSpec {
    pub fn linear(particles: u32) -> Self {
        let n = particles as f64;
        let table = (0..=particles).map(|k| k as f64 / n).collect();
        WeightSpec { family: WeightFamily::Linear, particles, table }
    }

    pub fn power(particles: u32, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::invalid(format!(
                "power weight needs exponent > 0, got {exponent}"
            )));
        }
        let n = particles as f64;
        let table = (0..=particles).map(|k| (k as f64 / n).powf(exponent)).collect();
        Ok(WeightSpec { family: WeightFamily::Power { exponent }, particles, table })
    }

    /// The truncated family, implemented exactly as printed: zero above `N^γ`.
    pub fn truncated(particles: u32, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid(format!(
                "truncated weight needs γ in (0, 1), got {gamma}"
            )));
        }
        let cutoff = (particles as f64).powf(gamma);
        let table = (0..=particles)
            .map(|k| if (k as f64) <= cutoff { k as f64 / cutoff } else { 0.0 })
            .collect();
        Ok(WeightSpec { family: WeightFamily::Truncated { gamma }, particles, table })
    }

    pub fn custom(table: Vec<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::invalid("weight table must not be empty".to_string()));
        }
        if table.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative".to_string()));
        }
        let particles = (table.len() - 1) as u32;
        Ok(WeightSpec { family: WeightFamily::Custom, particles, table })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn max_weight(&self) -> f64 {
        self.table.iter().copied().fold(0.0, f64::max)
    }

    /// True if `self(k) <= other(k)` for every `k`.
    pub fn dominated_by(&self, other: &WeightSpec) -> bool {
        self.table.len() == other.table.len()
            && self.table.iter().zip(&other.table).all(|(a, b)| a <= b)
    }
}
