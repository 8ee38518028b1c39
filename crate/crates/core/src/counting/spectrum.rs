//! Counting spectra `w_k = ||P_{N,k} Ψ||²`, weighted counting functionals,
//! and powers of the relative counting operator.
//!
//! The sector projectors are evaluated by rotating the state into the
//! orbital-adapted mode basis, where "k particles outside the orbital" is
//! the occupation condition `n_0 = N - k` on the first mode.

use std::sync::Arc;

use crate::counting::adapted::{adapted_basis, rotate_from_adapted, rotate_to_adapted, AdaptedBasis};
use crate::counting::weight::WeightSpec;
use crate::error::{Error, Result};
use crate::fock::ManyBodyState;
use crate::meanfield::Orbital;

/// The sector weights `w_k`, `k = 0..N`.
#[derive(Debug, Clone)]
pub struct CountingSpectrum {
    weights: Vec<f64>,
}

impl CountingSpectrum {
    /// Wrap raw sector weights.  They must be nonnegative and sum to at most
    /// one (completeness of the projectors guarantees both for real states).
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::invalid("spectrum needs at least N = 1 sectors".to_string()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("sector weights must be finite and nonnegative".to_string()));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-10 {
            return Err(Error::invalid(format!("sector weights sum to {total} > 1")));
        }
        Ok(CountingSpectrum { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn particles(&self) -> u32 {
        (self.weights.len() - 1) as u32
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ n(k) w_k` for a weight table.
    pub fn weighted_sum(&self, weight: &WeightSpec) -> Result<f64> {
        if weight.table().len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "weight table sized {} for spectrum over {} sectors",
                weight.table().len(),
                self.weights.len()
            )));
        }
        Ok(self.weights.iter().zip(weight.table()).map(|(w, n)| w * n).sum())
    }

    /// `Σ (k/N)^j w_k`, the moment entering the interpolation bound.
    pub fn relative_moment(&self, j: f64) -> f64 {
        let n = self.particles() as f64;
        self.weights
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, w)| (k as f64 / n).powf(j) * w)
            .sum()
    }
}

/// Spectrum with respect to a caller-provided adapted basis.
pub fn counting_spectrum_with_basis(
    psi: &ManyBodyState,
    ab: &AdaptedBasis,
) -> Result<CountingSpectrum> {
    let n = psi.particles() as usize;
    let rotated = rotate_to_adapted(psi, ab)?;
    let basis = rotated.basis();
    let mut weights = vec![0.0f64; n + 1];
    for (idx, occ) in basis.iter() {
        let k = n - occ[0] as usize;
        weights[k] += rotated.coeffs()[idx].norm_sqr();
    }
    Ok(CountingSpectrum { weights })
}

/// `w_k = ||P_{N,k} Ψ||²` for the orbital `phi`.
pub fn counting_spectrum(psi: &ManyBodyState, phi: &Orbital) -> Result<CountingSpectrum> {
    counting_spectrum_with_basis(psi, &adapted_basis(phi))
}

/// Weighted counting functional `Σ n(k) w_k`.
pub fn alpha(psi: &ManyBodyState, phi: &Orbital, weight: &WeightSpec) -> Result<f64> {
    if weight.particles() != psi.particles() {
        return Err(Error::invalid(format!(
            "weight table for N={} used with an N={} state",
            weight.particles(),
            psi.particles()
        )));
    }
    counting_spectrum(psi, phi)?.weighted_sum(weight)
}

fn apply_sector_multiplier(
    psi: &ManyBodyState,
    phi: &Orbital,
    factor: impl Fn(usize) -> f64,
) -> Result<ManyBodyState> {
    let ab = adapted_basis(phi);
    let rotated = rotate_to_adapted(psi, &ab)?;
    let basis = Arc::clone(rotated.basis());
    let n = basis.particles() as usize;
    let mut coeffs = rotated.coeffs().to_vec();
    for (idx, occ) in basis.iter() {
        let k = n - occ[0] as usize;
        coeffs[idx] *= factor(k);
    }
    let scaled = ManyBodyState::new(basis, coeffs)?;
    rotate_from_adapted(&scaled, &ab)
}

/// Apply the relative counting operator `Σ_k (k/N) P_{N,k}`; the result is
/// generally unnormalized.
pub fn nhat_apply(psi: &ManyBodyState, phi: &Orbital) -> Result<ManyBodyState> {
    let n = psi.particles() as f64;
    apply_sector_multiplier(psi, phi, |k| k as f64 / n)
}

/// Apply `(n̂)^j`.  For `j < 0` the `k = 0` sector is annihilated, matching
/// the convention that negative powers act only outside the condensate
/// sector.
pub fn nhat_power(psi: &ManyBodyState, phi: &Orbital, j: f64) -> Result<ManyBodyState> {
    if j == 0.0 || !j.is_finite() {
        return Err(Error::invalid(format!("nhat power needs finite j != 0, got {j}")));
    }
    let n = psi.particles() as f64;
    apply_sector_multiplier(psi, phi, |k| if k == 0 { 0.0 } else { (k as f64 / n).powf(j) })
}

/// `⟨Ψ, n̂ Ψ⟩`, evaluated through the operator application.
pub fn nhat_expectation(psi: &ManyBodyState, phi: &Orbital) -> Result<f64> {
    let applied = nhat_apply(psi, phi)?;
    Ok(psi.inner(&applied)?.re)
}
