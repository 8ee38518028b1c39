//! Many-body states over a [`FockBasis`] and the standard initial states.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use crate::meanfield::Orbital;

/// Coefficient vector over a symmetric occupation basis.
///
/// Physical states are unit norm; operator images (e.g. the counting
/// operator applied to a state) reuse the type unnormalized.
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    basis: Arc<FockBasis>,
    coeffs: Vec<C64>,
}

impl ManyBodyState {
    pub fn new(basis: Arc<FockBasis>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dimension() {
            return Err(Error::invalid(format!(
                "coefficient vector has {} entries for basis dimension {}",
                coeffs.len(),
                basis.dimension()
            )));
        }
        Ok(ManyBodyState { basis, coeffs })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dimension();
        ManyBodyState { basis, coeffs: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn particles(&self) -> u32 {
        self.basis.particles()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ManyBodyState) -> Result<C64> {
        if !Arc::ptr_eq(&self.basis, &other.basis)
            && (self.basis.modes() != other.basis.modes()
                || self.basis.particles() != other.basis.particles())
        {
            return Err(Error::GridMismatch("states over different bases".to_string()));
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::invalid("cannot normalize the zero state".to_string()));
        }
        for c in &mut self.coeffs {
            *c /= n;
        }
        Ok(self)
    }

    pub fn scaled(&self, a: C64) -> Self {
        ManyBodyState {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    pub fn sub(&self, other: &ManyBodyState) -> Result<Self> {
        self.inner(other)?; // basis compatibility check
        Ok(ManyBodyState {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

fn mode_coefficients_checked(phi: &Orbital, basis: &FockBasis) -> Result<Vec<C64>> {
    if phi.grid().points() != basis.modes() {
        return Err(Error::GridMismatch(format!(
            "orbital on {} sites, basis over {} modes",
            phi.grid().points(),
            basis.modes()
        )));
    }
    Ok(phi.mode_coefficients())
}

/// The pure condensate `φ^{⊗N}` in occupation coordinates:
/// `c_n = sqrt(N!/Π n_i!) Π c_i^{n_i}` with `c_i = sqrt(h) φ(x_i)`.
pub fn product_state(phi: &Orbital, basis: &Arc<FockBasis>) -> Result<ManyBodyState> {
    let c = mode_coefficients_checked(phi, basis)?;
    let n = basis.particles();
    let n_fact = factorial(n);
    let mut coeffs = Vec::with_capacity(basis.dimension());
    for (_, occ) in basis.iter() {
        let mut amp = C64::new(1.0, 0.0);
        let mut denom = 1.0;
        for (ci, &ni) in c.iter().zip(occ) {
            amp *= ci.powu(ni as u32);
            denom *= factorial(ni as u32);
        }
        coeffs.push(amp * (n_fact / denom).sqrt());
    }
    ManyBodyState::new(Arc::clone(basis), coeffs)
}

/// Apply the creation operator `a†(f) = Σ_i f_i a_i†`, mapping the
/// `k`-particle sector into the `(k+1)`-particle sector.
fn apply_creation(
    f: &[C64],
    from: &FockBasis,
    from_coeffs: &[C64],
    to: &FockBasis,
) -> Vec<C64> {
    let modes = from.modes();
    let mut out = vec![C64::new(0.0, 0.0); to.dimension()];
    let mut scratch = vec![0u8; modes];
    for (idx, occ) in from.iter() {
        let amp = from_coeffs[idx];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        scratch.copy_from_slice(occ);
        for i in 0..modes {
            if f[i].norm_sqr() == 0.0 {
                continue;
            }
            scratch[i] += 1;
            let target = to.index_of(&scratch).expect("raised state in target basis");
            out[target] += amp * f[i] * ((occ[i] + 1) as f64).sqrt();
            scratch[i] -= 1;
        }
    }
    out
}

/// Symmetrized and normalized `φ^{⊗(N-1)} ⊗ φ^⊥` — exactly one particle
/// outside the condensate orbital.
pub fn one_defect_state(
    phi: &Orbital,
    phi_perp: &Orbital,
    basis: &Arc<FockBasis>,
) -> Result<ManyBodyState> {
    let c = mode_coefficients_checked(phi, basis)?;
    let d = mode_coefficients_checked(phi_perp, basis)?;
    let overlap = phi.overlap(phi_perp)?;
    if overlap.norm() > 1e-10 {
        return Err(Error::invalid(format!(
            "defect orbital must be orthogonal to φ, overlap {:.3e}",
            overlap.norm()
        )));
    }
    let n = basis.particles();
    let modes = basis.modes();

    // a†(φ)^{N-1} a†(φ⊥) |0⟩, built sector by sector
    let mut sector = FockBasis::new(modes, 1)?;
    let mut coeffs = vec![C64::new(0.0, 0.0); sector.dimension()];
    for (idx, occ) in sector.iter() {
        let site = occ.iter().position(|&x| x == 1).unwrap();
        coeffs[idx] = d[site];
    }
    for _ in 1..n {
        let next = FockBasis::new(modes, sector.particles() + 1)?;
        coeffs = apply_creation(&c, &sector, &coeffs, &next);
        sector = next;
    }
    debug_assert_eq!(sector.dimension(), basis.dimension());
    ManyBodyState::new(Arc::clone(basis), coeffs)?.normalized()
}
