//! Reduced one-particle density matrices and their projector decomposition.
//!
//! The density matrix is stored in the δ-normalized mode basis, so
//! `⟨φ, μ φ⟩` is evaluated against mode coefficients and all distances are
//! basis-free spectral quantities of Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::ManyBodyState;
use crate::linalg::{hermitian_eigenvalues, hermitian_operator_norm, hermitian_trace_norm};
use crate::meanfield::Orbital;

/// Trace-one positive Hermitian matrix over lattice modes.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    matrix: DMatrix<C64>,
}

impl ReducedDensity {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut defect = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    /// `⟨φ, μ φ⟩`, the condensate fraction along `phi`.
    pub fn expectation(&self, phi: &Orbital) -> f64 {
        let c = phi.mode_coefficients();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..c.len() {
            for j in 0..c.len() {
                acc += c[i].conj() * self.matrix[(i, j)] * c[j];
            }
        }
        acc.re
    }
}

/// One-body correlation matrix in density convention, `G_ij = ⟨Ψ, a_j† a_i Ψ⟩`,
/// so the wave-function kernel `Ψ(x_i) Ψ*(x_j)` lands at `(i, j)`.
pub fn one_body_correlations(psi: &ManyBodyState) -> DMatrix<C64> {
    let basis = psi.basis();
    let m = basis.modes();
    let mut g = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    let mut scratch = vec![0u8; m];
    for (idx, occ) in basis.iter() {
        let c = psi.coeffs()[idx];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for i in 0..m {
            g[(i, i)] += c.conj() * c * occ[i] as f64;
        }
        scratch.copy_from_slice(occ);
        for j in 0..m {
            if occ[j] == 0 {
                continue;
            }
            for i in 0..m {
                if i == j {
                    continue;
                }
                scratch[j] -= 1;
                scratch[i] += 1;
                let target = basis.index_of(&scratch).expect("moved state stays in basis");
                scratch[i] -= 1;
                scratch[j] += 1;
                let amp = ((occ[j] as f64) * ((occ[i] + 1) as f64)).sqrt();
                g[(j, i)] += psi.coeffs()[target].conj() * amp * c;
            }
        }
    }
    g
}

/// `μ₁ = G / N`, the trace-one reduced one-particle density matrix.
pub fn reduced_density(psi: &ManyBodyState) -> Result<ReducedDensity> {
    let n = psi.particles() as f64;
    let mut matrix = one_body_correlations(psi);
    matrix /= C64::new(n, 0.0);
    let rd = ReducedDensity { matrix };
    if rd.hermiticity_defect() > 1e-12 {
        return Err(Error::Instability(format!(
            "reduced density lost hermiticity: {:.3e}",
            rd.hermiticity_defect()
        )));
    }
    let norm_sqr = psi.norm().powi(2);
    if (rd.trace() - norm_sqr).abs() > 1e-10 * norm_sqr.max(1.0) {
        return Err(Error::Instability(format!(
            "reduced density trace {} for state norm² {}",
            rd.trace(),
            norm_sqr
        )));
    }
    if rd.min_eigenvalue() < -1e-10 {
        return Err(Error::Instability(format!(
            "reduced density has negative eigenvalue {:.3e}",
            rd.min_eigenvalue()
        )));
    }
    Ok(rd)
}

/// `||q₁ Ψ||² = 1 - ⟨φ, μ₁ φ⟩`, through the one-body correlation route.
pub fn q1_norm_squared(psi: &ManyBodyState, phi: &Orbital) -> Result<f64> {
    let mu = reduced_density(psi)?;
    Ok((1.0 - mu.expectation(phi)).max(0.0))
}

/// The four-term split of `μ₁` by the orbital projector on each side.
#[derive(Debug, Clone)]
pub struct MuDecomposition {
    pub pp: DMatrix<C64>,
    pub qp: DMatrix<C64>,
    pub pq: DMatrix<C64>,
    pub qq: DMatrix<C64>,
}

impl MuDecomposition {
    pub fn sum(&self) -> DMatrix<C64> {
        &self.pp + &self.qp + &self.pq + &self.qq
    }
}

/// Split `μ₁` into `P μ P + Q μ P + P μ Q + Q μ Q` with `P = |φ⟩⟨φ|`.
pub fn mu_decomposition(psi: &ManyBodyState, phi: &Orbital) -> Result<MuDecomposition> {
    let mu = reduced_density(psi)?;
    let m = mu.matrix().nrows();
    let c = phi.mode_coefficients();
    let mut p = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for i in 0..m {
        for j in 0..m {
            p[(i, j)] = c[i] * c[j].conj();
        }
    }
    let mut q = -p.clone();
    for i in 0..m {
        q[(i, i)] += C64::new(1.0, 0.0);
    }
    let mu = mu.matrix();
    Ok(MuDecomposition {
        pp: &p * mu * &p,
        qp: &q * mu * &p,
        pq: &p * mu * &q,
        qq: &q * mu * &q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityNorm {
    Operator,
    Trace,
}

/// Distance `||μ - |φ⟩⟨φ|||` in the chosen norm.
pub fn density_distance(mu: &ReducedDensity, phi: &Orbital, norm: DensityNorm) -> f64 {
    let c = phi.mode_coefficients();
    let m = mu.matrix().nrows();
    let mut diff = mu.matrix().clone();
    for i in 0..m {
        for j in 0..m {
            diff[(i, j)] -= c[i] * c[j].conj();
        }
    }
    match norm {
        DensityNorm::Operator => hermitian_operator_norm(&diff),
        DensityNorm::Trace => hermitian_trace_norm(&diff),
    }
}
