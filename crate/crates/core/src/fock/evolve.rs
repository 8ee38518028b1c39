//! Unitary propagation `ψ ↦ exp(-i dt H) ψ`.
//!
//! Below [`PropagatorOptions::dense_dim_cap`] with a static trap the matrix
//! exponential is evaluated exactly through a cached eigendecomposition;
//! otherwise a Hermitian Lanczos iteration grows the Krylov subspace until
//! successive iterates agree to the requested tolerance.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use crate::fock::hamiltonian::{HamiltonianBuilder, HamiltonianSpec, SparseHamiltonian};
use crate::fock::states::ManyBodyState;
use crate::linalg::symmetric_eigen;

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOptions {
    /// Local accuracy target for the Krylov iteration.
    pub tol: f64,
    /// Use the dense eigendecomposition at or below this dimension.
    pub dense_dim_cap: usize,
    /// Hard cap on the Krylov subspace size.
    pub max_krylov: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions { tol: 1e-11, dense_dim_cap: 512, max_krylov: 256 }
    }
}

/// `exp(-i dt T) e_1` for the real symmetric tridiagonal `T` given by
/// `diag` and `off`.
fn tridiag_expm_e1(diag: &[f64], off: &[f64], dt: f64) -> Vec<C64> {
    let m = diag.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = diag[i];
        if i + 1 < m {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let (vals, vecs) = symmetric_eigen(t);
    // y = Q exp(-i dt Λ) Qᵀ e1
    let q_row0: Vec<f64> = (0..m).map(|k| vecs[(0, k)]).collect();
    let mut y = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = (C64::new(0.0, -1.0) * vals[k] * dt).exp();
        let w = phase * q_row0[k];
        for (yi, row) in y.iter_mut().zip(vecs.column(k).iter()) {
            *yi += w * *row;
        }
    }
    y
}

/// Krylov evaluation of `exp(-i dt H) ψ` with full reorthogonalization.
pub fn expm_apply(
    h: &SparseHamiltonian,
    psi: &[C64],
    dt: f64,
    opts: &PropagatorOptions,
) -> Result<Vec<C64>> {
    let dim = h.dim();
    let beta0 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if beta0 < 1e-300 {
        return Ok(psi.to_vec());
    }
    let max_m = opts.max_krylov.min(dim);
    let mut vecs: Vec<Vec<C64>> = Vec::with_capacity(max_m);
    vecs.push(psi.iter().map(|c| c / beta0).collect());
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut prev_y: Option<Vec<C64>> = None;

    for m in 1..=max_m {
        let v_last = &vecs[m - 1];
        let mut w = h.apply(v_last);
        let alpha = v_last.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        diag.push(alpha);
        for (wi, vi) in w.iter_mut().zip(v_last) {
            *wi -= alpha * vi;
        }
        if m >= 2 {
            let beta_prev = off[m - 2];
            for (wi, vi) in w.iter_mut().zip(&vecs[m - 2]) {
                *wi -= beta_prev * vi;
            }
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &vecs {
                let c: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                if c.norm_sqr() > 0.0 {
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
        }
        let beta = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

        let y = tridiag_expm_e1(&diag, &off, dt);
        let happy = beta <= 1e-13 * (1.0 + alpha.abs());
        let converged = match &prev_y {
            Some(py) => {
                let mut delta = 0.0f64;
                for i in 0..y.len() {
                    let prev = if i < py.len() { py[i] } else { C64::new(0.0, 0.0) };
                    delta += (y[i] - prev).norm_sqr();
                }
                delta.sqrt() <= opts.tol
            }
            None => false,
        };
        if happy || converged || m == dim {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for (yk, v) in y.iter().zip(&vecs) {
                let a = beta0 * yk;
                for (oi, vi) in out.iter_mut().zip(v) {
                    *oi += a * vi;
                }
            }
            return Ok(out);
        }
        prev_y = Some(y);
        off.push(beta);
        vecs.push(w.into_iter().map(|c| c / beta).collect());
    }
    Err(Error::Instability(format!(
        "Krylov propagator did not reach tolerance {:.1e} within {} vectors",
        opts.tol, max_m
    )))
}

struct DenseEig {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
}

impl DenseEig {
    fn apply(&self, psi: &[C64], dt: f64) -> Vec<C64> {
        let dim = psi.len();
        // c = Qᵀ ψ
        let mut c = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                acc += self.vecs[(i, k)] * psi[i];
            }
            c[k] = acc * (C64::new(0.0, -1.0) * self.vals[k] * dt).exp();
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let ck = c[k];
            for i in 0..dim {
                out[i] += self.vecs[(i, k)] * ck;
            }
        }
        out
    }
}

/// Stepper for the N-body Schrödinger flow with midpoint trap sampling.
pub struct SchroedingerPropagator {
    builder: HamiltonianBuilder,
    opts: PropagatorOptions,
    dense: Option<DenseEig>,
}

impl SchroedingerPropagator {
    pub fn new(spec: &HamiltonianSpec, basis: &Arc<FockBasis>) -> Result<Self> {
        Self::with_options(spec, basis, PropagatorOptions::default())
    }

    pub fn with_options(
        spec: &HamiltonianSpec,
        basis: &Arc<FockBasis>,
        opts: PropagatorOptions,
    ) -> Result<Self> {
        let builder = HamiltonianBuilder::new(spec, basis)?;
        let dense = if builder.is_static() && basis.dimension() <= opts.dense_dim_cap {
            let h = builder.at_time(0.0);
            let (vals, vecs) = symmetric_eigen(h.to_dense());
            Some(DenseEig { vals, vecs })
        } else {
            None
        };
        Ok(SchroedingerPropagator { builder, opts, dense })
    }

    pub fn hamiltonian_at(&self, t: f64) -> SparseHamiltonian {
        self.builder.at_time(t)
    }

    /// One step `t -> t + dt`; the trap is sampled at the midpoint.
    pub fn step(&self, psi: &ManyBodyState, t: f64, dt: f64) -> Result<ManyBodyState> {
        let norm_in = psi.norm();
        let next = match &self.dense {
            Some(eig) => eig.apply(psi.coeffs(), dt),
            None => {
                let h = self.builder.at_time(t + dt / 2.0);
                expm_apply(&h, psi.coeffs(), dt, &self.opts)?
            }
        };
        let state = ManyBodyState::new(Arc::clone(psi.basis()), next)?;
        let drift = (state.norm() - norm_in).abs();
        if drift > 1e-10 * norm_in.max(1.0) {
            return Err(Error::Instability(format!(
                "N-body norm drifted by {drift:.3e} in one step"
            )));
        }
        Ok(state)
    }
}

/// One step of the N-body Schrödinger flow from a bare spec.
pub fn evolve_schroedinger(
    psi: &ManyBodyState,
    spec: &HamiltonianSpec,
    dt: f64,
    t: f64,
) -> Result<ManyBodyState> {
    if !(dt >= 0.0) {
        return Err(Error::invalid(format!("dt must be nonnegative, got {dt}")));
    }
    let prop = SchroedingerPropagator::new(spec, psi.basis())?;
    prop.step(psi, t, dt)
}
