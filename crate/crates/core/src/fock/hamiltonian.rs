//! Second-quantized Hamiltonian on the symmetric sector:
//! kinetic hopping from the discrete Laplacian, a one-body trap, and the
//! occupation-diagonal pair interaction
//! `½ Σ_{a,b} v(x_a - x_b) (n_a n_b - δ_{ab} n_a)`.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use crate::lattice::{GridSpec, LatticeField};
use crate::meanfield::TrapProtocol;

/// Ingredients of the N-body Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub grid: GridSpec,
    pub v_scaled: LatticeField,
    pub trap: TrapProtocol,
    pub particles: u32,
}

impl HamiltonianSpec {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 1 {
            return Err(Error::invalid("Hamiltonian needs at least one particle".to_string()));
        }
        if self.v_scaled.grid() != self.grid || self.trap.base_profile().grid() != self.grid {
            return Err(Error::GridMismatch(
                "interaction/trap fields must live on the Hamiltonian grid".to_string(),
            ));
        }
        if self.v_scaled.evenness_defect() > 1e-12 {
            return Err(Error::invalid(format!(
                "scaled interaction must be even, defect {:.3e}",
                self.v_scaled.evenness_defect()
            )));
        }
        if self.v_scaled.max_imag() > 1e-12 || self.trap.base_profile().max_imag() > 1e-12 {
            return Err(Error::invalid("interaction and trap must be real fields".to_string()));
        }
        Ok(())
    }
}

/// Real-symmetric sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `⟨x, H x⟩` for a unit-compatible coefficient vector.
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let hx = self.apply(x);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col[k] as usize)] += self.val[k];
            }
        }
        m
    }

    /// Largest entrywise deviation from symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let dense = self.to_dense();
        let mut defect = 0.0f64;
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                defect = defect.max((dense[(r, c)] - dense[(c, r)]).abs());
            }
        }
        defect
    }
}

/// Reusable assembly: hopping pattern and static diagonal are built once,
/// the trap diagonal is rescaled per evaluation time.
#[derive(Debug)]
pub struct HamiltonianBuilder {
    basis: Arc<FockBasis>,
    trap: TrapProtocol,
    // CSR skeleton with hopping entries; diagonal entry is first in each row
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    hop_val: Vec<f64>,
    static_diag: Vec<f64>,
    trap_diag: Vec<f64>, // Σ_i A^0(x_i) n_i per basis state
}

impl HamiltonianBuilder {
    pub fn new(spec: &HamiltonianSpec, basis: &Arc<FockBasis>) -> Result<Self> {
        spec.validate()?;
        if basis.modes() != spec.grid.points() || basis.particles() != spec.particles {
            return Err(Error::GridMismatch(format!(
                "basis is {} modes / {} particles, spec wants {} / {}",
                basis.modes(),
                basis.particles(),
                spec.grid.points(),
                spec.particles
            )));
        }
        let modes = basis.modes();
        let dim = basis.dimension();
        let h = spec.grid.spacing();
        let inv_h2 = 1.0 / (h * h);

        // one-body kinetic matrix of -Δ; accumulation folds the M = 2 case
        let mut kinetic = vec![0.0f64; modes * modes];
        for i in 0..modes {
            kinetic[i * modes + i] += 2.0 * inv_h2;
            kinetic[i * modes + (i + 1) % modes] -= inv_h2;
            kinetic[i * modes + (i + modes - 1) % modes] -= inv_h2;
        }

        let v = spec.v_scaled.try_real(1e-12)?;
        let trap_profile = spec.trap.base_profile().try_real(1e-12)?;

        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col: Vec<u32> = Vec::new();
        let mut hop_val: Vec<f64> = Vec::new();
        let mut static_diag = Vec::with_capacity(dim);
        let mut trap_diag = Vec::with_capacity(dim);
        let mut scratch = vec![0u8; modes];

        row_ptr.push(0);
        for (row, occ) in basis.iter() {
            // diagonal: kinetic diagonal + pair interaction
            let mut diag = 0.0;
            let mut trap_term = 0.0;
            for a in 0..modes {
                let na = occ[a] as f64;
                if occ[a] == 0 {
                    continue;
                }
                diag += kinetic[a * modes + a] * na;
                trap_term += trap_profile[a] * na;
                for b in 0..modes {
                    let nb = occ[b] as f64;
                    let pair = if a == b { na * nb - na } else { na * nb };
                    if pair != 0.0 {
                        diag += 0.5 * v[(a + modes - b) % modes] * pair;
                    }
                }
            }
            col.push(row as u32);
            hop_val.push(0.0); // diagonal slot; filled at evaluation time
            static_diag.push(diag);
            trap_diag.push(trap_term);

            // hopping: H_rc = K_ij sqrt(r_i (r_j + 1)) at c = r - e_i + e_j
            scratch.copy_from_slice(occ);
            for i in 0..modes {
                if occ[i] == 0 {
                    continue;
                }
                for j in [(i + 1) % modes, (i + modes - 1) % modes] {
                    let k_ij = kinetic[i * modes + j];
                    if k_ij == 0.0 || i == j {
                        continue;
                    }
                    scratch[i] -= 1;
                    scratch[j] += 1;
                    let c = basis.index_of(&scratch).expect("hopped state stays in basis");
                    scratch[j] -= 1;
                    scratch[i] += 1;
                    let amp = k_ij * ((occ[i] as f64) * ((occ[j] + 1) as f64)).sqrt();
                    // neighbor pair may coincide for M = 2; merge duplicates
                    if let Some(pos) =
                        (row_ptr[row]..col.len()).find(|&k| col[k] == c as u32)
                    {
                        hop_val[pos] += amp;
                    } else {
                        col.push(c as u32);
                        hop_val.push(amp);
                    }
                }
            }
            row_ptr.push(col.len());
        }

        Ok(HamiltonianBuilder {
            basis: Arc::clone(basis),
            trap: spec.trap.clone(),
            row_ptr,
            col,
            hop_val,
            static_diag,
            trap_diag,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn is_static(&self) -> bool {
        self.trap.is_static()
    }

    /// The assembled operator at time `t`.
    pub fn at_time(&self, t: f64) -> SparseHamiltonian {
        let factor = self.trap.factor(t);
        let mut val = self.hop_val.clone();
        for (row, &start) in self.row_ptr[..self.row_ptr.len() - 1].iter().enumerate() {
            val[start] = self.static_diag[row] + factor * self.trap_diag[row];
        }
        SparseHamiltonian {
            dim: self.basis.dimension(),
            row_ptr: self.row_ptr.clone(),
            col: self.col.clone(),
            val,
        }
    }
}

/// Assemble the N-body Hamiltonian at time `t`.
pub fn assemble_hamiltonian(
    spec: &HamiltonianSpec,
    basis: &Arc<FockBasis>,
    t: f64,
) -> Result<SparseHamiltonian> {
    Ok(HamiltonianBuilder::new(spec, basis)?.at_time(t))
}
