//! Orbital-adapted mode bases and the Fock-space rotation between the site
//! basis and an adapted basis.
//!
//! The rotation applies the second-quantized image of an `M×M` unitary as a
//! cascade of two-mode Givens blocks plus a diagonal phase, each acting
//! sparsely on the occupation basis.  This turns occupation counting for the
//! adapted first mode into a marginal read-off — no sum over projector
//! products is ever materialized.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ManyBodyState};
use crate::lattice::GridSpec;
use crate::meanfield::Orbital;

/// Unitary completion of an orbital to an orthonormal mode basis.
///
/// Column 0 holds the orbital's mode coefficients; the remaining columns are
/// a deterministic Householder completion.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    unitary: DMatrix<C64>,
    grid: GridSpec,
}

impl AdaptedBasis {
    /// Wrap an explicit completion; columns must be orthonormal to 1e-12.
    pub fn from_unitary(unitary: DMatrix<C64>, grid: GridSpec) -> Result<Self> {
        if unitary.nrows() != grid.points() || unitary.ncols() != grid.points() {
            return Err(Error::invalid(format!(
                "unitary is {}x{}, grid has {} sites",
                unitary.nrows(),
                unitary.ncols(),
                grid.points()
            )));
        }
        let ab = AdaptedBasis { unitary, grid };
        if ab.unitarity_defect() > 1e-12 {
            return Err(Error::invalid(format!(
                "completion is not unitary, defect {:.3e}",
                ab.unitarity_defect()
            )));
        }
        Ok(ab)
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn modes(&self) -> usize {
        self.unitary.nrows()
    }

    /// Column `j` as a mode vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        self.unitary.column(j).iter().copied().collect()
    }

    /// Column `j` as a unit-norm orbital on the grid.
    pub fn orbital(&self, j: usize) -> Result<Orbital> {
        let sqrt_h = self.grid.spacing().sqrt();
        let field = crate::lattice::LatticeField::new(
            self.grid,
            self.unitary.column(j).iter().map(|c| c / sqrt_h).collect(),
        )?;
        Orbital::new(field)
    }

    pub fn unitarity_defect(&self) -> f64 {
        let m = self.unitary.nrows();
        let gram = self.unitary.adjoint() * &self.unitary;
        let mut defect = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
        defect
    }
}

/// Deterministic Householder completion of `phi` to an orthonormal basis.
pub fn adapted_basis(phi: &Orbital) -> AdaptedBasis {
    let c = phi.mode_coefficients();
    let m = c.len();
    // reflector sending c to rho e_0, so H = 1 - 2 w w† / |w|² with w = c - rho e_0
    let rho = if c[0].norm() > 1e-14 { -c[0] / c[0].norm() } else { C64::new(1.0, 0.0) };
    let mut w = c.clone();
    w[0] -= rho;
    let w_norm_sqr: f64 = w.iter().map(|x| x.norm_sqr()).sum();

    let mut u = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    if w_norm_sqr < 1e-28 {
        // c is already ±e_0 within rounding; phase-align column 0 to c
        for i in 0..m {
            u[(i, i)] = C64::new(1.0, 0.0);
        }
        u[(0, 0)] = c[0] / c[0].norm();
    } else {
        for i in 0..m {
            for j in 0..m {
                let delta = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                u[(i, j)] = delta - 2.0 * w[i] * w[j].conj() / w_norm_sqr;
            }
        }
        // H e_0 = c/rho; rescale column 0 so it equals c exactly
        for i in 0..m {
            u[(i, 0)] *= rho;
        }
    }
    AdaptedBasis { unitary: u, grid: phi.grid() }
}

/// Two-mode block of the second-quantized rotation in the `n_p + n_q = s`
/// sector.  Index convention: `r` = occupation of mode `p`.
fn sector_block(g: &[[C64; 2]; 2], s: usize) -> DMatrix<C64> {
    let mut binom = vec![vec![0.0f64; s + 1]; s + 1];
    for n in 0..=s {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k <= n - 1 { binom[n - 1][k] } else { 0.0 };
        }
    }
    let mut fact = vec![1.0f64; s + 1];
    for k in 1..=s {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut block = DMatrix::from_element(s + 1, s + 1, C64::new(0.0, 0.0));
    for r in 0..=s {
        for rp in 0..=s {
            let mut acc = C64::new(0.0, 0.0);
            // (g_pp a_p† + g_qp a_q†)^r (g_pq a_p† + g_qq a_q†)^{s-r},
            // coefficient of (a_p†)^{rp} (a_q†)^{s-rp}
            for u in 0..=r.min(rp) {
                let v = rp - u;
                if v > s - r {
                    continue;
                }
                acc += binom[r][u]
                    * binom[s - r][v]
                    * g[0][0].powu(u as u32)
                    * g[1][0].powu((r - u) as u32)
                    * g[0][1].powu(v as u32)
                    * g[1][1].powu((s - r - v) as u32);
            }
            let scale = (fact[rp] * fact[s - rp] / (fact[r] * fact[s - r])).sqrt();
            block[(rp, r)] = acc * scale;
        }
    }
    block
}

/// Apply the second-quantized image of one two-mode unitary on modes `(p, q)`.
fn apply_two_mode(
    basis: &FockBasis,
    coeffs: &[C64],
    p: usize,
    q: usize,
    g: &[[C64; 2]; 2],
) -> Vec<C64> {
    let n = basis.particles() as usize;
    let blocks: Vec<DMatrix<C64>> = (0..=n).map(|s| sector_block(g, s)).collect();
    let mut out = vec![C64::new(0.0, 0.0); coeffs.len()];
    let mut scratch = Vec::new();
    let mut members: Vec<usize> = Vec::with_capacity(n + 1);
    for (idx, occ) in basis.iter() {
        // one representative per group: all pair particles gathered on p
        if occ[q] != 0 {
            continue;
        }
        let s = occ[p] as usize;
        if s == 0 {
            out[idx] += coeffs[idx];
            continue;
        }
        scratch.clear();
        scratch.extend_from_slice(occ);
        members.clear();
        // members[r] holds the state with r particles in p, s - r in q,
        // matching the block's index convention
        for r in 0..=s {
            scratch[p] = r as u8;
            scratch[q] = (s - r) as u8;
            members.push(basis.index_of(&scratch).expect("pair redistribution stays in basis"));
        }
        let block = &blocks[s];
        for rp in 0..=s {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..=s {
                acc += block[(rp, r)] * coeffs[members[r]];
            }
            out[members[rp]] += acc;
        }
    }
    out
}

fn apply_diagonal(basis: &FockBasis, coeffs: &mut [C64], phases: &[C64]) {
    for (idx, occ) in basis.iter() {
        let mut p = C64::new(1.0, 0.0);
        for (i, &n) in occ.iter().enumerate() {
            if n > 0 {
                p *= phases[i].powu(n as u32);
            }
        }
        coeffs[idx] *= p;
    }
}

/// Second-quantized application of an arbitrary `M×M` unitary to a state.
pub fn apply_one_body_unitary(state: &ManyBodyState, w: &DMatrix<C64>) -> Result<ManyBodyState> {
    let basis = state.basis();
    let m = basis.modes();
    if w.nrows() != m || w.ncols() != m {
        return Err(Error::invalid(format!(
            "unitary is {}x{}, basis has {m} modes",
            w.nrows(),
            w.ncols()
        )));
    }
    // Givens QR: eliminate below-diagonal entries, G_K … G_1 W = D
    let mut work = w.clone();
    let mut rotations: Vec<(usize, usize, [[C64; 2]; 2])> = Vec::new();
    for j in 0..m {
        for i in (j + 1)..m {
            let a = work[(j, j)];
            let b = work[(i, j)];
            if b.norm() < 1e-300 {
                continue;
            }
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            // rows (j, i): [[conj(a)/r, conj(b)/r], [-b/r, a/r]]
            let g = [
                [a.conj() / r, b.conj() / r],
                [-b / r, a / r],
            ];
            for col in 0..m {
                let x = work[(j, col)];
                let y = work[(i, col)];
                work[(j, col)] = g[0][0] * x + g[0][1] * y;
                work[(i, col)] = g[1][0] * x + g[1][1] * y;
            }
            rotations.push((j, i, g));
        }
    }
    let phases: Vec<C64> = (0..m).map(|i| work[(i, i)]).collect();
    debug_assert!(
        phases.iter().all(|p| (p.norm() - 1.0).abs() < 1e-10),
        "QR of a unitary must leave unit phases"
    );

    // W = G_1† … G_K† D, so apply D first, then the adjoints in reverse
    let mut coeffs = state.coeffs().to_vec();
    apply_diagonal(basis, &mut coeffs, &phases);
    for (p, q, g) in rotations.iter().rev() {
        let adj = [
            [g[0][0].conj(), g[1][0].conj()],
            [g[0][1].conj(), g[1][1].conj()],
        ];
        coeffs = apply_two_mode(basis, &coeffs, *p, *q, &adj);
    }
    ManyBodyState::new(Arc::clone(basis), coeffs)
}

/// Express a site-basis state in the adapted mode basis (amplitudes pick up
/// `U†`).
pub fn rotate_to_adapted(state: &ManyBodyState, ab: &AdaptedBasis) -> Result<ManyBodyState> {
    apply_one_body_unitary(state, &ab.unitary().adjoint())
}

/// Map adapted-basis amplitudes back to the site basis.
pub fn rotate_from_adapted(state: &ManyBodyState, ab: &AdaptedBasis) -> Result<ManyBodyState> {
    apply_one_body_unitary(state, ab.unitary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::lattice::LatticeField;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_orbital(g: GridSpec, rng: &mut impl Rng) -> Orbital {
        Orbital::normalized(
            LatticeField::new(
                g,
                (0..g.points())
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn random_state(basis: &Arc<FockBasis>, rng: &mut impl Rng) -> ManyBodyState {
        ManyBodyState::new(
            Arc::clone(basis),
            (0..basis.dimension())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn completion_is_unitary_and_deterministic() {
        let g = GridSpec::new(2.0, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let phi = random_orbital(g, &mut rng);
            let ab = adapted_basis(&phi);
            assert!(ab.unitarity_defect() <= 1e-12);
            let c = phi.mode_coefficients();
            for (i, ci) in c.iter().enumerate() {
                assert!((ab.unitary()[(i, 0)] - ci).norm() <= 1e-12);
            }
            let again = adapted_basis(&phi);
            assert_eq!(ab.unitary().as_slice(), again.unitary().as_slice());
        }
    }

    #[test]
    fn coordinate_mode_gives_identity_like_unitary() {
        let g = GridSpec::new(2.0, 4).unwrap();
        let mut f = LatticeField::zeros(g);
        f.values_mut()[0] = C64::new(1.0 / g.spacing().sqrt(), 0.0);
        let phi = Orbital::new(f).unwrap();
        let ab = adapted_basis(&phi);
        for i in 0..4 {
            for j in 0..4 {
                let got = ab.unitary()[(i, j)].norm();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_particle_sector_reproduces_matrix_action() {
        let g = GridSpec::new(2.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = Arc::new(enumerate_basis(5, 1).unwrap());
        let phi = random_orbital(g, &mut rng);
        let ab = adapted_basis(&phi);
        let psi = random_state(&basis, &mut rng);
        let rotated = apply_one_body_unitary(&psi, ab.unitary()).unwrap();
        // single-particle amplitudes: coefficient of mode i <-> basis index of e_i
        let m = 5usize;
        let mut amp = vec![C64::new(0.0, 0.0); m];
        let mut out = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut occ = vec![0u8; m];
            occ[i] = 1;
            let idx = basis.index_of(&occ).unwrap();
            amp[i] = psi.coeffs()[idx];
        }
        for i in 0..m {
            for j in 0..m {
                out[i] += ab.unitary()[(i, j)] * amp[j];
            }
        }
        for i in 0..m {
            let mut occ = vec![0u8; m];
            occ[i] = 1;
            let idx = basis.index_of(&occ).unwrap();
            assert!((rotated.coeffs()[idx] - out[i]).norm() <= 1e-12);
        }
    }

    #[test]
    fn rotation_is_unitary_and_invertible() {
        let g = GridSpec::new(3.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let basis = Arc::new(enumerate_basis(4, 3).unwrap());
        for _ in 0..5 {
            let phi = random_orbital(g, &mut rng);
            let ab = adapted_basis(&phi);
            let psi = random_state(&basis, &mut rng);
            let rotated = rotate_to_adapted(&psi, &ab).unwrap();
            assert!((rotated.norm() - 1.0).abs() <= 1e-12);
            let back = rotate_from_adapted(&rotated, &ab).unwrap();
            let diff = back.sub(&psi).unwrap().norm();
            assert!(diff <= 1e-12, "round trip defect {diff:.3e}");
        }
    }

    #[test]
    fn product_state_rotates_to_first_mode_condensate() {
        let g = GridSpec::new(3.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let basis = Arc::new(enumerate_basis(4, 3).unwrap());
        let phi = random_orbital(g, &mut rng);
        let ab = adapted_basis(&phi);
        let psi = crate::fock::product_state(&phi, &basis).unwrap();
        let rotated = rotate_to_adapted(&psi, &ab).unwrap();
        let all_first = basis.index_of(&[3, 0, 0, 0]).unwrap();
        for (idx, c) in rotated.coeffs().iter().enumerate() {
            if idx == all_first {
                assert!((c.norm() - 1.0).abs() <= 1e-12);
            } else {
                assert!(c.norm() <= 1e-12);
            }
        }
    }
}
