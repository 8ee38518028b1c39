//! First-quantized brute-force oracles.
//!
//! Everything here works on dense rank-N tensors and builds the sector
//! projectors literally as sums over the multi-index set of per-particle
//! projector products.  These paths are deliberately independent of the
//! adapted-basis rotation used by the production code.

use num_complex::Complex64 as C64;

use crate::counting::WeightSpec;
use crate::error::{Error, Result};
use crate::fock::FirstQuantizedTensor;
use crate::lattice::LatticeField;
use crate::meanfield::{mean_field_potential, Orbital};

/// Apply `p_j = |φ⟩⟨φ|` on particle slot `slot`.
pub fn apply_p(tensor: &FirstQuantizedTensor, phi: &Orbital, slot: usize) -> FirstQuantizedTensor {
    let m = tensor.grid().points();
    let n = tensor.particles() as usize;
    let h = tensor.grid().spacing();
    let phi_vals = phi.field().values();
    let mut out = tensor.clone();
    let stride: usize = m.pow((n - 1 - slot) as u32);
    let outer = tensor.len() / (m * stride);
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * m * stride + inner;
            // ⟨φ, ψ(slot = ·)⟩ with the h-weighted product
            let mut overlap = C64::new(0.0, 0.0);
            for x in 0..m {
                overlap += phi_vals[x].conj() * tensor.values()[base + x * stride];
            }
            overlap *= h;
            for x in 0..m {
                out.values_mut()[base + x * stride] = phi_vals[x] * overlap;
            }
        }
    }
    out
}

/// Apply `q_j = 1 - p_j` on particle slot `slot`.
pub fn apply_q(tensor: &FirstQuantizedTensor, phi: &Orbital, slot: usize) -> FirstQuantizedTensor {
    let p = apply_p(tensor, phi, slot);
    let mut out = tensor.clone();
    for (o, pv) in out.values_mut().iter_mut().zip(p.values()) {
        *o -= pv;
    }
    out
}

/// `P_{N,k}` as the explicit sum over all ways of picking `k` bad slots.
pub fn apply_sector_projector(
    tensor: &FirstQuantizedTensor,
    phi: &Orbital,
    k: usize,
) -> FirstQuantizedTensor {
    let n = tensor.particles() as usize;
    let mut acc = FirstQuantizedTensor::new(
        tensor.grid(),
        tensor.particles(),
        vec![C64::new(0.0, 0.0); tensor.len()],
    )
    .expect("same shape");
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut term = tensor.clone();
        for slot in 0..n {
            term = if mask & (1 << slot) != 0 {
                apply_q(&term, phi, slot)
            } else {
                apply_p(&term, phi, slot)
            };
        }
        for (a, t) in acc.values_mut().iter_mut().zip(term.values()) {
            *a += t;
        }
    }
    acc
}

/// Sector weights through the projector-sum route.
pub fn brute_counting_spectrum(
    tensor: &FirstQuantizedTensor,
    phi: &Orbital,
) -> Result<Vec<f64>> {
    let n = tensor.particles() as usize;
    if n > 20 {
        return Err(Error::Capacity(format!("projector sum over 2^{n} subsets refused")));
    }
    let mut weights = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let proj = apply_sector_projector(tensor, phi, k);
        weights.push(tensor.inner(&proj).re.max(0.0));
    }
    Ok(weights)
}

/// Weighted counting functional from the projector-sum spectrum.
pub fn brute_force_alpha(
    tensor: &FirstQuantizedTensor,
    phi: &Orbital,
    weight: &WeightSpec,
) -> Result<f64> {
    let weights = brute_counting_spectrum(tensor, phi)?;
    if weight.table().len() != weights.len() {
        return Err(Error::invalid(format!(
            "weight table sized {} for {} sectors",
            weight.table().len(),
            weights.len()
        )));
    }
    Ok(weights.iter().zip(weight.table()).map(|(w, n)| w * n).sum())
}

/// `N^{-1} Σ_j q_j` applied slot by slot.
pub fn brute_nhat_apply(
    tensor: &FirstQuantizedTensor,
    phi: &Orbital,
) -> FirstQuantizedTensor {
    let n = tensor.particles() as usize;
    let mut acc = FirstQuantizedTensor::new(
        tensor.grid(),
        tensor.particles(),
        vec![C64::new(0.0, 0.0); tensor.len()],
    )
    .expect("same shape");
    for slot in 0..n {
        let q = apply_q(tensor, phi, slot);
        for (a, t) in acc.values_mut().iter_mut().zip(q.values()) {
            *a += t / n as f64;
        }
    }
    acc
}

/// Partial trace over all slots but the first, normalized to unit trace.
pub fn brute_reduced_density(tensor: &FirstQuantizedTensor) -> nalgebra::DMatrix<C64> {
    let m = tensor.grid().points();
    let n = tensor.particles() as usize;
    let h = tensor.grid().spacing();
    let rest: usize = m.pow((n - 1) as u32);
    let mut mu = nalgebra::DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for i in 0..m {
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..rest {
                acc += tensor.values()[i * rest + r] * tensor.values()[j * rest + r].conj();
            }
            // kernel -> mode matrix: h^{N-1} from the traced slots, h from
            // the mode normalization of the kept slot
            mu[(i, j)] = acc * h.powi(n as i32 - 1) * h;
        }
    }
    mu
}

/// The counting derivative evaluated with dense first-quantized operators.
pub fn brute_gamma(
    tensor: &FirstQuantizedTensor,
    phi: &Orbital,
    v_scaled: &LatticeField,
) -> Result<f64> {
    let m = tensor.grid().points();
    let n = tensor.particles() as usize;
    let v = v_scaled.try_real(1e-12)?;
    let v_unscaled = v_scaled.scaled(C64::new(n as f64, 0.0));
    let w = mean_field_potential(phi, &v_unscaled)?.try_real(1e-10)?;

    // D = Σ_{j<k} v_N(x_j - x_k) - Σ_j w(x_j): diagonal on the tensor grid
    let mut sites = vec![0usize; n];
    let mut d_tensor = tensor.clone();
    for flat in 0..tensor.len() {
        tensor.decode(flat, &mut sites);
        let mut d = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                d += v[(sites[a] + m - sites[b]) % m];
            }
            d -= w[sites[a]];
        }
        d_tensor.values_mut()[flat] = tensor.values()[flat] * d;
    }

    // γ = i (⟨Ψ, D n̂ Ψ⟩ - ⟨Ψ, n̂ D Ψ⟩)
    let n_psi = brute_nhat_apply(tensor, phi);
    let mut d_n_psi = n_psi.clone();
    for (flat, val) in d_n_psi.values_mut().iter_mut().enumerate() {
        tensor.decode(flat, &mut sites);
        let mut d = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                d += v[(sites[a] + m - sites[b]) % m];
            }
            d -= w[sites[a]];
        }
        *val = n_psi.values()[flat] * d;
    }
    let n_d_psi = brute_nhat_apply(&d_tensor, phi);
    let z1 = tensor.inner(&d_n_psi);
    let z2 = tensor.inner(&n_d_psi);
    let g = C64::new(0.0, 1.0) * (z1 - z2);
    if g.im.abs() > 1e-9 {
        return Err(Error::Instability(format!(
            "brute-force counting derivative has imaginary residual {:.3e}",
            g.im
        )));
    }
    Ok(g.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{
        adapted_basis, alpha, counting_spectrum, nhat_apply, reduced_density,
    };
    use crate::fock::{
        enumerate_basis, first_quantized_tensor, one_defect_state, product_state, FockBasis,
        ManyBodyState,
    };
    use crate::lattice::GridSpec;
    use crate::validation::gamma;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

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

    fn even_potential(g: GridSpec, rng: &mut impl Rng) -> LatticeField {
        let m = g.points();
        let mut vals = vec![C64::new(0.0, 0.0); m];
        for i in 0..=m / 2 {
            let v = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            vals[i] = v;
            vals[(m - i) % m] = v;
        }
        LatticeField::new(g, vals).unwrap()
    }

    #[test]
    fn product_tensor_has_zero_alpha() {
        let g = GridSpec::new(2.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let basis = Arc::new(enumerate_basis(3, 2).unwrap());
        let phi = random_orbital(g, &mut rng);
        let psi = product_state(&phi, &basis).unwrap();
        let tensor = first_quantized_tensor(&psi, g).unwrap();
        let a = brute_force_alpha(&tensor, &phi, &WeightSpec::linear(2)).unwrap();
        assert!(a.abs() <= 1e-12);
    }

    #[test]
    fn hand_computed_superposition() {
        // Ψ = (φ⊗φ + φ⊥⊗φ⊥)/√2 has w_0 = w_2 = 1/2, so α_linear = 1/2
        let g = GridSpec::new(2.0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let basis = Arc::new(enumerate_basis(2, 2).unwrap());
        let phi = random_orbital(g, &mut rng);
        let ab = adapted_basis(&phi);
        let perp = ab.orbital(1).unwrap();
        let prod_phi = product_state(&phi, &basis).unwrap();
        let prod_perp = product_state(&perp, &basis).unwrap();
        let coeffs: Vec<C64> = prod_phi
            .coeffs()
            .iter()
            .zip(prod_perp.coeffs())
            .map(|(a, b)| (a + b) / 2.0f64.sqrt())
            .collect();
        let psi = ManyBodyState::new(Arc::clone(&basis), coeffs).unwrap();
        assert!((psi.norm() - 1.0).abs() <= 1e-12);
        let tensor = first_quantized_tensor(&psi, g).unwrap();
        let weights = brute_counting_spectrum(&tensor, &phi).unwrap();
        assert!((weights[0] - 0.5).abs() <= 1e-12);
        assert!(weights[1].abs() <= 1e-12);
        assert!((weights[2] - 0.5).abs() <= 1e-12);
        let a = brute_force_alpha(&tensor, &phi, &WeightSpec::linear(2)).unwrap();
        assert!((a - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn spectrum_pipeline_agrees_with_projector_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(3usize, 3u32), (4, 2), (2, 3)] {
            let g = GridSpec::new(2.0, m).unwrap();
            let basis = Arc::new(enumerate_basis(m, n).unwrap());
            for _ in 0..5 {
                let phi = random_orbital(g, &mut rng);
                let psi = random_state(&basis, &mut rng);
                let tensor = first_quantized_tensor(&psi, g).unwrap();
                let brute = brute_counting_spectrum(&tensor, &phi).unwrap();
                let fast = counting_spectrum(&psi, &phi).unwrap();
                for (a, b) in brute.iter().zip(fast.weights()) {
                    assert!((a - b).abs() <= 1e-10, "spectrum mismatch {a} vs {b}");
                }
                let w = WeightSpec::power(n, 2.0).unwrap();
                let a_brute = brute_force_alpha(&tensor, &phi, &w).unwrap();
                let a_fast = alpha(&psi, &phi, &w).unwrap();
                assert!((a_brute - a_fast).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn nhat_agrees_with_projector_average() {
        let g = GridSpec::new(2.0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let basis = Arc::new(enumerate_basis(2, 2).unwrap());
        for _ in 0..10 {
            let phi = random_orbital(g, &mut rng);
            let psi = random_state(&basis, &mut rng);
            let fast = nhat_apply(&psi, &phi).unwrap();
            let fast_tensor = first_quantized_tensor(&fast, g).unwrap();
            let brute = brute_nhat_apply(&first_quantized_tensor(&psi, g).unwrap(), &phi);
            for (a, b) in fast_tensor.values().iter().zip(brute.values()) {
                assert!((a - b).norm() <= 1e-11);
            }
        }
    }

    #[test]
    fn defect_state_nhat_eigenvalue_brute() {
        let g = GridSpec::new(2.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let basis = Arc::new(enumerate_basis(3, 3).unwrap());
        let phi = random_orbital(g, &mut rng);
        let ab = adapted_basis(&phi);
        let defect = one_defect_state(&phi, &ab.orbital(2).unwrap(), &basis).unwrap();
        let tensor = first_quantized_tensor(&defect, g).unwrap();
        let out = brute_nhat_apply(&tensor, &phi);
        for (a, b) in out.values().iter().zip(tensor.values()) {
            assert!((a - b / 3.0).norm() <= 1e-11);
        }
    }

    #[test]
    fn q1_norm_matches_first_quantized_projector() {
        let g = GridSpec::new(2.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = Arc::new(enumerate_basis(3, 3).unwrap());
        for _ in 0..10 {
            let phi = random_orbital(g, &mut rng);
            let psi = random_state(&basis, &mut rng);
            let fast = crate::counting::q1_norm_squared(&psi, &phi).unwrap();
            let tensor = first_quantized_tensor(&psi, g).unwrap();
            let q1 = apply_q(&tensor, &phi, 0);
            let brute = q1.inner(&q1).re;
            assert!((fast - brute).abs() <= 1e-11, "q1 norm {fast} vs projector {brute}");
        }
    }

    #[test]
    fn reduced_density_matches_partial_trace() {
        let g = GridSpec::new(2.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let basis = Arc::new(enumerate_basis(3, 2).unwrap());
        for _ in 0..10 {
            let psi = random_state(&basis, &mut rng);
            let fast = reduced_density(&psi).unwrap();
            let tensor = first_quantized_tensor(&psi, g).unwrap();
            let brute = brute_reduced_density(&tensor);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((fast.matrix()[(i, j)] - brute[(i, j)]).norm() <= 1e-11);
                }
            }
        }
    }

    #[test]
    fn gamma_matches_dense_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(3usize, 2u32), (2, 3), (4, 2)] {
            let g = GridSpec::new(2.0, m).unwrap();
            let basis = Arc::new(enumerate_basis(m, n).unwrap());
            for _ in 0..5 {
                let phi = random_orbital(g, &mut rng);
                let psi = random_state(&basis, &mut rng);
                let v_scaled = even_potential(g, &mut rng).scaled(C64::new(1.0 / n as f64, 0.0));
                let fast = gamma(&psi, &phi, &v_scaled).unwrap();
                let tensor = first_quantized_tensor(&psi, g).unwrap();
                let brute = brute_gamma(&tensor, &phi, &v_scaled).unwrap();
                assert!(
                    (fast - brute).abs() <= 1e-9,
                    "gamma mismatch: fast {fast} vs brute {brute} (M={m}, N={n})"
                );
            }
        }
    }
}
