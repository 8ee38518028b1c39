//! First-quantized tensor bridge used by brute-force oracles.
//!
//! A rank-N tensor over grid sites carries the wave function
//! `Ψ(x_1, ..., x_N)`; its norm is weighted by `h^N` so it matches the
//! Fock-side norm exactly.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use crate::fock::states::ManyBodyState;
use crate::lattice::GridSpec;

/// Entry cap for materializing `M^N` tensors.
pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

/// Dense symmetric wave function on the `M^N` tensor grid.
#[derive(Debug, Clone)]
pub struct FirstQuantizedTensor {
    grid: GridSpec,
    particles: u32,
    values: Vec<C64>, // row-major, index = Σ i_k M^{N-1-k}
}

impl FirstQuantizedTensor {
    pub fn new(grid: GridSpec, particles: u32, values: Vec<C64>) -> Result<Self> {
        let expect = grid.points().pow(particles);
        if values.len() != expect {
            return Err(Error::invalid(format!(
                "tensor has {} entries, expected {expect}",
                values.len()
            )));
        }
        Ok(FirstQuantizedTensor { grid, particles, values })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Decode a flat index into per-particle site indices.
    pub fn decode(&self, mut flat: usize, out: &mut [usize]) {
        let m = self.grid.points();
        for slot in (0..self.particles as usize).rev() {
            out[slot] = flat % m;
            flat /= m;
        }
    }

    pub fn encode(&self, sites: &[usize]) -> usize {
        let m = self.grid.points();
        sites.iter().fold(0, |acc, &s| acc * m + s)
    }

    /// `h^N`-weighted inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &FirstQuantizedTensor) -> C64 {
        let w = self.grid.spacing().powi(self.particles as i32);
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * w
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Average over all particle permutations.
    pub fn symmetrized(&self) -> FirstQuantizedTensor {
        let n = self.particles as usize;
        let mut perms: Vec<Vec<usize>> = Vec::new();
        permutations(n, &mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
        let mut out = vec![C64::new(0.0, 0.0); self.values.len()];
        let mut sites = vec![0usize; n];
        let mut permuted = vec![0usize; n];
        for (flat, v) in self.values.iter().enumerate() {
            self.decode(flat, &mut sites);
            for perm in &perms {
                for (k, &p) in perm.iter().enumerate() {
                    permuted[k] = sites[p];
                }
                out[self.encode(&permuted)] += v / perms.len() as f64;
            }
        }
        FirstQuantizedTensor { grid: self.grid, particles: self.particles, values: out }
    }

    /// Largest entry change under any transposition of two slots.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.particles as usize;
        let mut sites = vec![0usize; n];
        let mut defect = 0.0f64;
        for flat in 0..self.values.len() {
            self.decode(flat, &mut sites);
            for a in 0..n {
                for b in (a + 1)..n {
                    sites.swap(a, b);
                    let swapped = self.encode(&sites);
                    sites.swap(a, b);
                    defect = defect.max((self.values[flat] - self.values[swapped]).norm());
                }
            }
        }
        defect
    }
}

fn permutations(n: usize, scratch: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == n {
        out.push(scratch.clone());
        return;
    }
    for i in k..n {
        scratch.swap(k, i);
        permutations(n, scratch, k + 1, out);
        scratch.swap(k, i);
    }
}

/// Occupation of a site-index tuple.
fn occupation_of(sites: &[usize], modes: usize) -> Vec<u8> {
    let mut occ = vec![0u8; modes];
    for &s in sites {
        occ[s] += 1;
    }
    occ
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Expand a Fock-space state into the dense first-quantized tensor.
pub fn first_quantized_tensor(psi: &ManyBodyState, grid: GridSpec) -> Result<FirstQuantizedTensor> {
    first_quantized_tensor_with_cap(psi, grid, DEFAULT_TENSOR_CAP)
}

pub fn first_quantized_tensor_with_cap(
    psi: &ManyBodyState,
    grid: GridSpec,
    cap: usize,
) -> Result<FirstQuantizedTensor> {
    let basis = psi.basis();
    let m = basis.modes();
    if grid.points() != m {
        return Err(Error::GridMismatch(format!(
            "grid has {} sites, basis {} modes",
            grid.points(),
            m
        )));
    }
    let n = basis.particles();
    let entries = (m as u128).pow(n);
    if entries > cap as u128 {
        return Err(Error::Capacity(format!(
            "tensor would need {entries} entries, cap is {cap}"
        )));
    }
    let entries = entries as usize;
    let n_fact = factorial(n);
    let h_half_pow = grid.spacing().powf(n as f64 / 2.0);

    let mut values = vec![C64::new(0.0, 0.0); entries];
    let mut sites = vec![0usize; n as usize];
    for flat in 0..entries {
        let mut rem = flat;
        for slot in (0..n as usize).rev() {
            sites[slot] = rem % m;
            rem /= m;
        }
        let occ = occupation_of(&sites, m);
        if let Some(idx) = basis.index_of(&occ) {
            let c = psi.coeffs()[idx];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let mult: f64 = occ.iter().map(|&o| factorial(o as u32)).product();
            values[flat] = c * (mult / n_fact).sqrt() / h_half_pow;
        }
    }
    FirstQuantizedTensor::new(grid, n, values)
}

/// Re-extract Fock coefficients from a symmetric tensor.
pub fn fock_coefficients_from_tensor(
    tensor: &FirstQuantizedTensor,
    basis: &FockBasis,
) -> Result<Vec<C64>> {
    let m = basis.modes();
    if m != tensor.grid.points() || basis.particles() != tensor.particles {
        return Err(Error::GridMismatch("tensor and basis disagree".to_string()));
    }
    let n = basis.particles();
    let n_fact = factorial(n);
    let h = tensor.grid.spacing();
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.dimension()];
    let mut sites = vec![0usize; n as usize];
    for (flat, v) in tensor.values.iter().enumerate() {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        tensor.decode(flat, &mut sites);
        let occ = occupation_of(&sites, m);
        let idx = basis
            .index_of(&occ)
            .ok_or_else(|| Error::invalid("occupation outside basis".to_string()))?;
        let mult: f64 = occ.iter().map(|&o| factorial(o as u32)).product();
        // ⟨n|i⟩ = sqrt(Π n_j!/N!) h^{-N/2}; sum the h^N-weighted projection
        coeffs[idx] += v * (mult / n_fact).sqrt() * h.powf(n as f64 / 2.0);
    }
    Ok(coeffs)
}
