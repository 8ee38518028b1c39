//! Deterministic enumeration of the symmetric N-particle occupation basis.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dimension guard for basis enumeration.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Occupation-number basis of `N` bosons over `M` modes.
///
/// States are enumerated in descending lexicographic order, so all particles
/// in mode 0 come first: for `M = 2, N = 2` the order is `(2,0), (1,1), (0,2)`.
#[derive(Debug)]
pub struct FockBasis {
    modes: usize,
    particles: u32,
    occ: Vec<u8>, // dimension × modes, row-major
    index: HashMap<Vec<u8>, usize>,
}

fn binomial_capped(n: u64, k: u64, cap: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > cap * 1_000 {
            return None;
        }
    }
    Some(acc)
}

impl FockBasis {
    pub fn new(modes: usize, particles: u32) -> Result<Self> {
        Self::with_cap(modes, particles, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(modes: usize, particles: u32, cap: usize) -> Result<Self> {
        if modes < 1 || particles < 1 {
            return Err(Error::invalid(format!(
                "basis needs M >= 1 and N >= 1, got M={modes}, N={particles}"
            )));
        }
        if particles > u8::MAX as u32 {
            return Err(Error::Capacity(format!("N={particles} exceeds the occupation range")));
        }
        let dim = binomial_capped((modes as u64) + (particles as u64) - 1, particles as u64, cap as u128)
            .filter(|&d| d <= cap as u128)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "basis dimension C({}, {}) exceeds cap {cap}",
                    modes + particles as usize - 1,
                    particles
                ))
            })? as usize;

        let mut occ = Vec::with_capacity(dim * modes);
        let mut scratch = vec![0u8; modes];
        enumerate_rec(modes, particles as u8, 0, &mut scratch, &mut occ);
        debug_assert_eq!(occ.len(), dim * modes);

        let mut index = HashMap::with_capacity(dim);
        for i in 0..dim {
            index.insert(occ[i * modes..(i + 1) * modes].to_vec(), i);
        }
        Ok(FockBasis { modes, particles, occ, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn dimension(&self) -> usize {
        self.occ.len() / self.modes
    }

    /// Occupation vector of basis state `i`.
    pub fn state(&self, i: usize) -> &[u8] {
        &self.occ[i * self.modes..(i + 1) * self.modes]
    }

    /// Index of an occupation vector, if it belongs to this basis.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[u8])> {
        (0..self.dimension()).map(move |i| (i, self.state(i)))
    }
}

fn enumerate_rec(modes: usize, remaining: u8, mode: usize, scratch: &mut [u8], out: &mut Vec<u8>) {
    if mode == modes - 1 {
        scratch[mode] = remaining;
        out.extend_from_slice(scratch);
        return;
    }
    for n in (0..=remaining).rev() {
        scratch[mode] = n;
        enumerate_rec(modes, remaining - n, mode + 1, scratch, out);
    }
}

/// Enumerate the symmetric basis with the default dimension cap.
pub fn enumerate_basis(modes: usize, particles: u32) -> Result<FockBasis> {
    FockBasis::new(modes, particles)
}

pub fn enumerate_basis_with_cap(modes: usize, particles: u32, cap: usize) -> Result<FockBasis> {
    FockBasis::with_cap(modes, particles, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_mode_two_particle_states() {
        let b = enumerate_basis(2, 2).unwrap();
        assert_eq!(b.dimension(), 3);
        assert_eq!(b.state(0), &[2, 0]);
        assert_eq!(b.state(1), &[1, 1]);
        assert_eq!(b.state(2), &[0, 2]);
    }

    #[test]
    fn dimensions_match_binomials() {
        assert_eq!(enumerate_basis(16, 4).unwrap().dimension(), 3876);
        assert_eq!(enumerate_basis(16, 6).unwrap().dimension(), 54264);
        assert_eq!(enumerate_basis(8, 3).unwrap().dimension(), 120);
        assert_eq!(enumerate_basis(1, 5).unwrap().dimension(), 1);
    }

    #[test]
    fn index_maps_are_mutually_inverse() {
        let b = enumerate_basis(5, 3).unwrap();
        for (i, occ) in b.iter() {
            assert_eq!(b.index_of(occ), Some(i));
            assert_eq!(occ.iter().map(|&n| n as u32).sum::<u32>(), 3);
        }
        assert_eq!(b.index_of(&[3, 0, 0, 0, 1]), None);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_basis_with_cap(16, 6, 1000), Err(Error::Capacity(_))));
        assert!(enumerate_basis(64, 64).is_err());
        assert!(enumerate_basis(0, 2).is_err());
        assert!(enumerate_basis(4, 0).is_err());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_basis(6, 4).unwrap();
        let b = enumerate_basis(6, 4).unwrap();
        for i in 0..a.dimension() {
            assert_eq!(a.state(i), b.state(i));
        }
    }
}
