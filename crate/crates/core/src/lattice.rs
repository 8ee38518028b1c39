//! Periodic 1D lattice: grid bookkeeping, fields, discrete operators and norms.
//!
//! All norms and inner products carry the grid weight `h = L/M`, so they
//! converge to their continuum values under refinement.  Coordinates are
//! reported signed, in `(-L/2, L/2]`, with site `i` at `i*h` wrapped
//! periodically.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic 1D spatial discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    points: usize,
    spacing: f64,
}

impl GridSpec {
    /// Build a grid of `points` sites on a periodic box of size `length`.
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(format!("box length must be positive, got {length}")));
        }
        if points < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {points}")));
        }
        Ok(GridSpec { length, points, spacing: length / points as f64 })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Signed coordinate of site `i`, in `(-L/2, L/2]`.
    pub fn coord(&self, i: usize) -> f64 {
        let i = i % self.points;
        if 2 * i <= self.points {
            i as f64 * self.spacing
        } else {
            (i as f64 - self.points as f64) * self.spacing
        }
    }
}

/// Sampled complex-valued function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: GridSpec,
    values: Vec<C64>,
}

/// Exponent of a discrete `L^p` norm; `p = ∞` is the max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lp {
    Finite(f64),
    Infinity,
}

impl Lp {
    fn validate(self) -> Result<Self> {
        match self {
            Lp::Finite(p) if p.is_finite() && p >= 1.0 => Ok(self),
            Lp::Infinity => Ok(self),
            Lp::Finite(p) => Err(Error::invalid(format!("L^p norm needs p >= 1, got {p}"))),
        }
    }

    /// The Hölder conjugate `p/(p-1)`; `∞` for `p = 1`.
    pub fn conjugate(self) -> Result<Lp> {
        match self.validate()? {
            Lp::Finite(p) if p == 1.0 => Ok(Lp::Infinity),
            Lp::Finite(p) => Ok(Lp::Finite(p / (p - 1.0))),
            Lp::Infinity => Ok(Lp::Finite(1.0)),
        }
    }

    /// Doubles a finite exponent; `∞` stays `∞`.
    pub fn doubled(self) -> Lp {
        match self {
            Lp::Finite(p) => Lp::Finite(2.0 * p),
            Lp::Infinity => Lp::Infinity,
        }
    }
}

impl LatticeField {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::invalid(format!(
                "field has {} entries but grid has {} points",
                values.len(),
                grid.points()
            )));
        }
        Ok(LatticeField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        LatticeField { grid, values: vec![C64::new(0.0, 0.0); grid.points()] }
    }

    pub fn constant(grid: GridSpec, c: C64) -> Self {
        LatticeField { grid, values: vec![c; grid.points()] }
    }

    /// Sample `f` at the signed coordinate of every site.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.points()).map(|i| f(grid.coord(i))).collect();
        LatticeField { grid, values }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        LatticeField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &LatticeField) -> Result<Self> {
        ensure_same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(LatticeField { grid: self.grid, values })
    }

    pub fn sub(&self, other: &LatticeField) -> Result<Self> {
        ensure_same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(LatticeField { grid: self.grid, values })
    }

    /// Pointwise product `self * other`.
    pub fn pointwise_mul(&self, other: &LatticeField) -> Result<Self> {
        ensure_same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(LatticeField { grid: self.grid, values })
    }

    /// The real field `|f|^2`.
    pub fn abs_squared(&self) -> Self {
        self.map(|v| C64::new(v.norm_sqr(), 0.0))
    }

    /// Discrete inner product `Σ h conj(f) g` (conjugate-linear in `self`).
    pub fn inner(&self, other: &LatticeField) -> Result<C64> {
        ensure_same_grid(self, other)?;
        let h = self.grid.spacing();
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * h)
    }

    /// Discrete `L^p` norm `(Σ h |f|^p)^{1/p}`; the max norm for `p = ∞`.
    pub fn lp_norm(&self, p: Lp) -> Result<f64> {
        match p.validate()? {
            Lp::Infinity => Ok(self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)),
            Lp::Finite(p) => {
                let h = self.grid.spacing();
                if p == 2.0 {
                    // common case, avoids powf
                    let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
                    Ok((h * s).sqrt())
                } else {
                    let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
                    Ok((h * s).powf(1.0 / p))
                }
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(Lp::Finite(2.0)).expect("p=2 is valid")
    }

    /// Periodic second difference `(f(x+h) - 2 f(x) + f(x-h)) / h^2`.
    pub fn laplacian(&self) -> Self {
        let m = self.grid.points();
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let v = &self.values;
        let values = (0..m)
            .map(|i| (v[(i + 1) % m] - 2.0 * v[i] + v[(i + m - 1) % m]) * inv_h2)
            .collect();
        LatticeField { grid: self.grid, values }
    }

    /// Periodic discrete convolution `(f ⋆ g)(x_i) = Σ_j h f(x_i - x_j) g(x_j)`,
    /// evaluated spectrally.
    pub fn convolve(&self, other: &LatticeField) -> Result<Self> {
        ensure_same_grid(self, other)?;
        let mut a = self.values.clone();
        let mut b = other.values.clone();
        fft_forward(&mut a);
        fft_forward(&mut b);
        for (ak, bk) in a.iter_mut().zip(&b) {
            *ak *= bk;
        }
        fft_inverse(&mut a);
        let h = self.grid.spacing();
        for v in a.iter_mut() {
            *v *= h;
        }
        Ok(LatticeField { grid: self.grid, values: a })
    }

    /// Largest deviation from evenness `max_i |f_i - f_{-i}|`.
    pub fn evenness_defect(&self) -> f64 {
        let m = self.grid.points();
        (0..m)
            .map(|i| (self.values[i] - self.values[(m - i) % m]).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Real parts, validating that imaginary parts are below `tol`.
    pub fn try_real(&self, tol: f64) -> Result<Vec<f64>> {
        if self.max_imag() > tol {
            return Err(Error::invalid(format!(
                "field expected real, max imaginary part {:.3e}",
                self.max_imag()
            )));
        }
        Ok(self.values.iter().map(|v| v.re).collect())
    }
}

pub fn ensure_same_grid(a: &LatticeField, b: &LatticeField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!(
            "fields on different grids: {:?} vs {:?}",
            a.grid, b.grid
        )));
    }
    Ok(())
}

/// Rescaled interaction `v_N(x) = N^{-1+dβ} v(N^β x)` with `d = 1`, sampled at
/// the nearest grid point.  `β = 0` reduces exactly to `v/N`.
pub fn sample_interaction(v_base: &LatticeField, n: u32, beta: f64) -> Result<LatticeField> {
    if n < 1 {
        return Err(Error::invalid("interaction scaling needs N >= 1".to_string()));
    }
    if v_base.evenness_defect() > 1e-12 {
        return Err(Error::invalid(format!(
            "interaction profile must be even, defect {:.3e}",
            v_base.evenness_defect()
        )));
    }
    let grid = v_base.grid();
    let m = grid.points();
    if beta == 0.0 {
        let inv_n = 1.0 / n as f64;
        return Ok(v_base.map(|v| v * inv_n));
    }
    let amplitude = (n as f64).powf(-1.0 + beta);
    let scale = (n as f64).powf(beta);
    let h = grid.spacing();
    // Scaled arguments outside the fundamental domain read zero: the profile
    // is compactly supported, it does not alias around the torus.
    let mut values = Vec::with_capacity(m);
    for i in 0..m {
        let y = scale * grid.coord(i);
        let j = (y / h).round() as i64;
        let v = if 2 * j.abs() <= m as i64 {
            v_base.values()[j.rem_euclid(m as i64) as usize]
        } else {
            C64::new(0.0, 0.0)
        };
        values.push(v * amplitude);
    }
    LatticeField::new(grid, values)
}

thread_local! {
    static FFT_PLANS: RefCell<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>> =
        RefCell::new(HashMap::new());
}

fn with_plans<R>(m: usize, f: impl FnOnce(&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) -> R) -> R {
    FFT_PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        let (fwd, inv) = map.entry(m).or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        });
        f(fwd, inv)
    })
}

/// In-place unnormalized DFT `F_k = Σ_j f_j e^{-2πi kj/M}`.
pub(crate) fn fft_forward(buf: &mut [C64]) {
    with_plans(buf.len(), |fwd, _| fwd.process(buf));
}

/// In-place inverse DFT including the `1/M` factor.
pub(crate) fn fft_inverse(buf: &mut [C64]) {
    let m = buf.len();
    with_plans(m, |_, inv| inv.process(buf));
    let scale = 1.0 / m as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, rng: &mut impl Rng) -> LatticeField {
        let values = (0..grid.points())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        LatticeField::new(grid, values).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = GridSpec::new(2.0, 4).unwrap();
        assert_eq!(g.length(), 2.0);
        assert_eq!(g.points(), 4);
        assert_eq!(g.spacing(), 0.5);

        let g = GridSpec::new(1.0, 2).unwrap();
        assert_eq!(g.spacing(), 0.5);

        assert!(GridSpec::new(1.0, 0).is_err());
        assert!(GridSpec::new(-1.0, 4).is_err());
        assert!(GridSpec::new(0.0, 4).is_err());
    }

    #[test]
    fn signed_coords_cover_the_box() {
        let g = GridSpec::new(2.0, 4).unwrap();
        let coords: Vec<f64> = (0..4).map(|i| g.coord(i)).collect();
        assert_eq!(coords, vec![0.0, 0.5, 1.0, -0.5]);
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let g = GridSpec::new(3.0, 12).unwrap();
        let f = LatticeField::constant(g, C64::new(2.5, -1.0));
        let lap = f.laplacian();
        assert!(lap.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn laplacian_plane_wave_eigenvalue() {
        let g = GridSpec::new(2.0 * std::f64::consts::PI, 8).unwrap();
        let m_mode = 3usize;
        let f = LatticeField::from_fn(g, |x| {
            (C64::i() * 2.0 * std::f64::consts::PI * m_mode as f64 * x / g.length()).exp()
        });
        let lap = f.laplacian();
        let h = g.spacing();
        let lam = -(2.0 / (h * h))
            * (1.0 - (2.0 * std::f64::consts::PI * m_mode as f64 / g.points() as f64).cos());
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a - lam * b).norm() < 1e-10);
        }
    }

    #[test]
    fn laplacian_matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridSpec::new(1.7, 11).unwrap();
        let m = g.points();
        let h2 = g.spacing() * g.spacing();
        let f = random_field(g, &mut rng);
        // dense second-difference matrix applied row by row
        let lap = f.laplacian();
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                let mut k = 0.0;
                if j == i {
                    k -= 2.0;
                }
                if j == (i + 1) % m {
                    k += 1.0;
                }
                if j == (i + m - 1) % m {
                    k += 1.0;
                }
                acc += k / h2 * f.values()[j];
            }
            assert!((acc - lap.values()[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = GridSpec::new(2.0, 4).unwrap();
        let f = LatticeField::constant(g, C64::new(2.0, 0.0));
        let n2 = f.lp_norm(Lp::Finite(2.0)).unwrap();
        assert_relative_eq!(n2, (4.0 * 0.5 * 4.0f64).sqrt(), epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(g, &mut rng);
        let inf = f.lp_norm(Lp::Infinity).unwrap();
        let max = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert_eq!(inf, max);

        assert!(f.lp_norm(Lp::Finite(0.5)).is_err());
    }

    #[test]
    fn lp_norm_matches_extended_precision_sum() {
        // p = 4 against a quad-ish accumulation via two-pass Kahan
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GridSpec::new(5.0, 64).unwrap();
        let f = random_field(g, &mut rng);
        let p = 4.0;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for v in f.values() {
            let term = v.norm().powf(p) * g.spacing();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let oracle = sum.powf(1.0 / p);
        assert_relative_eq!(f.lp_norm(Lp::Finite(p)).unwrap(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn convolution_identity_and_constant() {
        let g = GridSpec::new(2.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gfield = random_field(g, &mut rng);

        // delta at site 0 scaled by 1/h convolves to the identity
        let mut delta = LatticeField::zeros(g);
        delta.values_mut()[0] = C64::new(1.0 / g.spacing(), 0.0);
        let conv = delta.convolve(&gfield).unwrap();
        for (a, b) in conv.values().iter().zip(gfield.values()) {
            assert!((a - b).norm() < 1e-12);
        }

        // constant f picks up the h-weighted sum of g
        let c = C64::new(0.7, 0.2);
        let f = LatticeField::constant(g, c);
        let s: C64 = gfield.values().iter().sum::<C64>() * g.spacing();
        let conv = f.convolve(&gfield).unwrap();
        for v in conv.values() {
            assert!((v - c * s).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = GridSpec::new(3.1, 16).unwrap();
        let f = random_field(g, &mut rng);
        let gf = random_field(g, &mut rng);
        let conv = f.convolve(&gf).unwrap();
        let m = g.points();
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += f.values()[(i + m - j) % m] * gf.values()[j];
            }
            acc *= g.spacing();
            assert!((acc - conv.values()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = LatticeField::zeros(GridSpec::new(1.0, 4).unwrap());
        let b = LatticeField::zeros(GridSpec::new(1.0, 8).unwrap());
        assert!(a.convolve(&b).is_err());
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn interaction_scaling_beta_zero() {
        let g = GridSpec::new(2.0, 8).unwrap();
        let v = LatticeField::constant(g, C64::new(1.0, 0.0));
        let s = sample_interaction(&v, 10, 0.0).unwrap();
        for val in s.values() {
            assert_eq!(val.re, 0.1);
        }
        let s = sample_interaction(&v, 1, 0.0).unwrap();
        assert_eq!(s.values(), v.values());
    }

    #[test]
    fn interaction_scaling_shrinks_support() {
        // box of half-width 1.0 at β = 0.5, N = 4: half-width 0.5, amplitude x 0.5
        let g = GridSpec::new(8.0, 32).unwrap();
        let a = 1.0;
        let v = LatticeField::from_real_fn(g, |x| if x.abs() <= a + 1e-12 { 2.0 } else { 0.0 });
        let s = sample_interaction(&v, 4, 0.5).unwrap();
        let expected =
            LatticeField::from_real_fn(g, |x| if (2.0 * x).abs() <= a + 1e-12 { 1.0 } else { 0.0 });
        for (got, want) in s.values().iter().zip(expected.values()) {
            assert!((got - want).norm() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn interaction_rejects_odd_profiles() {
        let g = GridSpec::new(2.0, 8).unwrap();
        let v = LatticeField::from_real_fn(g, |x| x);
        assert!(sample_interaction(&v, 3, 0.0).is_err());
    }

    #[test]
    fn laplacian_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = GridSpec::new(2.4, 12).unwrap();
        for _ in 0..20 {
            let f = random_field(g, &mut rng);
            let gf = random_field(g, &mut rng);
            let lhs = f.inner(&gf.laplacian()).unwrap();
            let rhs = f.laplacian().inner(&gf).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn lp_norm_absolutely_homogeneous(
            seed in 0u64..1000,
            scale_re in -3.0f64..3.0,
            scale_im in -3.0f64..3.0,
            p_choice in 0usize..5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(2.0, 8).unwrap();
            let f = random_field(g, &mut rng);
            let c = C64::new(scale_re, scale_im);
            let p = [Lp::Finite(1.0), Lp::Finite(1.5), Lp::Finite(2.0), Lp::Finite(4.0), Lp::Infinity][p_choice];
            let lhs = f.scaled(c).lp_norm(p).unwrap();
            let rhs = c.norm() * f.lp_norm(p).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn convolution_commutative_and_bilinear(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(1.9, 10).unwrap();
            let f = random_field(g, &mut rng);
            let gf = random_field(g, &mut rng);
            let hf = random_field(g, &mut rng);
            let fg = f.convolve(&gf).unwrap();
            let gf_ = gf.convolve(&f).unwrap();
            for (a, b) in fg.values().iter().zip(gf_.values()) {
                proptest::prop_assert!((a - b).norm() < 1e-12);
            }
            let a = C64::new(0.3, -0.8);
            let lhs = f.convolve(&gf.scaled(a).add(&hf).unwrap()).unwrap();
            let rhs = fg.scaled(a).add(&f.convolve(&hf).unwrap()).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                proptest::prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn young_inequality_for_mean_field(seed in 0u64..500, r_choice in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(2.0 * std::f64::consts::PI, 16).unwrap();
            let v = random_field(g, &mut rng);
            let phi = random_field(g, &mut rng);
            let density = phi.abs_squared();
            let r = [1.0, 1.5, 2.0, 4.0][r_choice];
            let p = Lp::Finite(2.0 * r);
            let lhs = v.convolve(&density).unwrap().lp_norm(p).unwrap();
            let rhs = v.lp_norm(p).unwrap() * density.lp_norm(Lp::Finite(1.0)).unwrap();
            proptest::prop_assert!(lhs <= rhs + 1e-10);
        }
    }
}
