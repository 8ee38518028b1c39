//! Hartree dynamics of the condensate orbital:
//! `i ∂φ = (-Δ + A^t + v ⋆ |φ|²) φ` with a time-dependent trap.
//!
//! The default propagator is Strang splitting between the spectral kinetic
//! factor (exponentiating the exact second-difference eigenvalues) and a
//! potential phase frozen at the step midpoint.  The half kinetic step acts
//! as the predictor that carries the density to the midpoint, so the scheme
//! is second order and exactly norm-preserving.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{ensure_same_grid, fft_forward, fft_inverse, GridSpec, LatticeField, Lp};

/// Unit-norm single-particle wave function.
#[derive(Debug, Clone)]
pub struct Orbital {
    field: LatticeField,
}

impl Orbital {
    /// Wraps a field, requiring `| ||φ||_2 - 1 | <= 1e-10`.
    pub fn new(field: LatticeField) -> Result<Self> {
        let norm = field.l2_norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Instability(format!(
                "orbital norm {norm} deviates from 1 by {:.3e}",
                (norm - 1.0).abs()
            )));
        }
        Ok(Orbital { field })
    }

    /// Normalizes a field to unit discrete L² norm.
    pub fn normalized(field: LatticeField) -> Result<Self> {
        let norm = field.l2_norm();
        if norm < 1e-300 {
            return Err(Error::invalid("cannot normalize the zero field".to_string()));
        }
        Ok(Orbital { field: field.scaled(C64::new(1.0 / norm, 0.0)) })
    }

    pub fn field(&self) -> &LatticeField {
        &self.field
    }

    pub fn grid(&self) -> GridSpec {
        self.field.grid()
    }

    /// Mode coefficients `c_i = sqrt(h) φ(x_i)`; unit Euclidean norm.
    pub fn mode_coefficients(&self) -> Vec<C64> {
        let sqrt_h = self.field.grid().spacing().sqrt();
        self.field.values().iter().map(|&v| v * sqrt_h).collect()
    }

    /// Discrete L² overlap `⟨self, other⟩`.
    pub fn overlap(&self, other: &Orbital) -> Result<C64> {
        self.field.inner(&other.field)
    }
}

/// How the external trap varies in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapKind {
    Constant,
    /// `A^t = A^0 (1 - t/ramp_time)` for `t < ramp_time`, zero after.
    LinearRampOff,
    /// `A^t = A^0` for `t < ramp_time`, zero after the switch instant.
    Quench,
}

/// Time-dependent external potential `A^t(x)`.
#[derive(Debug, Clone)]
pub struct TrapProtocol {
    kind: TrapKind,
    base_profile: LatticeField,
    ramp_time: f64,
}

impl TrapProtocol {
    pub fn new(kind: TrapKind, base_profile: LatticeField, ramp_time: f64) -> Result<Self> {
        if kind != TrapKind::Constant && !(ramp_time > 0.0) {
            return Err(Error::invalid(format!(
                "ramp/quench traps need ramp_time > 0, got {ramp_time}"
            )));
        }
        Ok(TrapProtocol { kind, base_profile, ramp_time })
    }

    pub fn constant(base_profile: LatticeField) -> Self {
        TrapProtocol { kind: TrapKind::Constant, base_profile, ramp_time: 0.0 }
    }

    pub fn kind(&self) -> TrapKind {
        self.kind
    }

    pub fn base_profile(&self) -> &LatticeField {
        &self.base_profile
    }

    pub fn ramp_time(&self) -> f64 {
        self.ramp_time
    }

    /// Scalar modulation factor at time `t`.
    pub fn factor(&self, t: f64) -> f64 {
        match self.kind {
            TrapKind::Constant => 1.0,
            TrapKind::LinearRampOff => (1.0 - t / self.ramp_time).max(0.0),
            TrapKind::Quench => {
                if t < self.ramp_time {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The trap profile at time `t`.
    pub fn at(&self, t: f64) -> LatticeField {
        self.base_profile.scaled(C64::new(self.factor(t), 0.0))
    }

    /// True if `A^t` is independent of `t`.
    pub fn is_static(&self) -> bool {
        self.kind == TrapKind::Constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Splitting,
    ExplicitRk4,
}

#[derive(Debug, Clone, Copy)]
pub struct HartreeParams {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
}

impl HartreeParams {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if t_final < 0.0 {
            return Err(Error::invalid(format!("t_final must be nonnegative, got {t_final}")));
        }
        let steps = t_final / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::invalid(format!(
                "t_final/dt = {steps} is not an integer within tolerance"
            )));
        }
        Ok(HartreeParams { dt, t_final, scheme })
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Self-consistent potential `v ⋆ |φ|²`; real up to rounding.
pub fn mean_field_potential(phi: &Orbital, v: &LatticeField) -> Result<LatticeField> {
    let conv = v.convolve(&phi.field().abs_squared())?;
    debug_assert!(conv.max_imag() <= 1e-12 * (1.0 + conv.lp_norm(Lp::Infinity).unwrap_or(1.0)));
    Ok(conv)
}

/// Eigenvalues of the discrete `-Δ`, indexed by Fourier mode.
fn kinetic_eigenvalues(grid: GridSpec) -> Vec<f64> {
    let m = grid.points();
    let h = grid.spacing();
    (0..m)
        .map(|k| 2.0 / (h * h) * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos()))
        .collect()
}

fn kinetic_half_step(values: &mut [C64], grid: GridSpec, dt: f64) {
    fft_forward(values);
    for (v, e) in values.iter_mut().zip(kinetic_eigenvalues(grid)) {
        *v *= (C64::new(0.0, -1.0) * e * (dt / 2.0)).exp();
    }
    fft_inverse(values);
}

/// One Strang-splitting step on a raw field (no norm bookkeeping).
pub fn split_step_field(
    field: &LatticeField,
    trap: &TrapProtocol,
    v: &LatticeField,
    t: f64,
    dt: f64,
) -> Result<LatticeField> {
    ensure_same_grid(field, v)?;
    ensure_same_grid(field, trap.base_profile())?;
    let grid = field.grid();
    let mut values = field.values().to_vec();
    kinetic_half_step(&mut values, grid, dt);

    // midpoint potential: trap at t + dt/2, density after the predictor half step
    let half = LatticeField::new(grid, values)?;
    let mut w = trap.at(t + dt / 2.0);
    let density = half.abs_squared();
    let mf = v.convolve(&density)?;
    w = w.add(&mf)?;
    let mut values = half.values().to_vec();
    for (val, wx) in values.iter_mut().zip(w.values()) {
        *val *= (C64::new(0.0, -1.0) * wx.re * dt).exp();
    }

    kinetic_half_step(&mut values, grid, dt);
    LatticeField::new(grid, values)
}

/// One classical RK4 step on a raw field.
pub fn rk4_step_field(
    field: &LatticeField,
    trap: &TrapProtocol,
    v: &LatticeField,
    t: f64,
    dt: f64,
) -> Result<LatticeField> {
    ensure_same_grid(field, v)?;
    ensure_same_grid(field, trap.base_profile())?;
    let rhs = |tau: f64, y: &LatticeField| -> Result<LatticeField> {
        let mut out = y.laplacian().scaled(C64::new(-1.0, 0.0));
        out = out.add(&trap.at(tau).pointwise_mul(y)?)?;
        out = out.add(&v.convolve(&y.abs_squared())?.pointwise_mul(y)?)?;
        Ok(out.scaled(C64::new(0.0, -1.0)))
    };
    let k1 = rhs(t, field)?;
    let k2 = rhs(t + dt / 2.0, &field.add(&k1.scaled(C64::new(dt / 2.0, 0.0)))?)?;
    let k3 = rhs(t + dt / 2.0, &field.add(&k2.scaled(C64::new(dt / 2.0, 0.0)))?)?;
    let k4 = rhs(t + dt, &field.add(&k3.scaled(C64::new(dt, 0.0)))?)?;
    let incr = k1
        .add(&k2.scaled(C64::new(2.0, 0.0)))?
        .add(&k3.scaled(C64::new(2.0, 0.0)))?
        .add(&k4)?
        .scaled(C64::new(dt / 6.0, 0.0));
    field.add(&incr)
}

/// One Hartree step; errors if the norm drifts by more than 1e-6.
pub fn hartree_step(
    phi: &Orbital,
    trap: &TrapProtocol,
    v: &LatticeField,
    t: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Orbital> {
    let next = match scheme {
        Scheme::Splitting => split_step_field(phi.field(), trap, v, t, dt)?,
        Scheme::ExplicitRk4 => rk4_step_field(phi.field(), trap, v, t, dt)?,
    };
    let norm = next.l2_norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Instability(format!(
            "orbital norm drifted by {:.3e} in one step; reduce dt",
            (norm - 1.0).abs()
        )));
    }
    Orbital::new(next)
}

/// Orbital history sampled at every step.
#[derive(Debug, Clone)]
pub struct OrbitalTrajectory {
    times: Vec<f64>,
    orbitals: Vec<Orbital>,
}

impl OrbitalTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn orbitals(&self) -> &[Orbital] {
        &self.orbitals
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }
}

/// Propagate the Hartree equation from `phi0` over `params.t_final`.
pub fn evolve_hartree(
    phi0: &Orbital,
    trap: &TrapProtocol,
    v: &LatticeField,
    params: &HartreeParams,
) -> Result<OrbitalTrajectory> {
    let steps = params.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut orbitals = Vec::with_capacity(steps + 1);
    times.push(0.0);
    orbitals.push(phi0.clone());
    let mut phi = phi0.clone();
    for k in 0..steps {
        let t = k as f64 * params.dt;
        phi = hartree_step(&phi, trap, v, t, params.dt, params.scheme)?;
        times.push((k + 1) as f64 * params.dt);
        orbitals.push(phi.clone());
    }
    Ok(OrbitalTrajectory { times, orbitals })
}

/// `||φ^t||_{2s}` at every sample of a trajectory; `s = ∞` gives the max norm.
pub fn orbital_norm_series(traj: &OrbitalTrajectory, s: Lp) -> Result<Vec<f64>> {
    let p = match s {
        Lp::Finite(s) if s >= 1.0 => Lp::Finite(2.0 * s),
        Lp::Infinity => Lp::Infinity,
        Lp::Finite(s) => {
            return Err(Error::invalid(format!("orbital norm index needs s >= 1, got {s}")))
        }
    };
    traj.orbitals.iter().map(|phi| phi.field().lp_norm(p)).collect()
}

/// `⟨φ, (-Δ + A^t) φ⟩`, the conserved energy of the free evolution.
pub fn linear_energy(phi: &Orbital, trap: &TrapProtocol, t: f64) -> Result<f64> {
    let kinetic = phi.field().inner(&phi.field().laplacian().scaled(C64::new(-1.0, 0.0)))?;
    let potential = phi.field().inner(&trap.at(t).pointwise_mul(phi.field())?)?;
    Ok((kinetic + potential).re)
}

/// Full Hartree energy including the self-interaction term.
pub fn hartree_energy(phi: &Orbital, trap: &TrapProtocol, v: &LatticeField, t: f64) -> Result<f64> {
    let linear = linear_energy(phi, trap, t)?;
    let density = phi.field().abs_squared();
    let mf = v.convolve(&density)?;
    let interaction = 0.5 * mf.inner(&density)?.re;
    Ok(linear + interaction)
}
