//! Coupled N-body + Hartree runs, the bound-check suite, and sweeps over the
//! particle number.

use std::path::Path;
use std::sync::Arc;

use mflab_core::counting::{
    adapted_basis, counting_spectrum, density_distance, reduced_density, DensityNorm, WeightSpec,
};
use mflab_core::error::{Error as CoreError, Result as CoreResult};
use mflab_core::fock::{
    enumerate_basis, one_defect_state, product_state, FockBasis, HamiltonianSpec, ManyBodyState,
    SchroedingerPropagator,
};
use mflab_core::lattice::{sample_interaction, LatticeField};
use mflab_core::meanfield::{hartree_step, Orbital, TrapProtocol};
use mflab_core::validation::{alpha_derivative_check, c_phi, gamma, gronwall_bound, BoundCheck};

use crate::config::{ExperimentConfig, InitialState};
use crate::report::{
    save_series, save_weight_series, CheckSummary, DerivativeSummary, RunReport, SeriesRow,
    SeriesTable, SweepEntry, SweepReport, WeightAlphaSummary,
};

/// Everything a single run produces before persistence.
pub struct RunOutcome {
    pub report: RunReport,
    pub series: SeriesTable,
    pub weight_names: Vec<String>,
    pub weight_columns: Vec<Vec<f64>>,
}

struct PreparedSystem {
    grid: mflab_core::lattice::GridSpec,
    v_base: LatticeField,
    v_scaled: LatticeField,
    trap: TrapProtocol,
    phi0: Orbital,
    basis: Arc<FockBasis>,
    psi0: ManyBodyState,
}

fn prepare(config: &ExperimentConfig, particles: u32) -> CoreResult<PreparedSystem> {
    let grid = config.grid_spec()?;
    let v_base = config.base_interaction(grid);
    let v_scaled = sample_interaction(&v_base, particles, config.interaction.beta)?;
    let trap = config.trap_protocol(grid)?;
    let phi0 = Orbital::normalized(config.initial_orbital_field(grid)?)?;
    let basis = Arc::new(enumerate_basis(grid.points(), particles)?);
    let psi0 = match config.initial.state {
        InitialState::Product | InitialState::Custom => product_state(&phi0, &basis)?,
        InitialState::OneDefect => {
            let ab = adapted_basis(&phi0);
            one_defect_state(&phi0, &ab.orbital(1)?, &basis)?
        }
    };
    Ok(PreparedSystem { grid, v_base, v_scaled, trap, phi0, basis, psi0 })
}

struct RawSeries {
    times: Vec<f64>,
    alphas: Vec<f64>,
    gammas: Vec<f64>,
    c_t: Vec<Vec<f64>>, // per r
    op_distance: Vec<f64>,
    trace_distance: Vec<f64>,
    nbody_drift: Vec<f64>,
    hartree_drift: Vec<f64>,
    energy: Vec<f64>,
    weight_alphas: Vec<Vec<f64>>, // per configured weight
    completeness: Vec<BoundCheck>,
    distance_bounds: Vec<BoundCheck>,
    identity_checks: Vec<BoundCheck>,
}

fn evolve_and_sample(
    sys: &PreparedSystem,
    config: &ExperimentConfig,
    particles: u32,
    dt: f64,
    sample_every: usize,
) -> CoreResult<RawSeries> {
    let steps = {
        let ratio = config.time.t_final / dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "t_final/dt = {ratio} is not an integer within tolerance"
            )));
        }
        ratio.round() as usize
    };
    let spec = HamiltonianSpec {
        grid: sys.grid,
        v_scaled: sys.v_scaled.clone(),
        trap: sys.trap.clone(),
        particles,
    };
    let prop = SchroedingerPropagator::new(&spec, &sys.basis)?;
    let weights = config.weight_specs(particles)?;
    let lin = WeightSpec::linear(particles);
    let scheme = config.scheme();

    let mut raw = RawSeries {
        times: Vec::new(),
        alphas: Vec::new(),
        gammas: Vec::new(),
        c_t: vec![Vec::new(); config.r_values.len()],
        op_distance: Vec::new(),
        trace_distance: Vec::new(),
        nbody_drift: Vec::new(),
        hartree_drift: Vec::new(),
        energy: Vec::new(),
        weight_alphas: vec![Vec::new(); weights.len()],
        completeness: Vec::new(),
        distance_bounds: Vec::new(),
        identity_checks: Vec::new(),
    };

    let mut psi = sys.psi0.clone();
    let mut phi = sys.phi0.clone();
    let mut t = 0.0;
    for step in 0..=steps {
        if step % sample_every == 0 || step == steps {
            let spectrum = counting_spectrum(&psi, &phi)?;
            let alpha_lin = spectrum.weighted_sum(&lin)?;
            let g = gamma(&psi, &phi, &sys.v_scaled)?;
            let mu = reduced_density(&psi)?;
            let op = density_distance(&mu, &phi, DensityNorm::Operator);
            let tr = density_distance(&mu, &phi, DensityNorm::Trace);
            let fraction = mu.expectation(&phi);

            raw.times.push(t);
            raw.alphas.push(alpha_lin);
            raw.gammas.push(g);
            for (slot, &r) in config.r_values.iter().enumerate() {
                raw.c_t[slot].push(10.0 * c_phi(&sys.v_base, &phi, r)?);
            }
            raw.op_distance.push(op);
            raw.trace_distance.push(tr);
            raw.nbody_drift.push((psi.norm() - 1.0).abs());
            raw.hartree_drift.push((phi.field().l2_norm() - 1.0).abs());
            raw.energy.push(prop.hamiltonian_at(t).expectation(psi.coeffs()));
            for (slot, (_, w)) in weights.iter().enumerate() {
                raw.weight_alphas[slot].push(spectrum.weighted_sum(w)?);
            }
            raw.completeness.push(BoundCheck::new(t, (spectrum.total() - 1.0).abs(), 0.0, 1e-10));
            raw.distance_bounds.push(BoundCheck::new(
                t,
                op,
                2.0 * alpha_lin.max(0.0).sqrt() + 2.0 * alpha_lin,
                1e-9,
            ));
            raw.identity_checks.push(BoundCheck::new(
                t,
                (1.0 - fraction - alpha_lin).abs(),
                0.0,
                1e-10,
            ));
        }
        if step < steps {
            psi = prop.step(&psi, t, dt)?;
            phi = hartree_step(&phi, &sys.trap, &sys.v_base, t, dt, scheme)?;
            t = (step + 1) as f64 * dt;
        }
    }
    Ok(raw)
}

/// Run one experiment at a fixed particle number; nothing is written.
pub fn run_single(config: &ExperimentConfig, particles: u32) -> CoreResult<RunOutcome> {
    config.validate()?;
    let sys = prepare(config, particles)?;
    let raw = evolve_and_sample(&sys, config, particles, config.time.dt, config.time.sample_every)?;

    // Grönwall envelope per r on the run's own time grid
    let alpha0 = raw.alphas[0];
    let mut gronwall = Vec::with_capacity(config.r_values.len());
    for c_series in &raw.c_t {
        gronwall.push(gronwall_bound(alpha0, c_series, &raw.times, particles)?);
    }

    let inv_n = 1.0 / particles as f64;
    let mut lemma2_checks = Vec::new();
    let mut theorem1_checks = Vec::new();
    for i in 0..raw.times.len() {
        for slot in 0..config.r_values.len() {
            lemma2_checks.push(BoundCheck::new(
                raw.times[i],
                raw.gammas[i].abs(),
                raw.c_t[slot][i] * (raw.alphas[i] + inv_n),
                1e-9,
            ));
            theorem1_checks.push(BoundCheck::new(
                raw.times[i],
                raw.alphas[i],
                gronwall[slot][i],
                1e-6,
            ));
        }
    }

    let mut checks = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let c = &config.checks;
    checks.push(if c.lemma2 {
        CheckSummary::from_checks("lemma2", &lemma2_checks)
    } else {
        CheckSummary::disabled("lemma2")
    });
    checks.push(if c.theorem1 {
        CheckSummary::from_checks("theorem1", &theorem1_checks)
    } else {
        CheckSummary::disabled("theorem1")
    });
    if c.lemma1 {
        checks.push(CheckSummary::from_checks("completeness", &raw.completeness));
        checks.push(CheckSummary::from_checks("lemma1a_distance", &raw.distance_bounds));
        checks.push(CheckSummary::from_checks("condensation_identity", &raw.identity_checks));
    } else {
        checks.push(CheckSummary::disabled("completeness"));
        checks.push(CheckSummary::disabled("lemma1a_distance"));
        checks.push(CheckSummary::disabled("condensation_identity"));
    }
    if c.conservation {
        let nbody: Vec<BoundCheck> = raw
            .times
            .iter()
            .zip(&raw.nbody_drift)
            .map(|(&t, &d)| BoundCheck::new(t, d, 1e-8, 0.0))
            .collect();
        checks.push(CheckSummary::from_checks("nbody_norm", &nbody));
        let hartree: Vec<BoundCheck> = raw
            .times
            .iter()
            .zip(&raw.hartree_drift)
            .map(|(&t, &d)| BoundCheck::new(t, d, 1e-8, 0.0))
            .collect();
        checks.push(CheckSummary::from_checks("hartree_norm", &hartree));
        if sys.trap.is_static() {
            let e0 = raw.energy[0];
            let scale = e0.abs().max(1.0);
            let energy: Vec<BoundCheck> = raw
                .times
                .iter()
                .zip(&raw.energy)
                .map(|(&t, &e)| BoundCheck::new(t, (e - e0).abs() / scale, 1e-8, 0.0))
                .collect();
            checks.push(CheckSummary::from_checks("energy", &energy));
        } else {
            checks.push(CheckSummary::disabled("energy"));
        }
    } else {
        checks.push(CheckSummary::disabled("nbody_norm"));
        checks.push(CheckSummary::disabled("hartree_norm"));
        checks.push(CheckSummary::disabled("energy"));
    }
    if raw.nbody_drift.iter().any(|&d| d > 1e-9) {
        warnings.push("N-body norm drift exceeded 1e-9".to_string());
    }

    // optional step-halving consistency check of the counting derivative
    let derivative = if c.derivative {
        let fine = evolve_and_sample(&sys, config, particles, config.time.dt / 2.0, 1)?;
        let coarse = if config.time.sample_every == 1 {
            (raw.times.clone(), raw.alphas.clone(), raw.gammas.clone())
        } else {
            let dense = evolve_and_sample(&sys, config, particles, config.time.dt, 1)?;
            (dense.times, dense.alphas, dense.gammas)
        };
        let check = alpha_derivative_check(
            (&coarse.0, &coarse.1, &coarse.2),
            (&fine.times, &fine.alphas, &fine.gammas),
        )?;
        Some(DerivativeSummary {
            coarse_dt: check.coarse_dt,
            fine_dt: check.fine_dt,
            coarse_max_residual: check.coarse_max_residual,
            fine_max_residual: check.fine_max_residual,
            ratio: check.ratio,
            passed: check.passed,
        })
    } else {
        None
    };

    let rows: Vec<SeriesRow> = (0..raw.times.len())
        .map(|i| SeriesRow {
            time: raw.times[i],
            alpha: raw.alphas[i],
            gamma: raw.gammas[i],
            c_t: raw.c_t.iter().map(|s| s[i]).collect(),
            gronwall: gronwall.iter().map(|s| s[i]).collect(),
            op_distance: raw.op_distance[i],
            trace_distance: raw.trace_distance[i],
            nbody_norm_drift: raw.nbody_drift[i],
            hartree_norm_drift: raw.hartree_drift[i],
            energy: raw.energy[i],
        })
        .collect();
    let series = SeriesTable { r_values: config.r_values.clone(), rows };

    let weights = config.weight_specs(particles)?;
    let weight_names: Vec<String> = weights.iter().map(|(n, _)| n.clone()).collect();
    let weight_alphas: Vec<WeightAlphaSummary> = weight_names
        .iter()
        .zip(&raw.weight_alphas)
        .map(|(name, series)| WeightAlphaSummary {
            name: name.clone(),
            final_alpha: *series.last().unwrap(),
            max_alpha: series.iter().copied().fold(0.0, f64::max),
        })
        .collect();

    let derivative_passed = derivative.as_ref().map(|d| d.passed).unwrap_or(true);
    let passed = checks.iter().all(|c| c.passed) && derivative_passed;
    let report = RunReport {
        config: config.with_particles(particles),
        particles,
        basis_dimension: sys.basis.dimension(),
        r_values: config.r_values.clone(),
        alpha0,
        max_alpha: raw.alphas.iter().copied().fold(0.0, f64::max),
        final_alpha: *raw.alphas.last().unwrap(),
        weight_alphas,
        checks,
        derivative,
        warnings,
        passed,
    };

    Ok(RunOutcome {
        report,
        series,
        weight_names,
        weight_columns: raw.weight_alphas,
    })
}

/// Run and persist a single experiment into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, particles: u32, dir: &Path) -> anyhow::Result<RunReport> {
    let outcome = run_single(config, particles).map_err(|e| anyhow::anyhow!(e.to_string()))?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(crate::report::CONFIG_FILE), config.with_particles(particles).to_toml_string())?;
    save_series(dir, &outcome.series)?;
    if outcome.weight_names.len() > 1 {
        save_weight_series(
            dir,
            &outcome.series.times(),
            &outcome.weight_names,
            &outcome.weight_columns,
        )?;
    }
    outcome.report.save(dir)?;
    Ok(outcome.report)
}

fn slope_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let dof = (xs.len().max(3) - 2) as f64;
    let se = (residual / dof / sxx).sqrt();
    (slope, se)
}

/// Sweep over the configured particle numbers; each run lands in `n<N>/`.
pub fn sweep_to_dir(config: &ExperimentConfig, dir: &Path, jobs: usize) -> anyhow::Result<SweepReport> {
    let particle_list = config.particles.list();
    if particle_list.is_empty() {
        anyhow::bail!("invalid argument: sweep needs a nonempty particle list");
    }
    config.validate().map_err(|e| anyhow::anyhow!(e.to_string()))?;
    std::fs::create_dir_all(dir)?;

    let run_one = |&n: &u32| -> SweepEntry {
        let sub = dir.join(format!("n{n}"));
        match run_to_dir(config, n, &sub) {
            Ok(report) => {
                let series = crate::report::load_series(&sub).ok();
                let envelope_final = series
                    .as_ref()
                    .and_then(|s| s.rows.last().map(|r| r.gronwall[0]))
                    .unwrap_or(f64::NAN);
                SweepEntry {
                    particles: n,
                    directory: format!("n{n}"),
                    max_alpha: report.max_alpha,
                    envelope_final,
                    within_envelope: report.max_alpha <= envelope_final + 1e-6,
                    passed: report.passed,
                    error: None,
                }
            }
            Err(e) => SweepEntry {
                particles: n,
                directory: format!("n{n}"),
                max_alpha: f64::NAN,
                envelope_final: f64::NAN,
                within_envelope: false,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    };

    let entries: Vec<SweepEntry> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
        pool.install(|| {
            use rayon::prelude::*;
            particle_list.par_iter().map(run_one).collect()
        })
    } else {
        particle_list.iter().map(run_one).collect()
    };

    let good: Vec<&SweepEntry> = entries
        .iter()
        .filter(|e| e.error.is_none() && e.max_alpha.is_finite() && e.max_alpha > 0.0)
        .collect();
    let (slope, band) = if good.len() >= 2 {
        let xs: Vec<f64> = good.iter().map(|e| (e.particles as f64).ln()).collect();
        let ys: Vec<f64> = good.iter().map(|e| e.max_alpha.ln()).collect();
        let (slope, se) = slope_fit(&xs, &ys);
        (slope, (slope - 2.0 * se, slope + 2.0 * se))
    } else {
        (f64::NAN, (f64::NAN, f64::NAN))
    };

    let passed = entries.iter().all(|e| e.passed && e.within_envelope);
    let report = SweepReport { entries, slope, slope_confidence: band, passed };
    report.save(dir)?;
    Ok(report)
}

/// Re-run the bound checks against a persisted series.
pub fn check_report_dir(dir: &Path) -> anyhow::Result<Vec<CheckSummary>> {
    let report = RunReport::load(dir)?;
    let series = crate::report::load_series(dir)?;
    let n = report.particles;
    let inv_n = 1.0 / n as f64;

    // recompute the envelope from the persisted C columns
    let times = series.times();
    let alphas = series.alphas();
    let mut summaries = Vec::new();
    let mut lemma2 = Vec::new();
    let mut theorem1 = Vec::new();
    for (slot, _) in series.r_values.iter().enumerate() {
        let c: Vec<f64> = series.rows.iter().map(|r| r.c_t[slot]).collect();
        let env = gronwall_bound(report.alpha0, &c, &times, n)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        for (i, row) in series.rows.iter().enumerate() {
            if (env[i] - row.gronwall[slot]).abs() > 1e-9 * env[i].abs().max(1.0) {
                anyhow::bail!(
                    "stored Grönwall column deviates from recomputation at t={}",
                    row.time
                );
            }
            lemma2.push(BoundCheck::new(
                row.time,
                row.gamma.abs(),
                row.c_t[slot] * (alphas[i] + inv_n),
                1e-9,
            ));
            theorem1.push(BoundCheck::new(row.time, alphas[i], env[i], 1e-6));
        }
    }
    summaries.push(CheckSummary::from_checks("lemma2", &lemma2));
    summaries.push(CheckSummary::from_checks("theorem1", &theorem1));

    let distance: Vec<BoundCheck> = series
        .rows
        .iter()
        .map(|r| {
            BoundCheck::new(
                r.time,
                r.op_distance,
                2.0 * r.alpha.max(0.0).sqrt() + 2.0 * r.alpha,
                1e-9,
            )
        })
        .collect();
    summaries.push(CheckSummary::from_checks("lemma1a_distance", &distance));

    let norm_checks: Vec<BoundCheck> = series
        .rows
        .iter()
        .map(|r| BoundCheck::new(r.time, r.nbody_norm_drift.max(r.hartree_norm_drift), 1e-8, 0.0))
        .collect();
    summaries.push(CheckSummary::from_checks("conservation", &norm_checks));
    Ok(summaries)
}

/// Build the initial state exactly as a run would; used by tests.
pub fn initial_state(config: &ExperimentConfig, particles: u32) -> CoreResult<ManyBodyState> {
    Ok(prepare(config, particles)?.psi0)
}

/// The scaled interaction a run would use; used by tests.
pub fn scaled_interaction(config: &ExperimentConfig, particles: u32) -> CoreResult<LatticeField> {
    Ok(prepare(config, particles)?.v_scaled)
}

/// Orbital trajectory endpoint sanity helper for tests.
pub fn initial_orbital(config: &ExperimentConfig) -> CoreResult<Orbital> {
    let grid = config.grid_spec()?;
    Orbital::normalized(config.initial_orbital_field(grid)?)
}
