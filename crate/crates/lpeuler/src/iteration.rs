//! Constructive local-existence iteration.
//!
//! The scheme solves the linearized transport problem
//! `d_t u_n + (u_{n-1} . grad) u_n = -grad p_{n-1}` with initial data
//! `S_n u_0`, starting from `u_0 = p_0 = 0`. Each iterate is advanced with
//! RK4; the advecting field and lagged pressure are read from the stored
//! previous iterate (cubic interpolation at stage midpoints). The linearized
//! system does not preserve incompressibility discretely, so every step ends
//! with a Leray projection whose relative size is recorded rather than
//! hidden.

use crate::error::{Error, Result};
use crate::euler::{self, EulerState};
use crate::field::VectorField;
use crate::lp::DyadicPartition;
use crate::spaces::{self, SpaceSpec};

/// Horizon formula for the uniform bound: given the empirical estimate
/// constant `C` (valid for `0 < C < 5/4`) and the initial norm,
/// `T0 = min{ (5 - 4C) / (16 C ||u0||), ln(5/4) / (2 ||u0||) }`.
pub fn t0(c: f64, u0_norm: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::Domain(format!("T0 needs C > 0, got {c}")));
    }
    if c >= 1.25 {
        return Err(Error::Domain(format!(
            "T0 formula breaks down for C >= 5/4 (got C = {c}); supply an explicit horizon"
        )));
    }
    if u0_norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    let first = (5.0 - 4.0 * c) / (16.0 * c * u0_norm);
    let second = (5.0f64 / 4.0).ln() / (2.0 * u0_norm);
    Ok(first.min(second))
}

/// Stored iterate: velocity snapshots at `t = k dt`.
#[derive(Clone)]
pub struct IterateSeries {
    dt: f64,
    snaps: Vec<VectorField>,
}

impl IterateSeries {
    pub fn constant(u: VectorField, dt: f64, steps: usize) -> Self {
        IterateSeries {
            dt,
            snaps: vec![u; steps + 1],
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.snaps.len() - 1
    }

    pub fn at(&self, k: usize) -> &VectorField {
        &self.snaps[k]
    }

    /// Value at `t = (k + 1/2) dt` by 4-point Lagrange interpolation
    /// (one-sided at the ends), accurate to `O(dt^4)`.
    pub fn at_half(&self, k: usize) -> VectorField {
        let last = self.snaps.len() - 1;
        debug_assert!(k < last || last == 0);
        if last == 0 {
            return self.snaps[0].clone();
        }
        // choose a 4-point stencil containing [k, k+1]
        let (base, t) = if k == 0 {
            (0usize, 0.5)
        } else if k + 2 > last {
            (last - 3, (k - (last - 3)) as f64 + 0.5)
        } else {
            (k - 1, 1.5)
        };
        if self.snaps.len() < 4 {
            // linear fallback for very short series
            let mut out = self.snaps[k].scaled(0.5);
            out.add_assign_scaled(&self.snaps[k + 1], 0.5);
            return out;
        }
        let mut out = VectorField::zeros(self.snaps[0].grid());
        for (i, w) in lagrange4(t).into_iter().enumerate() {
            out.add_assign_scaled(&self.snaps[base + i], w);
        }
        out
    }
}

/// Lagrange weights on nodes `0, 1, 2, 3` evaluated at `t`.
fn lagrange4(t: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut v = 1.0;
        for j in 0..4 {
            if j != i {
                v *= (t - j as f64) / (i as f64 - j as f64);
            }
        }
        *wi = v;
    }
    w
}

/// Outcome of the horizon gate.
#[derive(Debug, Clone, PartialEq)]
pub enum T0Gate {
    /// `T0` computed and applied: the run horizon is `min(T, T0)`.
    Applied { t0: f64 },
    /// The fitted constant falls outside `(0, 5/4)`, so the formula does not
    /// apply and the user horizon is used as-is.
    Inapplicable { reason: String },
    /// Gating was not requested.
    NotRequested,
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub n_max: usize,
    /// Requested horizon `T` (possibly shortened by the `T0` gate).
    pub t_horizon: f64,
    pub dt: f64,
    pub cfl: f64,
    pub space: SpaceSpec,
    /// Empirical a priori constant used in the `T0` formula.
    pub c_empirical: f64,
    pub enforce_t0: bool,
    pub sample_every: usize,
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.t_horizon > 0.0) {
            return Err(Error::Config("dt and t_horizon must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-iterate measurements.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub n: usize,
    /// `sup_t ||u_n(t)||` in the configured space.
    pub sup_norm: f64,
    /// `delta_n = sup_t ||u_n - u_{n-1}||` in the `s - 1` space.
    pub delta_n: f64,
    /// `delta_n / delta_{n-1}` (from `n = 2` on).
    pub rho_n: Option<f64>,
    /// `sup_norm <= 2 ||u_0||`.
    pub uniform_ok: bool,
    /// Largest per-step `||div u||_inf / ||grad u||_inf` before projection.
    pub max_divergence_residual: f64,
}

#[derive(Clone)]
pub struct IterationOutput {
    pub records: Vec<IterateRecord>,
    pub t_used: f64,
    pub gate: T0Gate,
    pub u0_norm: f64,
    /// The final iterate, for comparisons against the nonlinear solver.
    pub final_series: IterateSeries,
}

impl IterationOutput {
    /// Largest contraction ratio `delta_{n+1} / delta_n` over pairs whose
    /// denominator sits above the noise floor. Once the increments reach
    /// machine level the raw ratios are quotients of roundoff and carry no
    /// information, so those pairs are skipped. `None` when every increment
    /// is already at the floor (the sequence converged immediately).
    pub fn contraction_ratio(&self, floor: f64) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for pair in self.records.windows(2) {
            if pair[0].delta_n > floor {
                let rho = pair[1].delta_n / pair[0].delta_n;
                worst = Some(worst.map_or(rho, |w: f64| w.max(rho)));
            }
        }
        worst
    }

    /// Default noise floor used by the contraction measurements.
    pub fn noise_floor(&self) -> f64 {
        1e-12 * self.u0_norm.max(1e-30)
    }
}

/// Advance one linearized iterate over the whole horizon.
///
/// Returns the new series and the largest relative divergence residual seen
/// before the per-step Leray projection.
pub fn linearized_advance(
    prev: &IterateSeries,
    init: VectorField,
    dt: f64,
    steps: usize,
    cfl: f64,
) -> Result<(IterateSeries, f64)> {
    let grid = init.grid().clone();
    let mut snaps = Vec::with_capacity(steps + 1);
    let mut u = init;
    snaps.push(u.clone());
    let mut max_residual = 0.0f64;
    let mut force_end = pressure_force_of(prev.at(0))?;
    for k in 0..steps {
        let va = prev.at(k);
        let limit = euler::cfl_dt_limit(va, cfl);
        if dt > limit {
            return Err(Error::StepSize {
                dt,
                suggested: limit,
            });
        }
        let vm = prev.at_half(k);
        let vb = prev.at(k + 1);
        let force_a = force_end;
        let force_m = pressure_force_of(&vm)?;
        let force_b = pressure_force_of(vb)?;

        let rhs = |v: &VectorField, force: &VectorField, w: &VectorField| -> Result<VectorField> {
            let mut out = VectorField::new(
                v.advect(w.x())?.scaled(-1.0),
                v.advect(w.y())?.scaled(-1.0),
            );
            out.add_assign_scaled(force, 1.0);
            Ok(out)
        };

        let k1 = rhs(va, &force_a, &u)?;
        let mut y = u.clone();
        y.add_assign_scaled(&k1, 0.5 * dt);
        let k2 = rhs(&vm, &force_m, &y)?;
        let mut y = u.clone();
        y.add_assign_scaled(&k2, 0.5 * dt);
        let k3 = rhs(&vm, &force_m, &y)?;
        let mut y = u.clone();
        y.add_assign_scaled(&k3, dt);
        let k4 = rhs(vb, &force_b, &y)?;

        u.add_assign_scaled(&k1, dt / 6.0);
        u.add_assign_scaled(&k2, dt / 3.0);
        u.add_assign_scaled(&k3, dt / 3.0);
        u.add_assign_scaled(&k4, dt / 6.0);
        if !u.is_finite() {
            return Err(Error::Numeric(format!(
                "linearized iterate lost finiteness at step {k}"
            )));
        }

        let grad = u.grad_linf();
        if grad > 0.0 {
            max_residual = max_residual.max(u.divergence().linf_norm() / grad);
        }
        u = u.leray_project();
        snaps.push(u.clone());
        force_end = force_b;
    }
    let _ = grid;
    Ok((IterateSeries { dt, snaps }, max_residual))
}

fn pressure_force_of(v: &VectorField) -> Result<VectorField> {
    if v.grad_linf() == 0.0 {
        return Ok(VectorField::zeros(v.grid()));
    }
    euler::pressure_force(v)
}

/// Run the full approximating sequence.
pub fn iterate(
    u0: &VectorField,
    cfg: &IterationConfig,
    part: &DyadicPartition,
) -> Result<IterationOutput> {
    cfg.validate()?;
    let u0 = u0.leray_project();
    let u0_norm = spaces::norm_vector(&u0, &cfg.space, part)?;

    let (t_used, gate) = if cfg.enforce_t0 {
        match t0(cfg.c_empirical, u0_norm) {
            Ok(t0v) => (cfg.t_horizon.min(t0v), T0Gate::Applied { t0: t0v }),
            Err(e) => (
                cfg.t_horizon,
                T0Gate::Inapplicable {
                    reason: e.to_string(),
                },
            ),
        }
    } else {
        (cfg.t_horizon, T0Gate::NotRequested)
    };
    let steps = (t_used / cfg.dt).round().max(1.0) as usize;
    let t_used = steps as f64 * cfg.dt;

    let spec_lower = cfg.space.shifted(-1.0);
    let sample_ks: Vec<usize> = (0..=steps)
        .filter(|k| k % cfg.sample_every == 0 || *k == steps)
        .collect();

    let mut prev = IterateSeries::constant(VectorField::zeros(u0.grid()), cfg.dt, steps);
    let mut records: Vec<IterateRecord> = Vec::with_capacity(cfg.n_max);
    let mut prev_delta: Option<f64> = None;
    let mut final_series = prev.clone();
    for n in 1..=cfg.n_max {
        let init = part.s_n_vec(&u0, n as i32)?;
        let (series, max_residual) = linearized_advance(&prev, init, cfg.dt, steps, cfg.cfl)?;
        let mut sup_norm = 0.0f64;
        let mut delta_n = 0.0f64;
        for &k in &sample_ks {
            sup_norm = sup_norm.max(spaces::norm_vector(series.at(k), &cfg.space, part)?);
            let diff = series.at(k).sub(prev.at(k));
            delta_n = delta_n.max(spaces::norm_vector(&diff, &spec_lower, part)?);
        }
        let rho_n = prev_delta.map(|d| if d > 0.0 { delta_n / d } else { 0.0 });
        records.push(IterateRecord {
            n,
            sup_norm,
            delta_n,
            rho_n,
            uniform_ok: sup_norm <= 2.0 * u0_norm * (1.0 + 1e-9),
            max_divergence_residual: max_residual,
        });
        prev_delta = Some(delta_n);
        prev = series.clone();
        final_series = series;
    }
    Ok(IterationOutput {
        records,
        t_used,
        gate,
        u0_norm,
        final_series,
    })
}

/// `sup_t ||u^(n_max) - u_euler||` in the `s - 1` space, comparing the last
/// iterate against the nonlinear solver run on the same data and steps.
pub fn convergence_vs_solver(
    u0: &VectorField,
    cfg: &IterationConfig,
    part: &DyadicPartition,
) -> Result<f64> {
    let out = iterate(u0, cfg, part)?;
    let spec_lower = cfg.space.shifted(-1.0);
    let steps = out.final_series.steps();
    let mut state = EulerState::new(u0.leray_project().curl());
    let mut sup = {
        let u_euler = euler::biot_savart(&state.omega)?;
        let diff = out.final_series.at(0).sub(&u_euler);
        spaces::norm_vector(&diff, &spec_lower, part)?
    };
    for k in 1..=steps {
        state = euler::step(&state, cfg.dt, cfg.cfl)?;
        if k % cfg.sample_every == 0 || k == steps {
            let u_euler = euler::biot_savart(&state.omega)?;
            let diff = out.final_series.at(k).sub(&u_euler);
            sup = sup.max(spaces::norm_vector(&diff, &spec_lower, part)?);
        }
    }
    Ok(sup)
}
