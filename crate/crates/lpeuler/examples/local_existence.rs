//! The constructive local-existence iteration: uniform bound inside the
//! `T0` horizon, geometric decay of the increments, and convergence toward
//! the nonlinear solver.
//!
//! ```bash
//! cargo run --release --example local_existence
//! ```

use lpeuler::euler::{self, InitialData};
use lpeuler::field::{FrequencyGrid, TWO_PI};
use lpeuler::iteration::{self, IterationConfig, T0Gate};
use lpeuler::lp::build_partition;
use lpeuler::spaces::SpaceSpec;
use lpeuler::weights::SlowlyVaryingWeight;

fn main() -> lpeuler::Result<()> {
    let grid = FrequencyGrid::new(64, TWO_PI)?;
    let part = build_partition(&grid)?;
    let omega0 = euler::initial_vorticity(
        &InitialData::Random {
            slope: 3.0,
            seed: Some(11),
            amp: 0.3,
        },
        &grid,
        0,
    )?;
    let u0 = euler::biot_savart(&omega0)?;

    println!("T0 formula: t0(1, 1) = {}", iteration::t0(1.0, 1.0)?);

    let cfg = IterationConfig {
        n_max: 8,
        t_horizon: 10.0,
        dt: 4e-3,
        cfl: 0.5,
        space: SpaceSpec::besov(2.0, 2.0, 2.0, SlowlyVaryingWeight::log_power(1.0)?)?,
        c_empirical: 0.01,
        enforce_t0: true,
        sample_every: 10,
    };
    let out = iteration::iterate(&u0, &cfg, &part)?;
    match &out.gate {
        T0Gate::Applied { t0 } => println!("T0 gate: horizon {:.4} (T0 = {t0:.4})", out.t_used),
        other => println!("T0 gate: {other:?}"),
    }
    println!("||u0|| = {:.6}; uniform bound threshold 2||u0|| = {:.6}\n", out.u0_norm, 2.0 * out.u0_norm);
    println!("n    sup ||u_n||   delta_n       rho_n     uniform  div residual");
    for r in &out.records {
        println!(
            "{:<4} {:<13.6e} {:<13.6e} {:<9} {:<8} {:<10.3e}",
            r.n,
            r.sup_norm,
            r.delta_n,
            r.rho_n.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
            r.uniform_ok,
            r.max_divergence_residual
        );
    }
    if let Some(rho) = out.contraction_ratio(out.noise_floor()) {
        println!("\ncontraction ratio above the noise floor: {rho:.4}");
    }

    println!("\nconvergence toward the nonlinear solver (sup-t distance in the s-1 norm):");
    for n_max in [2usize, 4, 8] {
        let mut cfg = cfg.clone();
        cfg.n_max = n_max;
        cfg.t_horizon = 0.25;
        cfg.enforce_t0 = false;
        let sup = iteration::convergence_vs_solver(&u0, &cfg, &part)?;
        println!("  n_max = {n_max}: {sup:.4e}");
    }
    Ok(())
}
