//! Track the blow-up functionals along a 2-D Euler run: the gradient chain
//! `||grad u||_inf <= C (||omega_0||_p + ||omega||_(B0-dot,inf,1))`, the
//! running BKM integral, the a priori bound with its window-fitted
//! mechanism constant, and the 2-D global-in-time bound.
//!
//! ```bash
//! cargo run --release --example bkm_tracking
//! ```

use lpeuler::euler::{self, InitialData, RunConfig};
use lpeuler::field::TWO_PI;
use lpeuler::spaces::SpaceSpec;
use lpeuler::weights::SlowlyVaryingWeight;

fn main() -> lpeuler::Result<()> {
    let cfg = RunConfig {
        grid_n: 64,
        domain_l: TWO_PI,
        dt: 5e-3,
        t_end: 2.0,
        cfl: 0.5,
        dealias: true,
        init: InitialData::Random {
            slope: 2.0,
            seed: Some(21),
            amp: 1.0,
        },
        space: SpaceSpec::besov(2.0, 2.0, 2.0, SlowlyVaryingWeight::log_power(1.0)?)?,
        lp_exponents: vec![2.0],
        sample_every: 40,
        seed: 21,
    };
    let series = euler::run(&cfg)?;

    println!("t      ||grad u||  bkm-integrand  int bkm   ||u||_B     apriori     ||w||_B0   global");
    for r in &series.records {
        println!(
            "{:<6.2} {:<11.5} {:<14.5} {:<9.4} {:<11.5} {:<11.5} {:<10.5} {:<10.4}",
            r.t,
            r.grad_u_linf,
            r.bkm_integrand,
            r.bkm_integral,
            r.space_norm,
            r.apriori_bound,
            r.omega_b0,
            r.bkm_bound
        );
    }

    let f = &series.fitted;
    println!("\nfitted constants (first 10% of the run, then frozen):");
    println!("  growth efficiency  {:.4}", f.c_apriori);
    println!("  mechanism constant {:.4} (drives the a priori bound)", f.c_mechanism);
    println!("  BKM chain          {:.4}", f.c_bkm_chain);
    println!("  2-D global bound   {:.4}", f.c_global);
    println!("  reverse BKM        {:.4}", f.c_reverse_bkm);

    series.check_apriori()?;
    series.check_bkm_chain()?;
    series.check_global_bound()?;
    println!("\nall three run-level inequalities hold with their frozen constants.");
    Ok(())
}
