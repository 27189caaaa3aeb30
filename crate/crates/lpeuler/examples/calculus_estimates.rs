//! Run the inequality-verification suites at desk scale and print the
//! empirical constants: Leibniz rules, commutator estimates (both
//! right-hand variants), the remainder bound, and multiplier theorems.
//!
//! ```bash
//! cargo run --release --example calculus_estimates
//! ```

use lpeuler::calculus::{run_suite_sweep, SuiteId, SuiteParams};
use lpeuler::spaces::SpaceSpec;
use lpeuler::weights::SlowlyVaryingWeight;

fn main() -> lpeuler::Result<()> {
    let spec = SpaceSpec::besov(2.0, 2.0, 2.0, SlowlyVaryingWeight::log_power(1.0)?)?;
    let params = SuiteParams::new(8, 64, 1, spec);
    let grids = [64usize, 128];

    println!("suites over grids {grids:?}, 8 samples each\n");
    println!("{:<36} {:>12} {:>14}", "estimate", "constant", "sweep spread");
    for id in [
        SuiteId::Leibniz,
        SuiteId::CommutatorBesov,
        SuiteId::CommutatorTl,
        SuiteId::Remainder,
        SuiteId::Multiplier,
        SuiteId::Embedding,
        SuiteId::Bernstein,
    ] {
        for report in run_suite_sweep(id, &params, &grids)? {
            println!(
                "{:<36} {:>12.4} {:>14.3}",
                report.estimate_id,
                report.empirical_constant(),
                report.sweep_spread()
            );
        }
    }
    println!("\nconstants are reported, never asserted against theory;");
    println!("what matters is that they are finite and stable under refinement.");
    Ok(())
}
