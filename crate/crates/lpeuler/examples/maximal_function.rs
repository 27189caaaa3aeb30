//! The discrete Hardy-Littlewood maximal operator: domination of the field,
//! the band-kernel majorant bound, and the Fefferman-Stein vector
//! inequality.
//!
//! ```bash
//! cargo run --release --example maximal_function
//! ```

use lpeuler::calculus::{fefferman_stein_pair, stein_majorant_mass, MaximalOperator};
use lpeuler::field::{FrequencyGrid, SpectralField, TWO_PI};
use lpeuler::lp::build_partition;

fn main() -> lpeuler::Result<()> {
    let grid = FrequencyGrid::new(64, TWO_PI)?;
    let part = build_partition(&grid)?;
    let op = MaximalOperator::new(&grid, MaximalOperator::DEFAULT_RADII);

    // constants are fixed points
    let c = SpectralField::from_fn(&grid, |_, _| -2.5);
    let mc = op.apply(&c);
    println!("M(const -2.5): min {:.6}, max {:.6}",
        mc.iter().cloned().fold(f64::MAX, f64::min),
        mc.iter().cloned().fold(f64::MIN, f64::max));

    // pointwise domination M f >= |f|
    let f = SpectralField::random(&grid, 2.0, 3);
    let phys = f.to_physical();
    let mf = op.apply(&f);
    let worst = phys
        .iter()
        .zip(&mf)
        .map(|(v, m)| v.abs() - m)
        .fold(f64::MIN, f64::max);
    println!("max(|f| - M f) over the grid: {worst:.3e} (<= 0)");

    // band kernels are dominated by the maximal function times the mass of
    // their radial majorant
    let mut mass: f64 = 0.0;
    for j in -1..=part.j_max() {
        mass = mass.max(stein_majorant_mass(&part, j)?);
    }
    let mut ratio = 0.0f64;
    for j in -1..=part.j_max() {
        let band = part.delta_j(&f, j)?.to_physical();
        for (v, m) in band.iter().zip(&mf) {
            if *m > 1e-14 {
                ratio = ratio.max(v.abs() / m);
            }
        }
    }
    println!("sup_j |Delta_j f| / M f: measured {ratio:.4} vs majorant mass {mass:.4}");

    // Fefferman-Stein on a random family
    let family: Vec<SpectralField> = (0..6)
        .map(|k| SpectralField::random(&grid, 2.0, 50 + k))
        .collect();
    let (lhs, rhs) = fefferman_stein_pair(&family, 2.0, 2.0, &op)?;
    println!("Fefferman-Stein (p = q = 2): ||(M f_j)||= {lhs:.5} vs ||(f_j)|| = {rhs:.5} (C = {:.3})", lhs / rhs);
    Ok(())
}
