//! Build the dyadic partition of unity and verify its structural
//! properties: the partition identity, band supports, almost-orthogonality,
//! and Bernstein ratios.
//!
//! ```bash
//! cargo run --release --example partition_of_unity
//! ```

use lpeuler::field::{FrequencyGrid, SpectralField, TWO_PI};
use lpeuler::lp::{bernstein_ratio, build_partition};

fn main() -> lpeuler::Result<()> {
    let grid = FrequencyGrid::new(128, TWO_PI)?;
    let part = build_partition(&grid)?;

    println!(
        "grid n = {}, dealias cutoff |k| <= {}, bands j in [{}, {}], clean bands {:?}",
        grid.n(),
        grid.kmax(),
        part.j_min(),
        part.j_max(),
        part.clean_bands()
    );
    println!(
        "partition identity defect:      {:.3e} (inhomogeneous)",
        part.partition_defect()
    );
    println!(
        "                                {:.3e} (homogeneous)",
        part.homogeneous_partition_defect()
    );

    let f = SpectralField::random(&grid, 2.0, 7);
    println!(
        "reconstruction sum_j Delta_j f: {:.3e} coefficient defect",
        part.reconstruction_defect(&f)
    );

    // almost-orthogonality: band energies recover the L^2 mass up to a
    // factor of two
    let total = f.l2_norm().powi(2);
    let mut band_sum = part.low_freq_block(&f).l2_norm().powi(2);
    for j in 0..=part.j_max() {
        band_sum += part.delta_j(&f, j)?.l2_norm().powi(2);
    }
    println!("almost-orthogonality ratio:     {:.6} (must lie in [1/2, 1])", band_sum / total);

    println!("\nBernstein first-derivative ratios per clean band (p = b = 2):");
    for j in part.clean_bands() {
        if j < 1 {
            continue;
        }
        let r = bernstein_ratio(&part, &f, j, 1, 2.0, 2.0)?;
        println!("  j = {j}: ratio {r:.4} (annulus bounds [0.6, 1.667])");
    }
    Ok(())
}
