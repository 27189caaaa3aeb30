//! Weighted Besov and Triebel-Lizorkin norms: single modes, random fields,
//! the inhomogeneous-norm equivalence, and the embedding into
//! `B^{s-d/p}_{inf,1}`.
//!
//! ```bash
//! cargo run --release --example besov_norms
//! ```

use lpeuler::field::{FrequencyGrid, SpectralField, TWO_PI};
use lpeuler::lp::build_partition;
use lpeuler::spaces::{self, SpaceSpec};
use lpeuler::weights::SlowlyVaryingWeight;

fn main() -> lpeuler::Result<()> {
    let grid = FrequencyGrid::new(128, TWO_PI)?;
    let part = build_partition(&grid)?;
    let weight = SlowlyVaryingWeight::log_power(1.0)?;

    println!("== norms of cos(4x) across spaces\n");
    let f = SpectralField::cosine_mode(&grid, 4, 0, 1.0)?;
    for text in [
        "B:s=2,p=2,q=2",
        "B:s=1,p=4,q=1.5",
        "B:s=0,p=inf,q=inf",
        "F:s=2,p=2,q=2",
        "B:s=2,p=2,q=2,hom",
    ] {
        let spec = SpaceSpec::parse(text, weight.clone())?;
        println!("  {text:<22} -> {:.8}", spaces::norm(&f, &spec, &part)?);
    }

    println!("\n== equivalence ||f||_X  vs  ||f||_p + ||f||_X-dot on random fields\n");
    let spec = SpaceSpec::parse("B:s=2,p=2,q=2", weight.clone())?;
    for seed in 0..5 {
        let f = SpectralField::random(&grid, 2.0, seed);
        let (lhs, rhs) = spaces::inhomogeneous_equivalence(&f, &spec, &part)?;
        println!("  seed {seed}: {lhs:.5} vs {rhs:.5} (ratio {:.4})", lhs / rhs);
    }

    println!("\n== embedding B^(2,psi)_(2,2) -> B^1_(inf,1)\n");
    let c = spaces::embedding_constant(&spec, part.j_max())?;
    println!("  Hoelder constant: {:.6} (tail contribution {:.2e})", c.value, c.tail);
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let f = SpectralField::random(&grid, 2.0, 100 + seed);
        let (_, _, ratio) = spaces::verify_embedding(&f, &spec, &part)?;
        worst = worst.max(ratio);
    }
    println!("  max lhs/rhs over 50 random fields: {worst:.4} (<= 1 by Hoelder)");

    println!("\n== BKM integrand ||omega||_(B0-dot,inf,1)\n");
    let taylor = SpectralField::from_fn(&grid, |x, y| x.sin() * y.sin());
    println!("  sin x sin y: {:.6}", spaces::bkm_integrand(&taylor, &part)?);
    Ok(())
}
