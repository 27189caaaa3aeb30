//! Bony paraproduct decomposition: the identity `fg = T_f g + T_g f +
//! R(f, g)` and the frequency bookkeeping behind it.
//!
//! ```bash
//! cargo run --release --example paraproduct_identity
//! ```

use lpeuler::calculus::{paraproduct, paraproduct_defect};
use lpeuler::field::{FrequencyGrid, SpectralField, TWO_PI};
use lpeuler::lp::build_partition;

fn main() -> lpeuler::Result<()> {
    let grid = FrequencyGrid::new(128, TWO_PI)?;
    let part = build_partition(&grid)?;

    println!("== decomposition identity on random pairs\n");
    for seed in 0..5 {
        let f = SpectralField::random(&grid, 2.0, seed);
        let g = SpectralField::random(&grid, 2.0, 100 + seed);
        let defect = paraproduct_defect(&f, &g, &part)?;
        println!(
            "  seed {seed}: ||fg - (T_f g + T_g f + R)||_inf = {defect:.3e} (scale {:.3})",
            f.linf_norm() * g.linf_norm()
        );
    }

    println!("\n== separated bands: f in band 0, g in band 5\n");
    let f = SpectralField::cosine_mode(&grid, 1, 0, 1.0)?;
    let g = SpectralField::cosine_mode(&grid, 32, 0, 1.0)?;
    let pieces = paraproduct(&f, &g, &part)?;
    println!("  ||T_f g||_inf = {:.4e}  (low f times high g: carries the product)", pieces.t_fg.linf_norm());
    println!("  ||T_g f||_inf = {:.4e}  (empty: g has no low block)", pieces.t_gf.linf_norm());
    println!("  ||R(f,g)||_inf = {:.4e} (empty: bands are 5 apart)", pieces.remainder.linf_norm());

    println!("\n== comparable bands: f, g both at |k| = 8\n");
    let f = SpectralField::cosine_mode(&grid, 8, 0, 1.0)?;
    let g = SpectralField::cosine_mode(&grid, 0, 8, 1.0)?;
    let pieces = paraproduct(&f, &g, &part)?;
    println!("  ||T_f g||_inf = {:.4e}", pieces.t_fg.linf_norm());
    println!("  ||T_g f||_inf = {:.4e}", pieces.t_gf.linf_norm());
    println!("  ||R(f,g)||_inf = {:.4e} (the remainder carries the interaction)", pieces.remainder.linf_norm());
    Ok(())
}
