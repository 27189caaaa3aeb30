//! Tour of slowly varying weights: evaluation, slow-variation defects,
//! Karamata reconstruction, and `M_r` admissibility.
//!
//! ```bash
//! cargo run --release --example weights_tour
//! ```

use lpeuler::weights::{
    admissibility_integral, is_admissible, KaramataRepresentation, SlowlyVaryingWeight,
};

fn main() -> lpeuler::Result<()> {
    println!("== the log family psi(t) = log^alpha(e + t) - 1\n");
    for alpha in [0.6, 1.0, 2.0] {
        let w = SlowlyVaryingWeight::log_power(alpha)?;
        let values: Vec<String> = [0.0, 1.0, 16.0, 1024.0, 1e6]
            .iter()
            .map(|&t| format!("psi({t:>7}) = {:.4}", w.at(t)))
            .collect();
        println!("alpha = {alpha}: {}", values.join(", "));
    }

    println!("\n== slow variation: |psi(2t)/psi(t) - 1| decays along t = 10^k\n");
    let w = SlowlyVaryingWeight::log_power(1.0)?;
    let grid: Vec<f64> = (2..=8).map(|k| 10f64.powi(k)).collect();
    for (t, d) in grid.iter().zip(w.slow_variation_defect(2.0, &grid)?) {
        println!("t = 10^{:.0}: defect {d:.5}", t.log10());
    }

    println!("\n== Karamata representation\n");
    let rep = KaramataRepresentation::log_power_asymptotic(1.0)?;
    println!("asymptotic (c = 1, eps = 1/log(e+s)): reconstruct/eval flattens:");
    for t in [10.0, 1e2, 1e4, 1e6] {
        println!("  t = {t:>9}: ratio {:.6}", rep.reconstruct(t)? / w.at(t));
    }
    let exact = KaramataRepresentation::log_power_exact(1.0)?;
    println!("exact eps = t psi'/psi: pointwise match:");
    for t in [2.0, 1e3, 1e6] {
        let r = exact.reconstruct(t)?;
        println!("  t = {t:>9}: reconstruct {r:.10}, eval {:.10}", w.at(t));
    }

    println!("\n== admissibility (psi in M_r iff the tail integral converges)\n");
    for (alpha, r) in [(1.0, 2.0), (0.5, 2.0), (3.0, 1.0), (0.4, 2.0)] {
        let w = SlowlyVaryingWeight::log_power(alpha)?;
        let rep = is_admissible(&w, r)?;
        println!("alpha = {alpha}, r = {r}: admissible = {} ({})", rep.admissible, rep.detail);
    }

    let w = SlowlyVaryingWeight::log_power(1.0)?;
    let adm = admissibility_integral(&w, 2.0, 1e8)?;
    println!(
        "\nintegral vs dyadic proxy (alpha = 1, r = 2, t_max = 1e8): {:.6} vs {:.6} (equivalence ratio {:.3})",
        adm.integral,
        adm.dyadic_sum,
        adm.equivalence_ratio()
    );
    Ok(())
}
