//! Adaptive Simpson quadrature for the weight-function integrals.

use crate::error::{Error, Result};

/// Integrate `f` over `[a, b]` to the requested relative tolerance.
///
/// Plain adaptive Simpson with interval bisection. The integrands this crate
/// feeds it (Karamata representation integrands, admissibility tails) are
/// smooth and positive, so no special singularity handling is needed.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut depth_exceeded = false;
    let v = recurse(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rel_tol * whole.abs().max(1e-300),
        60,
        &mut depth_exceeded,
    );
    if depth_exceeded || !v.is_finite() {
        return Err(Error::Numeric(format!(
            "quadrature did not converge on [{a}, {b}]"
        )));
    }
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    exceeded: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *exceeded = true;
        return left + right;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, exceeded)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, exceeded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn log_integrand() {
        // int_1^e ds/s = 1
        let v = adaptive_simpson(&|s| 1.0 / s, 1.0, std::f64::consts::E, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(adaptive_simpson(&|x| x, 1.0, 0.0, 1e-10).is_err());
    }
}
