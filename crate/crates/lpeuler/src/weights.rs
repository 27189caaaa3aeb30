//! Slowly varying weight functions in the Karamata sense and their
//! admissibility classes `M_r`.
//!
//! A weight `psi: [0, inf) -> [0, inf)` enters the norm of a generalized
//! space through the per-band factor `2^{js} psi(2^j)`. The toolkit ships the
//! closed-form family `psi(t) = log^alpha(e + t) - 1` plus a tabulated
//! fallback (piecewise linear, constant beyond the last sample). Oscillatory
//! slowly varying functions are rejected at construction by the monotonicity
//! check.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

const E: f64 = std::f64::consts::E;

#[derive(Clone, Debug)]
enum WeightFamily {
    /// `psi(t) = log^alpha(e + t) - 1`, `alpha > 0`.
    LogPower { alpha: f64 },
    /// Piecewise-linear interpolation of `(t, psi)` samples; constant beyond
    /// the last sample.
    Tabulated { t: Arc<Vec<f64>>, psi: Arc<Vec<f64>> },
}

/// A non-decreasing slowly varying weight.
#[derive(Clone, Debug)]
pub struct SlowlyVaryingWeight {
    family: WeightFamily,
}

impl SlowlyVaryingWeight {
    pub fn log_power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!(
                "log_power weight needs alpha > 0, got {alpha}"
            )));
        }
        Ok(SlowlyVaryingWeight {
            family: WeightFamily::LogPower { alpha },
        })
    }

    /// Tabulated weight from `(t, psi)` pairs. The `t` values must be
    /// strictly increasing starting at 0, and `psi` must be non-negative,
    /// non-decreasing, and positive from `t >= 1` on.
    pub fn tabulated(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Config("tabulated weight needs at least 2 samples".into()));
        }
        if pairs[0].0 != 0.0 {
            return Err(Error::Config("tabulated weight must start at t = 0".into()));
        }
        let mut ts = Vec::with_capacity(pairs.len());
        let mut ps = Vec::with_capacity(pairs.len());
        for &(t, p) in pairs {
            if !(t.is_finite() && p.is_finite()) || p < 0.0 {
                return Err(Error::Config("tabulated weight has invalid sample".into()));
            }
            if let Some(&last_t) = ts.last() {
                if t <= last_t {
                    return Err(Error::Config("tabulated t values must be strictly increasing".into()));
                }
            }
            if let Some(&last_p) = ps.last() {
                if p < last_p {
                    return Err(Error::Config(
                        "tabulated weight must be non-decreasing (oscillatory weights are rejected)".into(),
                    ));
                }
            }
            ts.push(t);
            ps.push(p);
        }
        // bounded away from zero from t = 1 on
        let w = SlowlyVaryingWeight {
            family: WeightFamily::Tabulated {
                t: Arc::new(ts),
                psi: Arc::new(ps),
            },
        };
        if w.at(1.0) <= 0.0 {
            return Err(Error::Config("tabulated weight must be positive for t >= 1".into()));
        }
        Ok(w)
    }

    /// Constant weight `psi = c` (in `M` but never in `M_r`).
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("constant weight needs c > 0, got {c}")));
        }
        Self::tabulated(&[(0.0, c), (1.0, c)])
    }

    /// The trivial weight `psi = 1`, recovering classical spaces.
    pub fn one() -> Self {
        Self::constant(1.0).expect("1 > 0")
    }

    /// Parse a weight specification string: `log:alpha=<float>` or
    /// `table:<path>` (CSV with header `t,psi`).
    pub fn parse_spec(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("log:") {
            let rest = rest.trim();
            let alpha = rest
                .strip_prefix("alpha=")
                .ok_or_else(|| Error::Parse(format!("expected log:alpha=<float>, got {spec}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad alpha in {spec}: {e}")))?;
            Self::log_power(alpha)
        } else if let Some(path) = spec.strip_prefix("table:") {
            let text = std::fs::read_to_string(path.trim())?;
            Self::from_table_csv(&text)
        } else {
            Err(Error::Parse(format!(
                "weight spec must be log:alpha=<f> or table:<path>, got {spec}"
            )))
        }
    }

    /// Parse the `t,psi` CSV table format.
    pub fn from_table_csv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if i == 0 || (pairs.is_empty() && line.starts_with('t')) {
                let header: Vec<&str> = line.split(',').map(str::trim).collect();
                if header == ["t", "psi"] {
                    continue;
                }
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("bad table row: {line}")));
            }
            let t = cols[0]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad t in row {line}: {e}")))?;
            let p = cols[1]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad psi in row {line}: {e}")))?;
            pairs.push((t, p));
        }
        Self::tabulated(&pairs)
    }

    /// Specification string for config embedding.
    pub fn spec_string(&self) -> String {
        match &self.family {
            WeightFamily::LogPower { alpha } => format!("log:alpha={alpha}"),
            WeightFamily::Tabulated { t, .. } => format!("table:<{} samples>", t.len()),
        }
    }

    pub fn is_log_power(&self) -> Option<f64> {
        match self.family {
            WeightFamily::LogPower { alpha } => Some(alpha),
            WeightFamily::Tabulated { .. } => None,
        }
    }

    /// Evaluate `psi(t)`; `t < 0` is a domain error.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("weight argument must be >= 0, got {t}")));
        }
        Ok(self.at(t))
    }

    /// Evaluate with a trusted non-negative argument.
    pub fn at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.family {
            WeightFamily::LogPower { alpha } => (E + t).ln().powf(*alpha) - 1.0,
            WeightFamily::Tabulated { t: ts, psi } => {
                if t >= *ts.last().unwrap() {
                    return *psi.last().unwrap();
                }
                let i = match ts.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
                    Ok(i) => return psi[i],
                    Err(i) => i,
                };
                // ts[i-1] < t < ts[i]
                let (t0, t1) = (ts[i - 1], ts[i]);
                let (p0, p1) = (psi[i - 1], psi[i]);
                p0 + (p1 - p0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `psi(2^j)`, the per-band weight value.
    pub fn at_dyadic(&self, j: i32) -> f64 {
        self.at(2f64.powi(j))
    }

    /// `|psi(lambda t) / psi(t) - 1|` per grid point. The caller asserts
    /// monotone decay toward 0 along a geometric grid.
    pub fn slow_variation_defect(&self, lambda: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            if t < 1.0 {
                return Err(Error::Domain(format!("defect grid points must be >= 1, got {t}")));
            }
            let denom = self.at(t);
            if denom == 0.0 {
                return Err(Error::Numeric(format!("psi({t}) = 0, defect undefined")));
            }
            out.push((self.at(lambda * t) / denom - 1.0).abs());
        }
        Ok(out)
    }

    /// Measured `C_{lambda,psi}` with `psi(lambda t) <= C psi(t)`, taken as
    /// the sup of the ratio over a geometric grid in `[1/2, 10^8]`. The grid
    /// starts at `1/2` because the dyadic arguments `2^j` reach down to
    /// `j = -1`.
    pub fn lambda_constant(&self, lambda: f64) -> f64 {
        let mut sup: f64 = 0.0;
        let mut t = 0.5f64;
        while t <= 1e8 {
            let denom = self.at(t);
            if denom > 0.0 {
                sup = sup.max(self.at(lambda * t) / denom);
            }
            t *= 1.25;
        }
        sup
    }

    /// Monotonicity on a sample grid (exact for the log family).
    pub fn is_non_decreasing(&self) -> bool {
        match &self.family {
            WeightFamily::LogPower { .. } => true,
            WeightFamily::Tabulated { psi, .. } => psi.windows(2).all(|w| w[1] >= w[0]),
        }
    }
}

/// Result of comparing the admissibility integral with its dyadic proxy.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityIntegral {
    /// `int_1^{t_max} dt / (t psi^r(t))` by adaptive quadrature.
    pub integral: f64,
    /// `sum_{j >= 0, 2^j <= t_max} psi^{-r}(2^j)`.
    pub dyadic_sum: f64,
    /// Set when `psi` vanishes somewhere on `[1, t_max]`.
    pub diverged: bool,
}

impl AdmissibilityIntegral {
    /// Ratio of the integral to the Riemann normalization `ln2 *
    /// dyadic_sum` of the proxy. Stays in `[1/4, 4]` for monotone weights;
    /// the un-normalized ratio does not when the `j = 0` term dominates the
    /// sum (fast-growing weights with large `r`).
    pub fn equivalence_ratio(&self) -> f64 {
        self.integral / (std::f64::consts::LN_2 * self.dyadic_sum)
    }
}

/// Quadrature of the `M_r` integral against its dyadic proxy. The two agree
/// within a fixed factor (ratio in `[1/4, 4]`) for monotone weights.
pub fn admissibility_integral(
    w: &SlowlyVaryingWeight,
    r: f64,
    t_max: f64,
) -> Result<AdmissibilityIntegral> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::Domain(format!("admissibility exponent needs 1 <= r < inf, got {r}")));
    }
    if !(t_max.is_finite() && t_max >= 2.0) {
        return Err(Error::Domain(format!("t_max must be >= 2, got {t_max}")));
    }
    // divergence guard: psi = 0 anywhere on [1, t_max] makes the integrand blow up
    let mut t = 1.0;
    while t <= t_max {
        if w.at(t) == 0.0 {
            return Ok(AdmissibilityIntegral {
                integral: f64::INFINITY,
                dyadic_sum: f64::INFINITY,
                diverged: true,
            });
        }
        t *= 2.0;
    }
    let integral = piecewise_integral(w, r, 1.0, t_max)?;
    let mut dyadic_sum = 0.0;
    let mut j = 0;
    while 2f64.powi(j) <= t_max {
        dyadic_sum += w.at_dyadic(j).powf(-r);
        j += 1;
    }
    Ok(AdmissibilityIntegral {
        integral,
        dyadic_sum,
        diverged: false,
    })
}

/// Per-decade increments `int_{10^k}^{10^{k+1}} dt / (t psi^r)` for
/// `k = 0 .. decades-1`. Shrinking increments signal a convergent tail.
pub fn decade_increments(w: &SlowlyVaryingWeight, r: f64, decades: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(decades);
    for k in 0..decades {
        let a = 10f64.powi(k as i32);
        let b = 10f64.powi(k as i32 + 1);
        out.push(piecewise_integral(w, r, a, b)?);
    }
    Ok(out)
}

fn piecewise_integral(w: &SlowlyVaryingWeight, r: f64, a: f64, b: f64) -> Result<f64> {
    // split per decade so the adaptive rule sees mild intervals
    let integrand = |t: f64| 1.0 / (t * w.at(t).powf(r));
    let mut lo = a;
    let mut acc = 0.0;
    while lo < b {
        let hi = (lo * 10.0).min(b);
        acc += adaptive_simpson(&integrand, lo, hi, 1e-12)?;
        lo = hi;
    }
    Ok(acc)
}

/// Estimate the decay exponent `gamma` of the per-decade increments
/// `inc_k ~ C k^-gamma` from two decades `a < b` (increment `k` covers
/// `[10^{k-1}, 10^k]`). `gamma > 1` signals a summable tail, so a convergent
/// admissibility integral.
pub fn tail_decay_exponent(
    w: &SlowlyVaryingWeight,
    r: f64,
    decade_a: u32,
    decade_b: u32,
) -> Result<f64> {
    if decade_a == 0 || decade_b <= decade_a {
        return Err(Error::Domain(format!(
            "need 1 <= a < b, got a = {decade_a}, b = {decade_b}"
        )));
    }
    let inc = |k: u32| {
        piecewise_integral(w, r, 10f64.powi(k as i32 - 1), 10f64.powi(k as i32))
    };
    let inc_a = inc(decade_a)?;
    let inc_b = inc(decade_b)?;
    if inc_a <= 0.0 || inc_b <= 0.0 {
        return Err(Error::Numeric("vanishing decade increment".into()));
    }
    Ok((inc_a / inc_b).ln() / (decade_b as f64 / decade_a as f64).ln())
}

/// Outcome of the `M_r` membership test.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// True when the verdict rests on a finite-range tail test (tabulated
    /// weights) rather than a closed-form criterion.
    pub empirical: bool,
    pub detail: String,
}

/// Decide `psi in M_r`. For the log family the criterion `alpha > 1/r` is
/// exact (strict inequality; the boundary case diverges). For tabulated
/// weights only a tail test over the table range is possible, so the verdict
/// carries the `empirical` caveat.
pub fn is_admissible(w: &SlowlyVaryingWeight, r: f64) -> Result<AdmissibilityReport> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::Domain(format!("admissibility exponent needs r >= 1, got {r}")));
    }
    if !w.is_non_decreasing() {
        return Ok(AdmissibilityReport {
            admissible: false,
            empirical: false,
            detail: "weight is not non-decreasing".into(),
        });
    }
    if let Some(alpha) = w.is_log_power() {
        if r == f64::INFINITY {
            return Ok(AdmissibilityReport {
                admissible: true,
                empirical: false,
                detail: format!("log family, alpha = {alpha} > 0 suffices for r = inf"),
            });
        }
        let admissible = alpha > 1.0 / r;
        return Ok(AdmissibilityReport {
            admissible,
            empirical: false,
            detail: format!("log family: alpha = {alpha}, threshold 1/r = {}", 1.0 / r),
        });
    }
    if r == f64::INFINITY {
        // need psi(t) -> value > 1 on the table range
        let tail = w.at(f64::MAX.sqrt());
        return Ok(AdmissibilityReport {
            admissible: tail > 1.0,
            empirical: true,
            detail: format!("tabulated, r = inf: tail value {tail}"),
        });
    }
    // tabulated: decay-exponent tail test over the table range; beyond the
    // table psi is constant, so extending past it can only look divergent,
    // which keeps the verdict conservative
    let t_last = match &w.family {
        WeightFamily::Tabulated { t, .. } => *t.last().unwrap(),
        WeightFamily::LogPower { .. } => unreachable!(),
    };
    let b = t_last.log10().floor() as i64;
    if b < 3 {
        return Ok(AdmissibilityReport {
            admissible: false,
            empirical: true,
            detail: format!(
                "table range ends at t = {t_last}; too short for a tail test, declining"
            ),
        });
    }
    let a = 2u32.max(b as u32 / 4);
    let gamma = tail_decay_exponent(w, r, a, b as u32)?;
    Ok(AdmissibilityReport {
        admissible: gamma > 1.0,
        empirical: true,
        detail: format!(
            "tabulated tail test over decades [{a}, {b}]: decay exponent {gamma:.3} (need > 1)"
        ),
    })
}

/// Karamata representation data: `psi(t) = c(t) exp(int_a^t eps(s)/s ds)`.
#[derive(Clone)]
pub struct KaramataRepresentation {
    pub a: f64,
    pub c_limit: f64,
    c_of_t: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    eps_of_t: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl KaramataRepresentation {
    pub fn new(
        a: f64,
        c_limit: f64,
        c_of_t: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eps_of_t: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!("representation needs a > 0, got {a}")));
        }
        if !(c_limit.is_finite() && c_limit > 0.0) {
            return Err(Error::Config(format!("representation needs c > 0, got {c_limit}")));
        }
        Ok(KaramataRepresentation {
            a,
            c_limit,
            c_of_t: Arc::new(c_of_t),
            eps_of_t: Arc::new(eps_of_t),
        })
    }

    /// The representation stated for the log family: `eps(s) = alpha /
    /// log(e + s)`, `a = e - 1`, `c = 1`. It reproduces `psi` only up to a
    /// multiplicative constant; `reconstruct / eval` flattens as `t` grows.
    pub fn log_power_asymptotic(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::Config("alpha must be > 0".into()));
        }
        Self::new(E - 1.0, 1.0, |_| 1.0, move |s| alpha / (E + s).ln())
    }

    /// The exact representation of `psi(t) = log^alpha(e + t) - 1` obtained
    /// from `eps(s) = s psi'(s) / psi(s)` and `c = psi(a)`; reconstruction
    /// matches direct evaluation pointwise.
    pub fn log_power_exact(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::Config("alpha must be > 0".into()));
        }
        let a = E - 1.0;
        let c = (E + a).ln().powf(alpha) - 1.0;
        Self::new(a, c, move |_| c, move |s| {
            let lg = (E + s).ln();
            alpha * s * lg.powf(alpha - 1.0) / ((E + s) * (lg.powf(alpha) - 1.0))
        })
    }

    /// Numerically integrate `eps(s)/s` over `[a, t]` and return
    /// `c(t) exp(integral)`.
    pub fn reconstruct(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= self.a) {
            return Err(Error::Domain(format!(
                "reconstruction needs t >= a = {}, got {t}",
                self.a
            )));
        }
        let eps = Arc::clone(&self.eps_of_t);
        let integrand = move |s: f64| eps(s) / s;
        // split long ranges per decade for the adaptive rule
        let mut lo = self.a;
        let mut acc = 0.0;
        while lo < t {
            let hi = (lo * 10.0).min(t);
            acc += adaptive_simpson(&integrand, lo, hi, 1e-12)?;
            lo = hi;
        }
        Ok((self.c_of_t)(t) * acc.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // frozen with 40-digit arithmetic: log^0.6(e + 1000) - 1
    const PSI_A06_T1000: f64 = 2.189367370493481;
    // frozen: |psi(2e6)/psi(1e6) - 1| for alpha = 1
    const DEFECT_1E6: f64 = 0.05408646586998323;
    // frozen: int_1^1e8 dt/(t (log(e+t)-1)^2) and its dyadic proxy
    const ADM_INTEGRAL: f64 = 6.931286189056765;
    const ADM_DYADIC: f64 = 16.07790595890787;

    #[test]
    fn eval_log_family() {
        let w1 = SlowlyVaryingWeight::log_power(1.0).unwrap();
        assert_eq!(w1.eval(0.0).unwrap(), 0.0);

        let w2 = SlowlyVaryingWeight::log_power(2.0).unwrap();
        let t = E * E - E;
        assert!((w2.eval(t).unwrap() - 3.0).abs() < 1e-13);

        let w06 = SlowlyVaryingWeight::log_power(0.6).unwrap();
        assert!((w06.eval(1000.0).unwrap() - PSI_A06_T1000).abs() < 1e-14);

        assert!(matches!(w1.eval(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn tabulated_validation() {
        assert!(SlowlyVaryingWeight::tabulated(&[(0.0, 0.0)]).is_err());
        assert!(SlowlyVaryingWeight::tabulated(&[(0.5, 0.0), (1.0, 1.0)]).is_err());
        // oscillation rejected
        assert!(SlowlyVaryingWeight::tabulated(&[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).is_err());
        // zero on [1, inf) rejected
        assert!(SlowlyVaryingWeight::tabulated(&[(0.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).is_err());
        let w = SlowlyVaryingWeight::tabulated(&[(0.0, 0.0), (1.0, 1.0), (10.0, 2.0)]).unwrap();
        assert!((w.at(5.5) - 1.5).abs() < 1e-15);
        assert_eq!(w.at(100.0), 2.0); // constant extension
    }

    #[test]
    fn table_csv_round_trip() {
        let w = SlowlyVaryingWeight::from_table_csv("t,psi\n0,0\n1,1\n10,2\n").unwrap();
        assert!((w.at(1.0) - 1.0).abs() < 1e-15);
        assert!(SlowlyVaryingWeight::from_table_csv("t,psi\n0,0\nbad,1\n").is_err());
    }

    #[test]
    fn defect_decays_along_geometric_grid() {
        let w = SlowlyVaryingWeight::log_power(1.0).unwrap();
        let d = w.slow_variation_defect(2.0, &[1e6]).unwrap();
        assert!((d[0] - DEFECT_1E6).abs() < 1e-14);
        assert!(d[0] < 0.2);

        // lambda = 1 identity
        let d1 = w.slow_variation_defect(1.0, &[7.0, 1e3]).unwrap();
        assert!(d1.iter().all(|&v| v == 0.0));

        let grid: Vec<f64> = (2..=8).map(|k| 10f64.powi(k)).collect();
        let ds = w.slow_variation_defect(2.0, &grid).unwrap();
        for pair in ds.windows(2) {
            assert!(pair[1] < pair[0], "defect not strictly decreasing: {ds:?}");
        }

        let zero_at_one = SlowlyVaryingWeight::log_power(1.0).unwrap();
        assert!(zero_at_one.slow_variation_defect(2.0, &[0.5]).is_err());
    }

    #[test]
    fn defect_division_guard() {
        // psi = 0 exactly at t = 1 is impossible for valid weights, but the
        // guard must fire if evaluation produces 0 somewhere >= 1; emulate
        // with a table positive at 1 but evaluated at its zero start? Not
        // reachable; instead check the error on a sub-1 grid point which the
        // precondition rejects.
        let w = SlowlyVaryingWeight::log_power(1.0).unwrap();
        assert!(w.slow_variation_defect(2.0, &[0.9]).is_err());
    }

    #[test]
    fn karamata_trivial_cases() {
        let rep = KaramataRepresentation::new(1.0, 5.0, |_| 5.0, |_| 0.0).unwrap();
        assert!((rep.reconstruct(17.0).unwrap() - 5.0).abs() < 1e-12);

        let rep = KaramataRepresentation::new(1.0, 1.0, |_| 1.0, |_| 0.1).unwrap();
        assert!((rep.reconstruct(E).unwrap() - 0.1f64.exp()).abs() < 1e-12);

        assert!(rep.reconstruct(0.5).is_err());
    }

    #[test]
    fn karamata_asymptotic_ratio_flattens() {
        // the paper's (c, eps) family reproduces psi only up to a constant:
        // reconstruct/eval must flatten, not match pointwise
        let w = SlowlyVaryingWeight::log_power(1.0).unwrap();
        let rep = KaramataRepresentation::log_power_asymptotic(1.0).unwrap();
        let ts = [10.0, 1e2, 1e4, 1e6];
        let ratios: Vec<f64> = ts
            .iter()
            .map(|&t| rep.reconstruct(t).unwrap() / w.at(t))
            .collect();
        // frozen reference values
        let expect = [1.6300671911264128, 1.3503633990522024, 1.1935808843255626, 1.1470477391681633];
        for (r, e) in ratios.iter().zip(expect.iter()) {
            assert!((r - e).abs() < 1e-9, "ratio {r} vs {e}");
        }
        for pair in ratios.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        // successive ratio-of-ratios approach 1
        let rr: Vec<f64> = ratios.windows(2).map(|p| p[1] / p[0]).collect();
        for pair in rr.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn karamata_exact_representation_matches_eval() {
        for alpha in [0.6, 1.0, 2.0] {
            let w = SlowlyVaryingWeight::log_power(alpha).unwrap();
            let rep = KaramataRepresentation::log_power_exact(alpha).unwrap();
            for t in [2.0, 10.0, 1e3, 1e6] {
                let r = rep.reconstruct(t).unwrap();
                let v = w.at(t);
                assert!(
                    ((r - v) / v).abs() < 1e-10,
                    "alpha {alpha}, t {t}: {r} vs {v}"
                );
            }
        }
    }

    #[test]
    fn admissibility_integral_log_family() {
        let w = SlowlyVaryingWeight::log_power(1.0).unwrap();
        let a = admissibility_integral(&w, 2.0, 1e8).unwrap();
        assert!(!a.diverged);
        assert!((a.integral - ADM_INTEGRAL).abs() < 1e-9);
        assert!((a.dyadic_sum - ADM_DYADIC).abs() < 1e-9);
        assert!((0.25..=4.0).contains(&a.equivalence_ratio()));
    }

    #[test]
    fn decay_exponent_separates_convergent_from_divergent() {
        // alpha r = 2 > 1: summable tail. Frozen reference 2.0591 at
        // decades [20, 60].
        let w1 = SlowlyVaryingWeight::log_power(1.0).unwrap();
        let inc1 = decade_increments(&w1, 2.0, 8).unwrap();
        for pair in inc1.windows(2) {
            assert!(pair[1] < pair[0], "increments not shrinking: {inc1:?}");
        }
        let g1 = tail_decay_exponent(&w1, 2.0, 20, 60).unwrap();
        assert!((g1 - 2.059083911130532).abs() < 1e-6);
        assert!(g1 > 1.5);

        // alpha r = 0.8 < 1: increments do not shrink toward summability.
        // Frozen reference 0.98694.
        let w04 = SlowlyVaryingWeight::log_power(0.4).unwrap();
        let g04 = tail_decay_exponent(&w04, 2.0, 20, 60).unwrap();
        assert!((g04 - 0.9869397256767971).abs() < 1e-6);
        assert!(g04 < 1.0);
    }

    #[test]
    fn constant_weight_integral_is_logarithmic() {
        let c = 2.0;
        let w = SlowlyVaryingWeight::constant(c).unwrap();
        let a = admissibility_integral(&w, 1.0, 1e6).unwrap();
        assert!((a.integral - (1e6f64).ln() / c).abs() < 1e-9);
        assert!(!a.diverged);
        assert!((0.25..=4.0).contains(&a.equivalence_ratio()));
    }

    #[test]
    fn divergence_flag_for_vanishing_weight() {
        // psi = 0 on [0, 2], then rises; it vanishes at t in [1, 2]
        let w = SlowlyVaryingWeight {
            family: WeightFamily::Tabulated {
                t: Arc::new(vec![0.0, 2.0, 4.0]),
                psi: Arc::new(vec![0.0, 0.0, 1.0]),
            },
        };
        let a = admissibility_integral(&w, 2.0, 100.0).unwrap();
        assert!(a.diverged);
    }

    #[test]
    fn admissibility_decisions() {
        let w1 = SlowlyVaryingWeight::log_power(1.0).unwrap();
        assert!(is_admissible(&w1, 2.0).unwrap().admissible);

        // boundary alpha = 1/r excluded
        let w05 = SlowlyVaryingWeight::log_power(0.5).unwrap();
        let rep = is_admissible(&w05, 2.0).unwrap();
        assert!(!rep.admissible);
        assert!(!rep.empirical);

        let w3 = SlowlyVaryingWeight::log_power(3.0).unwrap();
        assert!(is_admissible(&w3, 1.0).unwrap().admissible);

        // tabulated verdicts carry the empirical caveat
        let pairs: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
            .chain((0..40).map(|k| {
                let t = 2f64.powi(k);
                (t * 1.0001, (E + t).ln().powf(2.0) - 1.0)
            }))
            .collect();
        let wt = SlowlyVaryingWeight::tabulated(&pairs).unwrap();
        let rep = is_admissible(&wt, 2.0).unwrap();
        assert!(rep.empirical);
        assert!(rep.admissible);

        let wc = SlowlyVaryingWeight::constant(5.0).unwrap();
        let rep = is_admissible(&wc, 2.0).unwrap();
        assert!(!rep.admissible);
        assert!(rep.empirical);
    }

    #[test]
    fn monotonicity_transfer_on_dyadic_grid() {
        for w in [
            SlowlyVaryingWeight::log_power(0.6).unwrap(),
            SlowlyVaryingWeight::log_power(1.0).unwrap(),
            SlowlyVaryingWeight::log_power(3.0).unwrap(),
        ] {
            for j in -1..=30 {
                for jp in j..=30 {
                    assert!(w.at_dyadic(j) <= w.at_dyadic(jp) * (1.0 + 1e-15));
                }
            }
            // j - j' <= l transfer with measured constant
            let l = 3;
            let c = w.lambda_constant(2f64.powi(l));
            for jp in -1..=27 {
                for j in jp..=(jp + l) {
                    assert!(w.at_dyadic(j) <= c * w.at_dyadic(jp) * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sub_power_growth() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let w = SlowlyVaryingWeight::log_power(alpha).unwrap();
            for beta in [0.25, 0.5, 1.0] {
                let vals: Vec<f64> = (6..=8)
                    .map(|k| {
                        let t = 10f64.powi(k);
                        w.at(t) / t.powf(beta)
                    })
                    .collect();
                for pair in vals.windows(2) {
                    assert!(
                        pair[1] < pair[0],
                        "psi/t^{beta} not decreasing for alpha {alpha}: {vals:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn dyadic_integral_equivalence_across_weights_and_r() {
        let weights = [
            SlowlyVaryingWeight::log_power(0.6).unwrap(),
            SlowlyVaryingWeight::log_power(1.0).unwrap(),
            SlowlyVaryingWeight::log_power(2.0).unwrap(),
            SlowlyVaryingWeight::constant(3.0).unwrap(),
        ];
        for w in &weights {
            for r in [1.0, 1.5, 2.0, 4.0] {
                let a = admissibility_integral(w, r, 1e6).unwrap();
                if a.diverged {
                    continue;
                }
                let ratio = a.equivalence_ratio();
                assert!(
                    (0.25..=4.0).contains(&ratio),
                    "ratio {ratio} out of range for {} r {r}",
                    w.spec_string()
                );
            }
        }
    }

    #[test]
    fn parse_spec_strings() {
        let w = SlowlyVaryingWeight::parse_spec("log:alpha=1.5").unwrap();
        assert_eq!(w.is_log_power(), Some(1.5));
        assert!(SlowlyVaryingWeight::parse_spec("log:beta=1").is_err());
        assert!(SlowlyVaryingWeight::parse_spec("nope").is_err());
    }

    mod properties {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            // psi non-negative, non-decreasing, and vanishing only at 0
            #[test]
            fn log_family_is_valid_weight(alpha in 0.05f64..4.0, t in 0.0f64..1e9) {
                let w = SlowlyVaryingWeight::log_power(alpha).unwrap();
                let v = w.eval(t).unwrap();
                prop_assert!(v >= 0.0);
                prop_assert!(w.at(t + 1.0) >= v);
                if t >= 1.0 {
                    prop_assert!(v > 0.0);
                }
            }

            // dyadic monotonicity transfer holds verbatim for monotone weights
            #[test]
            fn dyadic_monotonicity(alpha in 0.1f64..3.0, j in -1i32..28, step in 0i32..8) {
                let w = SlowlyVaryingWeight::log_power(alpha).unwrap();
                prop_assert!(w.at_dyadic(j) <= w.at_dyadic(j + step) * (1.0 + 1e-15));
            }

            // the T0 horizon scales like 1 / ||u0||
            #[test]
            fn t0_homogeneity(c in 0.05f64..1.2, norm in 1e-3f64..1e3) {
                let base = crate::iteration::t0(c, 1.0).unwrap();
                let scaled = crate::iteration::t0(c, norm).unwrap();
                prop_assert!((scaled * norm - base).abs() <= 1e-12 * base.max(1.0));
            }
        }
    }
}
