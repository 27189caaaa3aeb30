//! Bony paraproducts, commutators, Fourier multipliers, the discrete
//! maximal operator, and the inequality-verification harness.
//!
//! Every estimate is exercised the same way: sample seeded random fields,
//! compute the two sides of the inequality, and record them in an
//! [`EstimateReport`]. Empirical constants are reported, never asserted
//! against theoretical values; what the harness checks is that they are
//! finite and stable when the grid is refined.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Axis, FrequencyGrid, SpectralField, VectorField};
use crate::lp::{build_partition, DyadicPartition};
use crate::spaces::{self, Family, SpaceSpec};
use crate::weights::SlowlyVaryingWeight;

// ---------------------------------------------------------------------------
// estimate reports
// ---------------------------------------------------------------------------

/// Recorded two-sided samples of one inequality.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Empirical constant per grid size, filled by resolution sweeps.
    pub sweep: BTreeMap<usize, f64>,
    /// When set, ratios above this value make the verify command fail
    /// (identities and exact inequalities).
    pub violation_threshold: Option<f64>,
}

impl EstimateReport {
    pub fn new(id: impl Into<String>) -> Self {
        EstimateReport {
            estimate_id: id.into(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            sweep: BTreeMap::new(),
            violation_threshold: None,
        }
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.violation_threshold = Some(t);
        self
    }

    /// Record one sample; a vanishing right side with a nonzero left side is
    /// flagged immediately.
    pub fn record(&mut self, lhs: f64, rhs: f64) -> Result<()> {
        if !(lhs.is_finite() && rhs.is_finite()) {
            return Err(Error::Numeric(format!(
                "{}: non-finite sample (lhs = {lhs}, rhs = {rhs})",
                self.estimate_id
            )));
        }
        if rhs == 0.0 && lhs > 0.0 {
            return Err(Error::Violation(format!(
                "{}: lhs = {lhs} with vanishing rhs",
                self.estimate_id
            )));
        }
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.lhs.len()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(&l, &r)| if r == 0.0 { 0.0 } else { l / r })
            .collect()
    }

    /// `max(lhs / rhs)` over recorded samples.
    pub fn empirical_constant(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: &EstimateReport) {
        self.lhs.extend_from_slice(&other.lhs);
        self.rhs.extend_from_slice(&other.rhs);
        for (n, c) in &other.sweep {
            let slot = self.sweep.entry(*n).or_insert(*c);
            *slot = slot.max(*c);
        }
    }

    /// Max/min spread of the sweep constants; 1.0 when fewer than two
    /// resolutions were recorded.
    pub fn sweep_spread(&self) -> f64 {
        if self.sweep.len() < 2 {
            return 1.0;
        }
        let max = self.sweep.values().fold(f64::MIN, |m, &v| m.max(v));
        let min = self.sweep.values().fold(f64::MAX, |m, &v| m.min(v));
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn exceeded_threshold(&self) -> bool {
        match self.violation_threshold {
            Some(t) => self.empirical_constant() > t,
            None => false,
        }
    }

    /// CSV body: `sample_id,lhs,rhs,ratio` rows and a `max_ratio` summary.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "sample_id,lhs,rhs,ratio")?;
        for (i, (l, r)) in self.lhs.iter().zip(&self.rhs).enumerate() {
            let ratio = if *r == 0.0 { 0.0 } else { l / r };
            writeln!(w, "{i},{l:.12e},{r:.12e},{ratio:.12e}")?;
        }
        writeln!(w, "max_ratio,,,{:.12e}", self.empirical_constant())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// paraproducts
// ---------------------------------------------------------------------------

/// The three Bony pieces of `fg`.
#[derive(Debug, Clone)]
pub struct Paraproduct {
    /// `T_f g = sum_{j >= 1} S_{j-2} f Delta_j g` (low f, high g).
    pub t_fg: SpectralField,
    /// `T_g f = sum_{j >= 1} S_{j-2} g Delta_j f` (low g, high f).
    pub t_gf: SpectralField,
    /// `R(f, g) = sum_{|j - j'| <= 1} Delta_j f Delta_{j'} g`.
    pub remainder: SpectralField,
}

/// Bony decomposition of the product of two scalar fields. Each piece is a
/// sum of dealiased products, so `t_fg + t_gf + remainder` reproduces the
/// Galerkin product `f.product(g)` to roundoff.
pub fn paraproduct(
    f: &SpectralField,
    g: &SpectralField,
    part: &DyadicPartition,
) -> Result<Paraproduct> {
    f.assert_same_grid(g)?;
    let grid = f.grid();
    let j_max = part.j_max();
    let mut t_fg = SpectralField::zeros(grid);
    let mut t_gf = SpectralField::zeros(grid);
    for j in 1..=j_max {
        let low_f = part.s_n(f, j - 2)?;
        let high_g = part.delta_j(g, j)?;
        t_fg = t_fg.add(&low_f.product(&high_g)?);
        let low_g = part.s_n(g, j - 2)?;
        let high_f = part.delta_j(f, j)?;
        t_gf = t_gf.add(&low_g.product(&high_f)?);
    }
    let mut remainder = SpectralField::zeros(grid);
    for j in -1..=j_max {
        let fj = part.delta_j(f, j)?;
        for jp in (j - 1).max(-1)..=(j + 1).min(j_max) {
            let gjp = part.delta_j(g, jp)?;
            remainder = remainder.add(&fj.product(&gjp)?);
        }
    }
    Ok(Paraproduct {
        t_fg,
        t_gf,
        remainder,
    })
}

/// Sup-norm defect of the decomposition identity against the Galerkin
/// product.
pub fn paraproduct_defect(
    f: &SpectralField,
    g: &SpectralField,
    part: &DyadicPartition,
) -> Result<f64> {
    let pieces = paraproduct(f, g, part)?;
    let total = pieces.t_fg.add(&pieces.t_gf).add(&pieces.remainder);
    Ok(f.product(g)?.sub(&total).linf_norm())
}

// ---------------------------------------------------------------------------
// commutators
// ---------------------------------------------------------------------------

fn check_div_free(u: &VectorField) -> Result<()> {
    let scale = u.grad_linf().max(1e-30);
    if u.divergence().linf_norm() > 1e-10 * scale {
        return Err(Error::Precondition(
            "commutator needs a divergence-free velocity".into(),
        ));
    }
    Ok(())
}

/// `[u . grad, Delta_j] omega = u . grad Delta_j omega - Delta_j (u . grad
/// omega)` with inhomogeneous blocks.
pub fn commutator(
    u: &VectorField,
    omega: &SpectralField,
    j: i32,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    check_div_free(u)?;
    let first = u.advect(&part.delta_j(omega, j)?)?;
    let second = part.delta_j(&u.advect(omega)?, j)?;
    Ok(first.sub(&second))
}

/// Homogeneous-block commutator `[u . grad, Delta_j-dot] omega`.
pub fn commutator_hom(
    u: &VectorField,
    omega: &SpectralField,
    j: i32,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    check_div_free(u)?;
    let first = u.advect(&part.delta_j_hom(omega, j)?)?;
    let second = part.delta_j_hom(&u.advect(omega)?, j)?;
    Ok(first.sub(&second))
}

/// `l^2` combination of the space norms of the four entries of `grad u`.
pub fn norm_grad(u: &VectorField, spec: &SpaceSpec, part: &DyadicPartition) -> Result<f64> {
    let mut acc = 0.0;
    for comp in &u.components {
        for axis in Axis::BOTH {
            acc += spaces::norm(&comp.derivative(axis), spec, part)?.powi(2);
        }
    }
    Ok(acc.sqrt())
}

/// One sample of a commutator estimate: the measured left side and both
/// right-side variants the theory offers.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorSample {
    pub lhs: f64,
    /// `||grad u||_inf ||omega||_X + ||grad omega||_inf ||grad u||_{X(s-1)}`.
    pub rhs_grad_form: f64,
    /// `||grad u||_inf ||omega||_X + ||omega||_inf ||grad u||_X`.
    pub rhs_vorticity_form: f64,
}

impl CommutatorSample {
    /// The recorded right side: the smaller (sharper) of the two variants.
    pub fn rhs(&self) -> f64 {
        self.rhs_grad_form.min(self.rhs_vorticity_form)
    }
}

/// Besov commutator estimate: `lhs = || (2^{js} psi(2^j) ||Delta_j R_j||_p)_j
/// ||_{l^r}` with `R_j = [u . grad, Delta_j] omega` and `r = spec.q`.
pub fn commutator_estimate_besov(
    u: &VectorField,
    omega: &SpectralField,
    spec: &SpaceSpec,
    part: &DyadicPartition,
) -> Result<CommutatorSample> {
    if spec.family != Family::Besov {
        return Err(Error::Config("expected a Besov spec".into()));
    }
    check_div_free(u)?;
    let advected = u.advect(omega)?;
    let r = spec.q;
    let mut acc = 0.0f64;
    let mut sup = 0.0f64;
    for j in -1..=part.j_max() {
        let rj = u
            .advect(&part.delta_j(omega, j)?)?
            .sub(&part.delta_j(&advected, j)?);
        let v = spec.band_weight(j) * part.delta_j(&rj, j)?.lp_norm(spec.p);
        if r == f64::INFINITY {
            sup = sup.max(v);
        } else {
            acc += v.powf(r);
        }
    }
    let lhs = if r == f64::INFINITY {
        sup
    } else {
        acc.powf(1.0 / r)
    };
    let grad_u_inf = u.grad_linf();
    let omega_norm = spaces::norm(omega, spec, part)?;
    let grad_omega_inf = omega.gradient().grad_linf().max({
        // grad of a scalar: the two first derivatives
        let gx = omega.derivative(Axis::X).linf_norm();
        let gy = omega.derivative(Axis::Y).linf_norm();
        gx.max(gy)
    });
    let rhs_grad_form =
        grad_u_inf * omega_norm + grad_omega_inf * norm_grad(u, &spec.shifted(-1.0), part)?;
    let rhs_vorticity_form =
        grad_u_inf * omega_norm + omega.linf_norm() * norm_grad(u, spec, part)?;
    Ok(CommutatorSample {
        lhs,
        rhs_grad_form,
        rhs_vorticity_form,
    })
}

/// Triebel-Lizorkin commutator estimate:
/// `lhs = || ||2^{js} psi(2^j) [u . grad, Delta_j-dot] omega||_{l^q} ||_{L^p}`.
pub fn commutator_estimate_tl(
    u: &VectorField,
    omega: &SpectralField,
    spec: &SpaceSpec,
    part: &DyadicPartition,
) -> Result<CommutatorSample> {
    if spec.family != Family::Triebel {
        return Err(Error::Config("expected a Triebel-Lizorkin spec".into()));
    }
    check_div_free(u)?;
    let advected = u.advect(omega)?;
    let n2 = part.grid().n() * part.grid().n();
    let mut acc = vec![0.0f64; n2];
    for j in part.j_min()..=part.j_max() {
        let rj = u
            .advect(&part.delta_j_hom(omega, j)?)?
            .sub(&part.delta_j_hom(&advected, j)?);
        let w = spec.band_weight(j);
        let phys = rj.to_physical();
        if spec.q == f64::INFINITY {
            for (a, v) in acc.iter_mut().zip(phys.iter()) {
                *a = a.max(w * v.abs());
            }
        } else {
            for (a, v) in acc.iter_mut().zip(phys.iter()) {
                *a += (w * v.abs()).powf(spec.q);
            }
        }
    }
    let inv_q = if spec.q == f64::INFINITY {
        1.0
    } else {
        1.0 / spec.q
    };
    let lhs = (acc
        .iter()
        .map(|a| a.powf(inv_q).powf(spec.p))
        .sum::<f64>()
        / n2 as f64)
        .powf(1.0 / spec.p);

    let grad_u_inf = u.grad_linf();
    let omega_norm = spaces::norm(omega, spec, part)?;
    let gx = omega.derivative(Axis::X).linf_norm();
    let gy = omega.derivative(Axis::Y).linf_norm();
    let grad_omega_inf = gx.max(gy);
    let u_norm = spaces::norm_vector(u, spec, part)?;
    let rhs_grad_form = grad_u_inf * omega_norm + grad_omega_inf * u_norm;
    let rhs_vorticity_form =
        grad_u_inf * omega_norm + omega.linf_norm() * norm_grad(u, spec, part)?;
    Ok(CommutatorSample {
        lhs,
        rhs_grad_form,
        rhs_vorticity_form,
    })
}

// ---------------------------------------------------------------------------
// product estimates
// ---------------------------------------------------------------------------

/// Leibniz pair: `(||fg||_X, ||f||_inf ||g||_X + ||g||_inf ||f||_X)`.
pub fn leibniz_pair(
    f: &SpectralField,
    g: &SpectralField,
    spec: &SpaceSpec,
    part: &DyadicPartition,
) -> Result<(f64, f64)> {
    let product = f.product(g)?;
    let lhs = spaces::norm(&product, spec, part)?;
    let rhs = f.linf_norm() * spaces::norm(g, spec, part)?
        + g.linf_norm() * spaces::norm(f, spec, part)?;
    Ok((lhs, rhs))
}

/// Remainder pair for `R(f, g)` in `B^{s1+s2, psi}_{p, r}` against
/// `||f||_{B^{s1,psi}_{p1,r1}} ||g||_{B^{s2}_{p2,r2}}` (second factor
/// unweighted) under the exponent arithmetic `1/p = 1/p1 + 1/p2 <= 1`,
/// `1/r = 1/r1 + 1/r2 <= 1`.
#[allow(clippy::too_many_arguments)]
pub fn remainder_pair(
    f: &SpectralField,
    g: &SpectralField,
    s1: f64,
    s2: f64,
    p1: f64,
    p2: f64,
    r1: f64,
    r2: f64,
    weight: &SlowlyVaryingWeight,
    part: &DyadicPartition,
) -> Result<(f64, f64)> {
    if s1 < 0.0 || s2 < 0.0 || s1 + s2 <= 0.0 {
        return Err(Error::Config(
            "remainder estimate needs s1, s2 >= 0 with s1 + s2 > 0".into(),
        ));
    }
    let inv = |e: f64| if e == f64::INFINITY { 0.0 } else { 1.0 / e };
    let inv_p = inv(p1) + inv(p2);
    let inv_r = inv(r1) + inv(r2);
    if inv_p > 1.0 || inv_r > 1.0 {
        return Err(Error::Config(
            "remainder exponents must satisfy 1/p1 + 1/p2 <= 1 and 1/r1 + 1/r2 <= 1".into(),
        ));
    }
    let p = if inv_p == 0.0 { f64::INFINITY } else { 1.0 / inv_p };
    let r = if inv_r == 0.0 { f64::INFINITY } else { 1.0 / inv_r };
    if p <= 1.0 {
        return Err(Error::Config(
            "combined exponent p must stay above 1 for the norm code".into(),
        ));
    }
    let target = SpaceSpec::new(Family::Besov, s1 + s2, p, r.max(1.0), weight.clone(), false)?;
    let f_spec = SpaceSpec::new(Family::Besov, s1, p1, r1, weight.clone(), false)?;
    let g_spec = SpaceSpec::new(Family::Besov, s2, p2, r2, SlowlyVaryingWeight::one(), false)?;
    let rem = paraproduct(f, g, part)?.remainder;
    let lhs = spaces::norm(&rem, &target, part)?;
    let rhs = spaces::norm(f, &f_spec, part)? * spaces::norm(g, &g_spec, part)?;
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// Fourier multipliers
// ---------------------------------------------------------------------------

/// Homogeneous symbols used by the pressure and Biot-Savart calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierSymbol {
    /// `xi_i xi_j / |xi|^2`, degree 0.
    Riesz { i: Axis, j: Axis },
    /// `d_i` of the Biot-Savart component `c`: `xi_i perp_c(xi) / |xi|^2`
    /// with `perp_x = -xi_y`, `perp_y = xi_x`. Degree 0.
    GradBiotSavart { i: Axis, c: Axis },
    /// `(-Delta)^{-1} d_i`: `i xi_i / |xi|^2`, degree 1 (gains a derivative).
    InvLapGrad { i: Axis },
}

impl MultiplierSymbol {
    /// Degree `a` in `|sigma(xi)| ~ |xi|^{-a}`; the mapping gains `a`
    /// derivatives.
    pub fn degree(&self) -> f64 {
        match self {
            MultiplierSymbol::Riesz { .. } | MultiplierSymbol::GradBiotSavart { .. } => 0.0,
            MultiplierSymbol::InvLapGrad { .. } => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MultiplierSymbol::Riesz { i, j } => format!("riesz_{}{}", axis_tag(*i), axis_tag(*j)),
            MultiplierSymbol::GradBiotSavart { i, c } => {
                format!("grad_invlap_div_{}{}", axis_tag(*i), axis_tag(*c))
            }
            MultiplierSymbol::InvLapGrad { i } => format!("invlap_grad_{}", axis_tag(*i)),
        }
    }

    fn eval(&self, xi_x: f64, xi_y: f64) -> Complex64 {
        let r2 = xi_x * xi_x + xi_y * xi_y;
        if r2 == 0.0 {
            return Complex64::ZERO;
        }
        match self {
            MultiplierSymbol::Riesz { i, j } => {
                Complex64::new(pick(xi_x, xi_y, *i) * pick(xi_x, xi_y, *j) / r2, 0.0)
            }
            MultiplierSymbol::GradBiotSavart { i, c } => {
                let perp = match c {
                    Axis::X => -xi_y,
                    Axis::Y => xi_x,
                };
                Complex64::new(pick(xi_x, xi_y, *i) * perp / r2, 0.0)
            }
            MultiplierSymbol::InvLapGrad { i } => Complex64::new(0.0, pick(xi_x, xi_y, *i) / r2),
        }
    }
}

fn pick(x: f64, y: f64, a: Axis) -> f64 {
    match a {
        Axis::X => x,
        Axis::Y => y,
    }
}

fn axis_tag(a: Axis) -> char {
    match a {
        Axis::X => 'x',
        Axis::Y => 'y',
    }
}

/// Apply a singular symbol; `sigma(0) := 0` and the input must be mean-zero.
pub fn multiplier_apply(sym: MultiplierSymbol, f: &SpectralField) -> Result<SpectralField> {
    if !f.is_mean_zero(1e-12 * f.l2_norm().max(1e-30)) {
        return Err(Error::Precondition(format!(
            "{} is singular at the origin and needs a mean-zero field",
            sym.label()
        )));
    }
    Ok(f.apply_multiplier(|x, y| sym.eval(x, y)))
}

/// Multiplier pair: `(||sigma f||_X, ||f||_{X(s - a)})` with the degree
/// shift `a` of the symbol.
pub fn multiplier_pair(
    sym: MultiplierSymbol,
    f: &SpectralField,
    spec: &SpaceSpec,
    part: &DyadicPartition,
) -> Result<(f64, f64)> {
    let mapped = multiplier_apply(sym, f)?;
    let lhs = spaces::norm(&mapped, spec, part)?;
    let rhs = spaces::norm(f, &spec.shifted(-sym.degree()), part)?;
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// maximal operator
// ---------------------------------------------------------------------------

/// Discrete Hardy-Littlewood maximal operator over periodic discs.
///
/// Radii run geometrically from half a grid cell to `l/2` (32 by default),
/// so the smallest disc is the point itself and `M f >= |f|` holds exactly
/// (the discrete `r -> 0` limit). The disc averages are circular
/// convolutions evaluated with the FFT, which is exact on the lattice.
pub struct MaximalOperator {
    grid: Arc<FrequencyGrid>,
    /// `(point count, transformed indicator)` per radius.
    masks: Vec<(f64, Vec<Complex64>)>,
}

impl MaximalOperator {
    pub const DEFAULT_RADII: usize = 32;

    pub fn new(grid: &Arc<FrequencyGrid>, radii: usize) -> Self {
        let n = grid.n();
        let l = grid.l();
        let h = l / n as f64;
        let mut masks = Vec::with_capacity(radii);
        for k in 0..radii {
            let r = 0.5 * h * (l / h).powf(k as f64 / (radii - 1) as f64);
            let mut mask = vec![Complex64::ZERO; n * n];
            let mut count = 0.0f64;
            for iy in 0..n {
                for ix in 0..n {
                    let dx = periodic_dist(ix, n, h);
                    let dy = periodic_dist(iy, n, h);
                    if dx.hypot(dy) <= r {
                        mask[iy * n + ix] = Complex64::new(1.0, 0.0);
                        count += 1.0;
                    }
                }
            }
            grid.fft2(&mut mask);
            masks.push((count, mask));
        }
        MaximalOperator {
            grid: Arc::clone(grid),
            masks,
        }
    }

    /// `M f` on the grid, from physical samples of `|f|`.
    pub fn apply_abs(&self, abs_samples: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        debug_assert_eq!(abs_samples.len(), n * n);
        let mut fhat: Vec<Complex64> = abs_samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.fft2(&mut fhat);
        let mut out = vec![0.0f64; n * n];
        let n2 = (n * n) as f64;
        for (count, mask) in &self.masks {
            let mut conv: Vec<Complex64> = fhat
                .iter()
                .zip(mask.iter())
                .map(|(a, b)| a * b)
                .collect();
            self.grid.ifft2(&mut conv);
            let scale = n2 / count;
            for (o, c) in out.iter_mut().zip(conv.iter()) {
                *o = o.max(c.re * scale);
            }
        }
        out
    }

    pub fn apply(&self, f: &SpectralField) -> Vec<f64> {
        let abs: Vec<f64> = f.to_physical().into_iter().map(f64::abs).collect();
        self.apply_abs(&abs)
    }
}

fn periodic_dist(i: usize, n: usize, h: f64) -> f64 {
    let d = i.min(n - i);
    d as f64 * h
}

/// `L^1` mass of the radial majorant `sup_{|y| >= |x|} |K_j(y)|` of the band
/// kernel, the constant in the pointwise bound `|Delta_j f| <= A M f`.
pub fn stein_majorant_mass(part: &DyadicPartition, j: i32) -> Result<f64> {
    let grid = part.grid();
    let n = grid.n();
    let l = grid.l();
    // kernel values: inverse transform of the band multiplier / l^2
    let probe = {
        let mut f = SpectralField::zeros(grid);
        // delta in coefficient space: all-ones, then project to the band
        for iy in 0..n {
            for ix in 0..n {
                f.coef_mut()[iy * n + ix] = Complex64::new(1.0 / (l * l), 0.0);
            }
        }
        f
    };
    let kernel = if j == -1 {
        part.low_freq_block(&probe)
    } else {
        part.delta_j(&probe, j)?
    };
    let phys = kernel.to_physical();
    let h = l / n as f64;
    // sort grid points by periodic distance, take the running max from far
    // to near, integrate
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            let dx = periodic_dist(ix, n, h);
            let dy = periodic_dist(iy, n, h);
            pts.push((dx.hypot(dy), phys[iy * n + ix].abs()));
        }
    }
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut run_max = 0.0f64;
    let mut mass = 0.0f64;
    for (_, v) in pts {
        run_max = run_max.max(v);
        mass += run_max;
    }
    Ok(mass * h * h)
}

/// Fefferman-Stein pair for a finite family:
/// `(|| ||M f_j||_{l^q} ||_{L^p}, || ||f_j||_{l^q} ||_{L^p})`.
pub fn fefferman_stein_pair(
    fields: &[SpectralField],
    p: f64,
    q: f64,
    op: &MaximalOperator,
) -> Result<(f64, f64)> {
    if fields.is_empty() {
        return Err(Error::Config("empty family".into()));
    }
    let n2 = fields[0].grid().n() * fields[0].grid().n();
    let mut lhs_acc = vec![0.0f64; n2];
    let mut rhs_acc = vec![0.0f64; n2];
    for f in fields {
        let phys = f.to_physical();
        let mf = op.apply(f);
        for i in 0..n2 {
            lhs_acc[i] += mf[i].powf(q);
            rhs_acc[i] += phys[i].abs().powf(q);
        }
    }
    let lp = |acc: &[f64]| {
        (acc.iter().map(|a| a.powf(1.0 / q).powf(p)).sum::<f64>() / n2 as f64).powf(1.0 / p)
    };
    Ok((lp(&lhs_acc), lp(&rhs_acc)))
}

// ---------------------------------------------------------------------------
// verification suites
// ---------------------------------------------------------------------------

/// Identifier of one estimate suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteId {
    Paraproduct,
    Leibniz,
    CommutatorBesov,
    CommutatorTl,
    Remainder,
    Multiplier,
    Maximal,
    Embedding,
    Bernstein,
}

impl SuiteId {
    pub const ALL: [SuiteId; 9] = [
        SuiteId::Paraproduct,
        SuiteId::Leibniz,
        SuiteId::CommutatorBesov,
        SuiteId::CommutatorTl,
        SuiteId::Remainder,
        SuiteId::Multiplier,
        SuiteId::Maximal,
        SuiteId::Embedding,
        SuiteId::Bernstein,
    ];

    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "paraproduct" => SuiteId::Paraproduct,
            "leibniz" => SuiteId::Leibniz,
            "commutator-b" => SuiteId::CommutatorBesov,
            "commutator-tl" => SuiteId::CommutatorTl,
            "remainder" => SuiteId::Remainder,
            "multiplier" => SuiteId::Multiplier,
            "maximal" => SuiteId::Maximal,
            "embedding" => SuiteId::Embedding,
            "bernstein" => SuiteId::Bernstein,
            other => {
                return Err(Error::Config(format!(
                    "unknown suite {other}; expected one of paraproduct, leibniz, commutator-b, commutator-tl, remainder, multiplier, maximal, embedding, bernstein"
                )))
            }
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SuiteId::Paraproduct => "paraproduct",
            SuiteId::Leibniz => "leibniz",
            SuiteId::CommutatorBesov => "commutator-b",
            SuiteId::CommutatorTl => "commutator-tl",
            SuiteId::Remainder => "remainder",
            SuiteId::Multiplier => "multiplier",
            SuiteId::Maximal => "maximal",
            SuiteId::Embedding => "embedding",
            SuiteId::Bernstein => "bernstein",
        }
    }
}

/// Parameters shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub samples: usize,
    pub grid_n: usize,
    pub seed: u64,
    /// Base Besov spec; Triebel-Lizorkin suites switch the family.
    pub space: SpaceSpec,
    /// Spectral slope of the sample fields.
    pub slope: f64,
    /// Band cap of the sample fields, fixed across grid refinements so a
    /// resolution sweep compares constants on the same field class.
    pub max_band: i64,
}

impl SuiteParams {
    pub fn new(samples: usize, grid_n: usize, seed: u64, space: SpaceSpec) -> Self {
        SuiteParams {
            samples,
            grid_n,
            seed,
            space,
            slope: 2.0,
            // the dealias cutoff of the coarsest sweep grid (n = 64)
            max_band: 21,
        }
    }

    fn sample_seed(&self, i: usize, stream: u64) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(i as u64)
            .wrapping_mul(1_000_003)
            .wrapping_add(stream)
    }

    /// Seeded sample field for stream `stream` and index `i`.
    fn field(&self, grid: &Arc<FrequencyGrid>, i: usize, stream: u64) -> SpectralField {
        SpectralField::random_band_limited(grid, self.slope, self.sample_seed(i, stream), self.max_band)
    }

    fn besov_spec(&self) -> SpaceSpec {
        self.space.as_inhomogeneous()
    }

    fn triebel_spec(&self) -> Result<SpaceSpec> {
        let b = self.space.clone();
        if b.p == f64::INFINITY {
            return Err(Error::Config(
                "Triebel-Lizorkin suites need p < inf; pass a different --space".into(),
            ));
        }
        SpaceSpec::new(Family::Triebel, b.s, b.p, b.q, b.weight, false)
    }
}

/// Run one suite and return its reports (a suite may check several
/// inequalities).
pub fn run_suite(id: SuiteId, params: &SuiteParams) -> Result<Vec<EstimateReport>> {
    let grid = FrequencyGrid::new(params.grid_n, crate::field::TWO_PI)?;
    let part = build_partition(&grid)?;
    let mut reports = match id {
        SuiteId::Paraproduct => suite_paraproduct(params, &grid, &part)?,
        SuiteId::Leibniz => suite_leibniz(params, &grid, &part)?,
        SuiteId::CommutatorBesov => suite_commutator_besov(params, &grid, &part)?,
        SuiteId::CommutatorTl => suite_commutator_tl(params, &grid, &part)?,
        SuiteId::Remainder => suite_remainder(params, &grid, &part)?,
        SuiteId::Multiplier => suite_multiplier(params, &grid, &part)?,
        SuiteId::Maximal => suite_maximal(params, &grid, &part)?,
        SuiteId::Embedding => suite_embedding(params, &grid, &part)?,
        SuiteId::Bernstein => suite_bernstein(params, &grid, &part)?,
    };
    for r in reports.iter_mut() {
        let c = r.empirical_constant();
        r.sweep.insert(params.grid_n, c);
    }
    Ok(reports)
}

/// Run a suite across several grid sizes and merge the sweep maps.
pub fn run_suite_sweep(
    id: SuiteId,
    params: &SuiteParams,
    grid_sizes: &[usize],
) -> Result<Vec<EstimateReport>> {
    let mut merged: Vec<EstimateReport> = Vec::new();
    for &n in grid_sizes {
        let mut p = params.clone();
        p.grid_n = n;
        let reports = run_suite(id, &p)?;
        if merged.is_empty() {
            merged = reports;
        } else {
            for (m, r) in merged.iter_mut().zip(reports.iter()) {
                m.merge(r);
            }
        }
    }
    Ok(merged)
}

fn collect_pairs<F>(
    report: &mut EstimateReport,
    samples: usize,
    f: F,
) -> Result<()>
where
    F: Fn(usize) -> Result<(f64, f64)> + Sync + Send,
{
    let pairs: Vec<Result<(f64, f64)>> = (0..samples).into_par_iter().map(f).collect();
    for pair in pairs {
        let (l, r) = pair?;
        report.record(l, r)?;
    }
    Ok(())
}

fn suite_paraproduct(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let mut report = EstimateReport::new("paraproduct-identity").with_threshold(1e-10);
    collect_pairs(&mut report, params.samples, |i| {
        let f = params.field(grid, i, 1);
        let g = params.field(grid, i, 2);
        let defect = paraproduct_defect(&f, &g, part)?;
        Ok((defect, f.linf_norm() * g.linf_norm()))
    })?;
    Ok(vec![report])
}

fn suite_leibniz(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let besov = params.besov_spec();
    let triebel = params.triebel_spec()?;
    let mut rb = EstimateReport::new("leibniz-besov");
    collect_pairs(&mut rb, params.samples, |i| {
        let f = params.field(grid, i, 3);
        let g = params.field(grid, i, 4);
        leibniz_pair(&f, &g, &besov, part)
    })?;
    let mut rt = EstimateReport::new("leibniz-tl");
    collect_pairs(&mut rt, params.samples, |i| {
        let f = params.field(grid, i, 3);
        let g = params.field(grid, i, 4);
        leibniz_pair(&f, &g, &triebel, part)
    })?;
    Ok(vec![rb, rt])
}

/// Sample velocity: Biot-Savart field of a random vorticity; the scalar is
/// the coupled vorticity on even samples and independent on odd ones.
fn commutator_sample_fields(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    i: usize,
) -> Result<(VectorField, SpectralField)> {
    let omega = params.field(grid, i, 5);
    let u = if i.is_multiple_of(2) {
        crate::euler::biot_savart(&omega)?
    } else {
        crate::euler::biot_savart(&params.field(grid, i, 6))?
    };
    Ok((u, omega))
}

fn suite_commutator_besov(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let spec = params.besov_spec();
    let mut grad_form = EstimateReport::new("commutator-besov-grad-form");
    let mut vort_form = EstimateReport::new("commutator-besov-vorticity-form");
    let mut sharp = EstimateReport::new("commutator-besov");
    let samples: Vec<Result<CommutatorSample>> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let (u, omega) = commutator_sample_fields(params, grid, i)?;
            commutator_estimate_besov(&u, &omega, &spec, part)
        })
        .collect();
    for s in samples {
        let s = s?;
        grad_form.record(s.lhs, s.rhs_grad_form)?;
        vort_form.record(s.lhs, s.rhs_vorticity_form)?;
        sharp.record(s.lhs, s.rhs())?;
    }
    Ok(vec![sharp, grad_form, vort_form])
}

fn suite_commutator_tl(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let spec = params.triebel_spec()?;
    let mut grad_form = EstimateReport::new("commutator-tl-grad-form");
    let mut vort_form = EstimateReport::new("commutator-tl-vorticity-form");
    let mut sharp = EstimateReport::new("commutator-tl");
    let samples: Vec<Result<CommutatorSample>> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let (u, omega) = commutator_sample_fields(params, grid, i)?;
            commutator_estimate_tl(&u, &omega, &spec, part)
        })
        .collect();
    for s in samples {
        let s = s?;
        grad_form.record(s.lhs, s.rhs_grad_form)?;
        vort_form.record(s.lhs, s.rhs_vorticity_form)?;
        sharp.record(s.lhs, s.rhs())?;
    }
    Ok(vec![sharp, grad_form, vort_form])
}

fn suite_remainder(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let weight = params.space.weight.clone();
    let mut report = EstimateReport::new("remainder");
    collect_pairs(&mut report, params.samples, |i| {
        let f = params.field(grid, i, 7);
        let g = params.field(grid, i, 8);
        remainder_pair(&f, &g, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0, &weight, part)
    })?;
    Ok(vec![report])
}

fn suite_multiplier(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let spec = params.triebel_spec()?.as_homogeneous();
    let symbols = [
        MultiplierSymbol::Riesz { i: Axis::X, j: Axis::Y },
        MultiplierSymbol::Riesz { i: Axis::X, j: Axis::X },
        MultiplierSymbol::GradBiotSavart { i: Axis::X, c: Axis::X },
        MultiplierSymbol::GradBiotSavart { i: Axis::Y, c: Axis::Y },
        MultiplierSymbol::InvLapGrad { i: Axis::X },
    ];
    let mut reports = Vec::new();
    for sym in symbols {
        let mut report = EstimateReport::new(format!("multiplier-{}", sym.label()));
        collect_pairs(&mut report, params.samples, |i| {
            let f = params.field(grid, i, 9);
            multiplier_pair(sym, &f, &spec, part)
        })?;
        reports.push(report);
    }
    Ok(reports)
}

fn suite_maximal(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let op = MaximalOperator::new(grid, MaximalOperator::DEFAULT_RADII);
    // A = max over bands of the majorant mass
    let mut mass: f64 = 0.0;
    for j in -1..=part.j_max() {
        mass = mass.max(stein_majorant_mass(part, j)?);
    }
    let mut stein = EstimateReport::new("maximal-stein");
    for i in 0..params.samples {
        let f = params.field(grid, i, 10);
        let mf = op.apply(&f);
        let n2 = grid.n() * grid.n();
        let mut sup_bands = vec![0.0f64; n2];
        for j in -1..=part.j_max() {
            let phys = part.delta_j(&f, j)?.to_physical();
            for (s, v) in sup_bands.iter_mut().zip(phys.iter()) {
                *s = s.max(v.abs());
            }
        }
        // largest pointwise ratio sup_j |Delta_j f| / M f against the mass
        let mut worst = 0.0f64;
        for (s, m) in sup_bands.iter().zip(mf.iter()) {
            if *m > 1e-14 {
                worst = worst.max(s / m);
            }
        }
        stein.record(worst, mass)?;
    }
    let mut fs = EstimateReport::new("maximal-fefferman-stein");
    for i in 0..params.samples {
        let family: Vec<SpectralField> = (0..6)
            .map(|k| params.field(grid, i, 11 + k))
            .collect();
        let (lhs, rhs) = fefferman_stein_pair(&family, 2.0, 2.0, &op)?;
        fs.record(lhs, rhs)?;
    }
    Ok(vec![stein, fs])
}

fn suite_embedding(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let spec = params.besov_spec();
    let mut report = EstimateReport::new("embedding").with_threshold(1.0 + 1e-9);
    collect_pairs(&mut report, params.samples, |i| {
        let f = params.field(grid, i, 17);
        let (lhs, rhs, _) = spaces::verify_embedding(&f, &spec, part)?;
        Ok((lhs, rhs))
    })?;
    Ok(vec![report])
}

fn suite_bernstein(
    params: &SuiteParams,
    grid: &Arc<FrequencyGrid>,
    part: &DyadicPartition,
) -> Result<Vec<EstimateReport>> {
    let mut report = EstimateReport::new("bernstein");
    let bands: Vec<i32> = part.clean_bands().into_iter().filter(|&j| j >= 1).collect();
    for i in 0..params.samples {
        let f = SpectralField::random_band_limited(
            grid,
            1.0,
            params.sample_seed(i, 19),
            params.max_band,
        );
        for &j in &bands {
            match crate::lp::bernstein_ratio(part, &f, j, 1, f64::INFINITY, f64::INFINITY) {
                Ok(ratio) => report.record(ratio, 1.0)?,
                Err(Error::Numeric(_)) => continue, // empty band
                Err(e) => return Err(e),
            }
        }
    }
    Ok(vec![report])
}
