//! Spectral fields on the periodic square `[0, l)^2` and the FFT plumbing
//! behind them.
//!
//! Everything downstream of this module works in the Galerkin space of
//! *retained* modes: integer wavenumbers inside the disc `|k| <= kmax` with
//! `kmax = floor((n - 1) / 3)`. Quadratic products are formed on a 3/2
//! zero-padded grid and truncated back to the retained disc, so product
//! coefficients carry no aliasing error. Real-valuedness is maintained by
//! enforcing Hermitian symmetry after every operation that could perturb it
//! at roundoff level.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex64, Fft, FftPlanner};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Coordinate axis of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Uniform `n x n` frequency grid on `[0, l)^2` with shared FFT plans.
///
/// `n` must be a power of two, at least 16. Wavenumbers are `xi = 2 pi k / l`
/// with integer `k` in `[-n/2, n/2)`; the Nyquist column `k = -n/2` is zeroed
/// by every differentiation. Construction also fixes the dealiasing cutoff
/// `kmax = floor((n - 1) / 3)` used by all products.
pub struct FrequencyGrid {
    n: usize,
    l: f64,
    k_int: Vec<i64>,
    xi: Vec<f64>,
    kmax: i64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_pad: Arc<dyn Fft<f64>>,
    inv_pad: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FrequencyGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrequencyGrid")
            .field("n", &self.n)
            .field("l", &self.l)
            .field("kmax", &self.kmax)
            .finish()
    }
}

impl FrequencyGrid {
    pub fn new(n: usize, l: f64) -> Result<Arc<Self>> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Config(format!("domain period must be positive, got {l}")));
        }
        let mut k_int = Vec::with_capacity(n);
        let mut xi = Vec::with_capacity(n);
        for i in 0..n {
            let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            k_int.push(k);
            xi.push(TWO_PI * k as f64 / l);
        }
        let kmax = ((n - 1) / 3) as i64;
        let mut planner = FftPlanner::<f64>::new();
        let m = 3 * n / 2;
        Ok(Arc::new(FrequencyGrid {
            n,
            l,
            k_int,
            xi,
            kmax,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd_pad: planner.plan_fft_forward(m),
            inv_pad: planner.plan_fft_inverse(m),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Dealiasing cutoff as an integer wavenumber.
    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    /// Largest retained `|xi|` (attained on the axes at `|k| = kmax`).
    pub fn xi_dealias(&self) -> f64 {
        TWO_PI * self.kmax as f64 / self.l
    }

    /// Smallest nonzero `|xi|` on the grid.
    pub fn xi_min(&self) -> f64 {
        TWO_PI / self.l
    }

    pub fn grid_spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn k_at(&self, i: usize) -> i64 {
        self.k_int[i]
    }

    pub fn xi_at(&self, i: usize) -> f64 {
        self.xi[i]
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// `|xi|` of the mode stored at `(ix, iy)`.
    #[inline]
    pub fn xi_norm(&self, ix: usize, iy: usize) -> f64 {
        self.xi[ix].hypot(self.xi[iy])
    }

    /// Whether the mode at `(ix, iy)` survives dealiasing.
    #[inline]
    pub fn retained(&self, ix: usize, iy: usize) -> bool {
        let kx = self.k_int[ix];
        let ky = self.k_int[iy];
        kx * kx + ky * ky <= self.kmax * self.kmax
    }

    pub fn same_grid(&self, other: &FrequencyGrid) -> bool {
        self.n == other.n && self.l == other.l
    }

    /// Physical coordinates of grid node `(ix, iy)`.
    pub fn node(&self, ix: usize, iy: usize) -> (f64, f64) {
        let h = self.grid_spacing();
        (ix as f64 * h, iy as f64 * h)
    }

    /// Forward 2-D transform, normalized so coefficients are Fourier series
    /// coefficients: `f(x) = sum_k c_k exp(i xi_k . x)`.
    pub(crate) fn fft2(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        fft_2d(data, self.n, &self.fwd);
        let scale = 1.0 / (self.n * self.n) as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    pub(crate) fn ifft2(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        fft_2d(data, self.n, &self.inv);
    }

    fn fft2_pad(&self, data: &mut [Complex64]) {
        let m = 3 * self.n / 2;
        debug_assert_eq!(data.len(), m * m);
        fft_2d(data, m, &self.fwd_pad);
        let scale = 1.0 / (m * m) as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    fn ifft2_pad(&self, data: &mut [Complex64]) {
        let m = 3 * self.n / 2;
        debug_assert_eq!(data.len(), m * m);
        fft_2d(data, m, &self.inv_pad);
    }
}

/// Row-column 2-D FFT; `plan` is a 1-D plan of length `n`.
fn fft_2d(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    plan.process(data);
    transpose_square(data, n);
    plan.process(data);
    transpose_square(data, n);
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for iy in 0..n {
        for ix in (iy + 1)..n {
            data.swap(iy * n + ix, ix * n + iy);
        }
    }
}

/// Real scalar field stored as complex Fourier coefficients.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<FrequencyGrid>,
    coef: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("n", &self.grid.n)
            .field("l", &self.grid.l)
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<FrequencyGrid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coef: vec![Complex64::ZERO; grid.n * grid.n],
        }
    }

    /// Build from physical samples (row-major, `x` fastest). Projects onto
    /// the retained mode set and enforces Hermitian symmetry.
    pub fn from_physical(grid: &Arc<FrequencyGrid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n * grid.n {
            return Err(Error::Config(format!(
                "expected {} samples, got {}",
                grid.n * grid.n,
                samples.len()
            )));
        }
        let mut coef: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft2(&mut coef);
        let mut f = SpectralField {
            grid: Arc::clone(grid),
            coef,
        };
        f.dealias();
        f.enforce_hermitian();
        Ok(f)
    }

    /// Evaluate a function on the grid nodes and transform.
    pub fn from_fn(grid: &Arc<FrequencyGrid>, func: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let mut samples = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = grid.node(ix, iy);
                samples.push(func(x, y));
            }
        }
        Self::from_physical(grid, &samples).expect("sample count matches grid")
    }

    /// `amp * cos(kx x + ky y)` as an exact pair of coefficients.
    pub fn cosine_mode(grid: &Arc<FrequencyGrid>, kx: i64, ky: i64, amp: f64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        f.set_mode(kx, ky, Complex64::new(0.5 * amp, 0.0))?;
        Ok(f)
    }

    /// Seeded random real field with coefficient magnitudes `~ |xi|^-slope`
    /// and uniform phases, normalized to `max |f| = 1`. Mean-zero.
    pub fn random(grid: &Arc<FrequencyGrid>, slope: f64, seed: u64) -> Self {
        Self::random_band_limited(grid, slope, seed, i64::MAX)
    }

    /// Like [`SpectralField::random`], further restricted to `|k| <= kcap`.
    /// Ensembles compared across grid refinements use a fixed cap so every
    /// resolution samples the same field class.
    pub fn random_band_limited(grid: &Arc<FrequencyGrid>, slope: f64, seed: u64, kcap: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n;
        let mut f = Self::zeros(grid);
        for iy in 0..n {
            for ix in 0..n {
                let kx = grid.k_int[ix];
                let ky = grid.k_int[iy];
                let canonical = ky > 0 || (ky == 0 && kx > 0);
                if !canonical || !grid.retained(ix, iy) {
                    continue;
                }
                if kx * kx + ky * ky > kcap.saturating_mul(kcap) {
                    continue;
                }
                let r = grid.xi_norm(ix, iy);
                let amp = (0.5 + 0.5 * rng.random::<f64>()) * r.powf(-slope);
                let phase = TWO_PI * rng.random::<f64>();
                let c = Complex64::from_polar(amp, phase);
                f.set_mode(kx, ky, c).expect("canonical retained mode");
            }
        }
        let sup = f.linf_norm();
        if sup > 0.0 {
            f.scale_in_place(1.0 / sup);
        }
        f
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn coef(&self) -> &[Complex64] {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    pub fn assert_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_grid(&other.grid) {
            Ok(())
        } else {
            Err(Error::Config("fields live on different grids".into()))
        }
    }

    /// Coefficient of integer mode `(kx, ky)`.
    pub fn mode(&self, kx: i64, ky: i64) -> Result<Complex64> {
        let (ix, iy) = self.mode_index(kx, ky)?;
        Ok(self.coef[self.grid.index(ix, iy)])
    }

    /// Set mode `(kx, ky)` to `c` and its mirror to `conj(c)`, keeping the
    /// field real.
    pub fn set_mode(&mut self, kx: i64, ky: i64, c: Complex64) -> Result<()> {
        let (ix, iy) = self.mode_index(kx, ky)?;
        let idx = self.grid.index(ix, iy);
        self.coef[idx] = c;
        if kx == 0 && ky == 0 {
            self.coef[idx] = Complex64::new(c.re, 0.0);
            return Ok(());
        }
        let (jx, jy) = self.mode_index(-kx, -ky)?;
        let jdx = self.grid.index(jx, jy);
        self.coef[jdx] = c.conj();
        Ok(())
    }

    fn mode_index(&self, kx: i64, ky: i64) -> Result<(usize, usize)> {
        let half = (self.grid.n / 2) as i64;
        if kx < -half || kx >= half || ky < -half || ky >= half {
            return Err(Error::Range(format!("mode ({kx}, {ky}) not on grid")));
        }
        let n = self.grid.n as i64;
        let ix = if kx >= 0 { kx } else { n + kx } as usize;
        let iy = if ky >= 0 { ky } else { n + ky } as usize;
        Ok((ix, iy))
    }

    /// Zero every coefficient outside the retained disc.
    pub fn dealias(&mut self) {
        let n = self.grid.n;
        for iy in 0..n {
            for ix in 0..n {
                if !self.grid.retained(ix, iy) {
                    self.coef[self.grid.index(ix, iy)] = Complex64::ZERO;
                }
            }
        }
    }

    /// Symmetrize coefficient pairs so the field is exactly real.
    pub fn enforce_hermitian(&mut self) {
        let n = self.grid.n;
        for iy in 0..n {
            for ix in 0..n {
                let kx = self.grid.k_int[ix];
                let ky = self.grid.k_int[iy];
                if !(ky > 0 || (ky == 0 && kx > 0)) {
                    continue;
                }
                // mirror exists only away from the Nyquist column
                if kx == -(n as i64) / 2 || ky == -(n as i64) / 2 {
                    continue;
                }
                let idx = self.grid.index(ix, iy);
                let jx = if kx <= 0 { -kx } else { n as i64 - kx } as usize;
                let jy = if ky <= 0 { -ky } else { n as i64 - ky } as usize;
                let jdx = self.grid.index(jx, jy);
                let avg = 0.5 * (self.coef[idx] + self.coef[jdx].conj());
                self.coef[idx] = avg;
                self.coef[jdx] = avg.conj();
            }
        }
        let mean = self.coef[0];
        self.coef[0] = Complex64::new(mean.re, 0.0);
    }

    /// Largest Hermitian asymmetry over coefficient pairs.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst: f64 = self.coef[0].im.abs();
        for iy in 0..n {
            for ix in 0..n {
                let kx = self.grid.k_int[ix];
                let ky = self.grid.k_int[iy];
                if !(ky > 0 || (ky == 0 && kx > 0)) || kx == -(n as i64) / 2 || ky == -(n as i64) / 2
                {
                    continue;
                }
                let idx = self.grid.index(ix, iy);
                let jx = if kx <= 0 { -kx } else { n as i64 - kx } as usize;
                let jy = if ky <= 0 { -ky } else { n as i64 - ky } as usize;
                let d = (self.coef[idx] - self.coef[self.grid.index(jx, jy)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn mean(&self) -> f64 {
        self.coef[0].re
    }

    pub fn project_mean_zero(&mut self) {
        self.coef[0] = Complex64::ZERO;
    }

    pub fn is_mean_zero(&self, tol: f64) -> bool {
        self.coef[0].norm() <= tol
    }

    /// Physical samples (row-major, `x` fastest).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coef.clone();
        self.grid.ifft2(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Sup of the imaginary residue in physical space, for symmetry checks.
    pub fn imag_defect(&self) -> f64 {
        let mut buf = self.coef.clone();
        self.grid.ifft2(&mut buf);
        buf.into_iter().fold(0.0f64, |m, c| m.max(c.im.abs()))
    }

    /// Normalized L^p norm: the p-th root of the grid average of `|f|^p`.
    /// `p = inf` gives the grid max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p == f64::INFINITY {
            return self.linf_norm();
        }
        assert!(p >= 1.0, "lp_norm needs p >= 1");
        let phys = self.to_physical();
        let n2 = phys.len() as f64;
        if p == 2.0 {
            (phys.iter().map(|v| v * v).sum::<f64>() / n2).sqrt()
        } else if p == 1.0 {
            phys.iter().map(|v| v.abs()).sum::<f64>() / n2
        } else {
            (phys.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n2).powf(1.0 / p)
        }
    }

    pub fn linf_norm(&self) -> f64 {
        self.to_physical()
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// L^2 norm by Parseval; equals `lp_norm(2)` to roundoff.
    pub fn l2_norm(&self) -> f64 {
        self.coef.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn derivative(&self, axis: Axis) -> SpectralField {
        let n = self.grid.n;
        let nyquist = -((n / 2) as i64);
        let mut out = self.clone();
        for iy in 0..n {
            for ix in 0..n {
                let idx = self.grid.index(ix, iy);
                let (k, xi) = match axis {
                    Axis::X => (self.grid.k_int[ix], self.grid.xi[ix]),
                    Axis::Y => (self.grid.k_int[iy], self.grid.xi[iy]),
                };
                out.coef[idx] = if k == nyquist {
                    Complex64::ZERO
                } else {
                    Complex64::new(0.0, xi) * self.coef[idx]
                };
            }
        }
        out
    }

    pub fn gradient(&self) -> VectorField {
        VectorField {
            components: [self.derivative(Axis::X), self.derivative(Axis::Y)],
        }
    }

    pub fn laplacian(&self) -> SpectralField {
        let mut out = self.clone();
        let n = self.grid.n;
        for iy in 0..n {
            for ix in 0..n {
                let idx = self.grid.index(ix, iy);
                let r2 = self.grid.xi[ix] * self.grid.xi[ix] + self.grid.xi[iy] * self.grid.xi[iy];
                out.coef[idx] = -r2 * self.coef[idx];
            }
        }
        out
    }

    /// `(-Delta)^{-1}` with the zero-mean convention.
    pub fn inverse_neg_laplacian(&self) -> Result<SpectralField> {
        if !self.is_mean_zero(1e-13 * self.l2_norm().max(1.0)) {
            return Err(Error::Precondition(
                "inverse Laplacian needs a mean-zero field".into(),
            ));
        }
        let mut out = self.clone();
        let n = self.grid.n;
        for iy in 0..n {
            for ix in 0..n {
                let idx = self.grid.index(ix, iy);
                let r2 = self.grid.xi[ix] * self.grid.xi[ix] + self.grid.xi[iy] * self.grid.xi[iy];
                out.coef[idx] = if r2 == 0.0 {
                    Complex64::ZERO
                } else {
                    self.coef[idx] / r2
                };
            }
        }
        Ok(out)
    }

    /// Apply a real radial Fourier multiplier `m(|xi|)`.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> SpectralField {
        let n = self.grid.n;
        let mut out = self.clone();
        for iy in 0..n {
            for ix in 0..n {
                let idx = self.grid.index(ix, iy);
                out.coef[idx] = self.coef[idx] * m(self.grid.xi_norm(ix, iy));
            }
        }
        out
    }

    /// Apply a per-mode multiplier `sigma(xi_x, xi_y)`. The caller is
    /// responsible for `sigma(-xi) = conj(sigma(xi))` when the result must be
    /// real; symmetry is re-enforced afterwards.
    pub fn apply_multiplier(&self, sigma: impl Fn(f64, f64) -> Complex64) -> SpectralField {
        let n = self.grid.n;
        let mut out = self.clone();
        for iy in 0..n {
            for ix in 0..n {
                let idx = self.grid.index(ix, iy);
                out.coef[idx] = self.coef[idx] * sigma(self.grid.xi[ix], self.grid.xi[iy]);
            }
        }
        out.enforce_hermitian();
        out
    }

    /// Apply a precomputed real multiplier table (one value per grid index).
    pub fn apply_table(&self, table: &[f64]) -> SpectralField {
        debug_assert_eq!(table.len(), self.coef.len());
        let mut out = self.clone();
        for (c, &m) in out.coef.iter_mut().zip(table.iter()) {
            *c *= m;
        }
        out
    }

    /// Galerkin product: 3/2 zero-padded physical multiplication truncated to
    /// the retained disc. Exact for retained output modes.
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        self.assert_same_grid(other)?;
        let g = &self.grid;
        let n = g.n;
        let m = 3 * n / 2;
        let mut a = vec![Complex64::ZERO; m * m];
        let mut b = vec![Complex64::ZERO; m * m];
        for iy in 0..n {
            for ix in 0..n {
                let idx = g.index(ix, iy);
                let ca = self.coef[idx];
                let cb = other.coef[idx];
                if ca == Complex64::ZERO && cb == Complex64::ZERO {
                    continue;
                }
                let kx = g.k_int[ix];
                let ky = g.k_int[iy];
                if kx == -(n as i64) / 2 || ky == -(n as i64) / 2 {
                    continue; // Nyquist never participates in products
                }
                let px = pad_index(kx, m);
                let py = pad_index(ky, m);
                a[py * m + px] = ca;
                b[py * m + px] = cb;
            }
        }
        g.ifft2_pad(&mut a);
        g.ifft2_pad(&mut b);
        for (va, vb) in a.iter_mut().zip(b.iter()) {
            *va *= *vb;
        }
        g.fft2_pad(&mut a);
        let mut out = SpectralField::zeros(g);
        for iy in 0..n {
            for ix in 0..n {
                if !g.retained(ix, iy) {
                    continue;
                }
                let px = pad_index(g.k_int[ix], m);
                let py = pad_index(g.k_int[iy], m);
                out.coef[g.index(ix, iy)] = a[py * m + px];
            }
        }
        out.enforce_hermitian();
        Ok(out)
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for c in self.coef.iter_mut() {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        debug_assert!(self.grid.same_grid(&other.grid));
        let mut out = self.clone();
        for (c, o) in out.coef.iter_mut().zip(other.coef.iter()) {
            *c += *o;
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        debug_assert!(self.grid.same_grid(&other.grid));
        let mut out = self.clone();
        for (c, o) in out.coef.iter_mut().zip(other.coef.iter()) {
            *c -= *o;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &SpectralField, s: f64) {
        debug_assert!(self.grid.same_grid(&other.grid));
        for (c, o) in self.coef.iter_mut().zip(other.coef.iter()) {
            *c += s * *o;
        }
    }

    /// Trigonometric evaluation at an arbitrary point (Fourier interpolation).
    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        let n = self.grid.n;
        let ex: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, self.grid.xi[i] * x))
            .collect();
        let ey: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, self.grid.xi[i] * y))
            .collect();
        let mut acc = Complex64::ZERO;
        for (py, row) in ey.iter().zip(self.coef.chunks_exact(n)) {
            let mut racc = Complex64::ZERO;
            for (c, px) in row.iter().zip(ex.iter()) {
                if *c != Complex64::ZERO {
                    racc += *c * *px;
                }
            }
            acc += racc * *py;
        }
        acc.re
    }

    pub fn is_finite(&self) -> bool {
        self.coef.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn pad_index(k: i64, m: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (m as i64 + k) as usize
    }
}

/// Real 2-component vector field.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub components: [SpectralField; 2],
}

impl VectorField {
    pub fn new(x: SpectralField, y: SpectralField) -> Self {
        debug_assert!(x.grid.same_grid(&y.grid));
        VectorField { components: [x, y] }
    }

    pub fn zeros(grid: &Arc<FrequencyGrid>) -> Self {
        VectorField {
            components: [SpectralField::zeros(grid), SpectralField::zeros(grid)],
        }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.components[0].grid()
    }

    pub fn x(&self) -> &SpectralField {
        &self.components[0]
    }

    pub fn y(&self) -> &SpectralField {
        &self.components[1]
    }

    pub fn divergence(&self) -> SpectralField {
        self.components[0]
            .derivative(Axis::X)
            .add(&self.components[1].derivative(Axis::Y))
    }

    /// Scalar curl `d_x u_y - d_y u_x`.
    pub fn curl(&self) -> SpectralField {
        self.components[1]
            .derivative(Axis::X)
            .sub(&self.components[0].derivative(Axis::Y))
    }

    /// `u . grad f` with dealiased products.
    pub fn advect(&self, f: &SpectralField) -> Result<SpectralField> {
        let fx = f.derivative(Axis::X);
        let fy = f.derivative(Axis::Y);
        Ok(self.components[0]
            .product(&fx)?
            .add(&self.components[1].product(&fy)?))
    }

    /// Spectral projection onto divergence-free fields. Keeps the mean.
    pub fn leray_project(&self) -> VectorField {
        let g = self.grid();
        let n = g.n;
        let mut ux = self.components[0].clone();
        let mut uy = self.components[1].clone();
        for iy in 0..n {
            for ix in 0..n {
                let idx = g.index(ix, iy);
                let xx = g.xi[ix];
                let yy = g.xi[iy];
                let r2 = xx * xx + yy * yy;
                if r2 == 0.0 {
                    continue;
                }
                let dot = (xx * ux.coef[idx] + yy * uy.coef[idx]) / r2;
                ux.coef[idx] -= xx * dot;
                uy.coef[idx] -= yy * dot;
            }
        }
        VectorField {
            components: [ux, uy],
        }
    }

    /// Max pointwise Euclidean magnitude.
    pub fn linf_norm(&self) -> f64 {
        let px = self.components[0].to_physical();
        let py = self.components[1].to_physical();
        px.iter()
            .zip(py.iter())
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Max over the four entries of `sup |d_i u_j|`.
    pub fn grad_linf(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.components {
            for axis in Axis::BOTH {
                worst = worst.max(c.derivative(axis).linf_norm());
            }
        }
        worst
    }

    pub fn l2_norm(&self) -> f64 {
        self.components[0]
            .l2_norm()
            .hypot(self.components[1].l2_norm())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].add(&other.components[0]),
                self.components[1].add(&other.components[1]),
            ],
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].sub(&other.components[0]),
                self.components[1].sub(&other.components[1]),
            ],
        }
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        VectorField {
            components: [self.components[0].scaled(s), self.components[1].scaled(s)],
        }
    }

    pub fn add_assign_scaled(&mut self, other: &VectorField, s: f64) {
        self.components[0].add_assign_scaled(&other.components[0], s);
        self.components[1].add_assign_scaled(&other.components[1], s);
    }

    pub fn eval_at(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.components[0].eval_at(x, y),
            self.components[1].eval_at(x, y),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<FrequencyGrid> {
        FrequencyGrid::new(n, TWO_PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(8, TWO_PI).is_err());
        assert!(FrequencyGrid::new(48, TWO_PI).is_err());
        assert!(FrequencyGrid::new(64, -1.0).is_err());
        let g = grid(64);
        assert_eq!(g.kmax(), 21);
    }

    #[test]
    fn fft_round_trip() {
        let g = grid(32);
        let f = SpectralField::from_fn(&g, |x, y| (x.sin() + (2.0 * y).cos()) * 0.5);
        let phys = f.to_physical();
        let f2 = SpectralField::from_physical(&g, &phys).unwrap();
        let diff: f64 = f
            .coef()
            .iter()
            .zip(f2.coef())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14, "round-trip defect {diff}");
    }

    #[test]
    fn cosine_mode_has_expected_coefficients() {
        let g = grid(32);
        let f = SpectralField::cosine_mode(&g, 3, 0, 2.0).unwrap();
        assert!((f.mode(3, 0).unwrap().re - 1.0).abs() < 1e-15);
        assert!((f.mode(-3, 0).unwrap().re - 1.0).abs() < 1e-15);
        let phys = f.to_physical();
        let (x, _) = g.node(5, 7);
        assert!((phys[7 * 32 + 5] - 2.0 * (3.0 * x).cos()).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_cosine() {
        let g = grid(32);
        let f = SpectralField::cosine_mode(&g, 2, 0, 1.0).unwrap();
        let df = f.derivative(Axis::X);
        // d/dx cos(2x) = -2 sin(2x)
        let phys = df.to_physical();
        for iy in 0..4 {
            for ix in 0..32 {
                let (x, _) = g.node(ix, iy);
                assert!((phys[iy * 32 + ix] + 2.0 * (2.0 * x).sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_matches_brute_force_convolution() {
        let n = 32;
        let g = grid(n);
        let f = SpectralField::random(&g, 1.5, 11);
        let h = SpectralField::random(&g, 1.5, 12);
        let p = f.product(&h).unwrap();
        // brute-force convolution of series coefficients
        let mut worst: f64 = 0.0;
        for ky in -3i64..=3 {
            for kx in -3i64..=3 {
                let mut acc = Complex64::ZERO;
                let km = g.kmax();
                for ay in -km..=km {
                    for ax in -km..=km {
                        let bx = kx - ax;
                        let by = ky - ay;
                        if bx < -km || bx > km || by < -km || by > km {
                            continue;
                        }
                        let ca = f.mode(ax, ay).unwrap();
                        let cb = h.mode(bx, by).unwrap();
                        acc += ca * cb;
                    }
                }
                worst = worst.max((acc - p.mode(kx, ky).unwrap()).norm());
            }
        }
        assert!(worst < 1e-13, "convolution mismatch {worst}");
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid(64);
        let f = SpectralField::random(&g, 2.0, 5);
        assert!((f.l2_norm() - f.lp_norm(2.0)).abs() < 1e-12);
    }

    #[test]
    fn random_field_is_real_and_mean_zero() {
        let g = grid(64);
        let f = SpectralField::random(&g, 2.0, 42);
        assert!(f.imag_defect() < 1e-12);
        assert!(f.mean().abs() < 1e-15);
        assert!((f.linf_norm() - 1.0).abs() < 1e-12);
        // same seed, same field
        let f2 = SpectralField::random(&g, 2.0, 42);
        let diff: f64 = f
            .coef()
            .iter()
            .zip(f2.coef())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn leray_projection_kills_divergence() {
        let g = grid(64);
        let u = VectorField::new(
            SpectralField::random(&g, 2.0, 1),
            SpectralField::random(&g, 2.0, 2),
        );
        let v = u.leray_project();
        assert!(v.divergence().linf_norm() < 1e-12 * v.grad_linf().max(1.0));
        // projection is idempotent
        let w = v.leray_project();
        let d = v.sub(&w);
        assert!(d.components[0].l2_norm() + d.components[1].l2_norm() < 1e-14);
    }

    #[test]
    fn eval_at_matches_grid_nodes() {
        let g = grid(32);
        let f = SpectralField::random(&g, 2.0, 9);
        let phys = f.to_physical();
        for &(ix, iy) in &[(0usize, 0usize), (5, 7), (31, 16)] {
            let (x, y) = g.node(ix, iy);
            assert!((f.eval_at(x, y) - phys[iy * 32 + ix]).abs() < 1e-11);
        }
    }
}
