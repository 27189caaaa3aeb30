//! Dyadic partition of unity and Littlewood-Paley projections.
//!
//! The partition is built from one canonical `C^infinity` ramp `theta` that
//! equals 1 below `3/5` and 0 above `5/6`. Then `chi_hat(xi) = theta(|xi|)`
//! and `phi_hat(xi) = theta(|xi|/2) - theta(|xi|)`, which is supported in the
//! annulus `[3/5, 5/3]` and overlaps only adjacent dyadic bands. Because
//! halving a float is exact, the telescoping sum `chi_hat + sum_j
//! phi_hat(2^-j xi)` cancels to machine precision at every retained
//! frequency.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FrequencyGrid, SpectralField, VectorField};

const RAMP_LO: f64 = 3.0 / 5.0;
const RAMP_HI: f64 = 5.0 / 6.0;

/// `C^infinity` ramp: 1 for `r <= 3/5`, 0 for `r >= 5/6`, glued with the
/// standard `exp(-1/x)` bump in between.
pub fn ramp(r: f64) -> f64 {
    let t = (r - RAMP_LO) / (RAMP_HI - RAMP_LO);
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        b / (a + b)
    }
}

/// Low-frequency profile `chi_hat`, supported in the ball of radius 5/6.
pub fn chi_profile(r: f64) -> f64 {
    ramp(r)
}

/// Annulus profile `phi_hat`, supported in `[3/5, 5/3]`.
pub fn phi_profile(r: f64) -> f64 {
    ramp(0.5 * r) - ramp(r)
}

/// Dyadic partition of unity with per-band multiplier tables on a grid.
pub struct DyadicPartition {
    grid: Arc<FrequencyGrid>,
    j_min: i32,
    j_max: i32,
    j_lo: i32,
    chi: Vec<f64>,
    /// `phi_hat(2^-j xi)` tables for `j` in `[j_lo, j_max]`.
    phi: Vec<Vec<f64>>,
}

/// Build the partition for a grid. `j_max` is the largest band whose annulus
/// reaches retained frequencies; `j_min` the smallest band that can catch the
/// lowest nonzero mode (used by homogeneous norms).
pub fn build_partition(grid: &Arc<FrequencyGrid>) -> Result<DyadicPartition> {
    let xi_max = grid.xi_dealias();
    let xi_min = grid.xi_min();
    let j_max = {
        let mut j = 0;
        while 2f64.powi(j + 1) * (3.0 / 5.0) <= xi_max {
            j += 1;
        }
        j
    };
    let j_min = {
        let mut j = j_max;
        while 2f64.powi(j - 1) * (5.0 / 3.0) >= xi_min {
            j -= 1;
        }
        j
    };
    if j_max - j_min + 1 < 3 {
        return Err(Error::Config(format!(
            "grid too coarse: only {} dyadic bands fit between the lowest mode and the dealias cutoff",
            j_max - j_min + 1
        )));
    }
    let n = grid.n();
    let j_lo = j_min.min(0);
    let mut chi = vec![0.0; n * n];
    let mut phi = vec![vec![0.0; n * n]; (j_max - j_lo + 1) as usize];
    for iy in 0..n {
        for ix in 0..n {
            if !grid.retained(ix, iy) {
                continue;
            }
            let idx = grid.index(ix, iy);
            let r = grid.xi_norm(ix, iy);
            chi[idx] = chi_profile(r);
            for j in j_lo..=j_max {
                // 2^-j scaling is exact in binary floating point
                phi[(j - j_lo) as usize][idx] = phi_profile(r * 2f64.powi(-j));
            }
        }
    }
    Ok(DyadicPartition {
        grid: Arc::clone(grid),
        j_min,
        j_max,
        j_lo,
        chi,
        phi,
    })
}

impl DyadicPartition {
    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    /// Smallest homogeneous band intersecting nonzero grid frequencies.
    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    /// Largest band intersecting retained frequencies.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Bands whose annulus lies entirely inside the dealias cutoff, so no
    /// estimate run on them sees clipping.
    pub fn clean_bands(&self) -> Vec<i32> {
        (self.j_min.max(0)..=self.j_max)
            .filter(|&j| 2f64.powi(j) * (5.0 / 3.0) <= self.grid.xi_dealias())
            .collect()
    }

    fn phi_table(&self, j: i32) -> Option<&[f64]> {
        if j < self.j_lo || j > self.j_max {
            None
        } else {
            Some(&self.phi[(j - self.j_lo) as usize])
        }
    }

    /// Largest deviation of `chi_hat + sum_j phi_hat_j` from 1 over retained
    /// frequencies.
    pub fn partition_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                if !self.grid.retained(ix, iy) {
                    continue;
                }
                let idx = self.grid.index(ix, iy);
                let mut sum = self.chi[idx];
                for j in 0..=self.j_max {
                    if let Some(t) = self.phi_table(j) {
                        sum += t[idx];
                    }
                }
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// Same check for the homogeneous family on nonzero retained modes.
    pub fn homogeneous_partition_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                if !self.grid.retained(ix, iy) || (ix == 0 && iy == 0) {
                    continue;
                }
                let idx = self.grid.index(ix, iy);
                let mut sum = 0.0;
                for j in self.j_min..=self.j_max {
                    if let Some(t) = self.phi_table(j) {
                        sum += t[idx];
                    }
                }
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// Inhomogeneous block `Delta_j`, `j` in `[-1, j_max]`; `j = -1` is the
    /// `chi_hat` block (which on the torus includes the mean mode).
    pub fn delta_j(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < -1 || j > self.j_max {
            return Err(Error::Range(format!(
                "inhomogeneous band {j} outside [-1, {}]",
                self.j_max
            )));
        }
        if j == -1 {
            return Ok(f.apply_table(&self.chi));
        }
        match self.phi_table(j) {
            Some(t) => Ok(f.apply_table(t)),
            // bands between 0 and j_lo hold no grid frequency
            None => Ok(SpectralField::zeros(&self.grid)),
        }
    }

    /// Homogeneous block `Delta_j` with `j` in `[j_min, j_max]`.
    pub fn delta_j_hom(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::Range(format!(
                "homogeneous band {j} outside [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        Ok(f.apply_table(self.phi_table(j).expect("band in stored range")))
    }

    /// Fattened block `Delta_{j-1} + Delta_j + Delta_{j+1}` (inhomogeneous
    /// convention, clamped to the valid band range).
    pub fn fattened_delta_j(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < -1 || j > self.j_max {
            return Err(Error::Range(format!("band {j} outside [-1, {}]", self.j_max)));
        }
        let mut acc = SpectralField::zeros(&self.grid);
        for jj in (j - 1).max(-1)..=(j + 1).min(self.j_max) {
            acc = acc.add(&self.delta_j(f, jj)?);
        }
        Ok(acc)
    }

    /// Low-frequency block `Delta_{-1}`.
    pub fn low_freq_block(&self, f: &SpectralField) -> SpectralField {
        f.apply_table(&self.chi)
    }

    /// `S_n = sum_{j <= n} Delta_j`, the smooth projection onto frequencies
    /// up to order `2^n`.
    pub fn s_n(&self, f: &SpectralField, n: i32) -> Result<SpectralField> {
        if n < -1 {
            return Ok(SpectralField::zeros(&self.grid));
        }
        let mut acc = self.low_freq_block(f);
        for j in 0..=n.min(self.j_max) {
            acc = acc.add(&self.delta_j(f, j)?);
        }
        Ok(acc)
    }

    /// Homogeneous truncation `sum_{j_min <= j <= n} Delta_j`.
    pub fn dot_s_n(&self, f: &SpectralField, n: i32) -> Result<SpectralField> {
        let mut acc = SpectralField::zeros(&self.grid);
        for j in self.j_min..=n.min(self.j_max) {
            acc = acc.add(&self.delta_j_hom(f, j)?);
        }
        Ok(acc)
    }

    /// Apply `Delta_j` to each component.
    pub fn delta_j_vec(&self, u: &VectorField, j: i32) -> Result<VectorField> {
        Ok(VectorField::new(
            self.delta_j(u.x(), j)?,
            self.delta_j(u.y(), j)?,
        ))
    }

    pub fn delta_j_hom_vec(&self, u: &VectorField, j: i32) -> Result<VectorField> {
        Ok(VectorField::new(
            self.delta_j_hom(u.x(), j)?,
            self.delta_j_hom(u.y(), j)?,
        ))
    }

    pub fn s_n_vec(&self, u: &VectorField, n: i32) -> Result<VectorField> {
        Ok(VectorField::new(self.s_n(u.x(), n)?, self.s_n(u.y(), n)?))
    }

    /// Reconstruction defect `max |f - sum_j Delta_j f|` over coefficients.
    pub fn reconstruction_defect(&self, f: &SpectralField) -> f64 {
        let mut acc = self.low_freq_block(f);
        for j in 0..=self.j_max {
            acc = acc.add(&self.delta_j(f, j).expect("valid band"));
        }
        acc.sub(f)
            .coef()
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm()))
    }
}

/// Bernstein ratio on band `j`: the field is projected onto the band first,
/// then `sup_{|a| = k} ||d^a f_j||_{L^b}` is compared against
/// `2^{j(k + d(1/p - 1/b))} ||f_j||_{L^p}` with `d = 2`.
pub fn bernstein_ratio(
    part: &DyadicPartition,
    f: &SpectralField,
    j: i32,
    k: u32,
    p: f64,
    b: f64,
) -> Result<f64> {
    if b < p {
        return Err(Error::Domain(format!("bernstein ratio needs b >= p, got p={p}, b={b}")));
    }
    let fj = part.delta_j(f, j)?;
    let denom_norm = fj.lp_norm(p);
    if denom_norm == 0.0 {
        return Err(Error::Numeric(format!("band {j} carries no energy, ratio undefined")));
    }
    let mut sup = 0.0f64;
    for i in 0..=k {
        // all multi-indices with |a| = k: i derivatives in x, k - i in y
        let mut g = fj.clone();
        for _ in 0..i {
            g = g.derivative(crate::field::Axis::X);
        }
        for _ in 0..(k - i) {
            g = g.derivative(crate::field::Axis::Y);
        }
        sup = sup.max(g.lp_norm(b));
    }
    let inv_p = if p == f64::INFINITY { 0.0 } else { 1.0 / p };
    let inv_b = if b == f64::INFINITY { 0.0 } else { 1.0 / b };
    let scale = 2f64.powi(j).powf(k as f64 + 2.0 * (inv_p - inv_b));
    Ok(sup / (scale * denom_norm))
}
