//! Real orthonormal spherical harmonics without the Condon-Shortley phase.
//!
//! For m > 0 the real harmonic is `sqrt(2) N P_l^m(cos θ) cos(m φ)`, for m < 0
//! it is `sqrt(2) N P_l^|m|(cos θ) sin(|m| φ)`, and m = 0 is `N P_l(cos θ)`.

use crate::{Error, Result};
use std::f64::consts::PI;

const UNIT_TOL: f64 = 1e-12;

/// Degree/order pair of a spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    l: usize,
    m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::InvalidHarmonicIndex { l, m });
        }
        Ok(Self { l, m })
    }

    /// Inverse of [`HarmonicIndex::linear`].
    pub fn from_linear(k: usize) -> Self {
        let l = (k as f64).sqrt() as usize;
        // guard against sqrt rounding for perfect squares
        let l = if (l + 1) * (l + 1) <= k {
            l + 1
        } else if l * l > k {
            l - 1
        } else {
            l
        };
        let m = k as i64 - (l * l + l) as i64;
        Self { l, m }
    }

    pub fn degree(self) -> usize {
        self.l
    }

    pub fn order(self) -> i64 {
        self.m
    }

    /// Position `l² + l + m` within a truncated basis.
    pub fn linear(self) -> usize {
        ((self.l * self.l + self.l) as i64 + self.m) as usize
    }
}

/// Number of harmonics with degree at most `lmax`.
pub const fn basis_size(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Degree of every entry of a basis truncated at `lmax`, in linear order.
pub fn degrees(lmax: usize) -> Vec<usize> {
    (0..=lmax)
        .flat_map(|l| std::iter::repeat_n(l, 2 * l + 1))
        .collect()
}

fn check_unit(s: [f64; 3]) -> Result<()> {
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if (norm - 1.0).abs() > UNIT_TOL || !norm.is_finite() {
        return Err(Error::NotUnitVector { norm });
    }
    Ok(())
}

/// Evaluates a single real harmonic at the unit direction `s`.
pub fn real_sph_harm(idx: HarmonicIndex, s: [f64; 3]) -> Result<f64> {
    check_unit(s)?;
    let mut out = vec![0.0; basis_size(idx.l)];
    fill_unchecked(idx.l, s, &mut out);
    Ok(out[idx.linear()])
}

/// Evaluates every harmonic with degree at most `lmax` at `s`.
pub fn real_sph_harm_all(lmax: usize, s: [f64; 3]) -> Result<Vec<f64>> {
    check_unit(s)?;
    let mut out = vec![0.0; basis_size(lmax)];
    fill_unchecked(lmax, s, &mut out);
    Ok(out)
}

/// Writes all harmonics up to `lmax` at direction `s` into `out`.
///
/// `s` is normalized internally; callers pass directions they built
/// themselves (differences of points, grid nodes).
pub(crate) fn fill_unchecked(lmax: usize, s: [f64; 3], out: &mut [f64]) {
    debug_assert!(out.len() >= basis_size(lmax));
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    let (x, y, z) = if norm > 0.0 {
        (s[0] / norm, s[1] / norm, s[2] / norm)
    } else {
        (0.0, 0.0, 1.0)
    };
    let rho = (x * x + y * y).sqrt();
    let (cphi, sphi) = if rho > 0.0 { (x / rho, y / rho) } else { (1.0, 0.0) };
    let ct = z;
    let st = rho;

    // Fully normalized associated Legendre values, P̄_l^m with 1/(4π) folded in.
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    let (mut cos_m, mut sin_m) = (1.0_f64, 0.0_f64);
    for m in 0..=lmax {
        if m > 0 {
            pmm *= (((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt() * st;
            let c = cos_m * cphi - sin_m * sphi;
            let s = sin_m * cphi + cos_m * sphi;
            cos_m = c;
            sin_m = s;
        }
        let mut p_prev = 0.0;
        let mut p_cur = pmm;
        for l in m..=lmax {
            if l > m {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = if l > m + 1 {
                    (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                        .sqrt()
                } else {
                    0.0
                };
                let next = a * (ct * p_cur - b * p_prev);
                p_prev = p_cur;
                p_cur = next;
            }
            let center = l * l + l;
            if m == 0 {
                out[center] = p_cur;
            } else {
                let scaled = std::f64::consts::SQRT_2 * p_cur;
                out[center + m] = scaled * cos_m;
                out[center - m] = scaled * sin_m;
            }
        }
    }
}
