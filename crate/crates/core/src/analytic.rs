//! Exact per-mode analysis on a single ball.
//!
//! On a sphere of radius `R` every Dirichlet-to-Neumann operator of the
//! problem is diagonal in the spherical harmonics, so the interface iteration
//! splits into independent scalar recurrences, one per degree `l`:
//!
//! * `λ_r(l) = ε1 l / R` (Laplace inside),
//! * `λ_c(l) = ε2 κ (-k_l'/k_l)(κR)` (screened Poisson outside),
//! * `λ_e(l) = ε2 κ (i_l'/i_l)(κR)` (screened Poisson inside),
//! * `μ(l) = (λ_r + λ_c) / (λ_e + λ_c)`, the eigenvalue of the preconditioned
//!   interface operator.
//!
//! The relaxed iteration contracts mode `l` by `|1 - α μ(l)|` per step.

use crate::specfun::{ik_product, log_deriv_i, log_deriv_i_all, log_deriv_k, log_deriv_k_all};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dielectric constants and inverse Debye length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Solute relative permittivity.
    pub eps1: f64,
    /// Solvent relative permittivity.
    pub eps2: f64,
    /// Inverse screening length, Å⁻¹.
    pub kappa: f64,
}

impl PhysicalParams {
    pub fn new(eps1: f64, eps2: f64, kappa: f64) -> Result<Self> {
        let p = Self { eps1, eps2, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.eps1) || !ok(self.eps2) {
            return Err(Error::Config(format!(
                "permittivities must be positive (eps1 = {}, eps2 = {})",
                self.eps1, self.eps2
            )));
        }
        if !ok(self.kappa) {
            return Err(Error::Config(format!(
                "kappa must be positive (got {}); use a small value such as 1e-6 for the unscreened limit",
                self.kappa
            )));
        }
        Ok(())
    }
}

impl Default for PhysicalParams {
    /// Vacuum solute in water at 0.1 M ionic strength.
    fn default() -> Self {
        Self {
            eps1: 1.0,
            eps2: 78.54,
            kappa: 0.104,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive, got {radius}")))
    }
}

/// Eigenvalue of the interior Laplace DtN map on degree `l`.
pub fn dtn_laplace_eig(l: usize, radius: f64, params: &PhysicalParams) -> Result<f64> {
    check_radius(radius)?;
    Ok(params.eps1 * l as f64 / radius)
}

/// Eigenvalue of the exterior screened-Poisson DtN map on degree `l`.
pub fn dtn_hsp_exterior_eig(l: usize, radius: f64, params: &PhysicalParams) -> Result<f64> {
    check_radius(radius)?;
    params.validate()?;
    Ok(params.eps2 * params.kappa * log_deriv_k(l, params.kappa * radius)?)
}

/// Eigenvalue of the interior screened-Poisson DtN map on degree `l`.
pub fn dtn_hsp_interior_eig(l: usize, radius: f64, params: &PhysicalParams) -> Result<f64> {
    check_radius(radius)?;
    params.validate()?;
    Ok(params.eps2 * params.kappa * log_deriv_i(l, params.kappa * radius)?)
}

/// Eigenvalue of the Yukawa single-layer operator on a sphere,
/// `κ R² i_l(κR) k_l(κR)`.
pub fn single_layer_eig(l: usize, radius: f64, kappa: f64) -> Result<f64> {
    check_radius(radius)?;
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(kappa * radius * radius * ik_product(l, kappa * radius)?)
}

/// Spectral equivalence constants `(C1, C2)` for an interior-exterior
/// Sobolev constant `cs`.
pub fn spectral_bounds(params: &PhysicalParams, cs: f64) -> Result<(f64, f64)> {
    if !(cs > 0.0) {
        return Err(Error::Domain(format!("C_S must be positive, got {cs}")));
    }
    let ratio = params.eps1 / params.eps2;
    Ok((ratio.min(1.0 / (1.0 + cs)), ratio.max(1.0)))
}

/// Upper bound `R³/3` of the interior-exterior Sobolev constant of a ball.
pub fn sobolev_ball_bound(radius: f64) -> Result<f64> {
    check_radius(radius)?;
    Ok(radius.powi(3) / 3.0)
}

/// Per-mode ratio `R³ / ((2l+3)(l+1))`; its supremum over `l` is at `l = 0`.
pub fn sobolev_mode_ratio(l: usize, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    Ok(radius.powi(3) / (((2 * l + 3) * (l + 1)) as f64))
}

/// Step minimizing the worst contraction over `[c1, c2]`: `2/(C1 + C2)`.
pub fn optimal_alpha(c1: f64, c2: f64) -> Result<f64> {
    if !(c1 > 0.0) || c1 > c2 {
        return Err(Error::Domain(format!(
            "need 0 < C1 <= C2, got C1 = {c1}, C2 = {c2}"
        )));
    }
    Ok(2.0 / (c1 + c2))
}

/// Step prediction that drops the Sobolev term from `C1`:
/// `2 / (ε1/ε2 + max(1, ε1/ε2))`.
pub fn practical_alpha(params: &PhysicalParams) -> f64 {
    let ratio = params.eps1 / params.eps2;
    2.0 / (ratio + ratio.max(1.0))
}

/// Reaction potential at the center of a ball of radius `radius` holding a
/// centered point charge `q`.
pub fn born_ion_reaction(q: f64, radius: f64, params: &PhysicalParams) -> Result<f64> {
    check_radius(radius)?;
    Ok(q / radius * (1.0 / (params.eps2 * (1.0 + params.kappa * radius)) - 1.0 / params.eps1))
}

/// Per-degree DtN eigenvalues on one ball and the preconditioned spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub radius: f64,
    pub params: PhysicalParams,
    pub lambda_r: Vec<f64>,
    pub lambda_c: Vec<f64>,
    pub lambda_e: Vec<f64>,
    pub mu: Vec<f64>,
}

impl ModeSpectrum {
    /// Spectrum for degrees `0..=lmax`.
    pub fn compute(radius: f64, params: &PhysicalParams, lmax: usize) -> Result<Self> {
        check_radius(radius)?;
        params.validate()?;
        let x = params.kappa * radius;
        let flux = params.eps2 * params.kappa;
        let lambda_c: Vec<f64> = log_deriv_k_all(lmax, x)?.iter().map(|v| flux * v).collect();
        let lambda_e: Vec<f64> = log_deriv_i_all(lmax, x)?.iter().map(|v| flux * v).collect();
        let lambda_r: Vec<f64> = (0..=lmax)
            .map(|l| params.eps1 * l as f64 / radius)
            .collect();
        let mu = (0..=lmax)
            .map(|l| (lambda_r[l] + lambda_c[l]) / (lambda_e[l] + lambda_c[l]))
            .collect();
        Ok(Self {
            radius,
            params: *params,
            lambda_r,
            lambda_c,
            lambda_e,
            mu,
        })
    }

    pub fn lmax(&self) -> usize {
        self.mu.len() - 1
    }

    /// `(min μ, max μ)` over the computed degrees.
    pub fn mu_range(&self) -> (f64, f64) {
        self.mu
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
                (lo.min(m), hi.max(m))
            })
    }

    /// Spectral bounds `(C1, C2)` with the ball estimate `C_S = R³/3`.
    pub fn bounds(&self) -> (f64, f64) {
        spectral_bounds(&self.params, self.radius.powi(3) / 3.0)
            .expect("radius is validated at construction")
    }
}

/// `max_l |1 - α μ(l)|`; the relaxed iteration converges iff this is below 1.
pub fn convergence_radius(alpha: f64, spectrum: &ModeSpectrum) -> f64 {
    spectrum
        .mu
        .iter()
        .map(|m| (1.0 - alpha * m).abs())
        .fold(0.0, f64::max)
}

/// Per-degree error history of the scalar relaxed iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrace {
    /// `errors[l][k]` is the signed error `g_l^k - g_l^*` after `k` steps.
    pub errors: Vec<Vec<f64>>,
    /// Contraction factor `1 - α μ(l)` of each degree.
    pub factors: Vec<f64>,
    /// Steps taken.
    pub iterations: usize,
    /// Max error fell to `tol` times the initial max error.
    pub converged: bool,
    /// Max error exceeds the initial max error at the last step.
    pub diverged: bool,
    /// Max error never increased from one step to the next.
    pub contracting: bool,
}

impl ModeTrace {
    /// Maximum absolute error over degrees after `k` steps.
    pub fn max_error(&self, k: usize) -> f64 {
        self.errors
            .iter()
            .map(|e| e[k.min(e.len() - 1)].abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `g^{k+1} = (1 - α μ) g^k + α b` independently for every degree.
///
/// `initial[l]` and `source[l]` are the degree-`l` coefficient of the starting
/// datum and of the preconditioned right-hand side; the fixed point is
/// `b/μ`. Missing source entries are zero.
pub fn mode_richardson(
    spectrum: &ModeSpectrum,
    initial: &[f64],
    source: &[f64],
    alpha: f64,
    tol: f64,
    kmax: usize,
) -> Result<ModeTrace> {
    if !(tol > 0.0) || kmax == 0 {
        return Err(Error::Config(format!(
            "need tol > 0 and kmax >= 1 (tol = {tol}, kmax = {kmax})"
        )));
    }
    let n = spectrum.mu.len().min(initial.len());
    let factors: Vec<f64> = spectrum.mu[..n].iter().map(|m| 1.0 - alpha * m).collect();
    let fixed: Vec<f64> = (0..n)
        .map(|l| source.get(l).copied().unwrap_or(0.0) / spectrum.mu[l])
        .collect();
    let mut values: Vec<f64> = initial[..n].to_vec();
    let mut errors: Vec<Vec<f64>> = (0..n).map(|l| vec![values[l] - fixed[l]]).collect();
    let max_at = |errors: &[Vec<f64>], k: usize| {
        errors.iter().map(|e| e[k].abs()).fold(0.0, f64::max)
    };
    let initial_max = max_at(&errors, 0);
    let mut converged = initial_max == 0.0;
    let mut contracting = true;
    let mut iterations = 0;
    while !converged && iterations < kmax {
        for l in 0..n {
            let b = source.get(l).copied().unwrap_or(0.0);
            values[l] = factors[l] * values[l] + alpha * b;
            errors[l].push(values[l] - fixed[l]);
        }
        iterations += 1;
        let now = max_at(&errors, iterations);
        if now > max_at(&errors, iterations - 1) {
            contracting = false;
        }
        if now <= tol * initial_max {
            converged = true;
        }
    }
    let diverged = max_at(&errors, iterations) > initial_max;
    Ok(ModeTrace {
        errors,
        factors,
        iterations,
        converged,
        diverged,
        contracting,
    })
}
