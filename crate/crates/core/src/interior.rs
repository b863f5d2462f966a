//! Interior solvers on the union of balls.
//!
//! Each ball `j` carries a local expansion `u_j(c_j + r s) = Σ c^j_lm φ_l(r) Y_l^m(s)`
//! with `φ_l(r) = (r/R_j)^l` for the Laplace equation and
//! `φ_l(r) = i_l(κr)/i_l(κR_j)` for the homogeneous screened Poisson equation.
//! On the Lebedev points of sphere `j` the local solution must match the
//! Dirichlet datum where the point is exposed, and the solution of the
//! containing ball where it is buried. Projecting that rule onto the
//! harmonics gives the fixed-point system
//!
//! `X_j = P_j(χ g) + P_j((1 - χ) u_container)`,
//!
//! which is solved matrix-free with GMRES.

use crate::cavity::{dist, SurfaceGrid};
use crate::krylov::{gmres, GmresConfig, LinearOperator};
use crate::par;
use crate::specfun::{basis_size, degrees, fill_harmonics, i_radial_profile, log_deriv_i_all};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which interior equation an expansion solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpansionKind {
    Laplace,
    Hsp { kappa: f64 },
}

/// Checks that a Lebedev grid of the given precision can project a basis
/// truncated at `lmax` without aliasing products.
pub fn check_resolution(lmax: usize, precision: usize) -> Result<()> {
    if precision < 2 * lmax {
        return Err(Error::Config(format!(
            "Lebedev precision {precision} is below 2 * lmax = {}",
            2 * lmax
        )));
    }
    Ok(())
}

/// Per-ball harmonic coefficients of a Dirichlet datum, laid out like the
/// unknowns of the interior systems: ball-major, then linear harmonic index.
///
/// The coefficients of ball `j` are the projection of `χ_j g`, where `χ_j`
/// is the exposure indicator on sphere `j`. On a fully exposed sphere they
/// are the plain harmonic coefficients of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDatum {
    lmax: usize,
    n_balls: usize,
    coeffs: Vec<f64>,
}

impl BoundaryDatum {
    pub fn zeros(n_balls: usize, lmax: usize) -> Self {
        Self {
            lmax,
            n_balls,
            coeffs: vec![0.0; n_balls * basis_size(lmax)],
        }
    }

    pub fn from_coefficients(n_balls: usize, lmax: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != n_balls * basis_size(lmax) {
            return Err(Error::Config(format!(
                "expected {} coefficients, got {}",
                n_balls * basis_size(lmax),
                coeffs.len()
            )));
        }
        Ok(Self {
            lmax,
            n_balls,
            coeffs,
        })
    }

    /// Projects point values (flat surface order; buried entries ignored).
    pub fn from_exposed_values(surface: &SurfaceGrid, lmax: usize, values: &[f64]) -> Result<Self> {
        check_resolution(lmax, surface.grid().precision())?;
        if values.len() != surface.len() {
            return Err(Error::Config(format!(
                "expected {} surface values, got {}",
                surface.len(),
                values.len()
            )));
        }
        let table = HarmonicTable::new(surface, lmax);
        Ok(Self {
            lmax,
            n_balls: surface.n_atoms(),
            coeffs: table.project_exposed(surface, values),
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn n_balls(&self) -> usize {
        self.n_balls
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn ball(&self, j: usize) -> &[f64] {
        let nb = basis_size(self.lmax);
        &self.coeffs[j * nb..(j + 1) * nb]
    }

    /// `Σ_lm g^j_lm Y_l^m(s)` for a unit direction `s` on sphere `j`.
    pub fn evaluate(&self, ball: usize, s: [f64; 3]) -> f64 {
        let mut y = vec![0.0; basis_size(self.lmax)];
        fill_harmonics(self.lmax, s, &mut y);
        self.ball(ball).iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        Self {
            lmax: self.lmax,
            n_balls: self.n_balls,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Local solutions of an interior problem, one expansion per ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallExpansion {
    kind: ExpansionKind,
    lmax: usize,
    centers: Vec<[f64; 3]>,
    radii: Vec<f64>,
    coeffs: Vec<f64>,
}

impl BallExpansion {
    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn n_balls(&self) -> usize {
        self.radii.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn ball(&self, j: usize) -> &[f64] {
        let nb = basis_size(self.lmax);
        &self.coeffs[j * nb..(j + 1) * nb]
    }

    /// Evaluates the local expansion of `owner` at a point inside that ball.
    pub fn evaluate_at(&self, owner: usize, point: [f64; 3]) -> Result<f64> {
        let center = self.centers[owner];
        let radius = self.radii[owner];
        let r = dist(point, center);
        if r > radius * (1.0 + 1e-12) {
            return Err(Error::OutsideBall { ball: owner });
        }
        let basis = local_basis(self.kind, self.lmax, center, radius, point)?;
        Ok(self.ball(owner).iter().zip(&basis).map(|(c, b)| c * b).sum())
    }
}

/// Basis functions of the local expansion of a ball evaluated at `point`.
fn local_basis(
    kind: ExpansionKind,
    lmax: usize,
    center: [f64; 3],
    radius: f64,
    point: [f64; 3],
) -> Result<Vec<f64>> {
    let rel = [point[0] - center[0], point[1] - center[1], point[2] - center[2]];
    let r = (rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]).sqrt();
    let mut basis = vec![0.0; basis_size(lmax)];
    fill_harmonics(lmax, rel, &mut basis);
    let radial: Vec<f64> = match kind {
        ExpansionKind::Laplace => (0..=lmax).map(|l| (r / radius).powi(l as i32)).collect(),
        ExpansionKind::Hsp { kappa } => i_radial_profile(lmax, kappa, r, radius)?,
    };
    for (b, l) in basis.iter_mut().zip(degrees(lmax)) {
        *b *= radial[l];
    }
    Ok(basis)
}

/// Harmonics at the grid directions and the projection weights `4π w_n`.
#[derive(Debug, Clone)]
pub(crate) struct HarmonicTable {
    pub lmax: usize,
    pub nb: usize,
    /// `values[n * nb + k] = Y_k(s_n)`
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HarmonicTable {
    pub fn new(surface: &SurfaceGrid, lmax: usize) -> Self {
        let nb = basis_size(lmax);
        let dirs = surface.directions();
        let mut values = vec![0.0; dirs.len() * nb];
        for (n, s) in dirs.iter().enumerate() {
            fill_harmonics(lmax, *s, &mut values[n * nb..(n + 1) * nb]);
        }
        let weights = surface.weights().iter().map(|w| 4.0 * PI * w).collect();
        Self {
            lmax,
            nb,
            values,
            weights,
        }
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.nb..(n + 1) * self.nb]
    }

    /// Per-ball projection of point values restricted to exposed points.
    pub fn project_exposed(&self, surface: &SurfaceGrid, values: &[f64]) -> Vec<f64> {
        let n_per = surface.n_per_sphere();
        let mut out = vec![0.0; surface.n_atoms() * self.nb];
        par::for_each_chunk(&mut out, self.nb, |j, block| {
            for n in 0..n_per {
                let flat = j * n_per + n;
                if !surface.is_exposed(flat) {
                    continue;
                }
                let v = self.weights[n] * values[flat];
                for (c, y) in block.iter_mut().zip(self.row(n)) {
                    *c += v * y;
                }
            }
        });
        out
    }

    /// Point values of per-ball expansions with per-degree scaling, at
    /// exposed points only (buried entries are zero).
    pub fn synthesize_exposed(&self, surface: &SurfaceGrid, coeffs: &[f64], scale: &[Vec<f64>]) -> Vec<f64> {
        let n_per = surface.n_per_sphere();
        let degs = degrees(self.lmax);
        let mut out = vec![0.0; surface.len()];
        par::for_each_chunk(&mut out, n_per, |j, block| {
            let c = &coeffs[j * self.nb..(j + 1) * self.nb];
            let scaled: Vec<f64> = c.iter().zip(&degs).map(|(c, &l)| c * scale[j][l]).collect();
            for (n, v) in block.iter_mut().enumerate() {
                if surface.is_exposed(j * n_per + n) {
                    *v = scaled.iter().zip(self.row(n)).map(|(a, b)| a * b).sum();
                }
            }
        });
        out
    }
}

#[derive(Debug, Clone)]
struct BuriedPoint {
    n: usize,
    container: usize,
    basis: Vec<f64>,
}

/// Coupled interior solver for one equation on a fixed surface.
#[derive(Debug, Clone)]
pub struct InteriorSolver {
    kind: ExpansionKind,
    table: HarmonicTable,
    centers: Vec<[f64; 3]>,
    radii: Vec<f64>,
    buried: Vec<Vec<BuriedPoint>>,
    /// Normal-derivative factor per ball and degree.
    flux: Vec<Vec<f64>>,
    gmres: GmresConfig,
}

impl InteriorSolver {
    pub fn laplace(surface: &SurfaceGrid, lmax: usize) -> Result<Self> {
        Self::new(surface, lmax, ExpansionKind::Laplace)
    }

    pub fn hsp(surface: &SurfaceGrid, lmax: usize, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        Self::new(surface, lmax, ExpansionKind::Hsp { kappa })
    }

    pub fn new(surface: &SurfaceGrid, lmax: usize, kind: ExpansionKind) -> Result<Self> {
        check_resolution(lmax, surface.grid().precision())?;
        let table = HarmonicTable::new(surface, lmax);
        let atoms = surface.atoms();
        let centers: Vec<[f64; 3]> = atoms.iter().map(|a| a.center).collect();
        let radii: Vec<f64> = atoms.iter().map(|a| a.radius).collect();
        let n_per = surface.n_per_sphere();
        let buried = par::map_range(atoms.len(), |j| {
            (0..n_per)
                .filter_map(|n| {
                    let flat = j * n_per + n;
                    surface.container(flat).map(|i| {
                        local_basis(kind, lmax, centers[i], radii[i], surface.point(flat)).map(
                            |basis| BuriedPoint {
                                n,
                                container: i,
                                basis,
                            },
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let flux = radii
            .iter()
            .map(|&r| match kind {
                ExpansionKind::Laplace => Ok((0..=lmax).map(|l| l as f64 / r).collect()),
                ExpansionKind::Hsp { kappa } => Ok(log_deriv_i_all(lmax, kappa * r)?
                    .into_iter()
                    .map(|v| kappa * v)
                    .collect()),
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self {
            kind,
            table,
            centers,
            radii,
            buried,
            flux,
            gmres: GmresConfig::default(),
        })
    }

    pub fn with_gmres(mut self, config: GmresConfig) -> Self {
        self.gmres = config;
        self
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn lmax(&self) -> usize {
        self.table.lmax
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.radii.len() * self.table.nb
    }

    /// `(K X)_j = P_j((1 - χ_j) u_container(X))`.
    pub fn apply_coupling(&self, x: &[f64], out: &mut [f64]) {
        let nb = self.table.nb;
        par::for_each_chunk(out, nb, |j, block| {
            block.iter_mut().for_each(|v| *v = 0.0);
            for bp in &self.buried[j] {
                let xi = &x[bp.container * nb..(bp.container + 1) * nb];
                let u: f64 = bp.basis.iter().zip(xi).map(|(a, b)| a * b).sum();
                let v = self.table.weights[bp.n] * u;
                for (o, y) in block.iter_mut().zip(self.table.row(bp.n)) {
                    *o += v * y;
                }
            }
        });
    }

    /// Solves `(I - K) X = G` for the datum coefficients `G`.
    pub fn solve(&self, datum: &BoundaryDatum) -> Result<BallExpansion> {
        if datum.lmax() != self.lmax() || datum.n_balls() != self.radii.len() {
            return Err(Error::Config(
                "boundary datum does not match the solver discretization".into(),
            ));
        }
        let coeffs = if self.buried.iter().all(Vec::is_empty) {
            datum.coeffs().to_vec()
        } else {
            gmres(self, datum.coeffs(), &self.gmres)?.x
        };
        Ok(BallExpansion {
            kind: self.kind,
            lmax: self.lmax(),
            centers: self.centers.clone(),
            radii: self.radii.clone(),
            coeffs,
        })
    }

    /// Outward normal derivative of the expansion at exposed points, flat
    /// surface order, zero at buried points.
    pub fn neumann_trace(&self, surface: &SurfaceGrid, expansion: &BallExpansion) -> Vec<f64> {
        self.table
            .synthesize_exposed(surface, expansion.coeffs(), &self.flux)
    }
}

impl LinearOperator for InteriorSolver {
    fn dim(&self) -> usize {
        InteriorSolver::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_coupling(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - *yi;
        }
    }
}

/// Solves the Laplace problem on the cavity with Dirichlet datum `dirichlet`.
pub fn solve_laplace_cavity(surface: &SurfaceGrid, dirichlet: &BoundaryDatum) -> Result<BallExpansion> {
    InteriorSolver::laplace(surface, dirichlet.lmax())?.solve(dirichlet)
}

/// Solves `-Δu + κ²u = 0` on the cavity with Dirichlet datum `dirichlet`.
pub fn solve_hsp_cavity(surface: &SurfaceGrid, dirichlet: &BoundaryDatum, kappa: f64) -> Result<BallExpansion> {
    InteriorSolver::hsp(surface, dirichlet.lmax(), kappa)?.solve(dirichlet)
}

/// Outward normal derivative at exposed points (flat order, zero elsewhere).
pub fn neumann_trace(expansion: &BallExpansion, surface: &SurfaceGrid) -> Result<Vec<f64>> {
    let solver = InteriorSolver::new(surface, expansion.lmax(), expansion.kind())?;
    Ok(solver.neumann_trace(surface, expansion))
}
