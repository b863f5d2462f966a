//! The relaxed interface iteration, its energy and stopping rule.
//!
//! One step maps a Dirichlet datum `g` to
//! `(1 - α) g + α S_κ[∂_n ψ_e - (ε1/ε2) ∂_n(ψ_0 + ψ_r)]`, where `ψ_r` solves
//! the Laplace problem with trace `g - ψ_0` and `ψ_e` the screened problem
//! with trace `g`. Data are stored as per-ball harmonic coefficients of the
//! exposure-weighted trace (see [`BoundaryDatum`]).

use crate::analytic::{single_layer_eig, PhysicalParams};
use crate::cavity::{dist, Atom, SurfaceGrid, DEFAULT_DELTA};
use crate::interior::{check_resolution, BallExpansion, BoundaryDatum, HarmonicTable, InteriorSolver};
use crate::krylov::{gmres, GmresConfig, LinearOperator};
use crate::par;
use crate::specfun::{degrees, lebedev_grid};
use crate::{Error, Result, COULOMB_KJ_MOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Mutex;

const CHARGE_CLEARANCE: f64 = 1e-12;
const DIVERGENCE_LIMIT: f64 = 1e12;

/// Coulomb potential `Σ q_i / (ε1 |x - x_i|)` of the solute charges.
pub fn psi0_eval(atoms: &[Atom], points: &[[f64; 3]], eps1: f64) -> Result<Vec<f64>> {
    par::map_slice(points, |&x| {
        let mut sum = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if a.charge == 0.0 {
                continue;
            }
            let r = dist(x, a.center);
            if r < CHARGE_CLEARANCE {
                return Err(Error::ChargeOnTarget { atom: i });
            }
            sum += a.charge / r;
        }
        Ok(sum / eps1)
    })
    .into_iter()
    .collect()
}

/// Gradient of [`psi0_eval`].
pub fn psi0_gradient(atoms: &[Atom], points: &[[f64; 3]], eps1: f64) -> Result<Vec<[f64; 3]>> {
    par::map_slice(points, |&x| {
        let mut g = [0.0; 3];
        for (i, a) in atoms.iter().enumerate() {
            if a.charge == 0.0 {
                continue;
            }
            let r = dist(x, a.center);
            if r < CHARGE_CLEARANCE {
                return Err(Error::ChargeOnTarget { atom: i });
            }
            let f = -a.charge / (eps1 * r * r * r);
            for d in 0..3 {
                g[d] += f * (x[d] - a.center[d]);
            }
        }
        Ok(g)
    })
    .into_iter()
    .collect()
}

/// Yukawa single-layer operator restricted to the exposed surface points.
///
/// The contribution of a sphere to its own points uses the exact
/// eigenvalues of the full-sphere operator on the harmonics up to `lmax`.
/// Other spheres are integrated with their Lebedev rule, each node standing
/// for a Gaussian-smeared patch of its own area. The smeared kernel
/// `erf(r/c) e^{-κr} / (4πr)` agrees with the point kernel to machine
/// precision once `r > 6c` (about one grid spacing) and stays bounded and
/// positive definite when nodes of two spheres nearly coincide along an
/// intersection curve.
#[derive(Debug, Clone)]
pub struct SingleLayerOperator {
    kappa: f64,
    table: HarmonicTable,
    /// Self-sphere eigenvalue per ball and degree.
    eigs: Vec<Vec<f64>>,
}

/// Squared smearing width of a node with patch area `area`: a Gaussian of
/// this width has the same potential at its center as a flat disc.
fn smearing_width_sq(area: f64) -> f64 {
    area / (PI * PI)
}

/// `erf(r/c) / r` with its limit `2/(√π c)` at `r = 0`.
fn smeared_inverse(r: f64, c: f64) -> f64 {
    let t = r / c;
    if t < 1e-8 {
        2.0 / (PI.sqrt() * c)
    } else if t > 6.5 {
        1.0 / r
    } else {
        libm::erf(t) / r
    }
}

impl SingleLayerOperator {
    pub fn new(surface: &SurfaceGrid, lmax: usize, kappa: f64) -> Result<Self> {
        check_resolution(lmax, surface.grid().precision())?;
        let eigs = surface
            .atoms()
            .iter()
            .map(|a| {
                (0..=lmax)
                    .map(|l| single_layer_eig(l, a.radius, kappa))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kappa,
            table: HarmonicTable::new(surface, lmax),
            eigs,
        })
    }

    /// Applies the operator to a density given at exposed points (flat
    /// order; buried entries are ignored and returned as zero).
    pub fn apply(&self, surface: &SurfaceGrid, sigma: &[f64]) -> Vec<f64> {
        let coeffs = self.table.project_exposed(surface, sigma);
        let mut out = self.table.synthesize_exposed(surface, &coeffs, &self.eigs);
        let n_per = surface.n_per_sphere();
        // (sphere, position, area * density, squared width)
        let sources: Vec<(usize, [f64; 3], f64, f64)> = surface
            .exposed_indices()
            .into_iter()
            .filter(|&f| sigma[f] != 0.0)
            .map(|f| {
                let area = surface.area_weight(f);
                (f / n_per, surface.point(f), area * sigma[f], smearing_width_sq(area))
            })
            .collect();
        let kappa = self.kappa;
        par::for_each_chunk(&mut out, n_per, |i, block| {
            for (n, v) in block.iter_mut().enumerate() {
                let flat = i * n_per + n;
                if !surface.is_exposed(flat) {
                    continue;
                }
                let x = surface.point(flat);
                let c_self = smearing_width_sq(surface.area_weight(flat));
                let mut acc = 0.0;
                for &(j, y, q, c_src) in &sources {
                    if j == i {
                        continue;
                    }
                    let r = dist(x, y);
                    let c = (0.5 * (c_self + c_src)).sqrt();
                    acc += q * (-kappa * r).exp() * smeared_inverse(r, c);
                }
                *v += acc / (4.0 * PI);
            }
        });
        out
    }
}

/// One-shot version of [`SingleLayerOperator::apply`].
pub fn apply_single_layer(surface: &SurfaceGrid, sigma: &[f64], kappa: f64, lmax: usize) -> Result<Vec<f64>> {
    Ok(SingleLayerOperator::new(surface, lmax, kappa)?.apply(surface, sigma))
}

/// `½ Σ q_i ψ_r(x_i)` in e²/Å; multiply by [`COULOMB_KJ_MOL`] for kJ/mol.
///
/// Atom `i` is evaluated with the expansion of ball `i`.
pub fn solvation_energy(reaction: &BallExpansion, atoms: &[Atom]) -> Result<f64> {
    let mut e = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        if a.charge != 0.0 {
            e += a.charge * reaction.evaluate_at(i, a.center)?;
        }
    }
    Ok(0.5 * e)
}

/// Starting datum of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialGuess {
    Zero,
    Psi0,
}

impl std::str::FromStr for InitialGuess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "psi0" => Ok(Self::Psi0),
            other => Err(Error::Config(format!("unknown initial guess {other:?} (zero|psi0)"))),
        }
    }
}

impl std::fmt::Display for InitialGuess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Psi0 => "psi0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub params: PhysicalParams,
    pub lmax: usize,
    pub leb_order: usize,
    pub alpha: f64,
    /// Relative energy change that stops the iteration.
    pub tol: f64,
    pub kmax: usize,
    pub g0: InitialGuess,
    /// Burial margin of the surface classification, in Å.
    pub delta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            lmax: 7,
            leb_order: 86,
            alpha: 1.0,
            tol: 1e-4,
            kmax: 60,
            g0: InitialGuess::Zero,
            delta: DEFAULT_DELTA,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.kmax == 0 {
            return Err(Error::Config("kmax must be at least 1".into()));
        }
        check_alpha(self.alpha)?;
        check_resolution(self.lmax, lebedev_grid(self.leb_order)?.precision())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// History of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub alpha: f64,
    /// `E_k` in kJ/mol.
    pub energies_kjmol: Vec<f64>,
    /// `Err_k`; `None` at `k = 1` and whenever `E_{k-1} = 0 ≠ E_k`.
    pub rel_errors: Vec<Option<f64>>,
    pub converged: bool,
    pub n_ite: usize,
    /// Datum after the last step.
    pub final_datum: BoundaryDatum,
}

impl IterationReport {
    pub fn energy_kjmol(&self) -> Option<f64> {
        self.energies_kjmol.last().copied()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rel_errors.last().copied().flatten()
    }
}

/// Relative change `|E_k - E_{k-1}| / |E_{k-1}|`, with `0/0 = 0`.
pub fn relative_change(previous: f64, current: f64) -> Option<f64> {
    if previous == 0.0 {
        (current == 0.0).then_some(0.0)
    } else {
        Some((current - previous).abs() / previous.abs())
    }
}

/// Energy and the relaxed datum produced by one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Energy of the reaction potential solved from the incoming datum, kJ/mol.
    pub energy_kjmol: f64,
    pub next: BoundaryDatum,
}

/// The discretized iteration for one cavity; reusable across `α`.
#[derive(Debug, Clone)]
pub struct RichardsonSolver {
    config: SolverConfig,
    surface: SurfaceGrid,
    laplace: InteriorSolver,
    hsp: InteriorSolver,
    single_layer: SingleLayerOperator,
    table: HarmonicTable,
    psi0_datum: BoundaryDatum,
    /// `∂_n ψ_0` at exposed points.
    psi0_flux: Vec<f64>,
}

impl RichardsonSolver {
    pub fn new(atoms: &[Atom], config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let surface = SurfaceGrid::build(atoms, config.leb_order, config.delta)?;
        Self::with_surface(surface, config)
    }

    pub fn with_surface(surface: SurfaceGrid, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let kappa = config.params.kappa;
        let lmax = config.lmax;
        let laplace = InteriorSolver::laplace(&surface, lmax)?;
        let hsp = InteriorSolver::hsp(&surface, lmax, kappa)?;
        let single_layer = SingleLayerOperator::new(&surface, lmax, kappa)?;
        let table = HarmonicTable::new(&surface, lmax);
        // ψ_0 is only needed on Γ; buried nodes may sit on a charge
        let eps1 = config.params.eps1;
        let exposed = surface.exposed_indices();
        let targets: Vec<[f64; 3]> = exposed.iter().map(|&f| surface.point(f)).collect();
        let values = psi0_eval(surface.atoms(), &targets, eps1)?;
        let grad = psi0_gradient(surface.atoms(), &targets, eps1)?;
        let n_per = surface.n_per_sphere();
        let mut psi0 = vec![0.0; surface.len()];
        let mut psi0_flux = vec![0.0; surface.len()];
        for (k, &flat) in exposed.iter().enumerate() {
            let s = surface.directions()[flat % n_per];
            let g = grad[k];
            psi0[flat] = values[k];
            psi0_flux[flat] = g[0] * s[0] + g[1] * s[1] + g[2] * s[2];
        }
        let psi0_datum = BoundaryDatum::from_coefficients(
            surface.n_atoms(),
            lmax,
            table.project_exposed(&surface, &psi0),
        )?;
        Ok(Self {
            config,
            surface,
            laplace,
            hsp,
            single_layer,
            table,
            psi0_datum,
            psi0_flux,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn surface(&self) -> &SurfaceGrid {
        &self.surface
    }

    /// Projected trace of `ψ_0`.
    pub fn psi0_datum(&self) -> &BoundaryDatum {
        &self.psi0_datum
    }

    pub fn initial_datum(&self) -> BoundaryDatum {
        match self.config.g0 {
            InitialGuess::Zero => BoundaryDatum::zeros(self.surface.n_atoms(), self.config.lmax),
            InitialGuess::Psi0 => self.psi0_datum.clone(),
        }
    }

    /// Reaction potential with trace `g - ψ_0`.
    pub fn reaction(&self, datum: &BoundaryDatum) -> Result<BallExpansion> {
        self.laplace.solve(&datum.combine(1.0, &self.psi0_datum, -1.0))
    }

    /// Energy (kJ/mol) of the reaction potential generated by `datum`.
    pub fn energy(&self, datum: &BoundaryDatum) -> Result<f64> {
        Ok(solvation_energy(&self.reaction(datum)?, self.surface.atoms())? * COULOMB_KJ_MOL)
    }

    /// Unrelaxed update `P(χ S_κ[∂_n ψ_e - (ε1/ε2) ∂_n(ψ_0 + ψ_r)])` and the
    /// energy of `ψ_r`.
    fn update_parts(&self, datum: &BoundaryDatum) -> Result<(f64, Vec<f64>)> {
        let reaction = self.reaction(datum)?;
        let screened = self.hsp.solve(datum)?;
        let energy = solvation_energy(&reaction, self.surface.atoms())? * COULOMB_KJ_MOL;
        let dr = self.laplace.neumann_trace(&self.surface, &reaction);
        let de = self.hsp.neumann_trace(&self.surface, &screened);
        let ratio = self.config.params.eps1 / self.config.params.eps2;
        let sigma: Vec<f64> = (0..self.surface.len())
            .map(|f| de[f] - ratio * (self.psi0_flux[f] + dr[f]))
            .collect();
        let s = self.single_layer.apply(&self.surface, &sigma);
        Ok((energy, self.table.project_exposed(&self.surface, &s)))
    }

    /// The update with `α = 1`.
    pub fn update_map(&self, datum: &BoundaryDatum) -> Result<BoundaryDatum> {
        let (_, c) = self.update_parts(datum)?;
        BoundaryDatum::from_coefficients(datum.n_balls(), datum.lmax(), c)
    }

    /// One relaxed step with step size `alpha`.
    pub fn step(&self, datum: &BoundaryDatum, alpha: f64) -> Result<Step> {
        let (energy_kjmol, c) = self.update_parts(datum)?;
        let update = BoundaryDatum::from_coefficients(datum.n_balls(), datum.lmax(), c)?;
        Ok(Step {
            energy_kjmol,
            next: datum.combine(1.0 - alpha, &update, alpha),
        })
    }

    /// Runs with the configured `α`.
    pub fn run(&self) -> Result<IterationReport> {
        self.run_with(self.config.alpha, self.initial_datum())
    }

    /// Runs from `initial` with step size `alpha`.
    pub fn run_with(&self, alpha: f64, initial: BoundaryDatum) -> Result<IterationReport> {
        check_alpha(alpha)?;
        let mut datum = initial;
        let mut energies = Vec::new();
        let mut errors = Vec::new();
        let mut converged = false;
        for k in 1..=self.config.kmax {
            let step = self.step(&datum, alpha).map_err(|e| Error::Iteration {
                iteration: k,
                source: Box::new(e),
            })?;
            let e = step.energy_kjmol;
            if !e.is_finite() || e.abs() > DIVERGENCE_LIMIT {
                return Err(Error::Diverged { iteration: k, energy: e });
            }
            let err = energies.last().and_then(|&prev| relative_change(prev, e));
            energies.push(e);
            errors.push(err);
            datum = step.next;
            if err.is_some_and(|v| v < self.config.tol) {
                converged = true;
                break;
            }
        }
        Ok(IterationReport {
            alpha,
            n_ite: energies.len(),
            energies_kjmol: energies,
            rel_errors: errors,
            converged,
            final_datum: datum,
        })
    }

    /// Solves the discrete interface equation `g = update_map(g)` directly.
    pub fn fixed_point(&self) -> Result<BoundaryDatum> {
        let n_balls = self.surface.n_atoms();
        let lmax = self.config.lmax;
        let zero = BoundaryDatum::zeros(n_balls, lmax);
        let b = self.update_map(&zero)?;
        let op = InterfaceOperator {
            solver: self,
            offset: b.coeffs(),
            failure: Mutex::new(None),
        };
        let config = GmresConfig {
            tol: 1e-12,
            ..GmresConfig::default()
        };
        let sol = gmres(&op, b.coeffs(), &config);
        if let Some(e) = op.failure.into_inner().unwrap_or(None) {
            return Err(e);
        }
        BoundaryDatum::from_coefficients(n_balls, lmax, sol?.x)
    }
}

/// `g ↦ g - (update_map(g) - update_map(0))`.
struct InterfaceOperator<'a> {
    solver: &'a RichardsonSolver,
    offset: &'a [f64],
    failure: Mutex<Option<Error>>,
}

impl LinearOperator for InterfaceOperator<'_> {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n_balls = self.solver.surface.n_atoms();
        let result = BoundaryDatum::from_coefficients(n_balls, self.solver.config.lmax, x.to_vec())
            .and_then(|g| self.solver.update_map(&g));
        match result {
            Ok(m) => {
                for ((yi, xi), (mi, bi)) in y.iter_mut().zip(x).zip(m.coeffs().iter().zip(self.offset)) {
                    *yi = xi - (mi - bi);
                }
            }
            Err(e) => {
                y.iter_mut().for_each(|v| *v = f64::NAN);
                self.failure.lock().unwrap().get_or_insert(e);
            }
        }
    }
}

/// Convenience wrapper: build the solver for `atoms` and run it.
pub fn richardson_run(atoms: &[Atom], config: SolverConfig) -> Result<IterationReport> {
    RichardsonSolver::new(atoms, config)?.run()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n_ite: usize,
    pub converged: bool,
    /// Last finite energy, kJ/mol.
    pub energy_kjmol: Option<f64>,
    pub err_final: Option<f64>,
    /// Failure message for runs that stopped with an error.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `α` with the fewest iterations among converged runs; ties go to the
    /// smaller `α`.
    pub best_alpha: Option<f64>,
}

impl SweepTable {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        let best_alpha = rows
            .iter()
            .filter(|r| r.converged)
            .min_by(|a, b| a.n_ite.cmp(&b.n_ite).then(a.alpha.total_cmp(&b.alpha)))
            .map(|r| r.alpha);
        Self { rows, best_alpha }
    }
}

impl RichardsonSolver {
    /// Runs every `α` from the configured initial datum.
    pub fn sweep(&self, alphas: &[f64]) -> Result<SweepTable> {
        if alphas.is_empty() {
            return Err(Error::Config("alpha list is empty".into()));
        }
        for &a in alphas {
            check_alpha(a)?;
        }
        let initial = self.initial_datum();
        let rows = par::map_slice(alphas, |&alpha| match self.run_with(alpha, initial.clone()) {
            Ok(r) => SweepRow {
                alpha,
                n_ite: r.n_ite,
                converged: r.converged,
                energy_kjmol: r.energy_kjmol(),
                err_final: r.final_error(),
                failure: None,
            },
            Err(e) => SweepRow {
                alpha,
                n_ite: match &e {
                    Error::Diverged { iteration, .. } | Error::Iteration { iteration, .. } => *iteration,
                    _ => 0,
                },
                converged: false,
                energy_kjmol: None,
                err_final: None,
                failure: Some(e.to_string()),
            },
        });
        Ok(SweepTable::from_rows(rows))
    }
}

/// Builds the solver once and runs every `α` in `alphas`.
pub fn alpha_sweep(atoms: &[Atom], config: SolverConfig, alphas: &[f64]) -> Result<SweepTable> {
    RichardsonSolver::new(atoms, config)?.sweep(alphas)
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("invalid alpha grid {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // round to the step's decimal resolution so 0.1:0.1:2.0 prints cleanly
        (0..=n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(bad());
    };
    if values.is_empty() {
        return Err(bad());
    }
    for &a in &values {
        check_alpha(a)?;
    }
    Ok(values)
}

/// Degrees of each linear harmonic index, re-exported for callers that
/// inspect datum coefficients.
pub fn coefficient_degrees(lmax: usize) -> Vec<usize> {
    degrees(lmax)
}
