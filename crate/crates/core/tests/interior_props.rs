use ddlpb::cavity::{parse_pqr, DEFAULT_DELTA};
use ddlpb::interior::InteriorSolver;
use ddlpb::krylov::LinearOperator;
use ddlpb::specfun::{bessel_i, log_deriv_i, real_sph_harm_all};
use ddlpb::{Atom, BoundaryDatum, ExpansionKind, SurfaceGrid};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const LMAX: usize = 7;
const NB: usize = (LMAX + 1) * (LMAX + 1);

fn fixture(name: &str) -> Vec<Atom> {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_pqr(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn dimer() -> SurfaceGrid {
    SurfaceGrid::build(&fixture("dimer.pqr"), 86, DEFAULT_DELTA).unwrap()
}

fn single(radius: f64) -> SurfaceGrid {
    SurfaceGrid::build(&[Atom::new([0.3, -0.2, 0.1], radius, 1.0).unwrap()], 86, DEFAULT_DELTA).unwrap()
}

fn datum_from(surface: &SurfaceGrid, f: impl Fn([f64; 3]) -> f64) -> BoundaryDatum {
    let values: Vec<f64> = surface.points().iter().map(|p| f(*p)).collect();
    BoundaryDatum::from_exposed_values(surface, LMAX, &values).unwrap()
}

fn kinds() -> [ExpansionKind; 2] {
    [ExpansionKind::Laplace, ExpansionKind::Hsp { kappa: 0.5 }]
}

/// Harmonic polynomials of degree at most three.
fn harmonic(p: [f64; 3]) -> f64 {
    let [x, y, z] = p;
    1.0 + x - 0.5 * y * z + (x * x - y * y) + 0.3 * x * y * z + 0.2 * (z * z * z - 1.5 * z * (x * x + y * y))
}

/// A plane wave solving `Δu = κ²u` for κ = 0.5.
fn plane_wave(p: [f64; 3]) -> f64 {
    let s = [0.48, 0.6, 0.64];
    (0.5 * (s[0] * p[0] + s[1] * p[1] + s[2] * p[2])).exp()
}

fn sample_in_ball(atom: &Atom, u: [f64; 3], frac: f64) -> [f64; 3] {
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt().max(1e-9);
    let r = atom.radius * frac;
    [
        atom.center[0] + r * u[0] / n,
        atom.center[1] + r * u[1] / n,
        atom.center[2] + r * u[2] / n,
    ]
}

#[test]
fn dimer_reproduces_global_solutions() {
    let surface = dimer();
    for (kind, exact) in [
        (ExpansionKind::Laplace, harmonic as fn([f64; 3]) -> f64),
        (ExpansionKind::Hsp { kappa: 0.5 }, plane_wave),
    ] {
        let solver = InteriorSolver::new(&surface, LMAX, kind).unwrap();
        let u = solver.solve(&datum_from(&surface, exact)).unwrap();
        // buried nodes: owner and container agree with each other and with the exact field
        for f in 0..surface.len() {
            if let Some(c) = surface.container(f) {
                let p = surface.point(f);
                let own = u.evaluate_at(f / surface.n_per_sphere(), p).unwrap();
                let other = u.evaluate_at(c, p).unwrap();
                assert!((own - other).abs() < 1e-6, "{kind:?} node {f}: {own} vs {other}");
                assert!((own - exact(p)).abs() < 1e-6);
            }
        }
        for (j, atom) in surface.atoms().iter().enumerate() {
            for k in 0..20 {
                let t = k as f64;
                let p = sample_in_ball(atom, [t.sin(), (1.7 * t).cos(), (0.3 * t).sin()], 0.05 * k as f64);
                assert!((u.evaluate_at(j, p).unwrap() - exact(p)).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn dimer_matches_direct_elimination() {
    let surface = dimer();
    for kind in kinds() {
        let solver = InteriorSolver::new(&surface, LMAX, kind).unwrap();
        let n = solver.dim();
        let mut dense = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            solver.apply(&e, &mut col);
            e[j] = 0.0;
            dense.set_column(j, &DVector::from_column_slice(&col));
        }
        let datum = datum_from(&surface, |p| (p[0] - 0.2).powi(2) + 1.0 / (1.0 + p[1] * p[1]) + p[2]);
        let direct = dense.lu().solve(&DVector::from_column_slice(datum.coeffs())).unwrap();
        let krylov = solver.solve(&datum).unwrap();
        let scale = direct.norm();
        for (a, b) in direct.iter().zip(krylov.coeffs()) {
            assert!((a - b).abs() < 1e-7 * scale, "{kind:?}: {a} vs {b}");
        }
    }
}

#[test]
fn single_ball_modes_are_exact() {
    let surface = single(1.3);
    let atom = surface.atoms()[0];
    for kind in kinds() {
        let solver = InteriorSolver::new(&surface, LMAX, kind).unwrap();
        for k in 0..NB {
            let l = (k as f64).sqrt() as usize;
            let mut coeffs = vec![0.0; NB];
            coeffs[k] = 1.0;
            let datum = BoundaryDatum::from_coefficients(1, LMAX, coeffs.clone()).unwrap();
            let u = solver.solve(&datum).unwrap();
            for (a, b) in u.coeffs().iter().zip(&coeffs) {
                assert!((a - b).abs() < 1e-12);
            }
            let s = [0.36, -0.48, 0.8];
            let r = 0.7;
            let p = [0.0, 1.0, 2.0].map(|i: f64| atom.center[i as usize] + r * s[i as usize]);
            let radial = match kind {
                ExpansionKind::Laplace => (r / atom.radius).powi(l as i32),
                ExpansionKind::Hsp { kappa } => bessel_i(l, kappa * r).unwrap() / bessel_i(l, kappa * atom.radius).unwrap(),
            };
            let y = real_sph_harm_all(LMAX, s).unwrap()[k];
            assert!((u.evaluate_at(0, p).unwrap() - radial * y).abs() < 1e-12);
            let flux = match kind {
                ExpansionKind::Laplace => l as f64 / atom.radius,
                ExpansionKind::Hsp { kappa } => kappa * log_deriv_i(l, kappa * atom.radius).unwrap(),
            };
            let trace = solver.neumann_trace(&surface, &u);
            for (f, t) in trace.iter().enumerate() {
                let y = real_sph_harm_all(LMAX, surface.directions()[f]).unwrap()[k];
                assert!((t - flux * y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn far_point_charge_potential() {
    let surface = single(1.0);
    let atom = surface.atoms()[0];
    let source = [atom.center[0], atom.center[1], atom.center[2] + 5.0];
    let exact = |p: [f64; 3]| {
        1.0 / ((p[0] - source[0]).powi(2) + (p[1] - source[1]).powi(2) + (p[2] - source[2]).powi(2)).sqrt()
    };
    let u = InteriorSolver::laplace(&surface, LMAX).unwrap().solve(&datum_from(&surface, exact)).unwrap();
    for k in 0..50 {
        let t = k as f64 * 0.37;
        let p = sample_in_ball(&atom, [t.cos(), t.sin(), (2.0 * t).cos()], 0.8 * (k as f64 / 49.0));
        // truncation error of the Poisson expansion decays like (0.8/5)^8
        assert!((u.evaluate_at(0, p).unwrap() - exact(p)).abs() < 1e-6);
    }
}

fn dense_boundary_extremes(datum: &BoundaryDatum) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=120 {
        let theta = std::f64::consts::PI * i as f64 / 120.0;
        for k in 0..240 {
            let phi = std::f64::consts::PI * k as f64 / 120.0;
            let s = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let v = datum.evaluate(0, s);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_linear(
        c1 in prop::collection::vec(-1.0f64..1.0, 2 * NB),
        c2 in prop::collection::vec(-1.0f64..1.0, 2 * NB),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let surface = dimer();
        for kind in kinds() {
            let solver = InteriorSolver::new(&surface, LMAX, kind).unwrap();
            let g1 = BoundaryDatum::from_coefficients(2, LMAX, c1.clone()).unwrap();
            let g2 = BoundaryDatum::from_coefficients(2, LMAX, c2.clone()).unwrap();
            let lhs = solver.solve(&g1.combine(a, &g2, b)).unwrap();
            let u1 = solver.solve(&g1).unwrap();
            let u2 = solver.solve(&g2).unwrap();
            let scale = u1.coeffs().iter().chain(u2.coeffs()).fold(0.0f64, |m, v| m.max(v.abs())) * (a.abs() + b.abs()) + 1e-12;
            for ((l, x), y) in lhs.coeffs().iter().zip(u1.coeffs()).zip(u2.coeffs()) {
                prop_assert!((l - (a * x + b * y)).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn maximum_principle(
        coeffs in prop::collection::vec(-1.0f64..1.0, NB),
        dirs in prop::collection::vec((prop::array::uniform3(-1.0f64..1.0), 0.0f64..0.999), 100),
    ) {
        let surface = single(1.4);
        let atom = surface.atoms()[0];
        let datum = BoundaryDatum::from_coefficients(1, LMAX, coeffs).unwrap();
        let (lo, hi) = dense_boundary_extremes(&datum);
        let bound = lo.abs().max(hi.abs());
        let slack = 1e-3 * (hi - lo);
        for kind in kinds() {
            let u = InteriorSolver::new(&surface, LMAX, kind).unwrap().solve(&datum).unwrap();
            for (d, frac) in &dirs {
                let v = u.evaluate_at(0, sample_in_ball(&atom, *d, *frac)).unwrap();
                match kind {
                    ExpansionKind::Laplace => prop_assert!(v >= lo - slack && v <= hi + slack),
                    ExpansionKind::Hsp { .. } => prop_assert!(v.abs() <= bound + slack),
                }
            }
        }
    }
}
