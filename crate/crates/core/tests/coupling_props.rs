use ddlpb::cavity::{parse_pqr, DEFAULT_DELTA};
use ddlpb::coupling::{psi0_eval, psi0_gradient, SingleLayerOperator};
use ddlpb::{Atom, BoundaryDatum, Error, PhysicalParams, RichardsonSolver, SolverConfig, SurfaceGrid};
use proptest::prelude::*;

fn fixture(name: &str) -> Vec<Atom> {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_pqr(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn config(eps2: f64, alpha: f64) -> SolverConfig {
    SolverConfig {
        params: PhysicalParams::new(1.0, eps2, 0.104).unwrap(),
        alpha,
        ..SolverConfig::default()
    }
}

#[test]
fn coulomb_examples() {
    let unit = [Atom::new([0.0; 3], 1.0, 1.0).unwrap()];
    assert!((psi0_eval(&unit, &[[2.0, 0.0, 0.0]], 1.0).unwrap()[0] - 0.5).abs() < 1e-15);
    let pair = [
        Atom::new([-1.0, 0.0, 0.0], 1.0, 1.0).unwrap(),
        Atom::new([1.0, 0.0, 0.0], 1.0, -1.0).unwrap(),
    ];
    assert_eq!(psi0_eval(&pair, &[[0.0, 0.3, -0.2]], 2.0).unwrap()[0], 0.0);
    assert!(matches!(psi0_eval(&unit, &[[0.0; 3]], 1.0), Err(Error::ChargeOnTarget { .. })));

    let (radius, eps1) = (1.7, 2.0);
    let surface = SurfaceGrid::build(&[Atom::new([0.4, 0.1, -0.3], radius, 1.0).unwrap()], 50, DEFAULT_DELTA).unwrap();
    let grad = psi0_gradient(surface.atoms(), surface.points(), eps1).unwrap();
    for (g, n) in grad.iter().zip(surface.directions()) {
        let dn = g[0] * n[0] + g[1] * n[1] + g[2] * n[2];
        assert!((dn + 1.0 / (eps1 * radius * radius)).abs() < 1e-13);
    }
}

#[test]
fn fixed_point_is_stationary() {
    for name in ["born_ion.pqr", "dimer.pqr"] {
        let solver = RichardsonSolver::new(&fixture(name), config(78.54, 1.0)).unwrap();
        let g = solver.fixed_point().unwrap();
        for alpha in [0.3, 1.0, 1.7] {
            let next = solver.step(&g, alpha).unwrap().next;
            let diff = next.combine(1.0, &g, -1.0).norm();
            assert!(diff < 1e-10 * g.norm().max(1.0), "{name} alpha={alpha}: {diff}");
        }
    }
}

#[test]
fn converged_energies_agree_across_alpha() {
    let solver = RichardsonSolver::new(&fixture("dimer.pqr"), config(78.54, 1.0)).unwrap();
    let table = solver.sweep(&[0.3, 0.6, 1.0, 1.4]).unwrap();
    let energies: Vec<f64> = table.rows.iter().filter(|r| r.converged).filter_map(|r| r.energy_kjmol).collect();
    assert_eq!(energies.len(), 4);
    let exact = solver.energy(&solver.fixed_point().unwrap()).unwrap();
    for e in energies {
        assert!(((e - exact) / exact).abs() < 5e-3, "{e} vs {exact}");
    }
}

#[test]
fn energy_is_quadratic_in_charge() {
    let atoms = fixture("dimer.pqr");
    let doubled: Vec<Atom> = atoms
        .iter()
        .map(|a| Atom::new(a.center, a.radius, 2.0 * a.charge).unwrap())
        .collect();
    let e1 = RichardsonSolver::new(&atoms, config(78.54, 1.0)).unwrap();
    let e2 = RichardsonSolver::new(&doubled, config(78.54, 1.0)).unwrap();
    let a = e1.energy(&e1.fixed_point().unwrap()).unwrap();
    let b = e2.energy(&e2.fixed_point().unwrap()).unwrap();
    assert!((b / a - 4.0).abs() < 1e-8);
}

#[test]
fn neutral_solute_has_no_reaction() {
    let atoms = [Atom::new([0.0; 3], 1.5, 0.0).unwrap()];
    let solver = RichardsonSolver::new(&atoms, config(78.54, 1.0)).unwrap();
    assert_eq!(solver.energy(&BoundaryDatum::zeros(1, 7)).unwrap(), 0.0);
}

#[test]
fn large_step_fails_for_weak_solvent() {
    let solver = RichardsonSolver::new(&fixture("offcenter_ion.pqr"), config(0.5, 1.5)).unwrap();
    match solver.run() {
        Ok(report) => assert!(!report.converged),
        Err(e) => assert!(matches!(e, Error::Diverged { .. })),
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let atoms = fixture("benzene.pqr");
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let solver = RichardsonSolver::new(&atoms, SolverConfig { kmax: 8, ..config(78.54, 0.8) }).unwrap();
            (solver.run().unwrap(), solver.sweep(&[0.5, 1.0]).unwrap())
        })
    };
    let (r1, t1) = run(1);
    let (r4, t4) = run(4);
    for (a, b) in r1.energies_kjmol.iter().zip(&r4.energies_kjmol) {
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
    for (a, b) in r1.final_datum.coeffs().iter().zip(r4.final_datum.coeffs()) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    assert_eq!(t1.rows.len(), t4.rows.len());
    for (a, b) in t1.rows.iter().zip(&t4.rows) {
        assert_eq!(a.n_ite, b.n_ite);
        assert_eq!(a.converged, b.converged);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_layer_is_symmetric(seed_a in prop::collection::vec(-1.0f64..1.0, 12 * 86), seed_b in prop::collection::vec(-1.0f64..1.0, 12 * 86)) {
        let surface = SurfaceGrid::build(&fixture("benzene.pqr"), 86, DEFAULT_DELTA).unwrap();
        let op = SingleLayerOperator::new(&surface, 7, 0.104).unwrap();
        let mask = |v: &[f64]| -> Vec<f64> {
            (0..surface.len()).map(|f| if surface.is_exposed(f) { v[f] } else { 0.0 }).collect()
        };
        let a = mask(&seed_a);
        let b = mask(&seed_b);
        let sa = op.apply(&surface, &a);
        let sb = op.apply(&surface, &b);
        let inner = |x: &[f64], y: &[f64]| -> f64 {
            (0..surface.len()).filter(|&f| surface.is_exposed(f)).map(|f| surface.area_weight(f) * x[f] * y[f]).sum()
        };
        let (l, r) = (inner(&sa, &b), inner(&a, &sb));
        prop_assert!((l - r).abs() <= 1e-10 * (l.abs() + r.abs() + 1.0));
    }
}
