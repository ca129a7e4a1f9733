use aj_core::library;
use aj_core::recursion::{aj_check, control_polynomial, QEPoly};
use aj_core::solver::*;
use aj_core::Error;
use num_bigint::BigInt;
use num_complex::Complex64 as C;

fn opts() -> SolveOptions {
    SolveOptions { n_starts: 30, ..Default::default() }
}

#[test]
fn figure8_solutions_satisfy_the_system() {
    let d = library::diagram("4_1").unwrap();
    let s = Solver::new(&d).unwrap();
    let mut found = 0;
    for mu in unit_circle_grid(6) {
        for sol in s.solve_at(mu, opts()).unwrap() {
            assert!(sol.max_residual() < 1e-10, "{:?}", sol.residuals);
            assert!(sol.s_identity < 1e-8);
            assert_eq!(sol.point.len(), d.num_crossings() + 1);
            found += 1;
        }
    }
    assert!(found >= 6);
}

#[test]
fn fixed_seed_is_deterministic() {
    let d = library::diagram("4_1").unwrap();
    let mu = C::new(0.3, 0.9);
    let a = solve_at(&d, mu, opts()).unwrap();
    let b = solve_at(&d, mu, opts()).unwrap();
    let ja: Vec<_> = a.iter().map(|s| s.to_json().to_string()).collect();
    let jb: Vec<_> = b.iter().map(|s| s.to_json().to_string()).collect();
    assert_eq!(ja, jb);
}

#[test]
fn degenerate_meridians_are_rejected() {
    let d = library::diagram("3_1").unwrap();
    for mu in [C::new(0.0, 0.0), C::new(1.0, 0.0)] {
        assert!(matches!(solve_at(&d, mu, opts()), Err(Error::BadInput(_))));
    }
    let bad = SolveOptions { tol: 0.0, ..opts() };
    assert!(matches!(solve_at(&d, C::new(0.2, 0.5), bad), Err(Error::BadInput(_))));
}

#[test]
fn unknot_has_no_system() {
    assert!(Solver::new(&aj_core::diagram::Diagram::unknot()).is_err());
}

fn trefoil_q1() -> QEPoly {
    // (E - 1)^2 (1 + Q^3 E)
    let mut p = QEPoly::default();
    for (q, e, c) in [(0, 0, 1), (0, 1, -2), (0, 2, 1), (3, 1, 1), (3, 2, -2), (3, 3, 1)] {
        p.terms.insert((q, e), BigInt::from(c));
    }
    p
}

#[test]
fn trefoil_curve_vanishes_on_gluing_solutions() {
    let d = library::diagram("3_1").unwrap();
    let s = Solver::new(&d).unwrap();
    let sols: Vec<_> = unit_circle_grid(10)
        .into_iter()
        .flat_map(|mu| s.solve_at(mu, opts()).unwrap())
        .collect();
    assert!(!sols.is_empty());
    let rep = aj_check(&trefoil_q1(), &sols);
    assert!(rep.max_residual < 1e-8, "{}", rep.max_residual);
    let ctrl = aj_check(&control_polynomial(&trefoil_q1(), 1), &sols);
    assert!(ctrl.max_residual > 1e-2);
}

#[test]
fn curve_sampling_tracks_branches() {
    let d = library::diagram("4_1").unwrap();
    let grid = unit_circle_grid(12);
    let pts = sample_curve(&d, &grid, opts()).unwrap();
    assert!(pts.len() >= 11);
    assert!(pts.iter().all(|p| p.residual < 1e-10));
    let again = sample_curve(&d, &grid, opts()).unwrap();
    assert_eq!(
        pts.iter().map(|p| p.to_json().to_string()).collect::<Vec<_>>(),
        again.iter().map(|p| p.to_json().to_string()).collect::<Vec<_>>()
    );
}
