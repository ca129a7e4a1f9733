use aj_core::annihilator::*;
use aj_core::diagram::{add_kink, Kink};
use aj_core::gluing::{CornerTable, Prime};
use aj_core::library;
use aj_core::shape::{FactoredRational, Monomial, Var};
use aj_core::state_sum::Layout;
use aj_core::Error;

#[test]
fn ratios_calibrate_on_small_knots() {
    for name in ["3_1", "4_1", "5_2"] {
        let d = library::diagram(name).unwrap();
        for mut op in all_operators(&d) {
            let samples = interior_samples(&d, op.kind, 6, 3);
            assert!(samples.len() >= 10, "{} {}: {} samples", name, op.kind, samples.len());
            let cal = calibrate_qstar(&d, &mut op, &samples).unwrap();
            assert_eq!(cal.samples + cal.trivial, samples.len());
            assert!(op.qstar.is_some());
        }
    }
}

#[test]
fn wrong_ratio_is_rejected() {
    let d = library::diagram("4_1").unwrap();
    let mut op = ratio_e0(&d);
    op.formula = op.formula.mul(&FactoredRational::binomial(&Monomial::var(Var::Qn)));
    let samples = interior_samples(&d, op.kind, 5, 4);
    assert!(matches!(calibrate_qstar(&d, &mut op, &samples), Err(Error::InconsistentQStar(_))));
}

#[test]
fn base_crossing_needs_the_compensating_shift() {
    let d = library::diagram("3_1").unwrap();
    let c = base_crossing(&d).unwrap();
    let op = ratio_ec(&d, c);
    let layout = Layout::new(&d);
    let samples = interior_samples(&d, op.kind, 5, 4);
    let mut plain_fails = 0;
    for s in &samples {
        assert_ne!(check_sample(&d, &layout, &op, s), RatioCheck::Mismatch);
        let mut t = s.clone();
        t.kc[c] += 1;
        if check_against(&d, &layout, &op, s, &t) == RatioCheck::Mismatch {
            plain_fails += 1;
        }
    }
    assert!(plain_fails > 0);
}

#[test]
fn images_match_gluing_side() {
    for (name, d) in library::all() {
        let r = verify_match(&d, 25, 7).unwrap();
        assert!(r.symbolic_pass, "{}: {:?}", name, r.generators);
        assert!(r.max_residual < NUMERIC_TOL, "{}: {}", name, r.max_residual);
        r.check(true).unwrap();
    }
}

#[test]
fn images_match_with_kinks() {
    let d = library::diagram("4_1").unwrap();
    for k in Kink::ALL {
        let e = add_kink(&d, 2, k).unwrap();
        if e.require_base().is_err() {
            continue;
        }
        verify_match(&e, 10, 3).unwrap().check(true).unwrap();
    }
}

#[test]
fn corrupted_corner_is_caught() {
    let d = library::diagram("4_1").unwrap();
    let mut t = CornerTable::standard();
    let r = &mut t.rules[0][1];
    r.w = if r.w == Prime::One { Prime::Two } else { Prime::One };
    let rep = verify_match_with(&d, &t, 10, 5).unwrap();
    assert!(!rep.numeric_pass);
    match rep.check(false) {
        Err(Error::MatchFailure { generator, .. }) => assert!(!generator.is_empty()),
        other => panic!("expected failure, got {:?}", other),
    }
}

#[test]
fn q_equals_one_has_no_poles() {
    for (_, d) in library::all() {
        for op in all_operators(&d) {
            let x = ev_q1(&op.formula).unwrap();
            assert!(!x.vars().contains(&Var::Q));
            psi(&x).unwrap();
        }
    }
}

#[test]
fn report_serializes() {
    let d = library::diagram("3_1").unwrap();
    let r = verify_match(&d, 5, 1).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 2 + d.num_crossings());
}
