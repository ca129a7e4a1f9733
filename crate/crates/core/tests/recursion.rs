use std::sync::OnceLock;

use aj_core::library;
use aj_core::recursion::*;
use aj_core::state_sum::unknot_jones;
use num_bigint::BigInt;

fn trefoil() -> &'static Vec<QPoly> {
    static V: OnceLock<Vec<QPoly>> = OnceLock::new();
    V.get_or_init(|| jones_values(&library::diagram("3_1").unwrap(), 22, 2).unwrap())
}

fn trefoil_op() -> &'static RecursionOperator {
    static OP: OnceLock<RecursionOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let b = Bounds { de: 3, d_big_q: 3, dq: 5 };
        guess_recursion(trefoil(), b).unwrap().expect("trefoil recursion").0
    })
}

#[test]
fn jones_values_match_exact_sum() {
    let d = library::diagram("4_1").unwrap();
    let v = jones_values(&d, 4, 2).unwrap();
    for (n, x) in v.iter().enumerate() {
        let exact = aj_core::state_sum::colored_jones_exact(&d, n as i64).unwrap();
        assert_eq!(from_qpoly(x), exact, "n={}", n);
    }
}

#[test]
fn trefoil_operator_holds_on_unseen_values() {
    let op = trefoil_op();
    assert_eq!(op.order(), 3);
    assert!(verify_recursion(op, trefoil()));
    // the fit used at most 22 values; extend well past them
    let more = jones_values(&library::diagram("3_1").unwrap(), 26, 2).unwrap();
    assert!(verify_recursion(op, &more));
}

#[test]
fn perturbed_operator_is_rejected() {
    let mut op = trefoil_op().clone();
    let (k, v) = op.coeffs[1].terms.iter().next().map(|(k, v)| (*k, v.clone())).unwrap();
    op.coeffs[1].terms.insert(k, v + BigInt::from(1));
    assert!(!verify_recursion(&op, trefoil()));
}

#[test]
fn too_little_data_is_reported() {
    let short: Vec<QPoly> = trefoil()[..8].to_vec();
    match guess_recursion(&short, Bounds { de: 3, d_big_q: 3, dq: 5 }) {
        Err(aj_core::Error::InsufficientData { have, need }) => assert!(have < need),
        other => panic!("expected InsufficientData, got {:?}", other.map(|o| o.is_some())),
    }
}

#[test]
fn bounds_that_are_too_small_find_nothing() {
    let r = guess_recursion(trefoil(), Bounds { de: 1, d_big_q: 1, dq: 2 }).unwrap();
    assert!(r.is_none());
}

#[test]
fn unknot_at_q_one_has_abelian_factor() {
    let v: Vec<QPoly> = (0..=20).map(|n| to_qpoly(&unknot_jones(n)).unwrap()).collect();
    let (op, _) = guess_escalating(&v, Bounds { de: 2, d_big_q: 2, dq: 2 }).unwrap().unwrap();
    let p = specialize_q1(&op).unwrap();
    assert!(p.div_e_minus_one().is_some());
}

#[test]
fn trefoil_at_q_one() {
    let p = specialize_q1(trefoil_op()).unwrap();
    assert_eq!(p.e_degree(), 3);
    // (E - 1)^2 (1 + Q^3 E) up to a unit
    let q = p.div_e_minus_one().unwrap().div_e_minus_one().unwrap();
    assert_eq!(q.terms.len(), 2);
    assert!(q.div_e_minus_one().is_none());
}

#[test]
fn control_polynomial_has_same_shape() {
    let p = specialize_q1(trefoil_op()).unwrap();
    let c = control_polynomial(&p, 3);
    assert_eq!(c.e_degree(), p.e_degree());
    assert_ne!(c, p);
    assert_eq!(c, control_polynomial(&p, 3));
}

fn dim() -> usize {
    library::diagram("3_1").unwrap().num_crossings() + 1
}

fn zero_term(dim: usize) -> CertTerm {
    CertTerm { coeff: BigInt::from(1), q: 0, big_q: 0, qk: vec![0; dim], e: 0, ek: vec![0; dim] }
}

#[test]
fn pure_telescoper_is_not_good() {
    let d = library::diagram("3_1").unwrap();
    let mut r = vec![vec![]; dim()];
    r[0].push(zero_term(dim()));
    let cert = CertificateOperator { ptilde: RecursionOperator { coeffs: vec![Default::default()] }, r };
    let rep = verify_certificate(&cert, &d, &[0, 1, 2], &trefoil()[..6]);
    assert!(!rep.good);
    assert!(rep.telescopes);
    assert!(!rep.annihilates_summand);
    assert!(!rep.valid());
}

#[test]
fn guessed_operator_telescopes() {
    let d = library::diagram("3_1").unwrap();
    let cert = CertificateOperator { ptilde: trefoil_op().clone(), r: vec![vec![]; dim()] };
    let rep = verify_certificate(&cert, &d, &[0, 1], trefoil());
    assert!(rep.good && rep.phi_annihilates && rep.telescopes);

    let mut bad = trefoil_op().clone();
    bad.coeffs[0].add_term(0, 0, BigInt::from(1));
    let cert = CertificateOperator { ptilde: bad, r: vec![vec![]; dim()] };
    let rep = verify_certificate(&cert, &d, &[0, 1], trefoil());
    assert!(!rep.phi_annihilates);
    assert!(rep.telescopes);
    assert!(!rep.valid());
}

#[test]
fn json_is_stable() {
    let op = trefoil_op();
    let j = op.to_json();
    assert_eq!(RecursionOperator::from_json(&j).as_ref(), Some(op));
    assert_eq!(serde_json::to_string(&j).unwrap(), serde_json::to_string(&op.to_json()).unwrap());
}
