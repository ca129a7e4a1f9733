use aj_core::diagram::{add_kink, Kink};
use aj_core::gluing::*;
use aj_core::library;
use aj_core::shape::Var;

#[test]
fn identities_hold_for_library() {
    for (name, d) in library::all() {
        for ch in identity_report(&d, &CornerTable::standard()) {
            assert!(ch.pass, "{} {}: {}", name, ch.name, ch.detail);
        }
    }
}

#[test]
fn identities_hold_with_kinks() {
    let d = library::diagram("4_1").unwrap();
    for k in Kink::ALL {
        let e = add_kink(&d, 3, k).unwrap();
        if e.require_base().is_err() {
            continue;
        }
        for ch in identity_report(&e, &CornerTable::standard()) {
            assert!(ch.pass, "{:?} {}: {}", k, ch.name, ch.detail);
        }
    }
}

#[test]
fn writhe_bookkeeping_in_longitude() {
    for (name, d) in library::all() {
        let lon = holonomy_longitude(&d);
        let deg = |f: &aj_core::shape::FactoredRational| f.lead.exp2(Var::Wmu);
        // the binomial factors carry no bare w_mu, so the monomial parts
        // differ by exactly wr(D)
        assert_eq!(deg(&lon.blackboard) - deg(&lon.w_lambda), 2 * d.writhe(), "{}", name);
    }
}

#[test]
fn loop_wmu_degree_is_writhe_plus_linking() {
    for (name, d) in library::all() {
        for c in 0..d.num_crossings() {
            let x = &d.crossings[c];
            let lem = d.check_writhe_linking_lemma(c);
            assert!(lem.holds, "{} {}", name, c);
            let l = loop_equation_closed_form(&d, Some(c));
            // bare w_mu carried by K_c itself
            let kc = match (x.j_is_over(), x.sign > 0) {
                (true, true) | (false, false) => 0,
                (true, false) => -1,
                (false, true) => 1,
            };
            assert_eq!(2 * (l.lead.exp2(Var::Wmu) / 2 - kc), lem.twice_wr_gamma_plus_lk, "{} {}", name, c);
        }
    }
}

#[test]
fn basis_rank() {
    for (name, d) in library::all() {
        let b = basis_unimodularity(&d);
        assert_eq!(b.rank, d.num_crossings() + 1, "{}", name);
        assert!(b.unimodular, "{}", name);
    }
}

#[test]
fn system_json() {
    let d = library::diagram("3_1").unwrap();
    let g = GluingSystem::build(&d).unwrap();
    let v = g.to_json();
    assert_eq!(v["L"].as_array().unwrap().len(), 3);
    let back = aj_core::shape::FactoredRational::from_json(&v["s"]).unwrap();
    assert_eq!(back, g.sqrt_s);
}
