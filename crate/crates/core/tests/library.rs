use aj_core::diagram::parse_gauss;
use aj_core::library;
use aj_core::qlaurent::LaurentPoly;
use aj_core::state_sum::{colored_jones, jones_from_colored, kauffman_jones};

#[test]
fn gauss_path_reproduces_pd() {
    for (name, d) in library::all() {
        let g = parse_gauss(&d.emit_gauss()).unwrap();
        assert_eq!(g.emit_canonical_pd(), d.emit_canonical_pd(), "{}", name);
        assert_eq!(g.writhe(), d.writhe(), "{}", name);
        assert!(d.base_valid, "{}", name);
    }
}

#[test]
fn jones_matches_table() {
    for e in library::ENTRIES {
        let d = library::diagram(e.name).unwrap();
        let want = LaurentPoly::from_q_terms(e.jones.iter().copied());
        assert_eq!(kauffman_jones(&d), want, "{}", e.name);
    }
}

#[test]
fn colored_n1_matches_bracket() {
    for name in ["3_1", "4_1", "5_2", "6_1", "6_2"] {
        let d = library::diagram(name).unwrap();
        let j = colored_jones(&d, 1).unwrap();
        assert_eq!(jones_from_colored(&j).unwrap(), kauffman_jones(&d), "{}", name);
    }
}

#[test]
fn lookup() {
    assert!(library::diagram("Trefoil").is_ok());
    assert!(library::diagram("figure-8").is_ok());
    assert_eq!(library::diagram("unknot").unwrap().num_crossings(), 0);
    assert!(library::diagram("9_42").is_err());
}
