mod common;

use common::curve;
use lsq_core::characters::QuadDirichletChar;
use lsq_core::quadfield::{HeckeQuadChar, QuadInt, RealQuadField};
use lsq_core::verify::{
    check_degree_class, check_degree_class_with, check_identity_suite, check_isogeny_invariance, check_square_value, run_pipeline,
    Config, MemoryStore, Quantity, Verdict,
};
use lsq_core::Error;

fn exact(r: &lsq_core::verify::VerificationReport, name: &str) -> String {
    match r.value(name) {
        Some(Quantity::Exact { value }) => value.clone(),
        other => panic!("{name}: {other:?}"),
    }
}

fn chi(d: i64) -> QuadDirichletChar {
    QuadDirichletChar::new(d).unwrap()
}

#[test]
fn degree_class_for_11a1() {
    let r = check_degree_class(&curve("11a1"), 11).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(exact(&r, "deg"), "1");
    assert_eq!(exact(&r, "cbar_11"), "5");
    assert_eq!(exact(&r, "petersson_norm"), "5");
    assert_eq!(exact(&r, "phi_pairing_with_one"), "0");
}

#[test]
fn degree_class_on_bundled_pairs() {
    let mut store = MemoryStore::new();
    let cfg = Config::default();
    for (label, q) in [("14a1", 7), ("15a1", 3), ("15a1", 5), ("17a1", 17), ("19a1", 19), ("37a1", 37), ("37b1", 37)] {
        let r = check_degree_class_with(&curve(label), q, &cfg, &mut store).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{label} Q={q}: {:?}", r.lines);
    }
    let r = check_degree_class_with(&curve("37a1"), 37, &cfg, &mut store).unwrap();
    assert_eq!(exact(&r, "deg"), "2");
    assert_eq!(exact(&r, "cbar_37"), "1");
    assert_eq!(r.value("square_class_rhs"), Some(&Quantity::SquareClass { rep: 2 }));
    // 37a1 and 37b1 share the class set
    assert_eq!(store.len(), 6);
}

#[test]
fn inadmissible_q_parts() {
    assert!(matches!(check_degree_class(&curve("15a1"), 15), Err(Error::QPartNotAdmissible(_))));
    assert!(matches!(check_degree_class(&curve("11a1"), 22), Err(Error::QPartNotAdmissible(_))));
    assert!(matches!(check_degree_class(&curve("20a1"), 2), Err(Error::QPartNotAdmissible(_))));
}

#[test]
fn isogeny_class_11a() {
    let (a1, a2, a3) = (curve("11a1"), curve("11a2"), curve("11a3"));
    for (e, other, deg) in [(&a1, &a1, 1), (&a1, &a3, 5), (&a1, &a2, 5), (&a3, &a2, 25), (&a3, &a1, 5)] {
        assert_eq!(check_isogeny_invariance(e, other, deg, 11).unwrap().verdict, Verdict::Pass, "deg {deg}");
    }
    assert_eq!(check_isogeny_invariance(&a1, &a3, 2, 11).unwrap().verdict, Verdict::Fail);
    assert!(matches!(check_isogeny_invariance(&a1, &a3, 5, 2), Err(Error::NotMultiplicative(2))));
}

#[test]
fn identity_suite() {
    let r = check_identity_suite(&chi(-3), &chi(-4), &chi(5), None).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.lines);
    assert!(matches!(check_identity_suite(&chi(5), &chi(5), &chi(-3), None), Err(Error::HypothesisViolated(_))));
    assert!(matches!(check_identity_suite(&chi(-3), &chi(5), &chi(-4), None), Err(Error::HypothesisViolated(_))));

    let f = RealQuadField::new(21).unwrap();
    let delta = HeckeQuadChar::new(f, QuadInt::new(29, -4)).unwrap();
    assert!(matches!(
        check_identity_suite(&chi(-7), &chi(-3), &chi(5), Some((&delta, &delta))),
        Err(Error::HypothesisViolated(_))
    ));
    let delta1 = HeckeQuadChar::new(f, QuadInt::new(1, 0)).unwrap();
    let r = check_identity_suite(&chi(-7), &chi(-3), &chi(5), Some((&delta, &delta1))).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.lines);
}

#[test]
fn square_value_for_11a1() {
    let f = RealQuadField::new(21).unwrap();
    let delta = HeckeQuadChar::new(f, QuadInt::new(29, -4)).unwrap();
    let r = check_square_value(&curve("11a1"), &chi(-7), &chi(-3), &delta, 10_000).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.lines);
    assert_eq!(exact(&r, "root"), "4");

    // +1 at 11 O_F violates (c)
    let bad = HeckeQuadChar::new(f, QuadInt::new(-1, 0)).unwrap();
    assert!(matches!(check_square_value(&curve("11a1"), &chi(-7), &chi(-3), &bad, 10_000), Err(Error::SetupInvalid(_))));
    // chi1(11) = chi2(11) leaves Q = 1
    assert!(matches!(
        check_square_value(&curve("11a1"), &chi(-7), &chi(-8), &delta, 10_000),
        Err(Error::SetupInvalid(_))
    ));
}

#[test]
fn pipeline_for_11a1() {
    let mut store = MemoryStore::new();
    let b = run_pipeline(&curve("11a1"), 11, &Config::default(), &mut store).unwrap();
    assert_eq!(b.verdict, Verdict::Pass, "{:?}", b.errors);
    assert_eq!(b.characters["chi1"], -7);
    assert_eq!(b.deltas.len(), 2);
    let thm: Vec<_> = b.reports.iter().filter(|r| r.check == "square_value").collect();
    assert_eq!(thm.len(), 2);
    assert!(thm.iter().all(|r| r.verdict == Verdict::Pass));
    assert_eq!(b.twist_tamagawa.len(), 2);

    let tight = Config { delta_height: 1, ..Config::default() };
    let err = run_pipeline(&curve("11a1"), 11, &tight, &mut store).unwrap_err();
    assert!(matches!(err.error, Error::SearchExhausted(_)));
    assert!(!err.partial.reports.is_empty());
    assert!(matches!(
        run_pipeline(&curve("15a1"), 15, &Config::default(), &mut store).unwrap_err().error,
        Error::QPartNotAdmissible(_)
    ));
}
