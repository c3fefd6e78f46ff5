mod common;

use common::{curve, CURVES};
use lsq_core::arith::gcd_u64;
use lsq_core::characters::{fe_sign_twist, fundamental_discriminants, QuadDirichletChar};
use lsq_core::lfun::{
    certify_nonvanishing, check_fe_consistency, lseries_curve, lseries_ef_delta, lseries_twist, lvalue,
    lvalue_truncated, terms_needed,
};
use lsq_core::modsym::{algebraic_twisted_lvalue, atkin_lehner_sign, build_space, find_eigenform};
use lsq_core::quadfield::{HeckeQuadChar, QuadInt, RealQuadField};
use lsq_core::Error;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn central_values() {
    let l = lvalue(&lseries_curve(&curve("11a1")).unwrap(), 0).unwrap();
    assert_eq!(l.sign, 1);
    assert!((l.value - 0.253_841_860_9).abs() < 1e-9, "{}", l.value);
    assert!(l.error < 1e-12);

    let spec = lseries_curve(&curve("37a1")).unwrap();
    let d = lvalue(&spec, 1).unwrap();
    assert_eq!(d.sign, -1);
    assert!((d.value - 0.305_999_773_8).abs() < 1e-9, "{}", d.value);
    let z = lvalue(&spec, 0).unwrap();
    assert_eq!(z.value, 0.0);
    assert!(certify_nonvanishing(&spec, 1, 1e-6).unwrap());
    assert!(!certify_nonvanishing(&spec, 0, 0.0).unwrap());
    assert!(certify_nonvanishing(&lseries_curve(&curve("11a1")).unwrap(), 0, 1e-3).unwrap());
}

#[test]
fn signs_from_functional_equation() {
    for (label, _) in CURVES.iter().take(30) {
        let e = curve(label);
        let n = e.conductor().unwrap();
        let spec = lseries_curve(&e).unwrap();
        let (eps, res) = check_fe_consistency(&spec).unwrap();
        assert!(res < 1e-10, "{label} {res}");
        let s = build_space(n).unwrap();
        let f = find_eigenform(&s, &e).unwrap();
        assert_eq!(eps, -atkin_lehner_sign(&s, &f, n).unwrap(), "{label}");
        assert!(spec.check_ramanujan(1000));
    }
    let mut bad = lseries_curve(&curve("11a1")).unwrap();
    bad.coefficients[2] += 1.0;
    assert!(matches!(check_fe_consistency(&bad), Err(Error::Inconclusive(_))));
    let mut short = lseries_curve(&curve("11a1")).unwrap();
    short.coefficients.truncate(10);
    assert!(matches!(lvalue(&short, 0), Err(Error::InsufficientCoefficients { .. })));
}

#[test]
fn error_bound_survives_doubling() {
    let mut specs = Vec::new();
    for label in ["11a1", "37a1", "43a1", "53a1"] {
        specs.push((lseries_curve(&curve(label)).unwrap(), 1u8));
    }
    for (label, d) in [("11a1", -3), ("11a1", 5), ("14a1", -3), ("37b1", 5)] {
        let chi = QuadDirichletChar::new(d).unwrap();
        specs.push((lseries_twist(&curve(label), &chi).unwrap(), 0));
    }
    let f = RealQuadField::new(12).unwrap();
    let delta = HeckeQuadChar::genus(f.clone(), -3).unwrap();
    specs.push((lseries_ef_delta(&curve("11a1"), &f, &delta).unwrap(), 0));
    let one = HeckeQuadChar::new(f.clone(), QuadInt::rational(1)).unwrap();
    specs.push((lseries_ef_delta(&curve("11a1"), &f, &one).unwrap(), 0));
    for (spec, order) in &specs {
        let m = terms_needed(spec.degree, spec.conductor);
        let ord = if check_fe_consistency(spec).unwrap().0 == -1 { 1 } else { *order };
        for t in [m / 3, m / 2] {
            let a = lvalue_truncated(spec, ord, t).unwrap();
            let b = lvalue_truncated(spec, ord, 2 * t).unwrap();
            assert!(
                (a.value - b.value).abs() <= a.error + b.error,
                "N={} t={t}: {} vs {} (err {})",
                spec.conductor,
                a.value,
                b.value,
                a.error
            );
        }
    }
}

/// `L(1, E, chi)` from the modular symbol and the period, with `w_N`.
fn algebraic_path(label: &str, chi: &QuadDirichletChar) -> (f64, i8) {
    let e = curve(label);
    let s = build_space(e.conductor().unwrap()).unwrap();
    let f = find_eigenform(&s, &e).unwrap();
    let l = algebraic_twisted_lvalue(&s, &f, chi).unwrap().to_f64().unwrap();
    let p = e.periods().unwrap();
    let rc = (chi.conductor() as f64).sqrt();
    let wn = atkin_lehner_sign(&s, &f, s.level()).unwrap();
    if chi.parity() == 1 {
        (l * p.omega_plus / rc, wn)
    } else {
        (-l * p.omega_minus / rc, wn)
    }
}

#[test]
fn analytic_and_algebraic_values_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let labels: Vec<&str> = CURVES
        .iter()
        .map(|c| c.0)
        // periods of the X_0(N)-optimal curve match the symbol lattice
        .filter(|l| l.ends_with('1') && curve(l).conductor().unwrap() <= 100)
        .collect();
    let chars: Vec<QuadDirichletChar> = fundamental_discriminants(100).collect();
    let mut done = 0;
    while done < 20 {
        let label = *labels.choose(&mut rng).unwrap();
        let chi = *chars.choose(&mut rng).unwrap();
        let e = curve(label);
        let n = e.conductor().unwrap();
        if gcd_u64(n, chi.conductor()) != 1 {
            continue;
        }
        let spec = lseries_twist(&e, &chi).unwrap();
        let num = lvalue(&spec, 0).unwrap();
        let (alg, wn) = algebraic_path(label, &chi);
        assert_eq!(num.sign, fe_sign_twist(n, wn, &chi).unwrap());
        if num.sign == -1 {
            assert_eq!(alg, 0.0);
        } else {
            // a vanishing value is matched up to the certified error
            assert!((num.value - alg).abs() <= 1e-8 * alg.abs() + num.error, "{label} D={}: {} vs {alg}", chi.disc(), num.value);
        }
        done += 1;
    }
}

#[test]
fn genus_characters_factor() {
    for (label, d1, d2) in [("11a1", -3, -4), ("11a1", -4, -7), ("14a1", 5, 13), ("37a1", -3, -8), ("19a1", -4, -8)] {
        let e = curve(label);
        let (c1, c2) = (QuadDirichletChar::new(d1).unwrap(), QuadDirichletChar::new(d2).unwrap());
        let f = RealQuadField::new(c1.product(&c2).disc()).unwrap();
        let delta = HeckeQuadChar::genus(f.clone(), d1).unwrap();
        let spec = lseries_ef_delta(&e, &f, &delta).unwrap();
        let l4 = lvalue(&spec, 0).unwrap();
        let a = lvalue(&lseries_twist(&e, &c1).unwrap(), 0).unwrap();
        let b = lvalue(&lseries_twist(&e, &c2).unwrap(), 0).unwrap();
        assert_eq!(l4.sign, a.sign * b.sign, "{label} {d1} {d2}");
        let prod = a.value * b.value;
        assert!((l4.value - prod).abs() <= 1e-6 * prod.abs().max(1e-3), "{label} {d1} {d2}: {} vs {prod}", l4.value);
    }
}

#[test]
fn trivial_character_over_the_field() {
    let e = curve("11a1");
    let f = RealQuadField::new(12).unwrap();
    let one = HeckeQuadChar::new(f.clone(), QuadInt::rational(1)).unwrap();
    let l4 = lvalue(&lseries_ef_delta(&e, &f, &one).unwrap(), 0).unwrap();
    let a = lvalue(&lseries_curve(&e).unwrap(), 0).unwrap();
    let b = lvalue(&lseries_twist(&e, &QuadDirichletChar::new(12).unwrap()).unwrap(), 0).unwrap();
    assert!(close(l4.value, a.value * b.value, 1e-8), "{} vs {}", l4.value, a.value * b.value);
}

#[test]
fn hypotheses_checked() {
    let f = RealQuadField::new(44).unwrap();
    let one = HeckeQuadChar::new(f.clone(), QuadInt::rational(1)).unwrap();
    assert!(matches!(lseries_ef_delta(&curve("11a1"), &f, &one), Err(Error::HypothesisViolated(_))));
    assert!(matches!(
        lseries_twist(&curve("11a1"), &QuadDirichletChar::new(-11).unwrap()),
        Err(Error::NotCoprime { .. })
    ));
}
