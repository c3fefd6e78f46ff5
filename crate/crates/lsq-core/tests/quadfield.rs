use lsq_core::arith::{kronecker, primes_up_to};
use lsq_core::quadfield::{
    hecke_char_value, search_delta, DeltaConstraints, HeckeQuadChar, QuadInt, RealQuadField,
    Splitting,
};

/// Is `beta` a square in the residue field of the prime `prime` (brute force)?
fn residue_square(f: &RealQuadField, beta: QuadInt, p: u64, root: Option<i64>) -> Option<bool> {
    let p = p as i128;
    let md = |a: i128| a.rem_euclid(p);
    match root {
        Some(r) => {
            let b = md(beta.x + beta.y * r as i128);
            if b == 0 {
                return None;
            }
            Some((0..p).any(|z| md(z * z) == b))
        }
        None => {
            let t = (md(beta.x), md(beta.y));
            if t == (0, 0) {
                return None;
            }
            for a in 0..p {
                for b in 0..p {
                    let s = f.mul(QuadInt::new(a, b), QuadInt::new(a, b));
                    if (md(s.x), md(s.y)) == t {
                        return Some(true);
                    }
                }
            }
            Some(false)
        }
    }
}

#[test]
fn splitting_examples() {
    let f = RealQuadField::new(12).unwrap();
    assert_eq!(f.splitting_type(11).splitting, Splitting::Split);
    assert_eq!(f.splitting_type(5).splitting, Splitting::Inert);
    assert_eq!(f.splitting_type(3).splitting, Splitting::Ramified);
    assert!(RealQuadField::new(-3).is_err());
    assert!(RealQuadField::new(9).is_err());
}

#[test]
fn unit_values_match_residue_oracle() {
    for d in [5i64, 13, 21, 12, 8, 33, 29] {
        let f = RealQuadField::new(d).unwrap();
        for (bx, by) in [(3, 1), (-5, 2), (7, -3), (2, 5), (-1, 4), (11, 1)] {
            let beta = QuadInt::new(bx, by);
            let delta = HeckeQuadChar::new(f, beta).unwrap();
            for p in primes_up_to(40).into_iter().filter(|&p| p != 2) {
                for q in f.primes_above(p) {
                    let v = hecke_char_value(&delta, &q);
                    let root = if q.splitting == Splitting::Inert { None } else { q.root };
                    match residue_square(&f, beta, p, root) {
                        Some(sq) => assert_eq!(v, if sq { 1 } else { -1 }, "D={d} beta={beta:?} p={p}"),
                        None => {
                            if f.valuation(beta, &q) % 2 == 1 {
                                assert_eq!(v, 0)
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn split_pairs_multiply_to_norm_symbol() {
    let f = RealQuadField::new(21).unwrap();
    for (bx, by) in [(3, 1), (-5, 2), (7, -3), (2, 5), (-1, 4)] {
        let delta = HeckeQuadChar::new(f, QuadInt::new(bx, by)).unwrap();
        let n = f.norm(delta.beta);
        for p in primes_up_to(80).into_iter().filter(|&p| p != 2) {
            let ps = f.primes_above(p);
            if ps[0].splitting != Splitting::Split || n % p as i128 == 0 {
                continue;
            }
            let prod = ps.iter().map(|q| hecke_char_value(&delta, q)).product::<i8>();
            assert_eq!(prod, kronecker(n, p as i128));
        }
    }
}

#[test]
fn rational_beta_matches_quadratic_field_over_q() {
    // with 2 split in F the completion at a prime over 2 is Q_2, so the local conductor
    // exponent of F(sqrt b) is the 2-adic exponent of the discriminant of Q(sqrt b)
    let f = RealQuadField::new(17).unwrap();
    for b in [-1i128, 2, 3, -2, 5, -3, 6, 7, -5, 10, 11, 13, -7, 14, 15] {
        let fd = if b.rem_euclid(4) == 1 { b } else { 4 * b };
        let want = lsq_core::arith::valuation(fd, 2);
        for q in f.primes_above(2) {
            let ld = f.local_data(QuadInt::rational(b), &q);
            assert_eq!(ld.conductor_exponent, want, "b = {b}");
            if want == 0 {
                assert_eq!(ld.value, kronecker(fd, 2));
            }
        }
    }
}

#[test]
fn genus_characters_are_unramified() {
    for (d1, d2) in [(-3i64, -7), (-4, -3), (5, 8), (-7, -8), (-3, -11), (13, 17), (-19, -4), (5, 13), (-8, -3), (-23, -3)]
        .into_iter()
        // large even D_F: units at the prime over 2 come from big powers of the uniformizer
        .chain([(-488i64, -499), (-424, -491), (488, 497), (-499, -488), (440, 409), (-56, -487)])
    {
        let f = RealQuadField::new(d1 * d2).unwrap();
        let chi = HeckeQuadChar::genus(f, d1).unwrap();
        assert_eq!(chi.conductor_norm, 1, "({d1}, {d2})");
        let c1 = lsq_core::characters::QuadDirichletChar::new(d1).unwrap();
        for p in primes_up_to(60) {
            for q in f.primes_above(p) {
                let v = hecke_char_value(&chi, &q);
                match q.splitting {
                    Splitting::Inert => assert_eq!(v, 1),
                    Splitting::Split if c1.value(p as i64) != 0 => assert_eq!(v, c1.value(p as i64)),
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn odd_prime_conductor_contribution() {
    let f = RealQuadField::new(13).unwrap();
    // 3 splits in Q(sqrt 13); w - r is a uniformizer above 3
    let q = f.primes_above(3)[0];
    let pi = QuadInt::new(-(q.root.unwrap() as i128), 1);
    let delta = HeckeQuadChar::new(f, pi).unwrap();
    let rest = delta.conductor_norm;
    assert_eq!(rest % 3, 0);
    assert_ne!(rest % 9, 0);
}

#[test]
fn ideal_enumeration() {
    let f = RealQuadField::new(12).unwrap();
    let ids = f.ideals_up_to(5);
    let norms: Vec<u64> = ids.iter().map(|i| i.0).collect();
    // 2 and 3 ramify, 5 is inert: norms 1, 2, 3, 4, 6 trimmed to <= 5
    assert_eq!(norms, vec![1, 2, 3, 4]);
    assert_eq!(f.ideals_up_to(1).len(), 1);
    // ideal counts equal partial sums of the Dedekind zeta coefficients sum_{d|n} (D/d)
    for d in [5i64, 12, 21, 33] {
        let f = RealQuadField::new(d).unwrap();
        let x = 3000u64;
        let count = f.ideals_up_to(x).len() as u64;
        let mut want = 0i64;
        for n in 1..=x as i64 {
            for e in 1..=n {
                if n % e == 0 {
                    want += kronecker(d as i128, e as i128) as i64;
                }
            }
        }
        assert_eq!(count as i64, want, "D = {d}");
    }
}

#[test]
fn delta_search_for_11a1_setup() {
    let f = RealQuadField::new(21).unwrap();
    let mut c = DeltaConstraints { arch: -1, coprime_to: 11, ..Default::default() };
    c.inert_values.insert(11, -1);
    let found = search_delta(&f, &c, 10);
    assert!(found.len() >= 2);
    let q = f.primes_above(11)[0];
    assert_eq!(q.splitting, Splitting::Inert);
    for d in &found {
        assert_eq!(hecke_char_value(d, &q), -1);
        assert_eq!(d.arch_signs, [-1, -1]);
        assert!(c.accepts(d));
    }
    for w in found.windows(2) {
        assert!(w[0].conductor_norm <= w[1].conductor_norm);
        assert!(!w[0].same_as(&w[1]));
    }
    // no totally positive unramified square appears when only arch sign is imposed
    let triv = search_delta(&f, &DeltaConstraints { arch: 1, ..Default::default() }, 1);
    assert!(triv.iter().all(|d| d.beta.x != 0 || d.beta.y != 0));
}
