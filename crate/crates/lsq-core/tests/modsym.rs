mod common;

use common::curve;
use lsq_core::arith::{divisors, gcd_u64, primes_up_to};
use lsq_core::characters::{fe_sign_twist, fundamental_discriminants, QuadDirichletChar};
use lsq_core::modsym::{
    algebraic_twisted_lvalue, atkin_lehner_sign, build_space, build_space_permuted, find_eigenform,
    modular_degree, p1_size,
};
use lsq_core::Error;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Genus of X0(N) from the classical formula, with elliptic points counted by brute force.
fn genus_x0(n: u64) -> i64 {
    let mu = {
        let mut m = n;
        let mut x = n;
        let mut p = 2;
        while p * p <= x {
            if x % p == 0 {
                m = m / p * (p + 1);
                while x % p == 0 {
                    x /= p;
                }
            }
            p += 1;
        }
        if x > 1 {
            m = m / x * (x + 1);
        }
        m as i64
    };
    let nu2 = if n % 4 == 0 { 0 } else { (0..n).filter(|x| (x * x + 1) % n == 0).count() as i64 };
    let nu3 = if n % 9 == 0 { 0 } else { (0..n).filter(|x| (x * x + x + 1) % n == 0).count() as i64 };
    let phi = |m: u64| (1..=m).filter(|&k| gcd_u64(k, m) == 1).count() as i64;
    let cusps: i64 = divisors(n).iter().map(|&d| phi(gcd_u64(d, n / d))).sum();
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 cusps
    (12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps) / 12
}

#[test]
fn cuspidal_dimension_is_twice_the_genus() {
    for n in 1..=80u64 {
        let s = build_space(n).unwrap();
        assert_eq!(s.cuspidal_dimension() as i64, 2 * genus_x0(n), "N = {n}");
        assert_eq!(s.num_symbols() as u64, p1_size(n));
    }
    assert_eq!(build_space(11).unwrap().cuspidal_dimension(), 2);
    assert_eq!(build_space(37).unwrap().cuspidal_dimension(), 4);
    assert_eq!(build_space(1).unwrap().cuspidal_dimension(), 0);
    assert!(matches!(build_space(5000), Err(Error::LevelTooLarge(5000))));
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[test]
fn hecke_operators_commute() {
    for n in [11u64, 33, 37, 42] {
        let s = build_space(n).unwrap();
        let ps: Vec<u64> = primes_up_to(20);
        let ms: Vec<_> = ps.iter().map(|&p| s.hecke_matrix(p).unwrap()).collect();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                assert_eq!(mat_mul(&ms[i], &ms[j]), mat_mul(&ms[j], &ms[i]), "N={n} p={} q={}", ps[i], ps[j]);
            }
        }
        let star = s.star_matrix().unwrap();
        assert_eq!(mat_mul(&star, &ms[0]), mat_mul(&ms[0], &star));
    }
}

/// trace(T_p | cuspidal) = 2 sum over newforms f of level M | N of sigma0(N/M) a_p(f).
#[test]
fn hecke_traces_match_point_counts() {
    let cases: &[(u64, &[(&str, u64)])] = &[
        (11, &[("11a1", 1)]),
        (22, &[("11a1", 2)]),
        (33, &[("11a1", 2), ("33a1", 1)]),
        (37, &[("37a1", 1), ("37b1", 1)]),
        (44, &[("11a1", 3), ("44a1", 1)]),
        (15, &[("15a1", 1)]),
        (30, &[("15a1", 2), ("30a1", 1)]),
        (21, &[("21a1", 1)]),
    ];
    for &(n, forms) in cases {
        let s = build_space(n).unwrap();
        let eis = s.num_cusps() as i64 - 1;
        for p in [2u64, 3, 5, 7, 13, 17] {
            if n % p == 0 {
                continue;
            }
            let t = s.hecke_matrix(p).unwrap();
            let tr: i64 = (0..t.len()).map(|i| t[i][i]).sum::<i64>() - eis * (p as i64 + 1);
            let want: i64 = forms.iter().map(|&(l, m)| 2 * m as i64 * curve(l).ap(p).unwrap()).sum();
            assert_eq!(tr, want, "N={n} p={p}");
        }
    }
}

#[test]
fn eleven_a_eigenform() {
    let s = build_space(11).unwrap();
    let e = curve("11a1");
    let f = find_eigenform(&s, &e).unwrap();
    assert_eq!(f.ap[&2], -2);
    assert_eq!(f.ap[&3], -1);
    assert_eq!(f.ap[&11], 1);
    // U_11 acts by +1
    let u = s.hecke_matrix(11).unwrap();
    for v in &f.eigenspace {
        let uv: Vec<BigRational> = u
            .iter()
            .map(|r| r.iter().zip(v).map(|(&a, x)| x * BigRational::from_integer(a.into())).sum())
            .collect();
        assert_eq!(&uv, v);
    }
    assert_eq!(atkin_lehner_sign(&s, &f, 11).unwrap(), -1);
    assert_eq!(atkin_lehner_sign(&s, &f, 1).unwrap(), 1);
    assert!(matches!(atkin_lehner_sign(&s, &f, 3), Err(Error::NotExactDivisor { .. })));
    let l = algebraic_twisted_lvalue(&s, &f, &QuadDirichletChar::trivial()).unwrap();
    assert_eq!(l, BigRational::new(1.into(), 5.into()));
    assert_eq!(modular_degree(&s, &f).unwrap(), 1);
    assert!(matches!(find_eigenform(&s, &curve("37a1")), Err(Error::NoMatch)));
}

#[test]
fn atkin_lehner_signs_match_reduction_type() {
    for label in ["14a1", "15a1", "21a1", "30a1", "33a1", "37a1", "37b1", "42a1"] {
        let e = curve(label);
        let n = e.conductor().unwrap();
        let s = build_space(n).unwrap();
        let f = find_eigenform(&s, &e).unwrap();
        let mut prod = 1i8;
        for q in lsq_core::arith::prime_divisors(n) {
            let w = atkin_lehner_sign(&s, &f, q).unwrap();
            assert_eq!(w as i64, -e.ap(q).unwrap(), "{label} at {q}");
            prod *= w;
        }
        assert_eq!(atkin_lehner_sign(&s, &f, n).unwrap(), prod, "{label}");
        for m in divisors(n) {
            if gcd_u64(m, n / m) == 1 {
                let a = atkin_lehner_sign(&s, &f, m).unwrap();
                let b = atkin_lehner_sign(&s, &f, n / m).unwrap();
                assert_eq!(a * b, prod);
            }
        }
    }
}

#[test]
fn modular_degrees() {
    for (label, deg) in [
        ("11a1", 1u64),
        ("14a1", 1),
        ("15a1", 1),
        ("17a1", 1),
        ("19a1", 1),
        ("37a1", 2),
        ("37b1", 2),
        ("43a1", 2),
        ("67a1", 5),
    ] {
        let e = curve(label);
        let s = build_space(e.conductor().unwrap()).unwrap();
        let f = find_eigenform(&s, &e).unwrap();
        assert_eq!(modular_degree(&s, &f).unwrap(), deg, "{label}");
    }
}

#[test]
fn degree_is_independent_of_symbol_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for label in ["37a1", "43a1", "15a1"] {
        let e = curve(label);
        let n = e.conductor().unwrap();
        let s = build_space(n).unwrap();
        let f = find_eigenform(&s, &e).unwrap();
        let deg = modular_degree(&s, &f).unwrap();
        let l = algebraic_twisted_lvalue(&s, &f, &QuadDirichletChar::new(-7).unwrap()).unwrap();
        for _ in 0..3 {
            let mut order: Vec<usize> = (0..p1_size(n) as usize).collect();
            order.shuffle(&mut rng);
            let s2 = build_space_permuted(n, &order).unwrap();
            let f2 = find_eigenform(&s2, &e).unwrap();
            assert_eq!(modular_degree(&s2, &f2).unwrap(), deg);
            assert_eq!(algebraic_twisted_lvalue(&s2, &f2, &QuadDirichletChar::new(-7).unwrap()).unwrap(), l);
        }
    }
}

#[test]
fn odd_functional_equation_forces_zero() {
    for label in ["11a1", "14a1", "37a1", "37b1", "43a1"] {
        let e = curve(label);
        let n = e.conductor().unwrap();
        let s = build_space(n).unwrap();
        let f = find_eigenform(&s, &e).unwrap();
        let wn = atkin_lehner_sign(&s, &f, n).unwrap();
        for chi in fundamental_discriminants(100) {
            if gcd_u64(chi.conductor(), n) != 1 {
                assert!(algebraic_twisted_lvalue(&s, &f, &chi).is_err());
                continue;
            }
            let l = algebraic_twisted_lvalue(&s, &f, &chi).unwrap();
            if fe_sign_twist(n, wn, &chi).unwrap() == -1 {
                assert_eq!(l, BigRational::from_integer(0.into()), "{label} D={}", chi.disc());
            }
            // nonnegative L-values: even twists give L^alg >= 0, odd ones <= 0
            let sgn = if chi.parity() == 1 { 1 } else { -1 };
            assert!(l.clone() * BigRational::from_integer(sgn.into()) >= BigRational::from_integer(0.into()));
        }
    }
}
