mod common;

use common::{curve, CURVES};
use lsq_core::arith::{divisors, factor, is_prime, is_squarefree, prime_divisors};
use lsq_core::brandt::{
    brandt_matrix, build_algebra, eichler_order, eigenform_for, eigenvalues_match, hilbert_symbol,
    ideal_classes, mass_formula, monodromy_pairing_class, petersson_norm, ramified_primes,
    QuaternionicEigenform,
};
use lsq_core::squareclass::Rational;
use lsq_core::Error;

/// Whether `a x^2 + b y^2 = z^2` has a primitive solution modulo `p^k`.
fn locally_solvable(a: i64, b: i64, p: i64) -> bool {
    let m = if p == 2 { 32 } else { p * p };
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                if x % p == 0 && y % p == 0 && z % p == 0 {
                    continue;
                }
                if (a * x * x + b * y * y - z * z).rem_euclid(m) == 0 {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn hilbert_symbol_matches_local_solvability() {
    let sf: Vec<i64> = (1..=15).filter(|&n| is_squarefree(n as u64)).collect();
    for &a in &sf {
        for &b in &sf {
            for p in [2i64, 3, 5, 7, 11, 13] {
                let brute = if locally_solvable(-a, -b, p) { 1 } else { -1 };
                assert_eq!(hilbert_symbol(-a, -b, p as u64), brute, "({}, {})_{p}", -a, -b);
            }
        }
    }
}

#[test]
fn algebra_search() {
    let a11 = build_algebra(11).unwrap();
    assert_eq!((a11.a, a11.b), (-1, -11));
    let a2 = build_algebra(2).unwrap();
    assert_eq!((a2.a, a2.b), (-1, -1));
    assert_eq!(build_algebra(15), Err(Error::NotOddSquarefree(15)));
    assert_eq!(build_algebra(9), Err(Error::NotOddSquarefree(9)));
    for q in [3u64, 5, 7, 13, 17, 41, 73, 97, 30, 42, 105] {
        let alg = build_algebra(q).unwrap();
        assert!(alg.a < 0 && alg.b < 0);
        assert_eq!(ramified_primes(alg.a, alg.b), prime_divisors(q), "Q = {q}");
    }
}

#[test]
fn eichler_orders_have_the_right_discriminant() {
    for (q, m) in [(2, 1), (3, 2), (5, 3), (7, 4), (11, 9), (13, 6), (17, 5), (41, 1), (73, 1), (30, 7)] {
        let o = eichler_order(q, m).unwrap();
        assert_eq!(o.reduced_discriminant(), q * m, "({q}, {m})");
    }
}

#[test]
fn small_class_sets() {
    let s = ideal_classes(&eichler_order(11, 1).unwrap()).unwrap();
    let mut w = s.weights.clone();
    w.sort();
    assert_eq!(w, vec![2, 3]);
    let s = ideal_classes(&eichler_order(2, 1).unwrap()).unwrap();
    assert_eq!(s.weights, vec![12]);
    let s = ideal_classes(&eichler_order(3, 1).unwrap()).unwrap();
    assert_eq!(s.weights, vec![6]);
    let big = eichler_order(11, 191).unwrap();
    assert!(matches!(ideal_classes(&big), Err(Error::BoundExceeded(_))));
}

#[test]
fn mass_formula_small_levels() {
    for q in (2..=60u64).filter(|&q| is_prime(q)) {
        for m in 1..=(120 / q) {
            if m % q == 0 {
                continue;
            }
            let s = ideal_classes(&eichler_order(q, m).unwrap()).unwrap();
            assert_eq!(s.mass(), mass_formula(q, m).unwrap(), "({q}, {m})");
        }
    }
}

#[test]
fn brandt_matrices_q11() {
    let s = ideal_classes(&eichler_order(11, 1).unwrap()).unwrap();
    assert_eq!(brandt_matrix(&s, 1).unwrap(), vec![vec![1, 0], vec![0, 1]]);
    let b2 = brandt_matrix(&s, 2).unwrap();
    // trace 3 + (-2), determinant 3 * (-2)
    assert_eq!(b2[0][0] + b2[1][1], 1);
    assert_eq!(b2[0][0] * b2[1][1] - b2[0][1] * b2[1][0], -6);
    assert!(b2.iter().all(|r| r.iter().sum::<i64>() == 3));
    assert!(matches!(brandt_matrix(&s, 11), Err(Error::NotCoprime { .. })));
}

fn sigma1(n: u64) -> i64 {
    divisors(n).iter().sum::<u64>() as i64
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[test]
fn brandt_properties() {
    for (q, m) in [(11u64, 1u64), (37, 1), (7, 2), (3, 5), (5, 3), (2, 7), (13, 3), (23, 1)] {
        let s = ideal_classes(&eichler_order(q, m).unwrap()).unwrap();
        let mats = s.brandt_matrices(20);
        for (&n, b) in &mats {
            let h = s.len();
            for i in 0..h {
                assert_eq!(b[i].iter().sum::<i64>(), sigma1(n), "row sum ({q},{m}) n={n}");
                for j in 0..h {
                    assert_eq!(
                        s.weights[j] as i64 * b[i][j],
                        s.weights[i] as i64 * b[j][i],
                        "symmetry ({q},{m}) n={n}"
                    );
                }
            }
        }
        for (&a, ba) in &mats {
            for (&b, bb) in &mats {
                if a > 1 && b > 1 && a * b <= 20 && lsq_core::arith::gcd_u64(a, b) == 1 {
                    assert_eq!(matmul(ba, bb), mats[&(a * b)], "B({a})B({b}) at ({q},{m})");
                }
            }
        }
    }
}

#[test]
fn eigenform_11a() {
    let s = ideal_classes(&eichler_order(11, 1).unwrap()).unwrap();
    let phi = eigenform_for(&s, &curve("11a1")).unwrap();
    let mut v = phi.values.clone();
    if s.weights[0] == 3 {
        v.reverse();
    }
    assert!(v == vec![2, -3] || v == vec![-2, 3]);
    assert_eq!(phi.constant_pairing(), Rational::from_integer(0));
    assert_eq!(petersson_norm(&phi).unwrap(), Rational::from_integer(5));
    assert_eq!(petersson_norm(&phi.scaled(2)).unwrap(), Rational::from_integer(20));
    let ones = QuaternionicEigenform { values: vec![1, 1], weights: s.weights.clone(), ap: Default::default() };
    assert_eq!(petersson_norm(&ones).unwrap(), Rational::new(5, 6));
    let zero = QuaternionicEigenform { values: vec![0, 0], weights: s.weights.clone(), ap: Default::default() };
    assert_eq!(petersson_norm(&zero), Err(Error::ZeroForm));
    assert_eq!(monodromy_pairing_class(&s, &curve("11a1")).unwrap().rep(), 5);
    assert_eq!(eigenform_for(&s, &curve("14a1")), Err(Error::NoMatch));
}

#[test]
fn monodromy_class_37() {
    let s = ideal_classes(&eichler_order(37, 1).unwrap()).unwrap();
    assert_eq!(monodromy_pairing_class(&s, &curve("37a1")).unwrap().rep(), 2);
    let phi = eigenform_for(&s, &curve("37b1")).unwrap();
    assert_eq!(phi.constant_pairing(), Rational::from_integer(0));
}

#[test]
fn jacquet_langlands_on_table() {
    let mut checked = 0;
    for (label, _) in CURVES {
        let e = curve(label);
        let n = e.conductor().unwrap();
        for (q, k) in factor(n as u128).unwrap() {
            if k != 1 {
                continue;
            }
            let s = ideal_classes(&eichler_order(q, n / q).unwrap()).unwrap();
            let phi = eigenform_for(&s, &e).unwrap_or_else(|err| panic!("{label} at {q}: {err}"));
            assert!(eigenvalues_match(&s, &phi, &e, 50).unwrap(), "{label} at {q}");
            assert_eq!(phi.constant_pairing(), Rational::from_integer(0));
            checked += 1;
        }
    }
    assert!(checked > 20);
}
