use lsq_core::squareclass::{
    recognize_rational, recognize_rational_square, square_class_eq, squarefree_part, Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(a: i128, b: i128) -> Rational {
    Rational::new(a, b)
}

#[test]
fn squarefree_examples() {
    assert_eq!(squarefree_part(q(175, 6)).unwrap().rep(), 42);
    assert_eq!(squarefree_part(q(-12, 1)).unwrap().rep(), -3);
    assert_eq!(squarefree_part(q(1, 1)).unwrap().rep(), 1);
    assert!(squarefree_part(q(0, 1)).is_err());
}

#[test]
fn class_equality_examples() {
    assert!(square_class_eq(q(25, 4), q(1, 1)).unwrap());
    assert!(square_class_eq(q(5, 1), q(45, 1)).unwrap());
    assert!(!square_class_eq(q(2, 1), q(3, 1)).unwrap());
}

#[test]
fn recognition_examples() {
    assert_eq!(recognize_rational_square(2.25, 10, 1e-9), Some(q(3, 2)));
    assert_eq!(recognize_rational_square(0.694444444, 10, 1e-6), Some(q(5, 6)));
    assert_eq!(recognize_rational_square(2.0, 100, 1e-9), None);
    assert_eq!(recognize_rational(-0.2, 100, 1e-9), Some(q(-1, 5)));
}

/// Trial-division square class, independent of the library factorizer.
fn naive_class(mut n: i128) -> i128 {
    let s = n.signum();
    n = n.abs();
    let mut r = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            r *= p;
        }
        p += 1;
    }
    s * r * n
}

#[test]
fn square_factors_do_not_change_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let a: i128 = rng.gen_range(1..100_000) * if rng.gen_bool(0.5) { -1 } else { 1 };
        let b: i128 = rng.gen_range(1..1000);
        let c: i128 = rng.gen_range(1..1000);
        let x = squarefree_part(q(a * b * b, c * c)).unwrap();
        assert_eq!(x, squarefree_part(q(a, 1)).unwrap());
        assert_eq!(x.rep(), naive_class(a));
        let d: i128 = rng.gen_range(1..100_000);
        let prod = squarefree_part(q(a, 1)).unwrap().mul(squarefree_part(q(d, 1)).unwrap()).unwrap();
        assert_eq!(prod.rep(), naive_class(a * d));
    }
}

#[test]
fn recognizes_random_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let h: i128 = 10_000;
        let p = rng.gen_range(1..=h);
        let qq = rng.gen_range(1..=h);
        let r = q(p, qq);
        let x = (*r.numer() as f64 / *r.denom() as f64).powi(2);
        let found = recognize_rational_square(x, h as u64, 1e-12).expect("square found");
        assert_eq!(found, r, "x = {x}");
    }
}
