#![allow(dead_code)]

use lsq_core::ellcurve::EllipticCurveQ;

/// (label, a-invariants) for a handful of optimal curves of small conductor.
pub const CURVES: &[(&str, [i64; 5])] = &[
    ("11a1", [0, -1, 1, -10, -20]),
    ("11a2", [0, -1, 1, -7820, -263580]),
    ("11a3", [0, -1, 1, 0, 0]),
    ("14a1", [1, 0, 1, 4, -6]),
    ("15a1", [1, 1, 1, -10, -10]),
    ("17a1", [1, -1, 1, -1, -14]),
    ("19a1", [0, 1, 1, -9, -15]),
    ("20a1", [0, 1, 0, 4, 4]),
    ("21a1", [1, 0, 0, -4, -1]),
    ("24a1", [0, -1, 0, -4, 4]),
    ("26a1", [1, 0, 1, -5, -8]),
    ("26b1", [1, -1, 1, -3, 3]),
    ("27a1", [0, 0, 1, 0, -7]),
    ("30a1", [1, 0, 1, 1, 2]),
    ("32a1", [0, 0, 0, 4, 0]),
    ("33a1", [1, 1, 0, -11, 0]),
    ("34a1", [1, 0, 0, -3, 1]),
    ("35a1", [0, 1, 1, 9, 1]),
    ("36a1", [0, 0, 0, 0, 1]),
    ("37a1", [0, 0, 1, -1, 0]),
    ("37b1", [0, 1, 1, -23, -50]),
    ("38a1", [1, 0, 1, 9, 90]),
    ("38b1", [1, 1, 1, 0, 1]),
    ("39a1", [1, 1, 0, -4, -5]),
    ("40a1", [0, 0, 0, -7, -6]),
    ("42a1", [1, 1, 1, -4, 5]),
    ("43a1", [0, 1, 1, 0, 0]),
    ("44a1", [0, 1, 0, 3, -1]),
    ("45a1", [1, -1, 0, 0, -5]),
    ("46a1", [1, -1, 0, -10, -12]),
    ("48a1", [0, 1, 0, -4, -4]),
    ("49a1", [1, -1, 0, -2, -1]),
    ("50a1", [1, 0, 1, -1, -2]),
    ("51a1", [0, 1, 1, 1, -1]),
    ("53a1", [1, -1, 1, 0, 0]),
    ("54b1", [1, -1, 1, 1, -1]),
    ("55a1", [1, -1, 0, -4, 3]),
    ("56a1", [0, 0, 0, 1, 2]),
    ("57a1", [0, -1, 1, -2, 2]),
    ("58a1", [1, -1, 0, -1, 1]),
    ("61a1", [1, 0, 0, -2, 1]),
    ("62a1", [1, -1, 1, -1, 1]),
    ("64a1", [0, 0, 0, -4, 0]),
    ("65a1", [1, 0, 0, -1, 0]),
    ("67a1", [0, 1, 1, -12, -21]),
    ("69a1", [1, 0, 1, -1, -1]),
    ("73a1", [1, -1, 0, 4, -3]),
    ("77a1", [0, 0, 1, 2, 0]),
    ("79a1", [1, 1, 1, -2, 0]),
    ("82a1", [1, 0, 1, -2, 0]),
    ("83a1", [1, 1, 1, 1, 0]),
    ("89a1", [1, 1, 1, -1, 0]),
    ("91a1", [0, 0, 1, 1, 0]),
    ("92a1", [0, 1, 0, 2, 1]),
    ("94a1", [1, -1, 1, 0, -1]),
    ("99a1", [1, -1, 1, -2, 0]),
];

pub fn curve(label: &str) -> EllipticCurveQ {
    let (_, a) = CURVES.iter().find(|(l, _)| *l == label).expect("known label");
    EllipticCurveQ::from_i64(*a).unwrap()
}

pub fn label_conductor(label: &str) -> u64 {
    label.trim_end_matches(|c: char| c.is_ascii_alphabetic() || c.is_ascii_digit() && false)
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .collect::<String>()
        .parse()
        .unwrap()
}

/// Brute-force count of affine points over F_p plus the point at infinity.
pub fn brute_ap(a: [i128; 5], p: i128) -> i64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut n = 1i64;
    for x in 0..p {
        for y in 0..p {
            let l = y * y + a1 * x * y + a3 * y;
            let r = x * x * x + a2 * x * x + a4 * x + a6;
            if (l - r).rem_euclid(p) == 0 {
                n += 1;
            }
        }
    }
    p as i64 + 1 - n
}
