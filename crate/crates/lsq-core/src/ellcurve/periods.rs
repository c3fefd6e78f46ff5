//! Periods of the Neron differential via the arithmetic-geometric mean.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::EllipticCurveQ;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    /// Generator of `(1 + conj) Lambda`: least real period times the number of real components.
    pub omega_plus: f64,
    /// Generator of `(1 - conj) Lambda` divided by `i`.
    pub omega_minus: f64,
    /// Least positive real period.
    pub real_period: f64,
    /// Imaginary part of the second basis vector of the period lattice.
    pub imag_part: f64,
    pub real_components: u8,
}

pub(crate) fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..100 {
        let an = (a + b) / 2.0;
        let bn = libm::sqrt(a * b);
        if libm::fabs(an - bn) <= 1e-17 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Real roots of `4x^3 + b2 x^2 + 2 b4 x + b6`, descending.
fn real_roots(b2: f64, b4: f64, b6: f64) -> alloc::vec::Vec<f64> {
    let f = |x: f64| ((4.0 * x + b2) * x + 2.0 * b4) * x + b6;
    let df = |x: f64| (12.0 * x + 2.0 * b2) * x + 2.0 * b4;
    // critical points of the cubic split the line into monotone pieces
    let disc = 4.0 * b2 * b2 - 96.0 * b4;
    let bound = 1.0 + libm::fabs(b2) / 4.0 + libm::fabs(b4) / 2.0 + libm::fabs(b6) / 4.0;
    let mut pts = alloc::vec![-bound];
    if disc > 0.0 {
        let s = libm::sqrt(disc);
        let (c1, c2) = ((-2.0 * b2 - s) / 24.0, (-2.0 * b2 + s) / 24.0);
        pts.push(c1);
        pts.push(c2);
    }
    pts.push(bound);
    let mut roots = alloc::vec::Vec::new();
    for w in pts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = (lo + hi) / 2.0;
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = (lo + hi) / 2.0;
        for _ in 0..3 {
            let d = df(x);
            if d != 0.0 {
                let nx = x - f(x) / d;
                if nx >= w[0] && nx <= w[1] {
                    x = nx;
                }
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots.dedup_by(|a, b| libm::fabs(*a - *b) < 1e-12 * (1.0 + libm::fabs(*b)));
    roots
}

pub(crate) fn periods(e: &EllipticCurveQ) -> Periods {
    let inv = e.invariants();
    let (b2, b4, b6) = (inv.b2 as f64, inv.b4 as f64, inv.b6 as f64);
    let roots = real_roots(b2, b4, b6);
    if inv.disc > 0 {
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let w1 = PI / agm(libm::sqrt(e1 - e3), libm::sqrt(e1 - e2));
        let w2 = PI / agm(libm::sqrt(e1 - e3), libm::sqrt(e2 - e3));
        Periods {
            omega_plus: 2.0 * w1,
            omega_minus: 2.0 * w2,
            real_period: w1,
            imag_part: w2,
            real_components: 2,
        }
    } else {
        let e1 = roots[0];
        let a = 3.0 * e1 + b2 / 4.0;
        let b = libm::sqrt(3.0 * e1 * e1 + b2 / 2.0 * e1 + b4 / 2.0);
        let w1 = 2.0 * PI / agm(2.0 * libm::sqrt(b), libm::sqrt(2.0 * b + a));
        let w2 = PI / agm(2.0 * libm::sqrt(b), libm::sqrt(2.0 * b - a));
        Periods {
            omega_plus: w1,
            omega_minus: 2.0 * w2,
            real_period: w1,
            imag_part: w2,
            real_components: 1,
        }
    }
}
