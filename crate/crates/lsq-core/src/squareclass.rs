//! The group Q^x / (Q^x)^2 and recognition of rational squares from floats.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_with, gcd, FactorBudget};
use crate::{Error, Result};

pub type Rational = Ratio<i128>;

/// Square class of a nonzero rational, stored as its signed squarefree representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SquareClass {
    rep: i128,
}

impl SquareClass {
    pub fn rep(&self) -> i128 {
        self.rep
    }

    pub fn mul(self, other: SquareClass) -> Result<SquareClass> {
        let g = gcd(self.rep, other.rep);
        // rep_a * rep_b = g^2 * (a/g)(b/g), and a/g, b/g, g are pairwise coprime squarefree
        let r = (self.rep / g) * (other.rep / g);
        Ok(SquareClass { rep: r })
    }
}

fn squarefree_int(n: i128, budget: FactorBudget) -> Result<i128> {
    let mut r: i128 = if n < 0 { -1 } else { 1 };
    for (p, e) in factor_with(n.unsigned_abs(), budget)? {
        if e % 2 == 1 {
            r *= p as i128;
        }
    }
    Ok(r)
}

pub fn squarefree_part(r: Rational) -> Result<SquareClass> {
    squarefree_part_with(r, FactorBudget::default())
}

pub fn squarefree_part_with(r: Rational, budget: FactorBudget) -> Result<SquareClass> {
    if *r.numer() == 0 {
        return Err(Error::InvalidInput("square class of zero".into()));
    }
    // a/b and a*b differ by the square b^2
    let a = squarefree_int(*r.numer(), budget)?;
    let b = squarefree_int(*r.denom(), budget)?;
    SquareClass { rep: a }.mul(SquareClass { rep: b })
}

pub fn square_class_eq(a: Rational, b: Rational) -> Result<bool> {
    Ok(squarefree_part(a)? == squarefree_part(b)?)
}

/// Continued-fraction convergents and semiconvergents of `y > 0` with
/// numerator and denominator at most `h`, in order of increasing denominator.
fn best_approximations(y: f64, h: i128) -> alloc::vec::Vec<(i128, i128)> {
    let mut out = alloc::vec::Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut x = y;
    for _ in 0..64 {
        let a = libm::floor(x);
        if a > 1e18 {
            break;
        }
        let a = a as i128;
        // semiconvergents (p0 + j p1)/(q0 + j q1), j = ceil(a/2)..a
        let start = if a >= 2 { (a + 1) / 2 } else { a };
        let mut done = false;
        for j in start.max(1)..=a {
            let (p, q) = (p0 + j * p1, q0 + j * q1);
            if p > h || q > h {
                done = true;
                break;
            }
            out.push((p, q));
        }
        if a == 0 {
            out.push((0, 1));
        }
        if done {
            break;
        }
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - libm::floor(x);
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// Finds `p/q` with `max(p, q) <= height_bound` and `|(p/q)^2 - x| <= tol * x`,
/// preferring the smallest height.
pub fn recognize_rational_square(x: f64, height_bound: u64, tol: f64) -> Option<Rational> {
    if !(x > 0.0) || height_bound == 0 {
        return None;
    }
    let y = libm::sqrt(x);
    best_approximations(y, height_bound as i128)
        .into_iter()
        .filter(|&(p, q)| q > 0 && p > 0)
        .filter(|&(p, q)| {
            let v = (p as f64 / q as f64) * (p as f64 / q as f64);
            libm::fabs(v - x) <= tol * x
        })
        .min_by_key(|&(p, q)| p.max(q))
        .map(|(p, q)| Rational::new(p, q))
}

/// Recognizes `x` itself as a rational of height at most `height_bound`.
pub fn recognize_rational(x: f64, height_bound: u64, tol: f64) -> Option<Rational> {
    if x == 0.0 {
        return Some(Rational::from_integer(0));
    }
    let s: i128 = if x < 0.0 { -1 } else { 1 };
    let ax = libm::fabs(x);
    best_approximations(ax, height_bound as i128)
        .into_iter()
        .filter(|&(p, q)| q > 0 && p > 0)
        .filter(|&(p, q)| libm::fabs(p as f64 / q as f64 - ax) <= tol * ax)
        .min_by_key(|&(p, q)| p.max(q))
        .map(|(p, q)| Rational::new(s * p, q))
}
