//! Quadratic Dirichlet characters indexed by fundamental discriminants.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd};
use crate::{Error, Result};

pub use crate::arith::kronecker;

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        arith::is_squarefree(d.unsigned_abs())
    } else if r == 0 {
        let m = d / 4;
        let mr = m.rem_euclid(4);
        (mr == 2 || mr == 3) && arith::is_squarefree(m.unsigned_abs())
    } else {
        false
    }
}

/// The character `n -> (D/n)` for a fundamental discriminant `D`; `D = 1` is trivial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuadDirichletChar {
    disc: i64,
}

impl QuadDirichletChar {
    pub fn new(disc: i64) -> Result<Self> {
        if is_fundamental_discriminant(disc) {
            Ok(QuadDirichletChar { disc })
        } else {
            Err(Error::NotFundamental(disc))
        }
    }

    pub fn trivial() -> Self {
        QuadDirichletChar { disc: 1 }
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn parity(&self) -> i8 {
        if self.disc < 0 {
            -1
        } else {
            1
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.disc == 1
    }

    pub fn value(&self, n: i64) -> i8 {
        kronecker(self.disc as i128, n as i128)
    }

    /// The primitive character attached to the product.
    pub fn product(&self, other: &QuadDirichletChar) -> QuadDirichletChar {
        let g = gcd(self.disc as i128, other.disc as i128) as i64;
        let mut d = (self.disc / g) * (other.disc / g);
        // strip squares so that d is fundamental again
        let sign = d.signum();
        let mut core = 1i64;
        for (p, e) in arith::factor(d.unsigned_abs() as u128).unwrap_or_default() {
            if e % 2 == 1 {
                core *= p as i64;
            }
        }
        d = sign * core;
        if d.rem_euclid(4) != 1 {
            d *= 4;
        }
        QuadDirichletChar { disc: d }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GaussSum {
    pub numeric: Complex64,
    pub exact: Complex64,
    pub ok: bool,
}

pub fn gauss_sum_check(chi: &QuadDirichletChar) -> Result<GaussSum> {
    if chi.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    let c = chi.conductor();
    let mut tau = Complex64::new(0.0, 0.0);
    for a in 1..c {
        let v = chi.value(a as i64);
        if v != 0 {
            let t = 2.0 * PI * a as f64 / c as f64;
            tau += Complex64::new(libm::cos(t), libm::sin(t)) * v as f64;
        }
    }
    let rc = libm::sqrt(c as f64);
    let exact = if chi.parity() == 1 {
        Complex64::new(rc, 0.0)
    } else {
        Complex64::new(0.0, rc)
    };
    let target = chi.parity() as f64 * c as f64;
    let ok = (tau * tau - Complex64::new(target, 0.0)).norm() < 1e-8 * c as f64;
    Ok(GaussSum { numeric: tau, exact, ok })
}

/// Root number `-chi(-N) w_N` of the twist of a newform of level `N`.
pub fn fe_sign_twist(level: u64, w_n: i8, chi: &QuadDirichletChar) -> Result<i8> {
    if arith::gcd_u64(level, chi.conductor()) != 1 {
        return Err(Error::NotCoprime { a: level as i64, b: chi.disc() });
    }
    Ok(-chi.value(-(level as i64)) * w_n)
}

/// The genus character of `Q(sqrt(D1 D2))` cut out by the pair `(chi1, chi2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusChar {
    pub chi1: QuadDirichletChar,
    pub chi2: QuadDirichletChar,
    pub field_disc: i64,
}

pub fn genus_character(chi1: QuadDirichletChar, chi2: QuadDirichletChar) -> Result<GenusChar> {
    if chi1.is_trivial() && chi2.is_trivial() {
        return Err(Error::BothTrivial);
    }
    if gcd(chi1.disc() as i128, chi2.disc() as i128) != 1 {
        return Err(Error::NotCoprime { a: chi1.disc(), b: chi2.disc() });
    }
    Ok(GenusChar { chi1, chi2, field_disc: chi1.disc() * chi2.disc() })
}

impl GenusChar {
    /// Common value at the archimedean places, if the parities agree.
    pub fn arch_sign(&self) -> Option<i8> {
        (self.chi1.parity() == self.chi2.parity()).then(|| self.chi1.parity())
    }

    /// Value at a prime of `F` above `l`: `chi1(l)` or `chi2(l)` for split `l`,
    /// 1 at inert primes. Ramified primes use whichever character is unramified there.
    pub fn value_above(&self, l: u64) -> i8 {
        let s = kronecker(self.field_disc as i128, l as i128);
        if s == -1 {
            return 1;
        }
        let v1 = self.chi1.value(l as i64);
        if v1 != 0 {
            v1
        } else {
            self.chi2.value(l as i64)
        }
    }
}

/// Constraints for [`search_auxiliary_char`].
#[derive(Clone, Debug, Default)]
pub struct CharProfile {
    pub parity: i8,
    values: BTreeMap<u64, i8>,
    pub coprime_to: Vec<u64>,
}

impl CharProfile {
    pub fn new(parity: i8) -> Self {
        CharProfile { parity, values: BTreeMap::new(), coprime_to: Vec::new() }
    }

    /// Requires `chi(l) = value`; a second, different requirement at `l` is an error.
    pub fn require(&mut self, l: u64, value: i8) -> Result<&mut Self> {
        if let Some(&old) = self.values.get(&l) {
            if old != value {
                return Err(Error::InvalidInput(alloc::format!("conflicting values at {l}")));
            }
        }
        self.values.insert(l, value);
        Ok(self)
    }

    pub fn coprime(&mut self, n: u64) -> &mut Self {
        self.coprime_to.push(n);
        self
    }

    pub fn values(&self) -> &BTreeMap<u64, i8> {
        &self.values
    }

    pub fn accepts(&self, chi: &QuadDirichletChar) -> bool {
        chi.parity() == self.parity
            && self.coprime_to.iter().all(|&n| arith::gcd_u64(n, chi.conductor()) == 1)
            && self.values.iter().all(|(&l, &v)| chi.value(l as i64) == v)
    }
}

/// Fundamental discriminants ordered by `(|D|, D)`, starting with 1.
pub fn fundamental_discriminants(bound: u64) -> impl Iterator<Item = QuadDirichletChar> {
    (1..=bound as i64)
        .flat_map(|a| [-a, a])
        .filter(|&d| d != -1 && is_fundamental_discriminant(d))
        .map(|disc| QuadDirichletChar { disc })
}

pub fn search_auxiliary_char(
    profile: &CharProfile,
    bound: u64,
) -> impl Iterator<Item = QuadDirichletChar> + '_ {
    fundamental_discriminants(bound).filter(move |c| profile.accepts(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_is_fundamental() {
        let a = QuadDirichletChar::new(-4).unwrap();
        let b = QuadDirichletChar::new(-8).unwrap();
        assert_eq!(a.product(&b).disc(), 8);
        let c = QuadDirichletChar::new(-3).unwrap();
        assert_eq!(c.product(&c).disc(), 1);
    }
}
