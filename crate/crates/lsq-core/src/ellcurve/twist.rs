//! Tamagawa numbers of the twist of `E/F` by a quadratic character of a real
//! quadratic field `F`, prime by prime.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{invariants_of, EllipticCurveQ, Kodaira, Reduction};
use crate::arith::{self, gcd_u64};
use crate::quadfield::{HeckeQuadChar, PrimeOfF, RealQuadField, Splitting};
use crate::squareclass::{squarefree_part, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeContribution {
    pub prime: PrimeOfF,
    pub case: String,
    /// Possible Kodaira types of the twist (one entry when determined).
    pub kodaira: Vec<Kodaira>,
    /// Possible Tamagawa numbers (one entry when determined).
    pub tamagawa: Vec<u32>,
    pub conductor_exponent: u32,
    pub ord_disc: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistTamagawaReport {
    pub contributions: Vec<PrimeContribution>,
    /// Square class of the product of the determined Tamagawa numbers.
    pub determined_square_class: i128,
    /// Every undetermined factor is a power of two.
    pub undetermined_are_powers_of_two: bool,
    /// The full product is a square times a power of two.
    pub square_up_to_two: bool,
}

/// A unit of `Z_l` that is not a square (`5` for `l = 2`).
fn unramified_nonsquare(l: u64) -> i64 {
    if l == 2 {
        return 5;
    }
    (2..).find(|&d| arith::legendre(d as i128, l) == -1).unwrap()
}

fn roots_of_two_torsion(e: &EllipticCurveQ, l: u64, f: u8) -> u32 {
    let inv = invariants_of(&e.a);
    let p = l as i128;
    let poly = [inv.b6, 2 * inv.b4, inv.b2, 4].map(|c| c.rem_euclid(p));
    let r1 = (0..p)
        .filter(|&x| {
            let v = ((poly[3] * x + poly[2]) % p * x % p + poly[1]) % p * x % p + poly[0];
            v % p == 0
        })
        .count() as u32;
    match (f, r1) {
        (1, r) => r,
        (_, 0) => 0,
        _ => 3,
    }
}

pub fn twist_tamagawa_analysis(
    e: &EllipticCurveQ,
    field: &RealQuadField,
    delta: &HeckeQuadChar,
    m: u64,
    q: u64,
) -> Result<TwistTamagawaReport> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    if m * q != n || gcd_u64(m, q) != 1 {
        return Err(Error::HypothesisViolated(format!("{m} * {q} is not a coprime splitting of {n}")));
    }
    let dfield = field.disc() as u64;
    if gcd_u64(n, dfield * delta.conductor_norm) != 1 {
        return Err(Error::HypothesisViolated("conductor not coprime to D_F * N(c_delta)".into()));
    }
    if dfield % 2 == 0 {
        return Err(Error::HypothesisViolated("2 ramifies in F".into()));
    }
    for l in arith::prime_divisors(m) {
        if field.splitting_type(l).splitting != Splitting::Split {
            return Err(Error::HypothesisViolated(format!("{l} divides M but does not split in F")));
        }
    }
    for l in arith::prime_divisors(q) {
        if field.splitting_type(l).splitting != Splitting::Inert {
            return Err(Error::HypothesisViolated(format!("{l} divides Q but is not inert in F")));
        }
    }
    let mut out = Vec::new();
    for l in arith::prime_divisors(m) {
        for prime in field.primes_above(l) {
            let twisted = if delta.value(&prime) == 1 {
                e
            } else {
                e.quadratic_twist(unramified_nonsquare(l))?
            };
            let ld = twisted.local_data(l);
            out.push(PrimeContribution {
                prime,
                case: "divides M".into(),
                kodaira: vec![ld.kodaira],
                tamagawa: vec![ld.tamagawa],
                conductor_exponent: ld.conductor_exponent,
                ord_disc: vec![ld.ord_disc],
            });
        }
    }
    for l in arith::prime_divisors(q) {
        let prime = field.splitting_type(l);
        let ld = e.local_data_ext(l, 2);
        if ld.reduction != Reduction::Split {
            return Err(Error::NotMultiplicative(l));
        }
        let nd = ld.ord_disc;
        let c = if delta.value(&prime) == 1 { nd } else if nd % 2 == 0 { 2 } else { 1 };
        out.push(PrimeContribution {
            prime,
            case: "divides Q".into(),
            kodaira: vec![ld.kodaira],
            tamagawa: vec![c],
            conductor_exponent: 1,
            ord_disc: vec![nd],
        });
    }
    for (prime, exp) in delta.ramified_primes()? {
        let l = prime.under;
        if l != 2 {
            let c = 1 + roots_of_two_torsion(&e, l, prime.residue_degree);
            out.push(PrimeContribution {
                prime,
                case: "odd prime dividing the conductor of delta".into(),
                kodaira: vec![Kodaira::I0Star],
                tamagawa: vec![c],
                conductor_exponent: 2 * exp,
                ord_disc: vec![6],
            });
            continue;
        }
        let f = 2 * exp;
        let ords: Vec<u32> = match exp {
            2 => vec![12],
            3 => vec![6, 18],
            _ => {
                return Err(Error::HypothesisViolated(format!(
                    "conductor exponent {exp} at a prime over 2"
                )))
            }
        };
        let mut kinds = Vec::new();
        for &od in &ords {
            kinds.extend(Kodaira::additive_with_components(1 + od - f));
        }
        let mut cs: Vec<u32> = kinds
            .iter()
            .flat_map(|k| match k {
                Kodaira::IStar(_) | Kodaira::I0Star => vec![2, 4],
                Kodaira::III | Kodaira::IIIStar => vec![2],
                Kodaira::IV | Kodaira::IVStar => vec![1, 3],
                _ => vec![1],
            })
            .collect();
        cs.sort();
        cs.dedup();
        out.push(PrimeContribution {
            prime,
            case: format!("prime over 2 with conductor exponent {exp}"),
            kodaira: kinds,
            tamagawa: cs,
            conductor_exponent: f,
            ord_disc: ords,
        });
    }
    let mut prod: i128 = 1;
    let mut pow2 = true;
    for c in &out {
        if c.tamagawa.len() == 1 {
            prod *= c.tamagawa[0] as i128;
        } else if !c.tamagawa.iter().all(|t| t.is_power_of_two()) {
            pow2 = false;
        }
    }
    let sc = squarefree_part(Rational::from_integer(prod))?.rep();
    Ok(TwistTamagawaReport {
        contributions: out,
        determined_square_class: sc,
        undetermined_are_powers_of_two: pow2,
        square_up_to_two: pow2 && (sc == 1 || sc == 2),
    })
}
