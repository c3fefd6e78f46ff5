//! Elliptic curves over Q: invariants, minimal models, local data, traces of
//! Frobenius, quadratic twists and periods.

mod periods;
mod pointcount;
mod tate;
mod twist;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, primes_up_to};
use crate::characters::QuadDirichletChar;
use crate::{Error, Result};

pub use periods::Periods;
pub use tate::{Kodaira, LocalData, Reduction};
pub use twist::{twist_tamagawa_analysis, PrimeContribution, TwistTamagawaReport};

/// Default largest prime for naive point counting.
pub const DEFAULT_AP_BOUND: u64 = 10_000;

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with integer coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EllipticCurveQ {
    pub a: [i128; 5],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: i128,
    pub b4: i128,
    pub b6: i128,
    pub b8: i128,
    pub c4: i128,
    pub c6: i128,
    pub disc: i128,
}

pub(crate) fn invariants_of(a: &[i128; 5]) -> Invariants {
    let [a1, a2, a3, a4, a6] = *a;
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = b2 * b2 - 24 * b4;
    let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
    let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
    Invariants { b2, b4, b6, b8, c4, c6, disc }
}

/// Change of coordinates `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
pub(crate) fn transform(a: &[i128; 5], r: i128, s: i128, t: i128, u: i128) -> [i128; 5] {
    let [a1, a2, a3, a4, a6] = *a;
    let n1 = a1 + 2 * s;
    let n2 = a2 - s * a1 + 3 * r - s * s;
    let n3 = a3 + r * a1 + 2 * t;
    let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
    let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
    let (u2, u3) = (u * u, u * u * u);
    let (u4, u6) = (u2 * u2, u3 * u3);
    debug_assert!(n1 % u == 0 && n2 % u2 == 0 && n3 % u3 == 0 && n4 % u4 == 0 && n6 % u6 == 0);
    [n1 / u, n2 / u2, n3 / u3, n4 / u4, n6 / u6]
}

impl EllipticCurveQ {
    pub fn new(a: [i128; 5]) -> Result<Self> {
        let e = EllipticCurveQ { a };
        if e.invariants().disc == 0 {
            return Err(Error::SingularCurve);
        }
        Ok(e)
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self> {
        EllipticCurveQ::new(a.map(|x| x as i128))
    }

    pub fn invariants(&self) -> Invariants {
        invariants_of(&self.a)
    }

    pub fn c4(&self) -> i128 {
        self.invariants().c4
    }

    pub fn c6(&self) -> i128 {
        self.invariants().c6
    }

    pub fn discriminant(&self) -> i128 {
        self.invariants().disc
    }

    /// The curve with given `c4, c6`, via `y^2 = x^3 - 27 c4 x - 54 c6`, minimized.
    pub fn from_c4c6(c4: i128, c6: i128) -> Result<Self> {
        EllipticCurveQ::new([0, 0, 0, -27 * c4, -54 * c6])?.minimal_model()
    }

    /// Globally minimal model in reduced form (`a1, a3` in {0,1}, `a2` in {-1,0,1}).
    pub fn minimal_model(&self) -> Result<Self> {
        let inv = self.invariants();
        if inv.disc == 0 {
            return Err(Error::SingularCurve);
        }
        let g = match (inv.c4, inv.c6) {
            (0, c6) => c6,
            (c4, 0) => c4,
            (c4, c6) => gcd(c4, c6),
        };
        let mut a = self.a;
        for (p, _) in arith::factor(g.unsigned_abs())? {
            if arith::valuation(invariants_of(&a).disc, p) >= 12 {
                a = tate::tate(&a, p, 1).1;
            }
        }
        Ok(EllipticCurveQ { a: reduce_model(&a) })
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal_model().map(|m| m.discriminant() == self.discriminant()).unwrap_or(false)
    }

    pub fn bad_primes(&self) -> Result<Vec<u64>> {
        Ok(arith::factor(self.discriminant().unsigned_abs())?.into_iter().map(|(p, _)| p).collect())
    }

    /// Local data at `p` over `Q_p`; the model is minimized at `p` first.
    pub fn local_data(&self, p: u64) -> LocalData {
        tate::tate(&self.a, p, 1).0
    }

    /// Local data over the unramified extension of `Q_p` of degree `f` (1 or 2).
    pub fn local_data_ext(&self, p: u64, f: u8) -> LocalData {
        tate::tate(&self.a, p, f).0
    }

    pub fn all_local_data(&self) -> Result<Vec<LocalData>> {
        let m = self.minimal_model()?;
        Ok(m.bad_primes()?.into_iter().map(|p| m.local_data(p)).collect())
    }

    pub fn conductor(&self) -> Result<u64> {
        let mut n = 1u64;
        for ld in self.all_local_data()? {
            n *= ld.prime.pow(ld.conductor_exponent);
        }
        Ok(n)
    }

    /// Root number `w_p` at a prime of multiplicative reduction: `-a_p`.
    pub fn atkin_lehner_sign(&self, p: u64) -> Result<i8> {
        match self.local_data(p).reduction {
            Reduction::Split => Ok(-1),
            Reduction::NonSplit => Ok(1),
            _ => Err(Error::NotMultiplicative(p)),
        }
    }

    pub fn ap(&self, p: u64) -> Result<i64> {
        self.ap_bounded(p, DEFAULT_AP_BOUND)
    }

    pub fn ap_bounded(&self, p: u64, bound: u64) -> Result<i64> {
        if p > bound {
            return Err(Error::PrimeTooLarge(p));
        }
        let m = self.minimal_model()?;
        if m.discriminant() % p as i128 == 0 {
            return Ok(match m.local_data(p).reduction {
                Reduction::Split => 1,
                Reduction::NonSplit => -1,
                _ => 0,
            });
        }
        Ok(count_ap(&m.a, p))
    }

    /// `a_n` for `1 <= n <= x` (index 0 unused), via point counts up to `x`.
    pub fn an_list(&self, x: usize) -> Result<Vec<i64>> {
        let m = self.minimal_model()?;
        let disc = m.discriminant();
        let mut ap = vec![0i64; x + 1];
        let mut bad = vec![false; x + 1];
        for p in primes_up_to(x as u64) {
            let pi = p as usize;
            if disc % p as i128 == 0 {
                bad[pi] = true;
                ap[pi] = match m.local_data(p).reduction {
                    Reduction::Split => 1,
                    Reduction::NonSplit => -1,
                    _ => 0,
                };
            } else {
                ap[pi] = count_ap(&m.a, p);
            }
        }
        Ok(multiplicative_extension(x, |p| (ap[p], bad[p])))
    }

    /// The twist by `Q(sqrt D)`, minimal.
    pub fn quadratic_twist(&self, d: i64) -> Result<Self> {
        if d == 1 {
            return self.minimal_model();
        }
        let inv = self.invariants();
        let d = d as i128;
        EllipticCurveQ::from_c4c6(inv.c4 * d * d, inv.c6 * d * d * d)
    }

    pub fn twist_by(&self, chi: &QuadDirichletChar) -> Result<Self> {
        self.quadratic_twist(chi.disc())
    }

    pub fn periods(&self) -> Result<Periods> {
        Ok(periods::periods(&self.minimal_model()?))
    }

    /// Same curve up to isomorphism over Q.
    pub fn is_isomorphic(&self, other: &EllipticCurveQ) -> bool {
        match (self.minimal_model(), other.minimal_model()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

/// Dirichlet coefficients from prime data `p -> (a_p, bad)`.
pub fn multiplicative_extension(x: usize, prime: impl Fn(usize) -> (i64, bool)) -> Vec<i64> {
    let mut an = vec![0i64; x + 1];
    if x == 0 {
        return an;
    }
    an[1] = 1;
    let mut spf = vec![0usize; x + 1];
    for i in 2..=x {
        if spf[i] == 0 {
            let mut j = i;
            while j <= x {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    for n in 2..=x {
        let p = spf[n];
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        let pk = n / m;
        if m > 1 {
            an[n] = an[m] * an[pk];
            continue;
        }
        let (a, bad) = prime(p);
        an[n] = if k == 1 {
            a
        } else if bad {
            an[n / p] * a
        } else {
            a * an[n / p] - p as i64 * an[n / (p * p)]
        };
    }
    an
}

/// `p + 1 - #E(F_p)` by counting, for `p` of good reduction.
/// Primes from which `a_p` is found by baby-step giant-step.
const BSGS_FROM: u64 = 1000;

pub(crate) fn count_ap(a: &[i128; 5], p: u64) -> i64 {
    if p == 2 {
        let [a1, a2, a3, a4, a6] = a.map(|v| v.rem_euclid(2));
        let mut n = 1;
        for x in 0..2 {
            for y in 0..2 {
                let l = y * y + a1 * x * y + a3 * y;
                let r = x * x * x + a2 * x * x + a4 * x + a6;
                if (l - r).rem_euclid(2) == 0 {
                    n += 1;
                }
            }
        }
        return 3 - n;
    }
    let inv = invariants_of(a);
    let pi = p as i128;
    if p >= BSGS_FROM {
        let ca = (-27 * inv.c4).rem_euclid(pi) as u64;
        let cb = (-54 * inv.c6).rem_euclid(pi) as u64;
        if let Some(t) = pointcount::trace_bsgs(ca, cb, p) {
            return t;
        }
    }
    let b2 = inv.b2.rem_euclid(pi) as u64;
    let b4 = (2 * inv.b4).rem_euclid(pi) as u64;
    let b6 = inv.b6.rem_euclid(pi) as u64;
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for x in 1..p {
        chi[((x * x) % p) as usize] = 1;
    }
    let mut s = 0i64;
    for x in 0..p {
        // 4x^3 + b2 x^2 + 2 b4 x + b6
        let v = (((4 * x % p + b2) % p * x % p + b4) % p * x % p + b6) % p;
        s += chi[v as usize] as i64;
    }
    -s
}

/// Normalizes to `a1, a3` in {0,1} and `a2` in {-1,0,1}.
fn reduce_model(a: &[i128; 5]) -> [i128; 5] {
    let s = -a[0].div_euclid(2);
    let a2s = a[1] - s * a[0] - s * s;
    let r = -(a2s + 1).div_euclid(3);
    let a3r = a[2] + r * a[0];
    let t = -a3r.div_euclid(2);
    transform(a, r, s, t, 1)
}
