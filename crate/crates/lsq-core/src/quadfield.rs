//! Real quadratic fields `Q(sqrt D)` with `O = Z[w]`, `w = (D + sqrt D)/2`, and
//! quadratic characters of `F` given by kernel fields `F(sqrt beta)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::arith::{self, isqrt, kronecker, legendre, primes_up_to};
use crate::characters::is_fundamental_discriminant;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RealQuadField {
    disc: i64,
}

/// The element `x + y w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadInt {
    pub x: i128,
    pub y: i128,
}

impl QuadInt {
    pub const ONE: QuadInt = QuadInt { x: 1, y: 0 };

    pub fn new(x: i128, y: i128) -> Self {
        QuadInt { x, y }
    }

    pub fn rational(x: i128) -> Self {
        QuadInt { x, y: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// A prime of `O_F`. For split and ramified primes `root` is the residue of `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeOfF {
    pub under: u64,
    pub splitting: Splitting,
    pub residue_degree: u8,
    pub norm: u64,
    pub root: Option<i64>,
}

impl PrimeOfF {
    pub fn ramification(&self) -> u32 {
        if self.splitting == Splitting::Ramified {
            2
        } else {
            1
        }
    }
}

impl RealQuadField {
    pub fn new(disc: i64) -> Result<Self> {
        if disc <= 1 || !is_fundamental_discriminant(disc) {
            return Err(Error::NotFundamental(disc));
        }
        Ok(RealQuadField { disc })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// `N(w) = (D^2 - D)/4`.
    fn n0(&self) -> i128 {
        let d = self.disc as i128;
        (d * d - d) / 4
    }

    pub fn mul(&self, a: QuadInt, b: QuadInt) -> QuadInt {
        let d = self.disc as i128;
        let bd = a.y * b.y;
        QuadInt { x: a.x * b.x - bd * self.n0(), y: a.x * b.y + a.y * b.x + bd * d }
    }

    pub fn sub(&self, a: QuadInt, b: QuadInt) -> QuadInt {
        QuadInt { x: a.x - b.x, y: a.y - b.y }
    }

    pub fn conj(&self, a: QuadInt) -> QuadInt {
        QuadInt { x: a.x + a.y * self.disc as i128, y: -a.y }
    }

    pub fn norm(&self, a: QuadInt) -> i128 {
        a.x * a.x + a.x * a.y * self.disc as i128 + a.y * a.y * self.n0()
    }

    pub fn trace(&self, a: QuadInt) -> i128 {
        2 * a.x + a.y * self.disc as i128
    }

    pub fn pow(&self, a: QuadInt, e: u32) -> QuadInt {
        let mut r = QuadInt::ONE;
        for _ in 0..e {
            r = self.mul(r, a);
        }
        r
    }

    /// Exact quotient `a / n` for a rational integer `n`.
    fn div_int(&self, a: QuadInt, n: i128) -> Option<QuadInt> {
        (a.x % n == 0 && a.y % n == 0).then(|| QuadInt { x: a.x / n, y: a.y / n })
    }

    /// Signs of `a` under `w -> (D + sqrt D)/2` and `w -> (D - sqrt D)/2`.
    pub fn signs(&self, a: QuadInt) -> [i8; 2] {
        let s = 2 * a.x + a.y * self.disc as i128;
        [sign_of_sum(s, a.y, self.disc), sign_of_sum(s, -a.y, self.disc)]
    }

    /// Real embeddings, in the order used by [`Self::signs`].
    pub fn embed(&self, a: QuadInt) -> [f64; 2] {
        let r = libm::sqrt(self.disc as f64);
        let d = self.disc as f64;
        [a.x as f64 + a.y as f64 * (d + r) / 2.0, a.x as f64 + a.y as f64 * (d - r) / 2.0]
    }

    /// Residue of `w` at the primes above `p`: the roots of `X^2 - D X + (D^2-D)/4` mod `p`.
    fn roots_mod(&self, p: u64) -> Vec<i64> {
        let n0 = self.n0();
        let d = self.disc as i128;
        (0..p as i128)
            .filter(|&r| (r * r - d * r + n0).rem_euclid(p as i128) == 0)
            .map(|r| r as i64)
            .collect()
    }

    fn roots_mod_fast(&self, p: u64) -> Vec<i64> {
        if p < 50 {
            return self.roots_mod(p);
        }
        let Some(s) = arith::sqrt_mod(self.disc as i128, p) else { return Vec::new() };
        let inv2 = (p as i128 + 1) / 2;
        let d = self.disc as i128;
        let mut r: Vec<i64> = [s as i128, -(s as i128)]
            .iter()
            .map(|&t| (((d + t) * inv2).rem_euclid(p as i128)) as i64)
            .collect();
        r.sort();
        r.dedup();
        r
    }

    pub fn splitting_type(&self, p: u64) -> PrimeOfF {
        self.primes_above(p)[0]
    }

    pub fn primes_above(&self, p: u64) -> Vec<PrimeOfF> {
        match kronecker(self.disc as i128, p as i128) {
            1 => self
                .roots_mod_fast(p)
                .into_iter()
                .map(|r| PrimeOfF {
                    under: p,
                    splitting: Splitting::Split,
                    residue_degree: 1,
                    norm: p,
                    root: Some(r),
                })
                .collect(),
            -1 => vec![PrimeOfF {
                under: p,
                splitting: Splitting::Inert,
                residue_degree: 2,
                norm: p * p,
                root: None,
            }],
            _ => vec![PrimeOfF {
                under: p,
                splitting: Splitting::Ramified,
                residue_degree: 1,
                norm: p,
                root: Some(self.roots_mod(p)[0]),
            }],
        }
    }

    /// Lift of the root of `w` at a split prime to `Z/p^k`, with `p^k` near `10^18`.
    fn hensel_root(&self, prime: &PrimeOfF) -> (i128, i128, u32) {
        let p = prime.under as i128;
        let mut k = 1u32;
        let mut m = p;
        while m * p <= 1_000_000_000_000_000_000 {
            m *= p;
            k += 1;
        }
        let d = self.disc as i128;
        let n0 = self.n0().rem_euclid(m);
        let mut r = prime.root.unwrap() as i128;
        for _ in 0..8 {
            let h = ((r * r).rem_euclid(m) - (d * r).rem_euclid(m) + n0).rem_euclid(m);
            let dh = (2 * r - d).rem_euclid(m);
            let inv = arith::inv_mod(dh, m).expect("split prime root is simple");
            r = (r - mul_mod_i(h, inv, m)).rem_euclid(m);
        }
        (r, m, k)
    }

    /// `P`-adic valuation of a nonzero element.
    pub fn valuation(&self, a: QuadInt, prime: &PrimeOfF) -> u32 {
        debug_assert!(!a.is_zero());
        let p = prime.under;
        match prime.splitting {
            Splitting::Inert => {
                let vx = if a.x == 0 { u32::MAX } else { arith::valuation(a.x, p) };
                let vy = if a.y == 0 { u32::MAX } else { arith::valuation(a.y, p) };
                vx.min(vy)
            }
            Splitting::Ramified => arith::valuation(self.norm(a), p),
            Splitting::Split => {
                let (r, m, k) = self.hensel_root(prime);
                let z = (a.x.rem_euclid(m) + mul_mod_i(a.y.rem_euclid(m), r, m)).rem_euclid(m);
                if z == 0 {
                    k
                } else {
                    arith::valuation(z, p)
                }
            }
        }
    }

    /// A uniformizer of `prime` with norm of valuation one (split and ramified case).
    fn uniformizer(&self, prime: &PrimeOfF) -> QuadInt {
        let p = prime.under as i128;
        let mut r = prime.root.unwrap() as i128;
        let mut pi = QuadInt::new(-r, 1);
        if arith::valuation(self.norm(pi), prime.under) != 1 {
            r += p;
            pi = QuadInt::new(-r, 1);
        }
        pi
    }

    /// Element `g` with `a = pi^v * g * (unit square)` locally, `g` a `prime`-unit.
    fn unit_part(&self, a: QuadInt, prime: &PrimeOfF, v: u32) -> QuadInt {
        let p = prime.under as i128;
        match prime.splitting {
            Splitting::Inert => self.div_int(a, p.pow(v)).expect("valuation is exact"),
            _ => {
                // only g mod p^k matters; exact powers of pi outgrow i128 for large D
                let k = if p == 2 { 8 } else { 2 };
                let m = p.checked_pow(v + k).filter(|&m| m <= 1 << 62).expect("valuation in range");
                let pi = self.conj(self.uniformizer(prime));
                let mut t = self.reduce(a, m);
                for _ in 0..v {
                    t = self.mul_mod(t, pi, m);
                }
                self.div_int(t, p.pow(v)).expect("valuation is exact")
            }
        }
    }

    fn reduce(&self, a: QuadInt, m: i128) -> QuadInt {
        QuadInt { x: a.x.rem_euclid(m), y: a.y.rem_euclid(m) }
    }

    /// Product with coordinates reduced mod `m <= 2^62`.
    fn mul_mod(&self, a: QuadInt, b: QuadInt, m: i128) -> QuadInt {
        let (a, b) = (self.reduce(a, m), self.reduce(b, m));
        let d = (self.disc as i128).rem_euclid(m);
        let n0 = self.n0().rem_euclid(m);
        let bd = mul_mod_i(a.y, b.y, m);
        let x = mul_mod_i(a.x, b.x, m) - mul_mod_i(bd, n0, m);
        let y = mul_mod_i(a.x, b.y, m) + mul_mod_i(a.y, b.x, m) + mul_mod_i(bd, d, m);
        QuadInt { x: x.rem_euclid(m), y: y.rem_euclid(m) }
    }

    fn residue_symbol(&self, g: QuadInt, prime: &PrimeOfF) -> i8 {
        let p = prime.under;
        match prime.splitting {
            Splitting::Inert => legendre(self.norm(g), p),
            _ => legendre(g.x + g.y * prime.root.unwrap() as i128, p),
        }
    }

    /// Local behaviour of `F(sqrt beta)/F` at `prime`.
    pub fn local_data(&self, beta: QuadInt, prime: &PrimeOfF) -> LocalCharData {
        let p = prime.under;
        let v = self.valuation(beta, prime);
        if p != 2 {
            if v % 2 == 1 {
                return LocalCharData { valuation: v, value: 0, conductor_exponent: 1 };
            }
            let g = self.unit_part(beta, prime, v);
            return LocalCharData {
                valuation: v,
                value: self.residue_symbol(g, prime),
                conductor_exponent: 0,
            };
        }
        let e = prime.ramification();
        if v % 2 == 1 {
            return LocalCharData { valuation: v, value: 0, conductor_exponent: 2 * e + 1 };
        }
        let g = self.unit_part(beta, prime, v);
        let cap = 2 * e + 1;
        let mut t = 0;
        'search: for a in 0..8 {
            for b in 0..8 {
                let s = QuadInt::new(a, b);
                let diff = self.sub(g, self.mul(s, s));
                let w = if diff.is_zero() { cap } else { self.valuation(diff, prime).min(cap) };
                t = t.max(w);
                if t == cap {
                    break 'search;
                }
            }
        }
        if t >= cap {
            LocalCharData { valuation: v, value: 1, conductor_exponent: 0 }
        } else if t == 2 * e {
            LocalCharData { valuation: v, value: -1, conductor_exponent: 0 }
        } else {
            LocalCharData { valuation: v, value: 0, conductor_exponent: cap - t }
        }
    }

    /// Whether `a` is a square in `O_F`.
    pub fn is_square(&self, a: QuadInt) -> bool {
        if a.is_zero() {
            return true;
        }
        if self.signs(a) != [1, 1] {
            return false;
        }
        let n = self.norm(a);
        if !arith::is_square(n) {
            return false;
        }
        let m = isqrt(n as u128) as i128;
        let tr = self.trace(a);
        let d = self.disc as i128;
        for ng in [m, -m] {
            let t2 = tr + 2 * ng;
            let b2d = tr - 2 * ng;
            if t2 < 0 || b2d < 0 || b2d % d != 0 {
                continue;
            }
            if !arith::is_square(t2) || !arith::is_square(b2d / d) {
                continue;
            }
            let t = isqrt(t2 as u128) as i128;
            let b = isqrt((b2d / d) as u128) as i128;
            for (ts, bs) in [(t, b), (t, -b), (-t, b), (-t, -b)] {
                if (ts - bs * d) % 2 != 0 {
                    continue;
                }
                let g = QuadInt::new((ts - bs * d) / 2, bs);
                if self.mul(g, g) == a {
                    return true;
                }
            }
        }
        false
    }

    /// Primes of `F` dividing `a`, with valuations.
    pub fn factor(&self, a: QuadInt) -> Result<Vec<(PrimeOfF, u32)>> {
        let n = self.norm(a).unsigned_abs();
        let mut out = Vec::new();
        for (p, _) in arith::factor(n)? {
            for q in self.primes_above(p) {
                let v = self.valuation(a, &q);
                if v > 0 {
                    out.push((q, v));
                }
            }
        }
        Ok(out)
    }

    /// All ideals of norm at most `x`, sorted by norm.
    pub fn ideals_up_to(&self, x: u64) -> Vec<(u64, Vec<(PrimeOfF, u32)>)> {
        let mut primes = Vec::new();
        for p in primes_up_to(x) {
            for q in self.primes_above(p) {
                if q.norm <= x {
                    primes.push(q);
                }
            }
        }
        primes.sort_by_key(|q| q.norm);
        let mut out = Vec::new();
        let mut stack: Vec<(PrimeOfF, u32)> = Vec::new();
        fn rec(
            primes: &[PrimeOfF],
            start: usize,
            norm: u64,
            x: u64,
            stack: &mut Vec<(PrimeOfF, u32)>,
            out: &mut Vec<(u64, Vec<(PrimeOfF, u32)>)>,
        ) {
            out.push((norm, stack.clone()));
            for i in start..primes.len() {
                let q = primes[i];
                let mut n = norm;
                let mut e = 0;
                while n.saturating_mul(q.norm) <= x {
                    n *= q.norm;
                    e += 1;
                    stack.push((q, e));
                    rec(primes, i + 1, n, x, stack, out);
                    stack.pop();
                }
                if norm.saturating_mul(q.norm) > x {
                    break;
                }
            }
        }
        rec(&primes, 0, 1, x, &mut stack, &mut out);
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.len().cmp(&b.1.len())));
        out
    }
}

fn mul_mod_i(a: i128, b: i128, m: i128) -> i128 {
    ((a as u128 * b as u128) % m as u128) as i128
}

/// Sign of `s + t sqrt(d)` for integers `s, t` and positive non-square `d`.
fn sign_of_sum(s: i128, t: i128, d: i64) -> i8 {
    let ss = s.signum() as i8;
    let ts = t.signum() as i8;
    if ss == ts || ts == 0 {
        return ss;
    }
    if ss == 0 {
        return ts;
    }
    match (s * s).cmp(&(t * t * d as i128)) {
        Ordering::Greater => ss,
        _ => ts,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCharData {
    pub valuation: u32,
    pub value: i8,
    pub conductor_exponent: u32,
}

/// The quadratic character of `F` with kernel field `F(sqrt beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeQuadChar {
    pub field: RealQuadField,
    pub beta: QuadInt,
    pub arch_signs: [i8; 2],
    pub conductor_norm: u64,
}

impl HeckeQuadChar {
    pub fn new(field: RealQuadField, beta: QuadInt) -> Result<Self> {
        if beta.is_zero() {
            return Err(Error::InvalidInput("beta must be nonzero".into()));
        }
        let conductor_norm = relative_conductor_norm_of(&field, beta)?;
        Ok(HeckeQuadChar { field, beta, arch_signs: field.signs(beta), conductor_norm })
    }

    /// The genus character attached to `D_F = D1 D2`, represented by `beta = D1`.
    pub fn genus(field: RealQuadField, d1: i64) -> Result<Self> {
        HeckeQuadChar::new(field, QuadInt::rational(d1 as i128))
    }

    pub fn value(&self, prime: &PrimeOfF) -> i8 {
        hecke_char_value(self, prime)
    }

    /// Character attached to `beta * other.beta`.
    pub fn product(&self, other: &HeckeQuadChar) -> Result<HeckeQuadChar> {
        HeckeQuadChar::new(self.field, self.field.mul(self.beta, other.beta))
    }

    /// Whether both betas define the same character.
    pub fn same_as(&self, other: &HeckeQuadChar) -> bool {
        self.field == other.field && self.field.is_square(self.field.mul(self.beta, other.beta))
    }

    /// Primes of `F` where the character ramifies, with conductor exponents.
    pub fn ramified_primes(&self) -> Result<Vec<(PrimeOfF, u32)>> {
        let f = &self.field;
        let mut ps = arith::prime_divisors(f.norm(self.beta).unsigned_abs() as u64);
        if !ps.contains(&2) {
            ps.push(2);
        }
        ps.sort();
        let mut out = Vec::new();
        for p in ps {
            for q in f.primes_above(p) {
                let ld = f.local_data(self.beta, &q);
                if ld.conductor_exponent > 0 {
                    out.push((q, ld.conductor_exponent));
                }
            }
        }
        Ok(out)
    }
}

pub fn splitting_type(f: &RealQuadField, p: u64) -> PrimeOfF {
    f.splitting_type(p)
}

pub fn hecke_char_value(delta: &HeckeQuadChar, prime: &PrimeOfF) -> i8 {
    let f = &delta.field;
    let p = prime.under;
    let n = f.norm(delta.beta);
    if p != 2 && n % p as i128 != 0 {
        return f.residue_symbol(delta.beta, prime);
    }
    f.local_data(delta.beta, prime).value
}

fn relative_conductor_norm_of(f: &RealQuadField, beta: QuadInt) -> Result<u64> {
    let mut ps = arith::prime_divisors(f.norm(beta).unsigned_abs() as u64);
    if !ps.contains(&2) {
        ps.push(2);
    }
    let mut n = 1u64;
    for p in ps {
        for q in f.primes_above(p) {
            let e = f.local_data(beta, &q).conductor_exponent;
            n *= q.norm.pow(e);
        }
    }
    Ok(n)
}

pub fn relative_conductor_norm(delta: &HeckeQuadChar) -> u64 {
    delta.conductor_norm
}

/// Conditions for [`search_delta`]. `split_values[l]` is required at every prime
/// above `l`, and likewise for `inert_values`.
#[derive(Clone, Debug, Default)]
pub struct DeltaConstraints {
    pub arch: i8,
    pub split_values: BTreeMap<u64, i8>,
    pub inert_values: BTreeMap<u64, i8>,
    pub coprime_to: u64,
}

impl DeltaConstraints {
    pub fn accepts(&self, delta: &HeckeQuadChar) -> bool {
        let f = &delta.field;
        if delta.arch_signs != [self.arch, self.arch] {
            return false;
        }
        if arith::gcd_u64(delta.conductor_norm, self.coprime_to.max(1)) != 1 {
            return false;
        }
        self.split_values.iter().chain(self.inert_values.iter()).all(|(&l, &v)| {
            f.primes_above(l).iter().all(|q| hecke_char_value(delta, q) == v)
        })
    }
}

fn is_squarefree_elt(f: &RealQuadField, beta: QuadInt) -> bool {
    match f.factor(beta) {
        Ok(fs) => fs.iter().all(|&(_, v)| v <= 1),
        Err(_) => false,
    }
}

/// Characters `F(sqrt beta)` with `beta = x + y w`, `|x|, |y| <= height`, meeting
/// `constraints`, one per character, ordered by `(conductor_norm, |x| + |y|)`.
pub fn search_delta(
    f: &RealQuadField,
    constraints: &DeltaConstraints,
    height: i64,
) -> Vec<HeckeQuadChar> {
    let mut cands = Vec::new();
    let h = height as i128;
    for x in -h..=h {
        for y in -h..=h {
            let beta = QuadInt::new(x, y);
            if beta.is_zero() || f.signs(beta) != [constraints.arch, constraints.arch] {
                continue;
            }
            if !is_squarefree_elt(f, beta) {
                continue;
            }
            let Ok(delta) = HeckeQuadChar::new(*f, beta) else { continue };
            if constraints.accepts(&delta) {
                cands.push(delta);
            }
        }
    }
    cands.sort_by_key(|d| {
        (d.conductor_norm, d.beta.x.abs() + d.beta.y.abs(), d.beta.x.abs(), d.beta.y, d.beta.x)
    });
    let mut out: Vec<HeckeQuadChar> = Vec::new();
    for d in cands {
        if !out.iter().any(|o| o.conductor_norm == d.conductor_norm && o.same_as(&d)) {
            out.push(d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_is_multiplicative() {
        let f = RealQuadField::new(21).unwrap();
        let a = QuadInt::new(3, -2);
        let b = QuadInt::new(-7, 5);
        assert_eq!(f.norm(f.mul(a, b)), f.norm(a) * f.norm(b));
    }

    #[test]
    fn squares_detected() {
        let f = RealQuadField::new(13).unwrap();
        let a = QuadInt::new(-4, 3);
        assert!(f.is_square(f.mul(a, a)));
        assert!(!f.is_square(QuadInt::new(2, 0)));
    }
}
