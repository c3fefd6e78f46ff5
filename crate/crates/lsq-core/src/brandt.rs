//! Definite quaternion algebras over Q, Eichler orders, right ideal classes and
//! Brandt matrices.
//!
//! Orders and ideals are stored as integer row bases. Inside an order all
//! arithmetic runs on its own coordinates with integer structure constants.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, inv_mod, primes_up_to};
use crate::ellcurve::EllipticCurveQ;
use crate::linalg::{self, QMat};
use crate::squareclass::{squarefree_part, Rational, SquareClass};
use crate::{Error, Result};

/// Largest `M * Q` accepted by default.
pub const DEFAULT_BOUND: u64 = 2000;
pub const DEFAULT_MATCH_BOUND: u64 = 50;
/// Bumped whenever the serialized layout of [`IdealClassSet`] changes.
pub const FORMAT_VERSION: u32 = 1;
const INVARIANT_TERMS: u64 = 6;

type V4 = [i128; 4];

/// Hilbert symbol `(a, b)_p` at a finite prime `p`.
pub fn hilbert_symbol(a: i64, b: i64, p: u64) -> i8 {
    let (mut u, mut v) = (a as i128, b as i128);
    let pi = p as i128;
    let va = arith::valuation(u, p);
    let vb = arith::valuation(v, p);
    u /= pi.pow(va);
    v /= pi.pow(vb);
    if p == 2 {
        let eps = |x: i128| if x.rem_euclid(4) == 3 { 1 } else { 0 };
        let omega = |x: i128| if matches!(x.rem_euclid(8), 3 | 5) { 1 } else { 0 };
        let e = eps(u) * eps(v) + va as i128 * omega(v) + vb as i128 * omega(u);
        return if e % 2 == 0 { 1 } else { -1 };
    }
    let mut s = 1i8;
    if va % 2 == 1 && vb % 2 == 1 && p % 4 == 3 {
        s = -s;
    }
    if vb % 2 == 1 {
        s *= arith::legendre(u, p);
    }
    if va % 2 == 1 {
        s *= arith::legendre(v, p);
    }
    s
}

/// Finite primes where `(a, b)_Q` ramifies.
pub fn ramified_primes(a: i64, b: i64) -> Vec<u64> {
    let mut ps = arith::prime_divisors(2 * (a as i128 * b as i128).unsigned_abs() as u64);
    ps.retain(|&p| hilbert_symbol(a, b, p) == -1);
    ps
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebraQ {
    pub disc: u64,
    /// `i^2 = a`, `j^2 = b`, `ij = -ji = k`.
    pub a: i64,
    pub b: i64,
}

fn is_odd_squarefree(q: u64) -> bool {
    q >= 2 && arith::is_squarefree(q) && arith::prime_divisors(q).len() % 2 == 1
}

pub fn build_algebra(q: u64) -> Result<QuaternionAlgebraQ> {
    if !is_odd_squarefree(q) {
        return Err(Error::NotOddSquarefree(q));
    }
    let target = arith::prime_divisors(q);
    let mut best: Option<((u64, i64, i64), (i64, i64))> = None;
    // prefer pairs whose extra odd primes are small, since the maximal order is
    // found by searching (1/p)O / O at those primes
    for b in 1..=(4 * q as i64 + 64) {
        if !arith::is_squarefree(b as u64) {
            continue;
        }
        for a in 1..=b.min(64) {
            if !arith::is_squarefree(a as u64) {
                continue;
            }
            if ramified_primes(-a, -b) != target {
                continue;
            }
            let extra = arith::prime_divisors((a * b) as u64)
                .into_iter()
                .filter(|&p| p != 2 && q % p != 0)
                .max()
                .unwrap_or(0);
            let key = (extra, b, a);
            if best.map_or(true, |(k, _)| key < k) {
                best = Some((key, (-a, -b)));
            }
        }
        if let Some(((0, _, _), _)) = best {
            break;
        }
    }
    let (_, (a, b)) = best.ok_or_else(|| Error::InvalidInput(format!("no algebra found for {q}")))?;
    Ok(QuaternionAlgebraQ { disc: q, a, b })
}

impl QuaternionAlgebraQ {
    fn mul(&self, x: &V4, y: &V4) -> V4 {
        let (a, b) = (self.a as i128, self.b as i128);
        [
            x[0] * y[0] + a * x[1] * y[1] + b * x[2] * y[2] - a * b * x[3] * y[3],
            x[0] * y[1] + x[1] * y[0] - b * x[2] * y[3] + b * x[3] * y[2],
            x[0] * y[2] + x[2] * y[0] + a * x[1] * y[3] - a * x[3] * y[1],
            x[0] * y[3] + x[3] * y[0] + x[1] * y[2] - x[2] * y[1],
        ]
    }

    fn nrd(&self, x: &V4) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3]
    }
}

/// Hermite basis of the Z-span of `rows` (nonzero rows only).
fn hnf(rows: &[V4]) -> Vec<V4> {
    let z: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    linalg::hnf_rows(&z, 4)
        .iter()
        .map(|r| core::array::from_fn(|k| r[k].to_i128().expect("overflow")))
        .collect()
}

/// Hermite basis of the lattice spanned by `rows` and `d Z^4`.
fn hnf_mod(rows: &[V4], d: i128) -> Vec<V4> {
    let d = d.abs();
    let mut work: Vec<V4> = rows.iter().map(|r| r.map(|x| x.rem_euclid(d))).collect();
    let mut piv: Vec<V4> = Vec::with_capacity(4);
    for c in 0..4 {
        let mut de = [0i128; 4];
        de[c] = d;
        work.push(de);
        work.retain(|r| r.iter().any(|&x| x != 0));
        loop {
            let Some(b) = (0..work.len()).filter(|&i| work[i][c] != 0).min_by_key(|&i| work[i][c].abs()) else {
                unreachable!("column always has d")
            };
            let pr = work[b];
            let mut done = true;
            for (i, r) in work.iter_mut().enumerate() {
                if i == b || r[c] == 0 {
                    continue;
                }
                let f = r[c].div_euclid(pr[c]);
                for k in c..4 {
                    r[k] = (r[k] - f * pr[k]).rem_euclid(d);
                }
                if r[c] != 0 {
                    done = false;
                }
            }
            if done {
                let mut p = work.swap_remove(b);
                if p[c] < 0 {
                    p = p.map(|x| -x);
                }
                let g = p[c];
                // (d / g) p - d e_c has zero in column c
                let mut extra = p.map(|x| (x * (d / g)).rem_euclid(d));
                extra[c] = 0;
                work.push(extra);
                work.retain(|r| r.iter().any(|&x| x != 0));
                piv.push(p);
                break;
            }
        }
    }
    for j in 0..4 {
        for k in j + 1..4 {
            piv[j][k] = piv[j][k].rem_euclid(d);
        }
    }
    for j in 0..4 {
        for i in 0..j {
            let f = piv[i][j].div_euclid(piv[j][j]);
            if f != 0 {
                let pj = piv[j];
                for k in j..4 {
                    piv[i][k] -= f * pj[k];
                }
            }
        }
    }
    piv
}

fn det4(rows: &[V4]) -> i128 {
    let z: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    linalg::det(&z).to_i128().expect("determinant overflow")
}

fn to_qmat(rows: &[V4], den: i128) -> QMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigRational::new(x.into(), den.into())).collect())
        .collect()
}

fn rat_to_i128(x: &BigRational) -> i128 {
    assert!(x.is_integer(), "expected an integer, got {x}");
    x.to_integer().to_i128().expect("integer overflow")
}

/// Rows over a common denominator, in the standard basis `1, i, j, k`.
#[derive(Clone, Debug, PartialEq)]
struct RatLattice {
    rows: Vec<V4>,
    den: i128,
}

impl RatLattice {
    fn normalized(rows: &[V4], den: i128) -> Self {
        let rows = hnf(rows);
        let mut g = den;
        for r in &rows {
            for &x in r {
                g = gcd(g, x);
            }
        }
        RatLattice { rows: rows.iter().map(|r| r.map(|x| x / g)).collect(), den: den / g }
    }

    /// Covolume relative to `Z^4`, as a rational.
    fn covolume(&self) -> BigRational {
        BigRational::new(det4(&self.rows).abs().into(), BigInt::from(self.den).pow(4))
    }
}

fn reduced_disc(alg: &QuaternionAlgebraQ, l: &RatLattice) -> Option<i128> {
    let d2 = l.den * l.den;
    let mut t = vec![vec![BigInt::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let tr = 2 * alg.mul(&l.rows[i], &l.rows[j])[0];
            if tr % d2 != 0 {
                return None;
            }
            t[i][j] = BigInt::from(tr / d2);
        }
    }
    let d = linalg::det(&t).abs().to_u128()?;
    let r = arith::isqrt(d);
    (r * r == d).then_some(r as i128)
}

/// Ring generated by `o` and `x / xden`, if that is an order whose index over `o` divides `limit`.
fn ring_closure(alg: &QuaternionAlgebraQ, o: &RatLattice, x: V4, xden: i128, limit: i128) -> Option<RatLattice> {
    let den = o.den.lcm(&xden);
    let mut rows: Vec<V4> = o.rows.iter().map(|r| r.map(|v| v * (den / o.den))).collect();
    rows.push(x.map(|v| v * (den / xden)));
    let mut cur = RatLattice::normalized(&rows, den);
    let base = o.covolume();
    loop {
        let d = cur.den;
        let mut rows: Vec<V4> = cur.rows.iter().map(|r| r.map(|v| v * d)).collect();
        for u in &cur.rows {
            for v in &cur.rows {
                rows.push(alg.mul(u, v));
            }
        }
        let next = RatLattice::normalized(&rows, d * d);
        let index = &base / next.covolume();
        if !index.is_integer() || (limit % rat_to_i128(&index)) != 0 {
            return None;
        }
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
}

fn maximal_order(alg: &QuaternionAlgebraQ) -> Result<RatLattice> {
    let q = alg.disc as i128;
    let id: Vec<V4> = (0..4).map(|i| core::array::from_fn(|k| (k == i) as i128)).collect();
    let mut o = RatLattice { rows: id, den: 1 };
    'outer: loop {
        let d = reduced_disc(alg, &o).ok_or_else(|| Error::InvalidInput("not an order".into()))?;
        if d == q {
            return Ok(o);
        }
        let extra = d / q;
        for p in arith::prime_divisors(extra as u64) {
            let pi = p as i128;
            let total = pi.pow(4);
            for idx in 1..total {
                let mut c = [0i128; 4];
                let mut t = idx;
                for ck in c.iter_mut() {
                    *ck = t % pi;
                    t /= pi;
                }
                let mut x = [0i128; 4];
                for (k, ck) in c.iter().enumerate() {
                    for l in 0..4 {
                        x[l] += ck * o.rows[k][l];
                    }
                }
                let xden = o.den * pi;
                // integral: trd and nrd in Z
                if (2 * x[0]) % xden != 0 || alg.nrd(&x) % (xden * xden) != 0 {
                    continue;
                }
                if let Some(l) = ring_closure(alg, &o, x, xden, extra) {
                    if l != o {
                        o = l;
                        continue 'outer;
                    }
                }
            }
        }
        return Err(Error::InvalidInput(format!("could not enlarge order of discriminant {d}")));
    }
}

/// An order given by a Z-basis, with the multiplication table on its own coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EichlerOrderQ {
    pub algebra: QuaternionAlgebraQ,
    pub level: u64,
    /// Basis rows in the standard basis `1, i, j, k`, over `denom`.
    pub basis: Vec<V4>,
    pub denom: i128,
    mult: Vec<Vec<V4>>,
    conj: Vec<V4>,
    /// `trd(e_i conj(e_j))`; the reduced norm is half the quadratic form.
    gram: Vec<V4>,
}

impl EichlerOrderQ {
    fn from_lattice(alg: QuaternionAlgebraQ, level: u64, l: &RatLattice) -> Self {
        let b = to_qmat(&l.rows, l.den);
        let inv = linalg::inverse_q(&b).expect("degenerate lattice");
        let coords = |v: &V4, den: i128| -> V4 {
            let row: QMat = vec![v.iter().map(|&x| BigRational::new(x.into(), den.into())).collect()];
            let c = linalg::mul_q(&row, &inv);
            core::array::from_fn(|k| rat_to_i128(&c[0][k]))
        };
        let d2 = l.den * l.den;
        let mut mult = vec![vec![[0i128; 4]; 4]; 4];
        let mut gram = vec![[0i128; 4]; 4];
        let mut conj = vec![[0i128; 4]; 4];
        for i in 0..4 {
            let ci = [l.rows[i][0], -l.rows[i][1], -l.rows[i][2], -l.rows[i][3]];
            conj[i] = coords(&ci, l.den);
            for j in 0..4 {
                mult[i][j] = coords(&alg.mul(&l.rows[i], &l.rows[j]), d2);
                let cj = [l.rows[j][0], -l.rows[j][1], -l.rows[j][2], -l.rows[j][3]];
                let t = 2 * alg.mul(&l.rows[i], &cj)[0];
                assert!(t % d2 == 0);
                gram[i][j] = t / d2;
            }
        }
        EichlerOrderQ { algebra: alg, level, basis: l.rows.clone(), denom: l.den, mult, conj, gram }
    }

    pub fn mul(&self, x: &V4, y: &V4) -> V4 {
        let mut z = [0i128; 4];
        for i in 0..4 {
            if x[i] == 0 {
                continue;
            }
            for j in 0..4 {
                if y[j] == 0 {
                    continue;
                }
                let c = x[i] * y[j];
                for k in 0..4 {
                    z[k] += c * self.mult[i][j][k];
                }
            }
        }
        z
    }

    pub fn conj(&self, x: &V4) -> V4 {
        let mut z = [0i128; 4];
        for i in 0..4 {
            for k in 0..4 {
                z[k] += x[i] * self.conj[i][k];
            }
        }
        z
    }

    fn bilinear(&self, x: &V4, y: &V4) -> i128 {
        let mut s = 0;
        for i in 0..4 {
            for j in 0..4 {
                s += x[i] * self.gram[i][j] * y[j];
            }
        }
        s
    }

    pub fn nrd(&self, x: &V4) -> i128 {
        self.bilinear(x, x) / 2
    }

    /// Reduced discriminant, from the determinant of the trace form.
    pub fn reduced_discriminant(&self) -> u64 {
        let alg = &self.algebra;
        let l = RatLattice { rows: self.basis.clone(), den: self.denom };
        reduced_disc(alg, &l).expect("order") as u64
    }

    /// Sublattice given by rows in this order's coordinates, as a lattice in the algebra.
    fn sublattice(&self, rows: &[V4]) -> RatLattice {
        let std: Vec<V4> = rows
            .iter()
            .map(|r| {
                let mut v = [0i128; 4];
                for i in 0..4 {
                    for k in 0..4 {
                        v[k] += r[i] * self.basis[i][k];
                    }
                }
                v
            })
            .collect();
        RatLattice::normalized(&std, self.denom)
    }
}

/// `{y in Z^4 : a . y = 0 mod d}` for every `(rows, d)` condition.
fn solve_congruences(conds: &[(Vec<V4>, i128)]) -> Vec<V4> {
    let total: usize = conds.iter().map(|c| c.0.len()).sum();
    let cols = 4 + total;
    let mut m = Vec::new();
    let mut off = 4;
    for (rows, d) in conds {
        for r in rows {
            let mut row = vec![BigInt::zero(); cols];
            for k in 0..4 {
                row[k] = BigInt::from(r[k]);
            }
            row[off] = BigInt::from(*d);
            off += 1;
            m.push(row);
        }
    }
    let ker = linalg::int_kernel(&m, cols);
    let proj: Vec<V4> = ker
        .iter()
        .map(|v| core::array::from_fn(|k| v[k].to_i128().expect("overflow")))
        .collect();
    hnf(&proj)
}

/// Rational inverse of a row basis, scaled to an integer adjugate with its determinant.
fn adjugate(rows: &[V4]) -> (Vec<V4>, i128) {
    let d = det4(rows);
    let inv = linalg::inverse_q(&to_qmat(rows, 1)).expect("singular");
    let adj = inv
        .iter()
        .map(|r| core::array::from_fn(|k| rat_to_i128(&(&r[k] * BigRational::from_integer(d.into())))))
        .collect();
    (adj, d)
}

fn row_times(v: &V4, m: &[V4]) -> V4 {
    let mut z = [0i128; 4];
    for i in 0..4 {
        for k in 0..4 {
            z[k] += v[i] * m[i][k];
        }
    }
    z
}

/// Conditions for `{y : I y in I}` on a left ideal `I` of `o`.
fn right_order_conditions(o: &EichlerOrderQ, ideal: &[V4]) -> (Vec<V4>, i128) {
    let (adj, d) = adjugate(ideal);
    let mut rows = Vec::new();
    for b in ideal {
        let imgs: Vec<V4> = (0..4)
            .map(|k| {
                let ek: V4 = core::array::from_fn(|l| (l == k) as i128);
                row_times(&o.mul(b, &ek), &adj)
            })
            .collect();
        for c in 0..4 {
            rows.push(core::array::from_fn(|k| imgs[k][c]));
        }
    }
    (rows, d.abs())
}

fn unit(k: usize) -> V4 {
    core::array::from_fn(|l| (l == k) as i128)
}

/// Primitive element of `o` whose reduced norm is divisible by `p^e`.
fn norm_divisible_element(o: &EichlerOrderQ, p: u64, e: u32) -> V4 {
    let pi = p as i128;
    let mut alpha = [0i128; 4];
    'search: for idx in 1..pi.pow(4) {
        let mut t = idx;
        for c in alpha.iter_mut() {
            *c = t % pi;
            t /= pi;
        }
        if o.nrd(&alpha).rem_euclid(pi) == 0 {
            break 'search;
        }
    }
    let mut pk = pi;
    for _ in 1..e {
        let n = o.nrd(&alpha);
        debug_assert!(n % pk == 0);
        let lin: V4 = core::array::from_fn(|l| o.bilinear(&alpha, &unit(l)));
        let l = (0..4).find(|&l| lin[l].rem_euclid(pi) != 0).expect("degenerate norm form mod p");
        let c = (-(n / pk) * inv_mod(lin[l].rem_euclid(pi), pi).unwrap()).rem_euclid(pi);
        alpha[l] += pk * c;
        pk *= pi;
    }
    alpha
}

/// An Eichler order of level `m` in the definite algebra ramified at the primes of `q`.
pub fn eichler_order(q: u64, m: u64) -> Result<EichlerOrderQ> {
    let alg = build_algebra(q)?;
    if m == 0 || arith::gcd_u64(q, m) != 1 {
        return Err(Error::NotCoprime { a: q as i64, b: m as i64 });
    }
    let omax = EichlerOrderQ::from_lattice(alg, 1, &maximal_order(&alg)?);
    if m == 1 {
        return Ok(omax);
    }
    let mut conds = Vec::new();
    for (p, e) in arith::factor(m as u128)? {
        let pe = (p as i128).pow(e);
        let alpha = norm_divisible_element(&omax, p, e);
        let mut rows: Vec<V4> = (0..4).map(|k| omax.mul(&unit(k), &alpha)).collect();
        rows.extend((0..4).map(|k| unit(k).map(|x| x * pe)));
        let ideal = hnf(&rows);
        conds.push(right_order_conditions(&omax, &ideal));
    }
    let r = solve_congruences(&conds);
    let lat = omax.sublattice(&r);
    let order = EichlerOrderQ::from_lattice(alg, m, &lat);
    if order.reduced_discriminant() != q * m {
        return Err(Error::InvalidInput(format!("Eichler order construction failed for ({q}, {m})")));
    }
    Ok(order)
}

/// Mass `sum 1/e_b` of the Eichler order of level `m` in the algebra of discriminant `q`.
pub fn mass_formula(q: u64, m: u64) -> Result<Rational> {
    let mut num: i128 = 1;
    for p in arith::prime_divisors(q) {
        num *= p as i128 - 1;
    }
    for (p, e) in arith::factor(m as u128)? {
        num *= (p as i128).pow(e - 1) * (p as i128 + 1);
    }
    Ok(Rational::new(num, 12))
}

/// Exact Gram-Schmidt data `(mu, |b*|^2)` of a Gram matrix.
fn gso_exact(g: &[[i128; 4]; 4]) -> ([[BigRational; 4]; 4], [BigRational; 4]) {
    let mut mu: [[BigRational; 4]; 4] = Default::default();
    let mut bs: [BigRational; 4] = Default::default();
    for i in 0..4 {
        for j in 0..i {
            let mut s = BigRational::from_integer(g[i][j].into());
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &bs[k];
            }
            mu[i][j] = s / &bs[j];
        }
        let mut s = BigRational::from_integer(g[i][i].into());
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &bs[k];
        }
        bs[i] = s;
    }
    (mu, bs)
}

/// `b_k -= r b_j` on a Gram matrix; `None` on overflow.
fn reduce_step(g: &mut [[i128; 4]; 4], k: usize, j: usize, r: i128) -> Option<()> {
    let mut out = *g;
    for l in 0..4 {
        if l != k {
            out[k][l] = g[k][l].checked_sub(r.checked_mul(g[j][l])?)?;
        }
    }
    let t = r.checked_mul(r)?.checked_mul(g[j][j])?;
    out[k][k] = g[k][k].checked_sub(r.checked_mul(2 * g[k][j])?)?.checked_add(t)?;
    for l in 0..4 {
        out[l][k] = out[k][l];
    }
    *g = out;
    Some(())
}

/// Size reduction of each vector against each other one, exact; every step
/// strictly shortens a vector.
fn pair_reduce(g: &mut [[i128; 4]; 4]) -> Option<()> {
    loop {
        let mut changed = false;
        for i in 0..4 {
            for j in 0..4 {
                if i == j || 2 * g[i][j].abs() <= g[j][j] {
                    continue;
                }
                let r = (2 * g[i][j] + g[j][j]).div_euclid(2 * g[j][j]);
                reduce_step(g, i, j, r)?;
                changed = true;
            }
        }
        if !changed {
            return Some(());
        }
    }
}

fn lll_gram_float(g: &mut [[i128; 4]; 4]) -> Option<()> {
    let n = 4;
    let gso = |g: &[[i128; 4]; 4]| {
        let mut mu = [[0f64; 4]; 4];
        let mut bs = [0f64; 4];
        for i in 0..n {
            for j in 0..i {
                let mut s = g[i][j] as f64;
                for k in 0..j {
                    s -= mu[j][k] * mu[i][k] * bs[k];
                }
                mu[i][j] = s / bs[j];
            }
            let mut s = g[i][i] as f64;
            for k in 0..i {
                s -= mu[i][k] * mu[i][k] * bs[k];
            }
            bs[i] = s;
        }
        (mu, bs)
    };
    let mut k = 1;
    let mut steps = 0;
    while k < n {
        steps += 1;
        if steps > 1000 {
            return None;
        }
        for j in (0..k).rev() {
            let (mu, _) = gso(g);
            let r = libm::round(mu[k][j]);
            if !r.is_finite() || r.abs() > 1e15 {
                return None;
            }
            if r != 0.0 {
                reduce_step(g, k, j, r as i128)?;
            }
        }
        let (mu, bs) = gso(g);
        if bs.iter().any(|&b| !(b > 0.0)) {
            return None;
        }
        if bs[k] < (0.75 - mu[k][k - 1] * mu[k][k - 1]) * bs[k - 1] {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    Some(())
}

/// LLL reduction of a positive definite Gram matrix, in place. Floating point
/// Gram-Schmidt after an exact pre-reduction, with an exact fallback.
fn lll_gram(g: &mut [[i128; 4]; 4]) {
    let orig = *g;
    let mut h = orig;
    if pair_reduce(&mut h).is_some() && lll_gram_float(&mut h).is_some() {
        *g = h;
        return;
    }
    *g = orig;
    lll_gram_exact(g);
}

/// LLL reduction (`delta = 3/4`) in exact rational arithmetic.
fn lll_gram_exact(g: &mut [[i128; 4]; 4]) {
    let n = 4;
    let delta = BigRational::new(3.into(), 4.into());
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gso_exact(g);
            let r = mu[k][j].round().to_integer().to_i128().expect("overflow");
            if r != 0 {
                // b_k -= r b_j
                let gkj = g[k][j];
                let gjj = g[j][j];
                for l in 0..n {
                    if l != k {
                        g[k][l] -= r * g[j][l];
                    }
                }
                g[k][k] += -2 * r * gkj + r * r * gjj;
                for l in 0..n {
                    g[l][k] = g[k][l];
                }
            }
        }
        let (mu, bs) = gso_exact(g);
        if bs[k] < (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bs[k - 1] {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
}

/// Representation numbers `#{x : x^T g x / 2 = n}` for `n <= nmax`.
fn theta_counts(g: &[[i128; 4]; 4], nmax: u64) -> Vec<u64> {
    let mut g = *g;
    lll_gram(&mut g);
    let n = 4;
    let mut q = [[0f64; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = g[i][j] as f64 / 2.0;
        }
    }
    // q[i][i] becomes the square coefficient, q[i][j] (j > i) the shift
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    let mut counts = vec![0u64; nmax as usize + 1];
    let bound = nmax as f64 + 0.5;
    let mut x = [0i128; 4];
    fn rec(
        i: usize,
        rem: f64,
        q: &[[f64; 4]; 4],
        g: &[[i128; 4]; 4],
        x: &mut [i128; 4],
        counts: &mut Vec<u64>,
    ) {
        let mut c = 0.0;
        for j in i + 1..4 {
            c -= q[i][j] * x[j] as f64;
        }
        let r = libm::sqrt((rem / q[i][i]).max(0.0));
        let lo = libm::ceil(c - r - 1e-9) as i128;
        let hi = libm::floor(c + r + 1e-9) as i128;
        for v in lo..=hi {
            x[i] = v;
            let t = v as f64 - c;
            let rem2 = rem - q[i][i] * t * t;
            if rem2 < -1e-6 {
                continue;
            }
            if i == 0 {
                let mut s = 0i128;
                for a in 0..4 {
                    for b in 0..4 {
                        s += x[a] * g[a][b] * x[b];
                    }
                }
                let val = (s / 2) as usize;
                if val < counts.len() {
                    counts[val] += 1;
                }
            } else {
                rec(i - 1, rem2, q, g, x, counts);
            }
        }
        x[i] = 0;
    }
    rec(n - 1, bound, &q, &g, &mut x, &mut counts);
    counts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RightIdeal {
    /// Basis rows in the order's coordinates.
    pub basis: Vec<V4>,
    pub norm: i128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealClassSet {
    pub format_version: u32,
    pub disc: u64,
    pub level: u64,
    pub order: EichlerOrderQ,
    /// Auxiliary prime used for the neighbor search.
    pub neighbor_prime: u64,
    pub classes: Vec<RightIdeal>,
    /// `e_b`: units of the left order modulo `{+-1}`.
    pub weights: Vec<u32>,
}

/// Scaled Gram matrix of `I J-bar`, whose norm form is `nrd / (N(I) N(J))`.
fn hom_gram(o: &EichlerOrderQ, a: &RightIdeal, b: &RightIdeal) -> [[i128; 4]; 4] {
    let mut rows = Vec::with_capacity(16);
    for x in &a.basis {
        for y in &b.basis {
            rows.push(o.mul(x, &o.conj(y)));
        }
    }
    let s = a.norm * b.norm;
    let l = hnf_mod(&rows, s);
    let mut g = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let v = o.bilinear(&l[i], &l[j]);
            debug_assert!(v % s == 0);
            g[i][j] = v / s;
        }
    }
    g
}

fn is_isomorphic(o: &EichlerOrderQ, a: &RightIdeal, b: &RightIdeal) -> bool {
    theta_counts(&hom_gram(o, a, b), 1)[1] > 0
}

/// The `p + 1` right ideals `x R + p I` of index `p^2` in `I`.
fn neighbors(o: &EichlerOrderQ, ideal: &RightIdeal, p: u64) -> Vec<RightIdeal> {
    let pi = p as i128;
    let base = det4(&ideal.basis).abs();
    let mut out: Vec<RightIdeal> = Vec::new();
    for idx in 1..pi.pow(4) {
        let mut t = idx;
        let mut x = [0i128; 4];
        for b in &ideal.basis {
            let c = t % pi;
            t /= pi;
            for k in 0..4 {
                x[k] += c * b[k];
            }
        }
        let mut rows: Vec<V4> = (0..4).map(|k| o.mul(&x, &unit(k))).collect();
        rows.extend(ideal.basis.iter().map(|b| b.map(|v| v * pi)));
        let h = hnf_mod(&rows, ideal.norm * pi);
        if h.len() != 4 || det4(&h).abs() != base * pi * pi {
            continue;
        }
        if !out.iter().any(|j| j.basis == h) {
            out.push(RightIdeal { basis: h, norm: ideal.norm * pi });
        }
        if out.len() as u64 == p + 1 {
            break;
        }
    }
    out
}

pub fn ideal_classes(order: &EichlerOrderQ) -> Result<IdealClassSet> {
    ideal_classes_with(order, DEFAULT_BOUND)
}

pub fn ideal_classes_with(order: &EichlerOrderQ, bound: u64) -> Result<IdealClassSet> {
    let (q, m) = (order.algebra.disc, order.level);
    if q * m > bound {
        return Err(Error::BoundExceeded(format!("M*Q = {} > {bound}", q * m)));
    }
    let target = mass_formula(q, m)?;
    let p0 = (2..).find(|&p| arith::is_prime(p) && (q * m) % p != 0).unwrap();
    let start = RightIdeal { basis: (0..4).map(unit).collect(), norm: 1 };
    // theta series of the left order: equal for isomorphic ideals
    let invariant = |j: &RightIdeal| theta_counts(&hom_gram(order, j, j), INVARIANT_TERMS);
    let inv0 = invariant(&start);
    let mut total = Rational::new(2, inv0[1] as i128);
    let mut weights = vec![(inv0[1] / 2) as u32];
    let mut invariants = vec![inv0];
    let mut classes = vec![start];
    let mut idx = 0;
    while total < target {
        if idx >= classes.len() {
            return Err(Error::Inconclusive("neighbor graph exhausted below the mass".into()));
        }
        for j in neighbors(order, &classes[idx], p0) {
            let inv = invariant(&j);
            if (0..classes.len()).any(|k| invariants[k] == inv && is_isomorphic(order, &j, &classes[k])) {
                continue;
            }
            let w = inv[1];
            total += Rational::new(2, w as i128);
            classes.push(j);
            weights.push((w / 2) as u32);
            invariants.push(inv);
            if total >= target {
                break;
            }
        }
        idx += 1;
    }
    if total != target {
        return Err(Error::Inconclusive(format!("mass {total} differs from {target}")));
    }
    Ok(IdealClassSet {
        format_version: FORMAT_VERSION,
        disc: q,
        level: m,
        order: order.clone(),
        neighbor_prime: p0,
        classes,
        weights,
    })
}

impl IdealClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.weights.iter().map(|&e| Rational::new(1, e as i128)).sum()
    }

    /// Representation numbers of every `Hom` lattice up to `nmax`, indexed `[i][j][n]`.
    pub fn theta_table(&self, nmax: u64) -> Vec<Vec<Vec<u64>>> {
        let h = self.len();
        let mut t = vec![vec![Vec::new(); h]; h];
        for i in 0..h {
            for j in i..h {
                let c = theta_counts(&hom_gram(&self.order, &self.classes[i], &self.classes[j]), nmax);
                t[j][i] = c.clone();
                t[i][j] = c;
            }
        }
        t
    }

    fn matrix_from_theta(&self, theta: &[Vec<Vec<u64>>], n: u64) -> Vec<Vec<i64>> {
        let h = self.len();
        (0..h)
            .map(|i| {
                (0..h)
                    .map(|j| {
                        let w = 2 * self.weights[j] as u64;
                        let c = theta[i][j][n as usize];
                        debug_assert!(c % w == 0);
                        (c / w) as i64
                    })
                    .collect()
            })
            .collect()
    }

    fn check_coprime(&self, n: u64) -> Result<()> {
        if n == 0 || arith::gcd_u64(n, self.disc * self.level) != 1 {
            return Err(Error::NotCoprime { a: n as i64, b: (self.disc * self.level) as i64 });
        }
        Ok(())
    }

    /// Brandt matrices `B(n)` for every `n <= nmax` prime to `M Q`.
    pub fn brandt_matrices(&self, nmax: u64) -> BTreeMap<u64, Vec<Vec<i64>>> {
        let theta = self.theta_table(nmax);
        (1..=nmax)
            .filter(|&n| self.check_coprime(n).is_ok())
            .map(|n| (n, self.matrix_from_theta(&theta, n)))
            .collect()
    }
}

/// `B(n)[i][j]`: the number of index-`n` sublattices of class `i` lying in class `j`.
pub fn brandt_matrix(set: &IdealClassSet, n: u64) -> Result<Vec<Vec<i64>>> {
    set.check_coprime(n)?;
    let theta = set.theta_table(n);
    Ok(set.matrix_from_theta(&theta, n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuaternionicEigenform {
    pub values: Vec<i128>,
    pub weights: Vec<u32>,
    /// Hecke eigenvalues that were matched.
    pub ap: BTreeMap<u64, i64>,
}

pub fn eigenform_for(set: &IdealClassSet, e: &EllipticCurveQ) -> Result<QuaternionicEigenform> {
    eigenform_for_with(set, e, DEFAULT_MATCH_BOUND)
}

/// The eigenvector with `B(p) phi = a_p(E) phi` for all `p <= bound` prime to `M Q`.
pub fn eigenform_for_with(set: &IdealClassSet, e: &EllipticCurveQ, bound: u64) -> Result<QuaternionicEigenform> {
    let e = e.minimal_model()?;
    if e.conductor()? != set.disc * set.level {
        return Err(Error::NoMatch);
    }
    let h = set.len();
    let mats = set.brandt_matrices(bound);
    let mut ap = BTreeMap::new();
    let mut stack: QMat = Vec::new();
    for p in primes_up_to(bound) {
        let Some(b) = mats.get(&p) else { continue };
        let a = e.ap(p)?;
        ap.insert(p, a);
        for (i, row) in b.iter().enumerate() {
            stack.push(
                row.iter()
                    .enumerate()
                    .map(|(j, &x)| linalg::q(x - if i == j { a } else { 0 }))
                    .collect(),
            );
        }
    }
    let ker = linalg::kernel_q(&stack, h);
    match ker.len() {
        0 => return Err(Error::NoMatch),
        1 => {}
        _ => return Err(Error::Ambiguous),
    }
    let values: Vec<i128> = linalg::primitive(&ker[0]).iter().map(|x| x.to_i128().unwrap()).collect();
    let phi = QuaternionicEigenform { values, weights: set.weights.clone(), ap };
    if phi.constant_pairing() != Rational::zero() {
        return Err(Error::NotRationalEigenform("not orthogonal to constants".into()));
    }
    Ok(phi)
}

impl QuaternionicEigenform {
    /// `sum phi(b) / e_b`.
    pub fn constant_pairing(&self) -> Rational {
        self.values.iter().zip(&self.weights).map(|(&v, &e)| Rational::new(v, e as i128)).sum()
    }

    pub fn scaled(&self, c: i128) -> Self {
        QuaternionicEigenform { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }
}

/// `sum phi(b)^2 / e_b`.
pub fn petersson_norm(phi: &QuaternionicEigenform) -> Result<Rational> {
    if phi.values.iter().all(|&v| v == 0) {
        return Err(Error::ZeroForm);
    }
    Ok(phi.values.iter().zip(&phi.weights).map(|(&v, &e)| Rational::new(v * v, e as i128)).sum())
}

pub fn monodromy_pairing_class(set: &IdealClassSet, e: &EllipticCurveQ) -> Result<SquareClass> {
    squarefree_part(petersson_norm(&eigenform_for(set, e)?)?)
}

/// Checks `B(p) phi = a_p phi` for every `p <= bound` prime to `M Q`.
pub fn eigenvalues_match(set: &IdealClassSet, phi: &QuaternionicEigenform, e: &EllipticCurveQ, bound: u64) -> Result<bool> {
    let mats = set.brandt_matrices(bound);
    for p in primes_up_to(bound) {
        let Some(b) = mats.get(&p) else { continue };
        let a = e.ap(p)? as i128;
        for (i, row) in b.iter().enumerate() {
            let s: i128 = row.iter().zip(&phi.values).map(|(&x, &v)| x as i128 * v).sum();
            if s != a * phi.values[i] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
