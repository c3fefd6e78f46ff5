//! Weight-2 modular symbols for `Gamma0(N)` in the Manin-symbol presentation.
//!
//! Coordinates are taken with respect to a Z-basis of the lattice spanned by all
//! Manin symbols, so Hecke operators, the star involution and the boundary map
//! are integer matrices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, ext_gcd, gcd, primes_up_to};
use crate::characters::{fundamental_discriminants, QuadDirichletChar};
use crate::ellcurve::EllipticCurveQ;
use crate::linalg::{self, QMat, ZMat};
use crate::{Error, Result};

pub const DEFAULT_LEVEL_BOUND: u64 = 2000;
pub const DEFAULT_MATCH_BOUND: u64 = 100;

/// The projective line over `Z/N` with a lookup table.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct P1 {
    n: u64,
    table: Vec<u32>,
    reps: Vec<(u64, u64)>,
}

impl P1 {
    fn new(n: u64, order: Option<&[usize]>) -> P1 {
        let nn = n as usize;
        let units: Vec<u64> = if n == 1 { vec![0] } else { (1..n).filter(|&u| arith::gcd_u64(u, n) == 1).collect() };
        let mut table = vec![u32::MAX; nn * nn];
        let mut reps = Vec::new();
        for c in 0..n {
            for d in 0..n {
                let g = arith::gcd_u64(arith::gcd_u64(c, d), n);
                if g != 1 || table[(c * n + d) as usize] != u32::MAX {
                    continue;
                }
                let idx = reps.len() as u32;
                reps.push((c, d));
                for &u in &units {
                    let (uc, ud) = ((u * c) % n, (u * d) % n);
                    table[(uc * n + ud) as usize] = idx;
                }
            }
        }
        if let Some(order) = order {
            // order[k] is the new position of the symbol found k-th
            let mut new_reps = reps.clone();
            for (k, &pos) in order.iter().enumerate() {
                new_reps[pos] = reps[k];
            }
            for t in table.iter_mut().filter(|t| **t != u32::MAX) {
                *t = order[*t as usize] as u32;
            }
            reps = new_reps;
        }
        P1 { n, table, reps }
    }

    fn index(&self, c: i128, d: i128) -> Option<usize> {
        let n = self.n as i128;
        let (c, d) = (c.rem_euclid(n), d.rem_euclid(n));
        let t = self.table[(c * n + d) as usize];
        (t != u32::MAX).then_some(t as usize)
    }

    fn len(&self) -> usize {
        self.reps.len()
    }
}

/// Number of symbols in `P^1(Z/N)`.
pub fn p1_size(n: u64) -> u64 {
    arith::psi(n)
}

/// Heilbronn matrices of determinant `n` in Merel's form `a > b >= 0, d > c >= 0`.
fn heilbronn_merel(n: i128) -> Vec<[i128; 4]> {
    let mut out = Vec::new();
    for a in 1..=n {
        let q = n / a;
        if q * a == n {
            let d = q;
            for b in 0..a {
                out.push([a, b, 0, d]);
            }
            for c in 1..d {
                out.push([a, 0, c, d]);
            }
        }
        for d in q + 1..=n {
            let bc = a * d - n;
            for c in bc / a + 1..d {
                if bc % c == 0 {
                    out.push([a, bc / c, c, d]);
                }
            }
        }
    }
    out
}

/// A cusp `num/den` in lowest terms with `den >= 0`; `(1, 0)` is infinity.
type Cusp = (i128, i128);

fn normalize_cusp(num: i128, den: i128) -> Cusp {
    if den == 0 {
        return (1, 0);
    }
    let g = gcd(num, den);
    let (mut p, mut q) = (num / g, den / g);
    if q < 0 {
        p = -p;
        q = -q;
    }
    (p, q)
}

fn cusps_equivalent(a: Cusp, b: Cusp, n: i128) -> bool {
    let s = |c: Cusp| -> i128 {
        if c.1 == 0 {
            1
        } else if c.1 == 1 {
            0
        } else {
            arith::inv_mod(c.0.rem_euclid(c.1), c.1).unwrap()
        }
    };
    let m = gcd(a.1 * b.1, n);
    let m = if m == 0 { n } else { m };
    (s(a) * b.1 - s(b) * a.1).rem_euclid(m) == 0
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn to_i64(x: &BigRational) -> Result<i64> {
    if !x.is_integer() {
        return Err(Error::InvalidInput(format!("non-integral coordinate {x}")));
    }
    x.to_integer().to_i64().ok_or_else(|| Error::InvalidInput("coordinate overflow".into()))
}

/// Bumped whenever the serialized layout of [`ModSymSpace`] changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModSymSpace {
    level: u64,
    p1: P1,
    /// Coordinates of every Manin symbol.
    sym_coords: Vec<Vec<(u32, i64)>>,
    /// Symbols serving as free generators after the relations.
    gens: Vec<u32>,
    /// Basis of the Manin-symbol lattice in generator coordinates (columns), when not the identity.
    lambda: Option<QMat>,
    dim: usize,
    cusps: Vec<Cusp>,
    /// `cusps.len() x dim`.
    boundary: Vec<Vec<i64>>,
    /// Basis of integral cuspidal homology.
    hbasis: Vec<Vec<i64>>,
}

/// Sparse row `col -> coefficient`.
type SparseRow = BTreeMap<usize, BigRational>;

fn reduce_row(row: &mut SparseRow, pivots: &BTreeMap<usize, SparseRow>) {
    loop {
        let Some((&c, coef)) = row.iter().find(|(c, _)| pivots.contains_key(c)) else { return };
        let coef = coef.clone();
        row.remove(&c);
        for (&j, v) in &pivots[&c] {
            let e = row.entry(j).or_insert_with(BigRational::zero);
            *e += &coef * v;
            if e.is_zero() {
                row.remove(&j);
            }
        }
    }
}

impl ModSymSpace {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn cuspidal_dimension(&self) -> usize {
        self.hbasis.len()
    }

    pub fn num_cusps(&self) -> usize {
        self.cusps.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.p1.len()
    }

    pub fn cuspidal_basis(&self) -> &[Vec<i64>] {
        &self.hbasis
    }

    fn symbol(&self, c: i128, d: i128) -> Option<&[(u32, i64)]> {
        self.p1.index(c, d).map(|i| self.sym_coords[i].as_slice())
    }

    fn add_symbol(&self, acc: &mut [i64], c: i128, d: i128, mult: i64) {
        if let Some(s) = self.symbol(c, d) {
            for &(j, v) in s {
                acc[j as usize] += mult * v;
            }
        }
    }

    /// Coordinates of the path `{0, num/den}`.
    fn add_zero_to(&self, acc: &mut [i64], num: i128, den: i128, mult: i64) {
        let (num, den) = normalize_cusp(num, den);
        // k = -1 term: the identity, symbol (0:1)
        self.add_symbol(acc, 0, 1, mult);
        if den == 0 {
            return;
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
        let (mut x, mut y) = (num, den);
        let mut k = 0u32;
        while y != 0 {
            let a = x.div_euclid(y);
            let r = x.rem_euclid(y);
            x = y;
            y = r;
            let (p2, q2) = (a * p1 + p0, a * q1 + q0);
            let sign = if k % 2 == 0 { -1 } else { 1 };
            self.add_symbol(acc, sign * q2, q1, mult);
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            k += 1;
        }
        debug_assert!(p1 * den == num * q1);
    }

    /// Coordinates of the path `{r, s}` between two cusps.
    fn path(&self, r: Cusp, s: Cusp) -> Vec<i64> {
        let mut acc = vec![0i64; self.dim];
        self.add_zero_to(&mut acc, s.0, s.1, 1);
        self.add_zero_to(&mut acc, r.0, r.1, -1);
        acc
    }

    /// Integer lift `[[a, b], [c, d]]` in `SL2(Z)` of the symbol with index `i`.
    fn lift(&self, i: usize) -> [i128; 4] {
        let n = self.level as i128;
        let (c, d) = self.p1.reps[i];
        let c = if c == 0 { n } else { c as i128 };
        let mut d2 = d as i128;
        while gcd(c, d2) != 1 {
            d2 += n;
        }
        let (g, s, t) = ext_gcd(d2, c);
        debug_assert_eq!(g, 1);
        [s, -t, c, d2]
    }

    /// Combines per-generator images into a matrix in lattice coordinates.
    fn assemble(&self, images: Vec<Vec<i64>>) -> Result<Vec<Vec<i64>>> {
        let d = self.dim;
        let mut m = vec![vec![0i64; d]; d];
        match &self.lambda {
            None => {
                for (k, col) in images.into_iter().enumerate() {
                    for (i, v) in col.into_iter().enumerate() {
                        m[i][k] = v;
                    }
                }
            }
            Some(lam) => {
                for k in 0..d {
                    let mut col = vec![BigRational::zero(); d];
                    for (j, img) in images.iter().enumerate() {
                        if lam[j][k].is_zero() {
                            continue;
                        }
                        for (i, &v) in img.iter().enumerate() {
                            if v != 0 {
                                col[i] += &lam[j][k] * BigRational::from_integer(BigInt::from(v));
                            }
                        }
                    }
                    for i in 0..d {
                        m[i][k] = to_i64(&col[i])?;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Matrix of the Hecke operator `T_n` (`U_n` at primes dividing the level),
    /// acting on column vectors.
    pub fn hecke_matrix(&self, n: u64) -> Result<Vec<Vec<i64>>> {
        let hm = heilbronn_merel(n as i128);
        let images = self
            .gens
            .iter()
            .map(|&g| {
                let (u, v) = self.p1.reps[g as usize];
                let (u, v) = (u as i128, v as i128);
                let mut acc = vec![0i64; self.dim];
                for h in &hm {
                    self.add_symbol(&mut acc, u * h[0] + v * h[2], u * h[1] + v * h[3], 1);
                }
                acc
            })
            .collect();
        self.assemble(images)
    }

    /// Matrix of complex conjugation `{a, b} -> {-a, -b}`.
    pub fn star_matrix(&self) -> Result<Vec<Vec<i64>>> {
        let images = self
            .gens
            .iter()
            .map(|&g| {
                let (u, v) = self.p1.reps[g as usize];
                let mut acc = vec![0i64; self.dim];
                self.add_symbol(&mut acc, -(u as i128), v as i128, 1);
                acc
            })
            .collect();
        self.assemble(images)
    }

    /// Matrix of the Atkin-Lehner involution `W_d` for an exact divisor `d`.
    pub fn atkin_lehner_matrix(&self, d: u64) -> Result<Vec<Vec<i64>>> {
        let n = self.level;
        if d == 0 || n % d != 0 || arith::gcd_u64(d, n / d) != 1 {
            return Err(Error::NotExactDivisor { d, n });
        }
        let (di, m) = (d as i128, (n / d) as i128);
        let (_, s, t) = ext_gcd(di, m);
        // W = [[d, -t], [N, d s]] has determinant d (d s + m t) = d
        let w = [di, -t, n as i128, di * s];
        let images = self
            .gens
            .iter()
            .map(|&g| {
                let [a, b, c, dd] = self.lift(g as usize);
                let top_inf = (w[0] * a + w[1] * c, w[2] * a + w[3] * c);
                let top_zero = (w[0] * b + w[1] * dd, w[2] * b + w[3] * dd);
                self.path(normalize_cusp(top_zero.0, top_zero.1), normalize_cusp(top_inf.0, top_inf.1))
            })
            .collect();
        self.assemble(images)
    }

    /// Coordinates of `sum_{a mod c} chi(a) {oo, a/c}`.
    pub fn twisted_winding(&self, chi: &QuadDirichletChar) -> Vec<i64> {
        let c = chi.conductor() as i128;
        let mut acc = vec![0i64; self.dim];
        for a in 0..c {
            let v = chi.value(a as i64) as i64;
            if v == 0 {
                continue;
            }
            // {oo, a/c} = {0, a/c} - {0, oo}
            self.add_zero_to(&mut acc, a, c, v);
            self.add_zero_to(&mut acc, 1, 0, -v);
        }
        acc
    }

    pub fn boundary_matrix(&self) -> &[Vec<i64>] {
        &self.boundary
    }
}

pub fn build_space(n: u64) -> Result<ModSymSpace> {
    build_space_with(n, DEFAULT_LEVEL_BOUND, None)
}

/// Builds the space with the Manin symbols taken in a permuted order; `order`
/// maps the natural position of each symbol to its new position.
pub fn build_space_permuted(n: u64, order: &[usize]) -> Result<ModSymSpace> {
    if order.len() as u64 != p1_size(n) {
        return Err(Error::InvalidInput("permutation has the wrong length".into()));
    }
    build_space_with(n, DEFAULT_LEVEL_BOUND, Some(order))
}

pub fn build_space_with(n: u64, level_bound: u64, order: Option<&[usize]>) -> Result<ModSymSpace> {
    if n == 0 {
        return Err(Error::InvalidInput("level must be positive".into()));
    }
    if n > level_bound {
        return Err(Error::LevelTooLarge(n));
    }
    let p1 = P1::new(n, order);
    let ns = p1.len();
    let rep = |i: usize| (p1.reps[i].0 as i128, p1.reps[i].1 as i128);

    // two-term relations x + xS = 0
    let mut two: Vec<Option<(usize, i8)>> = vec![None; ns];
    let mut seen = vec![false; ns];
    let mut gens2: Vec<usize> = Vec::new();
    for i in 0..ns {
        if seen[i] {
            continue;
        }
        let (c, d) = rep(i);
        let j = p1.index(d, -c).unwrap();
        seen[i] = true;
        seen[j] = true;
        if j == i {
            continue;
        }
        let g = gens2.len();
        gens2.push(i);
        two[i] = Some((g, 1));
        two[j] = Some((g, -1));
    }

    // three-term relations x + xT + xT^2 = 0, eliminated sparsely
    let mut seen = vec![false; ns];
    let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
    let mut pivot_order: Vec<usize> = Vec::new();
    for i in 0..ns {
        if seen[i] {
            continue;
        }
        let (c, d) = rep(i);
        let j = p1.index(d, -c - d).unwrap();
        let k = p1.index(-c - d, c).unwrap();
        seen[i] = true;
        seen[j] = true;
        seen[k] = true;
        let mut row = SparseRow::new();
        for s in [i, j, k] {
            if let Some((g, sg)) = two[s] {
                let e = row.entry(g).or_insert_with(BigRational::zero);
                *e += linalg::q(sg as i64);
            }
        }
        row.retain(|_, v| !v.is_zero());
        reduce_row(&mut row, &pivots);
        let Some((&pc, pv)) = row.iter().next_back() else { continue };
        let inv = -pv.recip();
        let expr: SparseRow = row.iter().filter(|(&c, _)| c != pc).map(|(&c, v)| (c, v * &inv)).collect();
        pivots.insert(pc, expr);
        pivot_order.push(pc);
    }
    // back-substitute so every pivot is expressed through free generators
    for &pc in pivot_order.iter().rev() {
        let mut expr = pivots.remove(&pc).unwrap();
        reduce_row(&mut expr, &pivots);
        pivots.insert(pc, expr);
    }
    let free: Vec<usize> = (0..gens2.len()).filter(|g| !pivots.contains_key(g)).collect();
    let dim = free.len();
    let free_pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let gen_vec = |g: usize| -> Vec<(usize, BigRational)> {
        match pivots.get(&g) {
            Some(expr) => expr.iter().map(|(&c, v)| (free_pos[&c], v.clone())).collect(),
            None => vec![(free_pos[&g], BigRational::one())],
        }
    };
    let sym_free: Vec<Vec<(usize, BigRational)>> = (0..ns)
        .map(|i| match two[i] {
            None => Vec::new(),
            Some((g, s)) => gen_vec(g).into_iter().map(|(c, v)| (c, v * linalg::q(s as i64))).collect(),
        })
        .collect();

    // lattice spanned by all symbols
    let den = sym_free
        .iter()
        .flat_map(|v| v.iter().map(|(_, x)| x.denom().clone()))
        .fold(BigInt::one(), |a, b| a.lcm(&b));
    let (lambda, sym_coords): (Option<QMat>, Vec<Vec<(u32, i64)>>) = if den.is_one() {
        let coords = sym_free
            .iter()
            .map(|v| v.iter().map(|(c, x)| Ok((*c as u32, to_i64(x)?))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        (None, coords)
    } else {
        let dq = BigRational::from_integer(den.clone());
        let rows: ZMat = sym_free
            .iter()
            .map(|v| {
                let mut r = vec![BigInt::zero(); dim];
                for (c, x) in v {
                    r[*c] = (x * &dq).to_integer();
                }
                r
            })
            .collect();
        let basis = linalg::hnf_rows(&rows, dim);
        debug_assert_eq!(basis.len(), dim);
        // columns of lam are the basis vectors
        let lam: QMat = (0..dim)
            .map(|j| basis.iter().map(|b| BigRational::new(b[j].clone(), den.clone())).collect())
            .collect();
        let inv = linalg::inverse_q(&lam).ok_or_else(|| Error::InvalidInput("degenerate lattice".into()))?;
        let coords = sym_free
            .iter()
            .map(|v| {
                let mut out = Vec::new();
                for i in 0..dim {
                    let mut s = BigRational::zero();
                    for (c, x) in v {
                        s += &inv[i][*c] * x;
                    }
                    if !s.is_zero() {
                        out.push((i as u32, to_i64(&s)?));
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        (Some(lam), coords)
    };

    let mut space = ModSymSpace {
        level: n,
        p1,
        sym_coords,
        gens: free.iter().map(|&g| gens2[g] as u32).collect(),
        lambda,
        dim,
        cusps: Vec::new(),
        boundary: Vec::new(),
        hbasis: Vec::new(),
    };

    // boundary map on generators, then in lattice coordinates
    let ni = n as i128;
    let mut cusps: Vec<Cusp> = Vec::new();
    let class_of = |c: Cusp, cusps: &mut Vec<Cusp>| -> usize {
        if let Some(k) = cusps.iter().position(|&r| cusps_equivalent(r, c, ni)) {
            return k;
        }
        cusps.push(c);
        cusps.len() - 1
    };
    let mut gen_bd: Vec<Vec<(usize, i64)>> = Vec::new();
    for &g in &space.gens {
        let [a, b, c, d] = space.lift(g as usize);
        let inf = class_of(normalize_cusp(a, c), &mut cusps);
        let zero = class_of(normalize_cusp(b, d), &mut cusps);
        gen_bd.push(vec![(inf, 1), (zero, -1)]);
    }
    let nc = cusps.len();
    let mut bd = vec![vec![0i64; dim]; nc];
    match &space.lambda {
        None => {
            for (k, col) in gen_bd.iter().enumerate() {
                for &(c, v) in col {
                    bd[c][k] += v;
                }
            }
        }
        Some(lam) => {
            for k in 0..dim {
                let mut col = vec![BigRational::zero(); nc];
                for (j, img) in gen_bd.iter().enumerate() {
                    for &(c, v) in img {
                        col[c] += &lam[j][k] * linalg::q(v);
                    }
                }
                for c in 0..nc {
                    bd[c][k] = to_i64(&col[c])?;
                }
            }
        }
    }
    let bz: ZMat = bd.iter().map(|r| to_big(r)).collect();
    let h = linalg::int_kernel(&bz, dim);
    space.hbasis = h
        .iter()
        .map(|v| v.iter().map(|x| x.to_i64().ok_or_else(|| Error::InvalidInput("overflow".into()))).collect())
        .collect::<Result<Vec<_>>>()?;
    space.cusps = cusps;
    space.boundary = bd;
    Ok(space)
}

fn mat_q(m: &[Vec<i64>]) -> QMat {
    m.iter().map(|r| r.iter().map(|&x| linalg::q(x)).collect()).collect()
}

fn shift_q(m: &[Vec<i64>], a: i64) -> QMat {
    let mut q = mat_q(m);
    for (i, r) in q.iter_mut().enumerate() {
        r[i] -= linalg::q(a);
    }
    q
}

fn apply_i(m: &[Vec<i64>], v: &[BigRational]) -> Vec<BigRational> {
    m.iter()
        .map(|r| {
            r.iter().zip(v).fold(BigRational::zero(), |acc, (&a, x)| {
                if a == 0 {
                    acc
                } else {
                    acc + x * linalg::q(a)
                }
            })
        })
        .collect()
}

fn dot_qi(y: &[BigRational], v: &[i64]) -> BigRational {
    y.iter().zip(v).fold(BigRational::zero(), |acc, (a, &b)| if b == 0 { acc } else { acc + a * linalg::q(b) })
}

/// A newform with rational Hecke eigenvalues, as seen in a space of modular symbols.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalEigenform {
    pub level: u64,
    /// Eigenvalues `a_p` for the primes used in matching, including `p | N`.
    pub ap: BTreeMap<u64, i64>,
    /// Eigenvalues of `W_q` for prime powers `q` exactly dividing the level.
    pub atkin_lehner: BTreeMap<u64, i8>,
    /// Hecke-equivariant functionals fixed (resp. negated) by the star involution,
    /// primitive and integral on cuspidal homology.
    pub plus: Vec<BigRational>,
    pub minus: Vec<BigRational>,
    /// Basis of the rational eigenspace in the space of symbols.
    pub eigenspace: Vec<Vec<BigRational>>,
    /// Generators of the rank-one integral lattices in the plus and minus parts.
    pub plus_generator: Vec<i64>,
    pub minus_generator: Vec<i64>,
    /// Whether the signs of `plus` and `minus` were fixed by a nonvanishing twist.
    pub sign_witness: [Option<i64>; 2],
}

/// Discriminant bound for the sign-fixing twist search.
const SIGN_SEARCH_BOUND: u64 = 2000;

pub fn find_eigenform(space: &ModSymSpace, e: &EllipticCurveQ) -> Result<RationalEigenform> {
    match find_eigenform_with(space, e, DEFAULT_MATCH_BOUND) {
        Err(Error::Ambiguous) => find_eigenform_with(space, e, 4 * DEFAULT_MATCH_BOUND),
        r => r,
    }
}

pub fn find_eigenform_with(space: &ModSymSpace, e: &EllipticCurveQ, bound: u64) -> Result<RationalEigenform> {
    let n = space.level;
    let e = e.minimal_model()?;
    if e.conductor()? != n {
        return Err(Error::NoMatch);
    }
    let d = space.dim;
    let mut right: Vec<Vec<BigRational>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut left = right.clone();
    let mut ap = BTreeMap::new();
    let mut checked_full = Vec::new();
    for p in primes_up_to(bound) {
        let a = e.ap(p)?;
        ap.insert(p, a);
        if n % p == 0 {
            continue;
        }
        if right.len() <= 2 && left.len() <= 2 {
            break;
        }
        let t = space.hecke_matrix(p)?;
        let tm = shift_q(&t, a);
        // restrict the right eigenspace: x = R c with (T - a) R c = 0
        let rt = linalg::transpose(&right);
        let img = linalg::mul_q(&tm, &rt);
        let ker = linalg::kernel_q(&img, right.len());
        right = ker
            .iter()
            .map(|c| (0..d).map(|i| c.iter().zip(&right).fold(BigRational::zero(), |acc, (x, r)| acc + x * &r[i])).collect())
            .collect();
        let ly = linalg::mul_q(&left, &tm);
        let lker = linalg::left_kernel_q(&ly);
        left = lker
            .iter()
            .map(|c| (0..d).map(|i| c.iter().zip(&left).fold(BigRational::zero(), |acc, x| acc + x.0 * &x.1[i])).collect())
            .collect();
        checked_full.push(p);
        if right.is_empty() {
            return Err(Error::NoMatch);
        }
    }
    if right.len() != 2 || left.len() != 2 {
        return if right.len() < 2 { Err(Error::NoMatch) } else { Err(Error::Ambiguous) };
    }
    // the remaining primes, including U_q at q | N, are checked on the eigenspace
    for p in primes_up_to(bound) {
        if checked_full.contains(&p) {
            continue;
        }
        let a = e.ap(p)?;
        ap.insert(p, a);
        let t = space.hecke_matrix(p)?;
        for v in &right {
            let tv = apply_i(&t, v);
            if tv.iter().zip(v).any(|(x, y)| *x != y * linalg::q(a)) {
                return Err(Error::NoMatch);
            }
        }
    }
    let star = space.star_matrix()?;
    let split = |sign: i64| -> Result<(Vec<BigRational>, Vec<BigRational>)> {
        // left functional with y * = sign y
        let sm = shift_q(&star, sign);
        let ly = linalg::mul_q(&left, &sm);
        let k = linalg::left_kernel_q(&ly);
        if k.len() != 1 {
            return Err(Error::NotRationalEigenform(format!("star eigenspace of dimension {}", k.len())));
        }
        let y: Vec<BigRational> =
            (0..d).map(|i| k[0].iter().zip(&left).fold(BigRational::zero(), |acc, (x, r)| acc + x * &r[i])).collect();
        // right vector with * v = sign v
        let rt = linalg::transpose(&right);
        let img = linalg::mul_q(&sm, &rt);
        let kr = linalg::kernel_q(&img, 2);
        if kr.len() != 1 {
            return Err(Error::NotRationalEigenform("star does not split the eigenspace".into()));
        }
        let v: Vec<BigRational> =
            (0..d).map(|i| kr[0].iter().zip(&right).fold(BigRational::zero(), |acc, (x, r)| acc + x * &r[i])).collect();
        Ok((y, v))
    };
    let (mut plus, vplus) = split(1)?;
    let (mut minus, vminus) = split(-1)?;
    for y in [&mut plus, &mut minus] {
        normalize_on_h(space, y)?;
    }
    let plus_generator = lattice_generator(&vplus)?;
    let minus_generator = lattice_generator(&vminus)?;
    let mut f = RationalEigenform {
        level: n,
        ap,
        atkin_lehner: BTreeMap::new(),
        plus,
        minus,
        eigenspace: right,
        plus_generator,
        minus_generator,
        sign_witness: [None, None],
    };
    fix_signs(space, &mut f);
    for (q, k) in arith::factor(n as u128)? {
        let qk = q.pow(k);
        let w = atkin_lehner_sign(space, &f, qk)?;
        f.atkin_lehner.insert(qk, w);
    }
    Ok(f)
}

/// Scales `y` so that its values on cuspidal homology are coprime integers.
fn normalize_on_h(space: &ModSymSpace, y: &mut [BigRational]) -> Result<()> {
    let vals: Vec<BigRational> = space.hbasis.iter().map(|h| dot_qi(y, h)).collect();
    if vals.iter().all(|v| v.is_zero()) {
        return Err(Error::NotRationalEigenform("functional vanishes on homology".into()));
    }
    let den = vals.iter().fold(BigInt::one(), |a, v| a.lcm(v.denom()));
    let num = vals.iter().fold(BigInt::zero(), |a, v| a.gcd(&(v * BigRational::from_integer(den.clone())).to_integer()));
    let scale = BigRational::new(den, num);
    for x in y.iter_mut() {
        *x = &*x * &scale;
    }
    Ok(())
}

/// Primitive vector of cuspidal homology on the line through `v`.
fn lattice_generator(v: &[BigRational]) -> Result<Vec<i64>> {
    let p = linalg::primitive(v);
    p.iter().map(|x| x.to_i64().ok_or_else(|| Error::InvalidInput("overflow".into()))).collect()
}

/// Fixes the signs of the functionals so that central twisted L-values are nonnegative.
fn fix_signs(space: &ModSymSpace, f: &mut RationalEigenform) {
    let n = space.level;
    for (slot, parity) in [(0usize, 1i8), (1, -1)] {
        for chi in fundamental_discriminants(SIGN_SEARCH_BOUND) {
            if chi.parity() != parity || arith::gcd_u64(chi.conductor(), n) != 1 {
                continue;
            }
            let w = space.twisted_winding(&chi);
            let y = if parity == 1 { &mut f.plus } else { &mut f.minus };
            let v = dot_qi(y, &w);
            if v.is_zero() {
                continue;
            }
            if v.is_negative() {
                for x in y.iter_mut() {
                    *x = -x.clone();
                }
            }
            f.sign_witness[slot] = Some(chi.disc());
            break;
        }
    }
}

pub fn atkin_lehner_sign(space: &ModSymSpace, f: &RationalEigenform, d: u64) -> Result<i8> {
    let n = space.level;
    if d == 0 || n % d != 0 || arith::gcd_u64(d, n / d) != 1 {
        return Err(Error::NotExactDivisor { d, n });
    }
    if d == 1 {
        return Ok(1);
    }
    let w = space.atkin_lehner_matrix(d)?;
    let v = &f.eigenspace[0];
    let wv = apply_i(&w, v);
    if wv == *v {
        Ok(1)
    } else if wv.iter().zip(v).all(|(a, b)| *a == -b.clone()) {
        Ok(-1)
    } else {
        Err(Error::NotRationalEigenform(format!("W_{d} does not preserve the eigenspace")))
    }
}

/// `c L(1, f, chi) / (tau(chi) Omega^{chi(-1)})`, with the minus period taken
/// as the purely imaginary `i Omega^-`.
pub fn algebraic_twisted_lvalue(space: &ModSymSpace, f: &RationalEigenform, chi: &QuadDirichletChar) -> Result<BigRational> {
    if arith::gcd_u64(chi.conductor(), space.level) != 1 {
        return Err(Error::NotCoprime { a: space.level as i64, b: chi.disc() });
    }
    let w = space.twisted_winding(chi);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok(if chi.parity() == 1 { dot_qi(&f.plus, &w) * half } else { -dot_qi(&f.minus, &w) * half })
}

/// Degree of the optimal parametrization `X0(N) -> E`.
pub fn modular_degree(space: &ModSymSpace, f: &RationalEigenform) -> Result<u64> {
    let h = &space.hbasis;
    let d = space.dim;
    // integral homology inside the eigenspace: z with H z in span(eigenspace)
    let ann = linalg::left_kernel_q(&linalg::transpose(&f.eigenspace));
    let hq: QMat = (0..d).map(|i| h.iter().map(|v| linalg::q(v[i])).collect()).collect();
    let cond = linalg::mul_q(&ann, &hq);
    let zf = linalg::int_kernel_q(&cond, h.len());
    if zf.len() != 2 {
        return Err(Error::NotRationalEigenform(format!("eigenlattice of rank {}", zf.len())));
    }
    let g: ZMat = [&f.plus, &f.minus]
        .iter()
        .map(|y| {
            h.iter()
                .map(|v| {
                    let x = dot_qi(y, v);
                    debug_assert!(x.is_integer());
                    x.to_integer()
                })
                .collect()
        })
        .collect();
    let img: ZMat = (0..2)
        .map(|r| (0..2).map(|c| g[r].iter().zip(&zf[c]).fold(BigInt::zero(), |a, (x, y)| a + x * y)).collect())
        .collect();
    let idx = linalg::det(&img).abs();
    let cov = linalg::gcd_of_2_minors(&g);
    if cov.is_zero() || !(&idx % &cov).is_zero() {
        return Err(Error::NotRationalEigenform("degenerate period map".into()));
    }
    let sq = idx / cov;
    let r = sq.sqrt();
    if &r * &r != sq {
        return Err(Error::NotRationalEigenform(format!("index {sq} is not a square")));
    }
    r.to_u64().ok_or_else(|| Error::InvalidInput("degree overflow".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merel_matrices_count() {
        // |X_n| = sum over ad = n ... ; for n = 2 the list has 4 elements
        let h = heilbronn_merel(2);
        assert!(h.iter().all(|m| m[0] * m[3] - m[1] * m[2] == 2));
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn cusp_counts() {
        for (n, c) in [(11u64, 2usize), (37, 2), (14, 4), (27, 6), (36, 12)] {
            let s = build_space(n).unwrap();
            assert_eq!(s.num_cusps(), c, "N = {n}");
        }
    }
}
