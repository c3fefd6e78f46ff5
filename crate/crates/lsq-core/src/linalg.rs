//! Exact linear algebra over `Q` and `Z` with dense row-major matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QMat = Vec<Vec<BigRational>>;
pub type ZMat = Vec<Vec<BigInt>>;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero_q(rows: usize, cols: usize) -> QMat {
    vec![vec![BigRational::zero(); cols]; rows]
}

pub fn identity_q(n: usize) -> QMat {
    let mut m = zero_q(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn to_q(m: &ZMat) -> QMat {
    m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
}

pub fn mul_q(a: &QMat, b: &QMat) -> QMat {
    let n = b.first().map_or(0, |r| r.len());
    let mut out = zero_q(a.len(), n);
    for (i, row) in a.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b[k].iter().enumerate() {
                if !y.is_zero() {
                    out[i][j] += x * y;
                }
            }
        }
    }
    out
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank_q(m: &QMat) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of the right kernel `{x : m x = 0}`, as vectors of length `cols`.
pub fn kernel_q(m: &QMat, cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (row, &pc) in a.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        out.push(v);
    }
    out
}

/// Basis of the left kernel `{y : y m = 0}`.
pub fn left_kernel_q(m: &QMat) -> Vec<Vec<BigRational>> {
    let t = transpose(m);
    kernel_q(&t, m.len())
}

pub fn inverse_q(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut aug: QMat = m
        .iter()
        .zip(identity_q(n))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `x m = v` for a row vector `x`, when a solution exists.
pub fn solve_left_q(m: &QMat, v: &[BigRational]) -> Option<Vec<BigRational>> {
    // x m = v  <=>  m^T x^T = v^T
    let t = transpose(m);
    let rows = t.len();
    let n = m.len();
    let mut aug: QMat = t.into_iter().zip(v).map(|(mut r, b)| {
        r.push(b.clone());
        r
    }).collect();
    let piv = rref(&mut aug);
    if piv.last() == Some(&n) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (row, &pc) in aug.iter().zip(&piv) {
        x[pc] = row[n].clone();
    }
    let _ = rows;
    Some(x)
}

pub fn lcm_of_denominators(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// The primitive integer vector on the line through a nonzero rational vector,
/// with the sign of its first nonzero entry positive.
pub fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let l = lcm_of_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let mut out: Vec<BigInt> = ints.into_iter().map(|x| x / &g).collect();
    if out.iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_negative()) {
        for x in out.iter_mut() {
            *x = -x.clone();
        }
    }
    out
}

/// Row-style Hermite reduction: returns a basis of the Z-span of `rows`
/// (nonzero rows of an echelon form).
pub fn hnf_rows(rows: &[Vec<BigInt>], cols: usize) -> ZMat {
    let (h, _) = echelon_with_transform(rows, cols, false);
    h.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect()
}

/// Integer row echelon form by unimodular row operations. With `track`, also
/// returns the transform `u` with `u * rows = h`.
fn echelon_with_transform(rows: &[Vec<BigInt>], cols: usize, track: bool) -> (ZMat, ZMat) {
    let n = rows.len();
    let mut a: ZMat = rows.to_vec();
    let mut u: ZMat = if track {
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
    } else {
        Vec::new()
    };
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        loop {
            // pick the smallest nonzero entry in column c at or below row r
            let mut best: Option<usize> = None;
            for i in r..n {
                if !a[i][c].is_zero() && best.map_or(true, |b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            if track {
                u.swap(r, b);
            }
            let mut done = true;
            for i in r + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].div_floor(&a[r][c]);
                let (ar, ur) = (a[r].clone(), if track { u[r].clone() } else { Vec::new() });
                for (x, y) in a[i].iter_mut().zip(&ar) {
                    *x -= &f * y;
                }
                if track {
                    for (x, y) in u[i].iter_mut().zip(&ur) {
                        *x -= &f * y;
                    }
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < n && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for x in a[r].iter_mut() {
                    *x = -x.clone();
                }
                if track {
                    for x in u[r].iter_mut() {
                        *x = -x.clone();
                    }
                }
            }
            // reduce the entries above the pivot
            for i in 0..r {
                let f = a[i][c].div_floor(&a[r][c]);
                if f.is_zero() {
                    continue;
                }
                let (ar, ur) = (a[r].clone(), if track { u[r].clone() } else { Vec::new() });
                for (x, y) in a[i].iter_mut().zip(&ar) {
                    *x -= &f * y;
                }
                if track {
                    for (x, y) in u[i].iter_mut().zip(&ur) {
                        *x -= &f * y;
                    }
                }
            }
            r += 1;
        }
    }
    (a, u)
}

/// Basis of the saturated lattice `{x in Z^cols : m x = 0}`.
pub fn int_kernel(m: &[Vec<BigInt>], cols: usize) -> ZMat {
    // rows of u with u * m^T = 0 span the integer left kernel of m^T
    let t: ZMat = if m.is_empty() {
        vec![Vec::new(); cols]
    } else {
        transpose(m)
    };
    let width = m.len();
    let (h, u) = echelon_with_transform(&t, width, true);
    let mut out: ZMat = h
        .iter()
        .zip(u)
        .filter(|(r, _)| r.iter().all(|x| x.is_zero()))
        .map(|(_, u)| u)
        .collect();
    size_reduce(&mut out);
    out
}

/// Integer kernel of a rational matrix.
pub fn int_kernel_q(m: &QMat, cols: usize) -> ZMat {
    let z: ZMat = m
        .iter()
        .map(|r| {
            let l = lcm_of_denominators(r);
            r.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    int_kernel(&z, cols)
}

/// Cheap pairwise size reduction to keep kernel bases small.
fn size_reduce(b: &mut ZMat) {
    let norm = |v: &Vec<BigInt>| v.iter().fold(BigInt::zero(), |acc, x| acc + x * x);
    for _ in 0..4 {
        let mut changed = false;
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j {
                    continue;
                }
                let nj = norm(&b[j]);
                if nj.is_zero() {
                    continue;
                }
                let dot = b[i].iter().zip(&b[j]).fold(BigInt::zero(), |acc, (x, y)| acc + x * y);
                // nearest integer to dot / nj
                let two = BigInt::from(2);
                let f = (&dot * &two + &nj).div_floor(&(&nj * &two));
                if f.is_zero() {
                    continue;
                }
                let bj = b[j].clone();
                for (x, y) in b[i].iter_mut().zip(&bj) {
                    *x -= &f * y;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Determinant by fraction-free elimination.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: ZMat = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Gcd of all maximal minors of a `2 x n` integer matrix.
pub fn gcd_of_2_minors(m: &[Vec<BigInt>]) -> BigInt {
    let n = m[0].len();
    let mut g = BigInt::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = &m[0][i] * &m[1][j] - &m[0][j] * &m[1][i];
            g = g.gcd(&d);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> ZMat {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn integer_kernel_is_saturated() {
        let m = z(&[&[2, 4, 6]]);
        let k = int_kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigInt = v.iter().zip(&m[0]).map(|(a, b)| a * b).sum();
            assert!(s.is_zero());
        }
        // the lattice has index 1 in its saturation: some 2x2 minor is +-1
        let g = gcd_of_2_minors(&k);
        assert_eq!(g, BigInt::one());
    }

    #[test]
    fn determinant_and_hnf() {
        let m = z(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(det(&m), BigInt::from(18));
        let h = hnf_rows(&z(&[&[2, 0], &[0, 2], &[1, 1]]), 2);
        assert_eq!(h.len(), 2);
        assert_eq!(det(&h).abs(), BigInt::from(2));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = to_q(&z(&[&[2, 1], &[7, 4]]));
        let inv = inverse_q(&m).unwrap();
        assert_eq!(mul_q(&m, &inv), identity_q(2));
    }
}
