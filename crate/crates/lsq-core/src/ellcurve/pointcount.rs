//! `a_p` by baby-step giant-step on random-free points of `y^2 = x^3 + A x + B`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

type Pt = Option<(u64, u64)>;

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}

fn inv(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p as i128) as u64
}

struct Curve {
    a: u64,
    p: u64,
}

impl Curve {
    fn neg(&self, q: Pt) -> Pt {
        q.map(|(x, y)| (x, (self.p - y) % self.p))
    }

    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, _) => return v,
            (_, None) => return u,
            (Some(a), Some(b)) => (a, b),
        };
        let lam = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (mulm(3, mulm(x1, x1, p), p) + self.a) % p;
            mulm(num, inv(mulm(2, y1, p), p), p)
        } else {
            mulm((y2 + p - y1) % p, inv((x2 + p - x1) % p, p), p)
        };
        let x3 = (mulm(lam, lam, p) + 2 * p - x1 - x2) % p;
        let y3 = (mulm(lam, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    fn mul(&self, mut n: u64, mut q: Pt) -> Pt {
        let mut r = None;
        while n > 0 {
            if n & 1 == 1 {
                r = self.add(r, q);
            }
            q = self.add(q, q);
            n >>= 1;
        }
        r
    }

    /// All `t` with `|t| <= bound` and `(p + 1 - t) P = O`.
    fn traces(&self, pt: Pt, bound: i64) -> BTreeSet<i64> {
        let m = libm::ceil(libm::sqrt((2 * bound + 1) as f64)) as i64;
        let mut baby: Vec<(u64, u64, i64)> = Vec::new();
        let mut zero_at = Vec::new();
        let mut cur: Pt = None;
        for j in 0..=m {
            match cur {
                None => zero_at.push(j),
                Some((x, y)) => baby.push((x, y, j)),
            }
            cur = self.add(cur, pt);
        }
        baby.sort();
        let width = 2 * m + 1;
        let steps = bound / width + 1;
        let step = self.mul(width as u64, pt);
        let r = self.mul(self.p + 1, pt);
        let mut g = self.add(r, self.mul(steps as u64, step));
        let back = self.neg(step);
        let mut out = BTreeSet::new();
        for s in -steps..=steps {
            let base = s * width;
            match g {
                None => {
                    for &j in &zero_at {
                        out.insert(base + j);
                        out.insert(base - j);
                    }
                }
                Some((x, y)) => {
                    let i = baby.partition_point(|e| e.0 < x);
                    for &(bx, by, j) in baby[i..].iter().take_while(|e| e.0 == x) {
                        debug_assert_eq!(bx, x);
                        if by == y {
                            out.insert(base + j);
                        }
                        if (by + y) % self.p == 0 {
                            out.insert(base - j);
                        }
                    }
                }
            }
            g = self.add(g, back);
        }
        out.retain(|t| t.abs() <= bound);
        out
    }
}

/// `a_p` of `y^2 = x^3 + a x + b` over `F_p` for `p >= 5` of good reduction, or
/// `None` if no point pins it down.
pub(crate) fn trace_bsgs(a: u64, b: u64, p: u64) -> Option<i64> {
    let bound = libm::floor(2.0 * libm::sqrt(p as f64)) as i64;
    let mut cands: Option<BTreeSet<i64>> = None;
    let mut tries = 0;
    for x in 0..p {
        let r = (mulm(mulm(x, x, p), x, p) + mulm(a, x, p) + b) % p;
        if r == 0 {
            continue;
        }
        // (x r, r^2) lies on the twist y^2 = x^3 + a r^2 x + b r^3
        let chi: i64 = if powm(r, (p - 1) / 2, p) == 1 { 1 } else { -1 };
        let r2 = mulm(r, r, p);
        let curve = Curve { a: mulm(a, r2, p), p };
        let found: BTreeSet<i64> = curve.traces(Some((mulm(x, r, p), r2)), bound).into_iter().map(|t| chi * t).collect();
        let next: BTreeSet<i64> = match cands {
            None => found,
            Some(c) => c.intersection(&found).copied().collect(),
        };
        if next.len() <= 1 {
            return next.into_iter().next();
        }
        cands = Some(next);
        tries += 1;
        if tries >= 24 {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: u64, b: u64, p: u64) -> i64 {
        let mut s = 0i64;
        for x in 0..p {
            let r = (mulm(mulm(x, x, p), x, p) + mulm(a, x, p) + b) % p;
            if r != 0 {
                s += if powm(r, (p - 1) / 2, p) == 1 { 1 } else { -1 };
            }
        }
        -s
    }

    #[test]
    fn matches_character_sums() {
        for p in [1009u64, 1013, 2003, 4999, 7919, 10007] {
            for (a, b) in [(0u64, 1u64), (1, 0), (p - 1, 0), (3, 7), (p - 432, 8208 % p)] {
                let disc = (4 * powm(a, 3, p) + 27 * mulm(b, b, p)) % p;
                if disc == 0 {
                    continue;
                }
                assert_eq!(trace_bsgs(a, b, p), Some(brute(a, b, p)), "p={p} a={a} b={b}");
            }
        }
    }
}
