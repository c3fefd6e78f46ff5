//! Tate's algorithm over `Q_p` and its unramified quadratic extension.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{invariants_of, transform};
use crate::arith::{inv_mod, valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kodaira {
    I0,
    I(u32),
    II,
    III,
    IV,
    I0Star,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fibre.
    pub fn components(&self) -> u32 {
        match *self {
            Kodaira::I0 => 1,
            Kodaira::I(n) => n,
            Kodaira::II => 1,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::I0Star => 5,
            Kodaira::IStar(n) => n + 5,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }

    pub fn is_additive(&self) -> bool {
        !matches!(self, Kodaira::I0 | Kodaira::I(_))
    }

    /// Additive types with `m` components.
    pub fn additive_with_components(m: u32) -> Vec<Kodaira> {
        let mut out = Vec::new();
        for k in [
            Kodaira::II,
            Kodaira::III,
            Kodaira::IV,
            Kodaira::I0Star,
            Kodaira::IVStar,
            Kodaira::IIIStar,
            Kodaira::IIStar,
        ] {
            if k.components() == m {
                out.push(k);
            }
        }
        if m > 5 {
            out.push(Kodaira::IStar(m - 5));
        }
        out.sort_by_key(|k| (k.components(), k.label()));
        out
    }

    pub fn label(&self) -> String {
        use alloc::format;
        match *self {
            Kodaira::I0 => "I0".into(),
            Kodaira::I(n) => format!("I{n}"),
            Kodaira::II => "II".into(),
            Kodaira::III => "III".into(),
            Kodaira::IV => "IV".into(),
            Kodaira::I0Star => "I0*".into(),
            Kodaira::IStar(n) => format!("I{n}*"),
            Kodaira::IVStar => "IV*".into(),
            Kodaira::IIIStar => "III*".into(),
            Kodaira::IIStar => "II*".into(),
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reduction {
    Good,
    Split,
    NonSplit,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub prime: u64,
    pub residue_degree: u8,
    pub kodaira: Kodaira,
    pub conductor_exponent: u32,
    /// Valuation of the minimal discriminant.
    pub ord_disc: u32,
    pub tamagawa: u32,
    pub reduction: Reduction,
}

impl LocalData {
    /// Ogg's formula `f = 1 - m + ord(disc)`, with `f = 0` at good primes.
    pub fn satisfies_ogg(&self) -> bool {
        let m = self.kodaira.components() as i64;
        self.conductor_exponent as i64 == 1 - m + self.ord_disc as i64
    }
}

fn md(a: i128, p: i128) -> i128 {
    a.rem_euclid(p)
}

fn v(a: i128, p: u64) -> u32 {
    if a == 0 {
        u32::MAX
    } else {
        valuation(a, p)
    }
}

/// Roots in `F_p` of a polynomial (coefficients low to high), with multiplicity.
fn roots_with_multiplicity(poly: &[i128], p: u64) -> Vec<(i128, u32)> {
    let pi = p as i128;
    let mut out = Vec::new();
    for x in 0..pi {
        let mut c: Vec<i128> = poly.iter().map(|&a| md(a, pi)).collect();
        let mut mult = 0;
        loop {
            // synthetic division by (T - x)
            let n = c.len();
            if n <= 1 {
                break;
            }
            let mut q = alloc::vec![0i128; n - 1];
            let mut acc = 0i128;
            for i in (0..n).rev() {
                acc = md(acc * x + c[i], pi);
                if i > 0 {
                    q[i - 1] = acc;
                }
            }
            if acc != 0 {
                break;
            }
            mult += 1;
            c = q;
        }
        if mult > 0 {
            out.push((x, mult));
        }
    }
    out
}

/// Number of distinct roots of a squarefree quadratic or cubic (low to high)
/// in `F_{p^f}`, `f` in {1, 2}.
fn count_roots(poly: &[i128], p: u64, f: u8) -> u32 {
    let r = roots_with_multiplicity(poly, p);
    let r1 = r.len() as u32;
    if f == 1 {
        return r1;
    }
    let deg = poly.len() - 1;
    match deg {
        2 => 2,
        3 => {
            if r1 == 0 {
                0
            } else {
                3
            }
        }
        _ => r1,
    }
}

fn singular_point(a: &[i128; 5], p: u64) -> (i128, i128) {
    let pi = p as i128;
    let [a1, a2, a3, a4, a6] = *a;
    let check = |x: i128, y: i128| {
        let f = y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6;
        let fx = a1 * y - 3 * x * x - 2 * a2 * x - a4;
        let fy = 2 * y + a1 * x + a3;
        md(f, pi) == 0 && md(fx, pi) == 0 && md(fy, pi) == 0
    };
    if p == 2 {
        for x in 0..2 {
            for y in 0..2 {
                if check(x, y) {
                    return (x, y);
                }
            }
        }
    } else {
        let inv2 = inv_mod(2, pi).unwrap();
        for x in 0..pi {
            let y = md(-(md(a1 * x + a3, pi)) * inv2, pi);
            if check(x, y) {
                return (x, y);
            }
        }
    }
    unreachable!("reduction is singular but no singular point found")
}

/// Runs Tate's algorithm at `p` over the unramified extension of degree `f`.
/// Returns the local data and a model minimal at `p`.
pub(crate) fn tate(model: &[i128; 5], p: u64, f: u8) -> (LocalData, [i128; 5]) {
    let pi = p as i128;
    let mut a = *model;
    let mk = |kodaira: Kodaira, cond: u32, n: u32, c: u32, red: Reduction| LocalData {
        prime: p,
        residue_degree: f,
        kodaira,
        conductor_exponent: cond,
        ord_disc: n,
        tamagawa: c,
        reduction: red,
    };
    loop {
        let inv = invariants_of(&a);
        let n = v(inv.disc, p);
        if n == 0 {
            return (mk(Kodaira::I0, 0, 0, 1, Reduction::Good), a);
        }
        let (x0, y0) = singular_point(&a, p);
        a = transform(&a, x0, 0, y0, 1);
        let inv = invariants_of(&a);
        if v(inv.c4, p) == 0 {
            let split = count_roots(&[-a[1], a[0], 1], p, f) > 0;
            let (c, red) = if split {
                (n, Reduction::Split)
            } else {
                (if n % 2 == 0 { 2 } else { 1 }, Reduction::NonSplit)
            };
            return (mk(Kodaira::I(n), 1, n, c, red), a);
        }
        if v(a[4], p) < 2 {
            return (mk(Kodaira::II, n, n, 1, Reduction::Additive), a);
        }
        if v(inv.b8, p) < 3 {
            return (mk(Kodaira::III, n - 1, n, 2, Reduction::Additive), a);
        }
        if v(inv.b6, p) < 3 {
            let c = if count_roots(&[-a[4] / (pi * pi), a[2] / pi, 1], p, f) > 0 { 3 } else { 1 };
            return (mk(Kodaira::IV, n - 2, n, c, Reduction::Additive), a);
        }
        let (s, t) = if p == 2 {
            (md(a[1], 2), 2 * md(a[4] / 4, 2))
        } else {
            let inv2 = inv_mod(2, pi * pi).unwrap();
            (md(-a[0] * inv_mod(2, pi).unwrap(), pi), md(-a[2] * inv2, pi * pi))
        };
        a = transform(&a, 0, s, t, 1);
        debug_assert!(md(a[0], pi) == 0 && md(a[1], pi) == 0);
        debug_assert!(md(a[2], pi * pi) == 0 && md(a[3], pi * pi) == 0);
        debug_assert!(md(a[4], pi * pi * pi) == 0);
        let cubic = [a[4] / (pi * pi * pi), a[3] / (pi * pi), a[1] / pi, 1];
        let roots = roots_with_multiplicity(&cubic, p);
        let max_mult = roots.iter().map(|r| r.1).max().unwrap_or(0);
        if max_mult <= 1 {
            let c = 1 + count_roots(&cubic, p, f);
            return (mk(Kodaira::I0Star, n - 4, n, c, Reduction::Additive), a);
        }
        if max_mult == 2 {
            let alpha = roots.iter().find(|r| r.1 == 2).unwrap().0;
            a = transform(&a, alpha * pi, 0, 0, 1);
            let mut m = 1u32;
            let mut mx = pi * pi;
            let mut my = pi * pi;
            loop {
                let xa3 = a[2] / my;
                let xa6 = a[4] / (mx * my);
                if md(xa3 * xa3 + 4 * xa6, pi) != 0 {
                    let c = if count_roots(&[-xa6, xa3, 1], p, f) > 0 { 4 } else { 2 };
                    return (mk(Kodaira::IStar(m), n - m - 4, n, c, Reduction::Additive), a);
                }
                let t = if p == 2 { my * md(xa6, 2) } else { my * md(-xa3 * inv_mod(2, pi).unwrap(), pi) };
                a = transform(&a, 0, 0, t, 1);
                my *= pi;
                m += 1;
                let xa2 = a[1] / pi;
                let xa4 = a[3] / (pi * mx);
                let xa6 = a[4] / (mx * my);
                if md(xa4 * xa4 - 4 * xa2 * xa6, pi) != 0 {
                    let c = if count_roots(&[xa6, xa4, xa2], p, f) > 0 { 4 } else { 2 };
                    return (mk(Kodaira::IStar(m), n - m - 4, n, c, Reduction::Additive), a);
                }
                let r = if p == 2 {
                    mx * md(xa6 * xa2, 2)
                } else {
                    mx * md(-xa4 * inv_mod(md(2 * xa2, pi), pi).unwrap(), pi)
                };
                a = transform(&a, r, 0, 0, 1);
                mx *= pi;
                m += 1;
            }
        }
        let alpha = roots[0].0;
        a = transform(&a, alpha * pi, 0, 0, 1);
        let x3 = a[2] / (pi * pi);
        let x6 = a[4] / (pi * pi * pi * pi);
        if md(x3 * x3 + 4 * x6, pi) != 0 {
            let c = if count_roots(&[-x6, x3, 1], p, f) > 0 { 3 } else { 1 };
            return (mk(Kodaira::IVStar, n - 6, n, c, Reduction::Additive), a);
        }
        let t = if p == 2 { pi * pi * md(x6, 2) } else { pi * pi * md(-x3 * inv_mod(2, pi).unwrap(), pi) };
        a = transform(&a, 0, 0, t, 1);
        if v(a[3], p) < 4 {
            return (mk(Kodaira::IIIStar, n - 7, n, 2, Reduction::Additive), a);
        }
        if v(a[4], p) < 6 {
            return (mk(Kodaira::IIStar, n - 8, n, 1, Reduction::Additive), a);
        }
        a = transform(&a, 0, 0, 0, pi);
    }
}
