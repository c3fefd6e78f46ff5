//! Central values and first derivatives of L-functions of degree 2 and 4 with
//! gamma factor `Gamma_C(s)^k`, by the smoothed approximate functional equation.
//!
//! With `A = sqrt(N) / (2 pi)^k` and `phi_k` the inverse Mellin transform of
//! `Gamma(s)^k`, the completed function `A^s Gamma(s)^k L(s)` equals
//!
//! `sum a_n [ (A/n)^s G(s, n t / A) + eps (A/n)^(2-s) G(2-s, n / (t A)) ]`
//!
//! for any `t > 0`, where `G(s, x) = int_x^oo phi_k(u) u^(s-1) du`. Independence
//! of `t` tests the sign `eps` and the coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{self, primes_up_to};
use crate::characters::QuadDirichletChar;
use crate::ellcurve::{EllipticCurveQ, Reduction};
use crate::quadfield::{HeckeQuadChar, RealQuadField, Splitting};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Residual below which a sign hypothesis is accepted.
pub const FE_TOLERANCE: f64 = 1e-8;
/// Second splitting parameter for the functional-equation test.
const T_CHECK: f64 = 1.2;
const S_CHECK: f64 = 1.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSeriesSpec {
    pub degree: u8,
    pub conductor: u64,
    /// Shifts `mu` of the factors `Gamma_C(s + mu)`; only zero shifts are supported.
    pub gamma_shifts: Vec<f64>,
    pub sign: Option<i8>,
    /// `a_n` at index `n`; index 0 is unused.
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValue {
    pub value: f64,
    /// Absolute error bound: truncation tail plus rounding.
    pub error: f64,
    pub sign: i8,
    pub terms: usize,
}

/// `K_0(z)` for `z > 0`, trapezoid rule on `int_0^oo exp(-z cosh t) dt`.
fn bessel_k0(z: f64) -> f64 {
    let h = 0.1;
    let mut s = 0.5 * libm::exp(-z);
    let mut t = h;
    loop {
        let v = libm::exp(-z * libm::cosh(t));
        s += v;
        if v < 1e-18 * s {
            break;
        }
        t += h;
    }
    h * s
}

fn phi(k: usize, u: f64) -> f64 {
    match k {
        1 => libm::exp(-u),
        _ => 2.0 * bessel_k0(2.0 * libm::sqrt(u)),
    }
}

const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Tail integrals `int_w^wmax phi(e^v) e^(s v) v^m dv` on a grid in `w = log x`.
struct WeightTable {
    k: usize,
    s: f64,
    m: u32,
    w0: f64,
    h: f64,
    wmax: f64,
    cum: Vec<f64>,
}

impl WeightTable {
    const W0: f64 = -14.0;
    const H: f64 = 0.02;

    fn integrand(&self, w: f64) -> f64 {
        phi(self.k, libm::exp(w)) * libm::exp(self.s * w) * libm::pow(w, self.m as f64)
    }

    fn gauss(&self, a: f64, b: f64) -> f64 {
        let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
        let mut s = 0.0;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            s += wt * (self.integrand(c - r * x) + self.integrand(c + r * x));
        }
        s * r
    }

    fn new(k: usize, s: f64, m: u32) -> Self {
        let wmax = cutoff_log(k);
        let cells = libm::ceil((wmax - Self::W0) / Self::H) as usize;
        let mut t = WeightTable { k, s, m, w0: Self::W0, h: Self::H, wmax, cum: vec![0.0; cells + 1] };
        for i in (0..cells).rev() {
            let a = t.w0 + i as f64 * t.h;
            let b = (a + t.h).min(wmax);
            t.cum[i] = t.cum[i + 1] + t.gauss(a, b);
        }
        t
    }

    fn eval(&self, x: f64) -> f64 {
        let w = libm::log(x);
        if w >= self.wmax {
            return 0.0;
        }
        if w < self.w0 {
            let n = libm::ceil((self.w0 - w) / self.h) as usize;
            let step = (self.w0 - w) / n as f64;
            let mut s = self.cum[0];
            for i in 0..n {
                s += self.gauss(w + i as f64 * step, w + (i + 1) as f64 * step);
            }
            return s;
        }
        let i = libm::floor((w - self.w0) / self.h) as usize;
        let b = (self.w0 + (i + 1) as f64 * self.h).min(self.wmax);
        self.cum[(i + 1).min(self.cum.len() - 1)] + self.gauss(w, b)
    }
}

/// `log x` beyond which every weight is below about `1e-21`.
fn cutoff_log(k: usize) -> f64 {
    match k {
        1 => libm::log(52.0),
        _ => libm::log(700.0),
    }
}

fn scale(spec: &LSeriesSpec) -> f64 {
    let k = spec.gamma_shifts.len() as i32;
    libm::sqrt(spec.conductor as f64) / libm::pow(2.0 * PI, k as f64)
}

/// Number of coefficients used for a series of this degree and conductor.
pub fn terms_needed(degree: u8, conductor: u64) -> usize {
    let k = (degree / 2) as usize;
    let a = libm::sqrt(conductor as f64) / libm::pow(2.0 * PI, k as f64);
    libm::ceil(libm::exp(cutoff_log(k)) * a * T_CHECK) as usize + 1
}

/// Crude bound for `|a_n|`: `d(n) <= sqrt(3n)` and `d_4(n) <= d(n)^2`.
fn coefficient_bound(degree: u8, n: f64) -> f64 {
    if degree <= 2 {
        2.0 * n
    } else {
        3.0 * n * libm::sqrt(n)
    }
}

struct Kernel {
    k: usize,
    tables: Vec<WeightTable>,
}

impl Kernel {
    fn new(k: usize) -> Self {
        Kernel { k, tables: Vec::new() }
    }

    fn table(&mut self, s: f64, m: u32) -> usize {
        if let Some(i) = self.tables.iter().position(|t| t.s == s && t.m == m) {
            return i;
        }
        self.tables.push(WeightTable::new(self.k, s, m));
        self.tables.len() - 1
    }
}

/// `Lambda(s)` (or its derivative) from the first `terms` coefficients, with the
/// sum of absolute values of the terms.
fn completed(spec: &LSeriesSpec, kern: &mut Kernel, s: f64, t: f64, eps: f64, terms: usize, deriv: bool) -> (f64, f64) {
    let a = scale(spec);
    let g1 = kern.table(s, 0);
    let g2 = kern.table(2.0 - s, 0);
    let (d1, d2) = if deriv { (kern.table(s, 1), kern.table(2.0 - s, 1)) } else { (g1, g2) };
    let tabs = &kern.tables;
    let (mut sum, mut abs) = (0.0, 0.0);
    for n in 1..=terms.min(spec.coefficients.len() - 1) {
        let an = spec.coefficients[n];
        if an == 0.0 {
            continue;
        }
        let r = a / n as f64;
        let (x1, x2) = (n as f64 * t / a, n as f64 / (t * a));
        let term = if deriv {
            let lr = libm::log(r);
            libm::pow(r, s) * (lr * tabs[g1].eval(x1) + tabs[d1].eval(x1))
                - eps * libm::pow(r, 2.0 - s) * (lr * tabs[g2].eval(x2) + tabs[d2].eval(x2))
        } else {
            libm::pow(r, s) * tabs[g1].eval(x1) + eps * libm::pow(r, 2.0 - s) * tabs[g2].eval(x2)
        };
        sum += an * term;
        abs += libm::fabs(an * term);
    }
    (sum, abs)
}

/// Bound on the omitted terms `n > terms` at `s = 1`, `t = 1`.
fn tail_bound(spec: &LSeriesSpec, kern: &mut Kernel, terms: usize, deriv: bool) -> f64 {
    let a = scale(spec);
    let g = kern.table(1.0, 0);
    let d = kern.table(1.0, 1);
    let xmax = libm::exp(cutoff_log(kern.k));
    let tabs = &kern.tables;
    let mut s = 0.0;
    let mut n = terms + 1;
    loop {
        let x = n as f64 / a;
        if x >= xmax {
            break;
        }
        let r = a / n as f64;
        let mut w = tabs[g].eval(x);
        if deriv {
            w = libm::fabs(libm::log(r)) * w + libm::fabs(tabs[d].eval(x));
        }
        s += coefficient_bound(spec.degree, n as f64) * r * 2.0 * w;
        n += 1;
    }
    // weights past the cutoff are below 1e-21 each
    s + 1e-18 * a
}

fn check_spec(spec: &LSeriesSpec) -> Result<usize> {
    let k = spec.gamma_shifts.len();
    if !(k == 1 || k == 2) || spec.degree as usize != 2 * k || spec.gamma_shifts.iter().any(|&m| m != 0.0) {
        return Err(Error::InvalidInput("unsupported gamma factor".into()));
    }
    if spec.coefficients.len() < 2 {
        return Err(Error::InsufficientCoefficients { needed: 1, have: 0 });
    }
    Ok(k)
}

/// Sign minimizing the `t`-dependence of `Lambda`, and the relative residual.
pub fn check_fe_consistency(spec: &LSeriesSpec) -> Result<(i8, f64)> {
    let k = check_spec(spec)?;
    let need = terms_needed(spec.degree, spec.conductor);
    let have = spec.coefficients.len() - 1;
    if have < need {
        return Err(Error::InsufficientCoefficients { needed: need, have });
    }
    let mut kern = Kernel::new(k);
    let mut best = (0i8, f64::INFINITY);
    for eps in [1i8, -1] {
        let mut res: f64 = 0.0;
        for s in [1.0, S_CHECK] {
            let (v1, a1) = completed(spec, &mut kern, s, 1.0, eps as f64, need, false);
            let (v2, a2) = completed(spec, &mut kern, s, T_CHECK, eps as f64, need, false);
            res = res.max(libm::fabs(v1 - v2) / a1.max(a2).max(1e-300));
        }
        if res < best.1 {
            best = (eps, res);
        }
    }
    if best.1 > FE_TOLERANCE {
        return Err(Error::Inconclusive(alloc::format!("functional equation residual {:.3e}", best.1)));
    }
    Ok(best)
}

/// `L(1)` (order 0) or `L'(1)` (order 1).
pub fn lvalue(spec: &LSeriesSpec, derivative_order: u8) -> Result<LValue> {
    let need = terms_needed(spec.degree, spec.conductor);
    let have = spec.coefficients.len().saturating_sub(1);
    if have < need {
        return Err(Error::InsufficientCoefficients { needed: need, have });
    }
    lvalue_truncated(spec, derivative_order, need)
}

/// As [`lvalue`] but summing only the first `terms` coefficients; the error bound
/// accounts for the rest.
pub fn lvalue_truncated(spec: &LSeriesSpec, derivative_order: u8, terms: usize) -> Result<LValue> {
    let k = check_spec(spec)?;
    if derivative_order > 1 {
        return Err(Error::InvalidInput("derivative order must be 0 or 1".into()));
    }
    let sign = match spec.sign {
        Some(e) => e,
        None => check_fe_consistency(spec)?.0,
    };
    let terms = terms.min(spec.coefficients.len() - 1);
    let mut kern = Kernel::new(k);
    let a = scale(spec);
    let eps = sign as f64;
    let (lam, abs0) = completed(spec, &mut kern, 1.0, 1.0, eps, terms, false);
    let tail0 = tail_bound(spec, &mut kern, terms, false);
    let err0 = tail0 + 1e-14 * abs0;
    let (value, error) = if derivative_order == 0 {
        (lam / a, err0 / a)
    } else {
        let (dlam, abs1) = completed(spec, &mut kern, 1.0, 1.0, eps, terms, true);
        let tail1 = tail_bound(spec, &mut kern, terms, true);
        let c = libm::log(a) - k as f64 * EULER_GAMMA;
        let v = (dlam - lam * c) / a;
        (v, (tail1 + 1e-14 * abs1 + libm::fabs(c) * err0) / a)
    };
    // a forced zero is exact
    let value = if derivative_order == 0 && sign == -1 { 0.0 } else { value };
    Ok(LValue { value, error, sign, terms })
}

/// Whether `|value| > margin + error`.
pub fn certify_nonvanishing(spec: &LSeriesSpec, derivative_order: u8, margin: f64) -> Result<bool> {
    let v = lvalue(spec, derivative_order)?;
    Ok(libm::fabs(v.value) > margin + v.error)
}

impl LSeriesSpec {
    /// `|a_p| <= (degree / 2) * 2 sqrt(p)` on primes up to `bound`.
    pub fn check_ramanujan(&self, bound: u64) -> bool {
        primes_up_to(bound.min(self.coefficients.len() as u64 - 1)).into_iter().all(|p| {
            let b = self.degree as f64 * libm::sqrt(p as f64);
            libm::fabs(self.coefficients[p as usize]) <= b + 1e-9
        })
    }
}

/// `L(s, E, chi)` for `chi` of conductor prime to `N`; the trivial character gives `L(s, E)`.
pub fn lseries_twist(e: &EllipticCurveQ, chi: &QuadDirichletChar) -> Result<LSeriesSpec> {
    let n = e.conductor()?;
    let c = chi.conductor();
    if arith::gcd_u64(n, c) != 1 {
        return Err(Error::NotCoprime { a: n as i64, b: chi.disc() });
    }
    let cond = n * c * c;
    let len = terms_needed(2, cond);
    let an = e.an_list(len)?;
    let coefficients = (0..=len)
        .map(|i| if i == 0 { 0.0 } else { (an[i] * chi.value(i as i64) as i64) as f64 })
        .collect();
    Ok(LSeriesSpec { degree: 2, conductor: cond, gamma_shifts: vec![0.0], sign: None, coefficients })
}

pub fn lseries_curve(e: &EllipticCurveQ) -> Result<LSeriesSpec> {
    lseries_twist(e, &QuadDirichletChar::trivial())
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `b_0..b_kmax` of `1 / poly(X)`.
fn inverse_series(poly: &[f64], kmax: usize) -> Vec<f64> {
    let mut b = vec![0.0; kmax + 1];
    b[0] = 1.0;
    for k in 1..=kmax {
        let mut s = 0.0;
        for j in 1..poly.len().min(k + 1) {
            s -= poly[j] * b[k - j];
        }
        b[k] = s;
    }
    b
}

/// Dirichlet coefficients up to `len` of an Euler product given by local polynomials in `p^-s`.
pub fn from_euler_factors(len: usize, mut local: impl FnMut(u64) -> Vec<f64>) -> Vec<f64> {
    let mut a = vec![0.0; len + 1];
    if len == 0 {
        return a;
    }
    a[1] = 1.0;
    let mut spf = vec![0usize; len + 1];
    let mut local_series: Vec<Vec<f64>> = vec![Vec::new(); len + 1];
    for p in primes_up_to(len as u64) {
        let pu = p as usize;
        let mut j = pu;
        while j <= len {
            if spf[j] == 0 {
                spf[j] = pu;
            }
            j += pu;
        }
        let mut kmax = 0;
        let mut pk = pu;
        while pk <= len {
            kmax += 1;
            pk = match pk.checked_mul(pu) {
                Some(v) => v,
                None => break,
            };
        }
        local_series[pu] = inverse_series(&local(p), kmax);
    }
    for n in 2..=len {
        let p = spf[n];
        let (mut m, mut k) = (n, 0);
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        a[n] = a[m] * local_series[p][k];
    }
    a
}

/// `L(s, E/F, delta)` as a degree-4 series over Q.
pub fn lseries_ef_delta(e: &EllipticCurveQ, f: &RealQuadField, delta: &HeckeQuadChar) -> Result<LSeriesSpec> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    let df = f.disc() as u64;
    if delta.field != *f {
        return Err(Error::HypothesisViolated("character belongs to another field".into()));
    }
    if arith::gcd_u64(n, df) != 1 || arith::gcd_u64(n, delta.conductor_norm) != 1 {
        return Err(Error::HypothesisViolated("N must be prime to D_F and to the conductor of delta".into()));
    }
    let cond = (n as u128 * delta.conductor_norm as u128 * df as u128).pow(2);
    let cond = u64::try_from(cond).map_err(|_| Error::BoundExceeded("conductor".into()))?;
    let len = terms_needed(4, cond);
    let an = e.an_list(len)?;
    let bad: Vec<u64> = e.bad_primes()?;
    let coefficients = from_euler_factors(len, |p| {
        let ap = an[p as usize] as f64;
        let pf = p as f64;
        let red = if bad.contains(&p) { e.local_data(p).reduction } else { Reduction::Good };
        let mut poly = vec![1.0];
        for prime in f.primes_above(p) {
            let v = delta.value(&prime) as f64;
            if v == 0.0 {
                continue;
            }
            let local = match (prime.splitting, red) {
                (_, Reduction::Additive) => vec![1.0],
                (Splitting::Inert, Reduction::Good) => vec![1.0, 0.0, -v * (ap * ap - 2.0 * pf), 0.0, pf * pf],
                (Splitting::Inert, _) => vec![1.0, 0.0, -v * ap * ap],
                (_, Reduction::Good) => vec![1.0, -v * ap, pf],
                (_, _) => vec![1.0, -v * ap],
            };
            poly = poly_mul(&poly, &local);
        }
        poly
    });
    Ok(LSeriesSpec { degree: 4, conductor: cond, gamma_shifts: vec![0.0, 0.0], sign: None, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_values() {
        // K_0(1) = 0.42102443824070833, K_0(0.1) = 2.4270690247020166
        assert!(libm::fabs(bessel_k0(1.0) - 0.421_024_438_240_708_3) < 1e-14);
        assert!(libm::fabs(bessel_k0(0.1) - 2.427_069_024_702_016_6) < 1e-13);
    }

    #[test]
    fn exponential_weights() {
        // G(1, x) = exp(-x) and G(2, x) = (1 + x) exp(-x) for k = 1
        let t = WeightTable::new(1, 1.0, 0);
        let u = WeightTable::new(1, 2.0, 0);
        for x in [0.01, 0.3, 1.0, 4.5, 20.0] {
            assert!(libm::fabs(t.eval(x) / libm::exp(-x) - 1.0) < 1e-12, "{x}");
            assert!(libm::fabs(u.eval(x) / ((1.0 + x) * libm::exp(-x)) - 1.0) < 1e-12, "{x}");
        }
    }

    #[test]
    fn bessel_weights() {
        // G(1, x) = int_x^oo 2 K_0(2 sqrt u) du = 2 sqrt(x) K_1(2 sqrt x); at x = 1: 2 K_1(2)
        let t = WeightTable::new(2, 1.0, 0);
        assert!(libm::fabs(t.eval(1.0) - 2.0 * 0.139_865_881_816_522_4) < 1e-12);
        // G(1, 0) = Gamma(1)^2
        assert!(libm::fabs(t.eval(1e-9) - 1.0) < 1e-6);
    }
}
