//! Small integer helpers: primality, factoring, Kronecker symbols, square roots mod p.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Limits for [`factor_with`].
#[derive(Clone, Copy, Debug)]
pub struct FactorBudget {
    pub trial_limit: u64,
    pub rho_steps: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { trial_limit: 1_000_000, rho_steps: 5_000_000 }
    }
}

pub fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a as i128, b as i128) as u64
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd_u64(a, b) * b
    }
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g == 1 {
        Some(x.rem_euclid(m))
    } else {
        None
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}

fn rho(n: u64, steps: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut used = 0u64;
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
            used += 1;
            if used > steps {
                return None;
            }
        }
        if d != n {
            return Some(d);
        }
    }
    None
}

/// Prime factorization `[(p, e)]`, sorted by `p`.
pub fn factor(n: u128) -> Result<Vec<(u64, u32)>> {
    factor_with(n, FactorBudget::default())
}

pub fn factor_with(n: u128, budget: FactorBudget) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p <= budget.trial_limit && (p as u128) * (p as u128) <= m {
        if m % p as u128 == 0 {
            let mut e = 0;
            while m % p as u128 == 0 {
                m /= p as u128;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        if m > u64::MAX as u128 {
            return Err(Error::FactorizationBudgetExceeded(n));
        }
        let mut stack = vec![m as u64];
        while let Some(k) = stack.pop() {
            if k == 1 {
                continue;
            }
            if is_prime(k) {
                match out.iter_mut().find(|(q, _)| *q == k) {
                    Some(entry) => entry.1 += 1,
                    None => out.push((k, 1)),
                }
                continue;
            }
            let d = rho(k, budget.rho_steps).ok_or(Error::FactorizationBudgetExceeded(n))?;
            stack.push(d);
            stack.push(k / d);
        }
    }
    out.sort();
    Ok(out)
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n as u128).map(|f| f.into_iter().map(|(p, _)| p).collect()).unwrap_or_default()
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor(n as u128).map(|f| f.iter().all(|&(_, e)| e == 1)).unwrap_or(false)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = libm::sqrt(n as f64) as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = isqrt(n as u128);
        r * r == n as u128
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n as u128).unwrap_or_default() {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort();
    ds
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i128, n: i128) -> i8 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol for an odd prime `p`.
pub fn legendre(a: i128, p: u64) -> i8 {
    jacobi(a, p as i128)
}

/// Kronecker symbol `(d/n)`.
pub fn kronecker(d: i128, n: i128) -> i8 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut res = 1i8;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            res = -res;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        n >>= v;
    }
    res * jacobi(d, n)
}

/// A square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod(a: i128, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i128) as u64;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a as i128, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z as i128, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Dedekind psi: `n * prod_{p | n} (1 + 1/p)`.
pub fn psi(n: u64) -> u64 {
    let mut r = n;
    for p in prime_divisors(n) {
        r = r / p * (p + 1);
    }
    r
}

pub fn euler_phi(n: u64) -> u64 {
    let mut r = n;
    for p in prime_divisors(n) {
        r = r / p * (p - 1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        assert_eq!(factor(360).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor(1).unwrap(), vec![]);
        let big = 1_000_003u128 * 1_000_033u128;
        assert_eq!(factor(big).unwrap(), vec![(1_000_003, 1), (1_000_033, 1)]);
    }

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(kronecker(12, 3), 0);
    }

    #[test]
    fn tonelli() {
        for p in primes_up_to(200).into_iter().skip(1) {
            for a in 1..p {
                if let Some(r) = sqrt_mod(a as i128, p) {
                    assert_eq!(mul_mod(r, r, p), a);
                }
            }
        }
    }
}
