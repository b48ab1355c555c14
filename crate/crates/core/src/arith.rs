//! Exact integer arithmetic on magnitudes below 2^127: factorization,
//! valuations, Legendre symbols and square classes of Q*.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Upper end of the shared prime table used for trial division.
pub const SIEVE_LIMIT: u32 = 100_000;

/// Primes up to [`SIEVE_LIMIT`], built once and shared read-only.
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(SIEVE_LIMIT))
}

fn sieve(limit: u32) -> Vec<u32> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// A nonzero integer written as `sign * prod p^e`.
///
/// Primes are strictly increasing and every exponent is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    sign: i8,
    factors: Vec<(u128, u32)>,
}

impl FactoredInteger {
    /// Builds a factorization from parts, checking every invariant.
    pub fn new(sign: i8, factors: Vec<(u128, u32)>) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Domain(format!("sign must be +1 or -1, got {sign}")));
        }
        let mut magnitude: u128 = 1;
        for (i, &(p, e)) in factors.iter().enumerate() {
            if e == 0 {
                return Err(Error::Domain(format!("exponent of {p} is zero")));
            }
            if i > 0 && factors[i - 1].0 >= p {
                return Err(Error::Domain("primes must be strictly increasing".into()));
            }
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            for _ in 0..e {
                magnitude = magnitude
                    .checked_mul(p)
                    .filter(|m| *m < 1u128 << 127)
                    .ok_or_else(|| Error::Overflow("factorization exceeds 2^127".into()))?;
            }
        }
        Ok(FactoredInteger { sign, factors })
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn valuation(&self, p: u128) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// The integer this factorization represents.
    pub fn value(&self) -> i128 {
        let m = self
            .factors
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * p.pow(e));
        self.sign as i128 * m as i128
    }

    /// Signed product of the primes that occur to an odd power.
    pub fn squarefree_part(&self) -> i128 {
        let m = self
            .factors
            .iter()
            .filter(|&&(_, e)| e % 2 == 1)
            .fold(1u128, |acc, &(p, _)| acc * p);
        self.sign as i128 * m as i128
    }
}

fn check_magnitude(n: i128) -> Result<u128> {
    if n == 0 {
        return Err(Error::Zero);
    }
    if n == i128::MIN {
        return Err(Error::Overflow("|n| must be below 2^127".into()));
    }
    Ok(n.unsigned_abs())
}

/// Exact factorization of a nonzero integer with |n| < 2^127.
pub fn factor(n: i128) -> Result<FactoredInteger> {
    let mut m = check_magnitude(n)?;
    let mut factors = Vec::new();
    let mut exhausted = true;
    if m <= u32::MAX as u128 {
        let mut m32 = m as u32;
        for &p in small_primes() {
            if (p as u64) * (p as u64) > m32 as u64 {
                exhausted = false;
                break;
            }
            if m32.is_multiple_of(p) {
                let mut e = 0;
                while m32.is_multiple_of(p) {
                    m32 /= p;
                    e += 1;
                }
                factors.push((p as u128, e));
            }
        }
        m = m32 as u128;
    } else {
        for &p in small_primes() {
            let p = p as u128;
            if p * p > m {
                exhausted = false;
                break;
            }
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
    }
    if m > 1 {
        let limit = SIEVE_LIMIT as u128;
        if !exhausted || m < limit * limit {
            factors.push((m, 1));
        } else {
            let mut large = Vec::new();
            split_large(m, &mut large);
            large.sort_unstable();
            for p in large {
                match factors.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    Ok(FactoredInteger {
        sign: if n < 0 { -1 } else { 1 },
        factors,
    })
}

fn split_large(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_large(d, out);
    split_large(n / d, out);
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // m < 2^127 so a sum of two residues never overflows.
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

pub(crate) fn powmod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin. Deterministic below 2^64; above that the fixed base set
/// makes the answer reproducible but only probabilistic.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let rounds = if n <= u64::MAX as u128 { 12 } else { BASES.len() };
    'witness: for &a in &BASES[..rounds] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; the increment constant is bumped until
/// a proper divisor appears. `n` must be an odd composite.
fn pollard_brent(n: u128) -> u128 {
    let step = |x: u128, c: u128| (mulmod(x, x, n) + c) % n;
    let diff = |a: u128, b: u128| a.abs_diff(b);
    for c in 1u128.. {
        let (mut y, mut r, mut q, mut g) = (2u128, 1u64, 1u128, 1u128);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..128.min(r - k) {
                    y = step(y, c);
                    q = mulmod(q, diff(x, y), n);
                }
                g = gcd_u128(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys, c);
                g = gcd_u128(diff(x, ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho increment space exhausted")
}

/// Largest k with p^k | n.
pub fn ord_p(n: i128, p: u128) -> Result<u32> {
    let mut m = check_magnitude(n)?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(valuation_unchecked(&mut m, p))
}

/// Strips p from `m` in place and returns how many times it divided.
pub(crate) fn valuation_unchecked(m: &mut u128, p: u128) -> u32 {
    let mut k = 0;
    while (*m).is_multiple_of(p) {
        *m /= p;
        k += 1;
    }
    k
}

/// Jacobi symbol (a/n) for odd n >= 1.
pub(crate) fn jacobi(a: i128, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let n128 = n as i128;
    let mut a = (a.rem_euclid(n128)) as u64;
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i128, p: u64) -> Result<i8> {
    if p == 2 || !is_prime(p as u128) {
        return Err(Error::NotOddPrime(p as u128));
    }
    Ok(jacobi(a, p))
}

/// The squarefree d with n/d a positive square.
pub fn squarefree_part(n: i128) -> Result<i128> {
    Ok(factor(n)?.squarefree_part())
}

/// Every `±prod S` for S a subset of the distinct primes of n, sorted.
pub fn signed_squarefree_divisors(n: i128) -> Result<Vec<i128>> {
    let f = factor(n)?;
    let mut out = vec![1i128];
    for p in f.primes() {
        let p = i128::try_from(p).map_err(|_| Error::Overflow(format!("prime {p}")))?;
        let extra: Vec<i128> = out.iter().map(|d| d * p).collect();
        out.extend(extra);
    }
    let negatives: Vec<i128> = out.iter().map(|d| -d).collect();
    out.extend(negatives);
    out.sort_unstable();
    Ok(out)
}

/// Floor square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// True iff n is a perfect square (0 included).
pub fn is_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt(n as u128);
    r * r == n as u128
}
