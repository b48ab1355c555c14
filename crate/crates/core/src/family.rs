//! The family E(X): curves y^2 = x^3 + Ax^2 + Bx with |A| <= X, B^2 <= X,
//! nonsingular and with no prime p such that p^2 | A and p^4 | B.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{factor, is_prime, isqrt};
use crate::error::{Error, Result};

/// zeta(6) = pi^6 / 945.
pub const ZETA_6: f64 = std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    / 945.0;

/// A member of the family together with its 2-isogenous partner
/// y^2 = x^3 - 2Ax^2 + (A^2 - 4B)x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurvePair {
    pub a: i64,
    pub b: i64,
    pub dual_a: i64,
    pub dual_b: i64,
    /// 16 B^2 (A^2 - 4B).
    pub disc: i128,
    /// A^2 - 4B is a nonzero square, so E has full rational 2-torsion.
    pub two_torsion_full: bool,
}

impl CurvePair {
    /// Validates nonsingularity and minimality away from 2.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        let c = Self::unchecked(a, b)?;
        if let Some(m) = nonminimal_moduli(b).into_iter().find(|&m| a % m == 0) {
            return Err(Error::NonMinimal {
                p: isqrt(m as u128) as u64,
            });
        }
        Ok(c)
    }

    fn unchecked(a: i64, b: i64) -> Result<Self> {
        let (dual_a, dual_b) = dual_coefficients(a, b)?;
        let disc = 16 * (b as i128) * (b as i128) * dual_b as i128;
        Ok(CurvePair {
            a,
            b,
            dual_a,
            dual_b,
            disc,
            two_torsion_full: dual_b > 0 && crate::arith::is_square(dual_b as i128),
        })
    }

    /// A^2 - 4B.
    pub fn disc_factor(&self) -> i64 {
        self.dual_b
    }
}

/// Coefficients (-2A, A^2 - 4B) of the 2-isogenous curve.
pub fn dual_coefficients(a: i64, b: i64) -> Result<(i64, i64)> {
    let dual_b = (a as i128) * (a as i128) - 4 * b as i128;
    if b == 0 || dual_b == 0 {
        return Err(Error::Singular { a, b });
    }
    let dual_a = a
        .checked_mul(-2)
        .ok_or_else(|| Error::Overflow(format!("-2 * {a}")))?;
    let dual_b = i64::try_from(dual_b).map_err(|_| Error::Overflow(format!("{a}^2 - 4 * {b}")))?;
    Ok((dual_a, dual_b))
}

/// The moduli p^2 over primes p with p^4 | B; (A, B) is non-minimal iff one
/// of them divides A (A = 0 is divisible by all of them).
pub fn nonminimal_moduli(b: i64) -> Vec<i64> {
    if b == 0 {
        return Vec::new();
    }
    factor(b as i128)
        .expect("nonzero")
        .factors()
        .iter()
        .filter(|&&(_, e)| e >= 4)
        .map(|&(p, _)| (p * p) as i64)
        .collect()
}

/// Membership in E(X).
pub fn is_member(a: i64, b: i64, x: u64) -> bool {
    let x = x as i128;
    if (a as i128).abs() > x || (b as i128) * (b as i128) > x || b == 0 {
        return false;
    }
    if (a as i128) * (a as i128) == 4 * b as i128 {
        return false;
    }
    nonminimal_moduli(b).iter().all(|&m| a % m != 0)
}

/// A height box of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyWindow {
    pub x: u64,
    pub include_square_disc: bool,
}

impl FamilyWindow {
    pub fn new(x: u64) -> Self {
        FamilyWindow {
            x,
            include_square_disc: true,
        }
    }

    pub fn excluding_square_disc(x: u64) -> Self {
        FamilyWindow {
            x,
            include_square_disc: false,
        }
    }

    /// The B values of the window in enumeration order.
    pub fn stripes(&self) -> Vec<i64> {
        let bmax = isqrt(self.x as u128) as i64;
        (-bmax..=bmax).filter(|&b| b != 0).collect()
    }

    /// Members with a fixed B, in increasing A.
    pub fn stripe(&self, b: i64) -> impl Iterator<Item = CurvePair> {
        let x = self.x as i64;
        let moduli = nonminimal_moduli(b);
        let include = self.include_square_disc;
        let in_range = b != 0 && (b as i128) * (b as i128) <= self.x as i128;
        let x = if in_range { x } else { -1 };
        (-x..=x).filter_map(move |a| {
            if moduli.iter().any(|&m| a % m == 0) {
                return None;
            }
            let c = CurvePair::unchecked(a, b).ok()?;
            (include || !c.two_torsion_full).then_some(c)
        })
    }

    /// All members in lexicographic (B, A) order.
    pub fn iter(&self) -> impl Iterator<Item = CurvePair> + '_ {
        self.stripes().into_iter().flat_map(move |b| self.stripe(b))
    }
}

/// Exact #E(X) by inclusion-exclusion over each stripe, and the main term
/// 4 X^{3/2} / zeta(6).
pub fn count_window(x: u64) -> (u64, f64) {
    let window = FamilyWindow::new(x);
    let xi = x as i128;
    let mut count: u64 = 0;
    for b in window.stripes() {
        let moduli = nonminimal_moduli(b);
        // A in [-X, X] divisible by m: 2 floor(X/m) + 1.
        let mut nonminimal: i128 = 0;
        for mask in 1u32..(1 << moduli.len()) {
            let m: i128 = (0..moduli.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| moduli[i] as i128)
                .product();
            let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
            nonminimal += sign * (2 * (xi / m) + 1);
        }
        let mut singular = 0;
        if b > 0 {
            let r = isqrt(b as u128) as i64;
            if r * r == b {
                for a in [-2 * r, 2 * r] {
                    if (a as i128).abs() <= xi && moduli.iter().all(|&m| a % m != 0) {
                        singular += 1;
                    }
                }
            }
        }
        count += (2 * xi + 1 - nonminimal - singular) as u64;
    }
    (count, predicted_count(x))
}

pub fn predicted_count(x: u64) -> f64 {
    4.0 * (x as f64).powf(1.5) / ZETA_6
}

fn ratio(n: u128, d: u128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Limiting density of {(A, B) = (a, b) mod q} in E(X), for squarefree q.
pub fn density_delta(q: u64, a: i64, b: i64) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::NotSquarefree(0));
    }
    let f = factor(q as i128)?;
    if f.factors().iter().any(|&(_, e)| e > 1) {
        return Err(Error::NotSquarefree(q));
    }
    let mut acc = ratio(1, 1);
    for p in f.primes() {
        let p4 = p.pow(4);
        let p6 = p.pow(6);
        let pi = p as i64;
        let local = if a % pi != 0 || b % pi != 0 {
            ratio(p4, p6 - 1)
        } else {
            ratio(p4 - 1, p6 - 1)
        };
        acc *= local;
    }
    Ok(acc)
}

/// rho(p) = (p^5 - 1)/(p^6 - 1): the density of p | B, and of p | A^2 - 4B.
pub fn density_rho(p: u64) -> Result<BigRational> {
    if p == 2 || !is_prime(p as u128) {
        return Err(Error::NotOddPrime(p as u128));
    }
    let p = p as u128;
    Ok(ratio(p.pow(5) - 1, p.pow(6) - 1))
}

/// (p^4 - 1)/(p^6 - 1): the density of p dividing both B and A^2 - 4B.
pub fn density_both(p: u64) -> Result<BigRational> {
    if p == 2 || !is_prime(p as u128) {
        return Err(Error::NotOddPrime(p as u128));
    }
    let p = p as u128;
    Ok(ratio(p.pow(4) - 1, p.pow(6) - 1))
}

/// Counts of members in each residue class (a, b) mod m, indexed a*m + b.
pub fn residue_class_counts(window: &FamilyWindow, m: u64) -> (Vec<u64>, u64) {
    let mi = m as i64;
    let mut counts = vec![0u64; (m * m) as usize];
    let mut total = 0;
    for c in window.iter() {
        let (ra, rb) = (c.a.rem_euclid(mi), c.b.rem_euclid(mi));
        counts[(ra * mi + rb) as usize] += 1;
        total += 1;
    }
    (counts, total)
}
