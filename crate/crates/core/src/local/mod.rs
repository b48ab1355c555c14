//! Reduction types at odd primes, local image sizes, and the local-factor
//! ledger whose exponents sum to t(A, B).

pub mod tate;

use std::fmt;

use crate::arith::{factor, is_prime, jacobi};
use crate::descent::{self, Side};
use crate::error::{Error, Result};
use crate::family::{dual_coefficients, CurvePair};

pub use tate::{reduction_of, tate_odd, Kodaira, LocalReduction};

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Place {
    /// |Q_v^* / (Q_v^*)^2|.
    pub fn square_class_count(self) -> u32 {
        match self {
            Place::Infinity => 2,
            Place::Prime(2) => 8,
            Place::Prime(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionType {
    Good,
    Additive,
    MultiplicativeSplit,
    MultiplicativeNonsplit,
}

impl ReductionType {
    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            ReductionType::MultiplicativeSplit | ReductionType::MultiplicativeNonsplit
        )
    }
}

fn check_odd_prime(p: u64, what: &'static str) -> Result<()> {
    if p == 2 {
        return Err(Error::EvenPrime(what));
    }
    if !is_prime(p as u128) {
        return Err(Error::NotOddPrime(p as u128));
    }
    Ok(())
}

fn ord(n: i128, p: u64) -> u32 {
    let mut m = n.unsigned_abs();
    crate::arith::valuation_unchecked(&mut m, p as u128)
}

/// Reduction type at an odd prime.
///
/// At p | A^2 - 4B the node is at x = -A/2 with tangent slopes squared
/// equal to -A/2 (B is a square mod p there, so chi(-2AB) = chi(-A/2)).
/// At p | B the node is at x = 0 with tangent slopes squared equal to A.
pub fn classify_reduction(a: i64, b: i64, p: u64) -> Result<ReductionType> {
    check_odd_prime(p, "classify_reduction")?;
    let (_, disc) = dual_coefficients(a, b)?;
    let pi = p as i128;
    let (in_b, in_disc) = (b as i128 % pi == 0, disc as i128 % pi == 0);
    Ok(match (in_b, in_disc) {
        (false, false) => ReductionType::Good,
        (true, true) => ReductionType::Additive,
        (false, true) => split_type(jacobi(-2 * a as i128 * b as i128, p)),
        (true, false) => split_type(jacobi(a as i128, p)),
    })
}

fn split_type(symbol: i8) -> ReductionType {
    if symbol == 1 {
        ReductionType::MultiplicativeSplit
    } else {
        ReductionType::MultiplicativeNonsplit
    }
}

/// Kodaira indices (n, n') of E and E' at a multiplicative prime.
pub fn kodaira_indices(a: i64, b: i64, p: u64) -> Result<(u32, u32)> {
    if !classify_reduction(a, b, p)?.is_multiplicative() {
        return Err(Error::NotMultiplicative { a, b, p });
    }
    let (_, disc) = dual_coefficients(a, b)?;
    let (od, ob) = (ord(disc as i128, p), ord(b as i128, p));
    Ok((od + 2 * ob, 2 * od + ob))
}

/// |H^1_phi(Q_p)| = 2 c'_p / c_p at a multiplicative prime.
pub fn mult_factor(a: i64, b: i64, p: u64) -> Result<u32> {
    let kind = classify_reduction(a, b, p)?;
    if !kind.is_multiplicative() {
        return Err(Error::NotMultiplicative { a, b, p });
    }
    let (_, disc) = dual_coefficients(a, b)?;
    Ok(mult_size(a, b, p, ord(b as i128, p), ord(disc as i128, p)))
}

/// The multiplicative table given ord_p B and ord_p(A^2 - 4B), exactly one
/// of which is positive.
fn mult_size(a: i64, b: i64, p: u64, ord_b: u32, ord_disc: u32) -> u32 {
    if ord_disc > 0 {
        let split = jacobi(-2 * a as i128 * b as i128, p) == 1;
        if ord_disc % 2 == 1 || split {
            4
        } else {
            2
        }
    } else {
        let split = jacobi(a as i128, p) == 1;
        if ord_b % 2 == 1 || split {
            1
        } else {
            2
        }
    }
}

/// c_p of y^2 = x^3 + Ax^2 + Bx by Tate's algorithm.
pub fn tamagawa_number(a: i64, b: i64, p: u64) -> Result<u32> {
    check_odd_prime(p, "tamagawa_number")?;
    dual_coefficients(a, b)?;
    Ok(reduction_of(a, b, p)?.tamagawa)
}

/// 2 c'_p / c_p from Tate's algorithm on both curves.
pub fn tamagawa_ratio_size(a: i64, b: i64, p: u64) -> Result<u32> {
    let (da, db) = dual_coefficients(a, b)?;
    let c = tamagawa_number(a, b, p)?;
    let c_dual = tamagawa_number(da, db, p)?;
    if (2 * c_dual) % c != 0 {
        return Err(Error::Invariant(format!(
            "2 c'/c = 2*{c_dual}/{c} is not an integer at p = {p} for ({a}, {b})"
        )));
    }
    let size = 2 * c_dual / c;
    if ![1, 2, 4].contains(&size) {
        return Err(Error::Invariant(format!(
            "local image size {size} at p = {p} for ({a}, {b})"
        )));
    }
    Ok(size)
}

/// |H^1_phi(R)|: the class -1 lies in the image iff B > 0 and
/// (A < 0 or A^2 < 4B).
pub fn factor_at_infinity(a: i64, b: i64) -> u32 {
    let (a, b) = (a as i128, b as i128);
    if b > 0 && (a < 0 || a * a < 4 * b) {
        2
    } else {
        1
    }
}

/// |H^1_phi(Q_2)| from 2-adic solvability of the eight class torsors.
pub fn factor_at_two(a: i64, b: i64) -> Result<u32> {
    Ok(descent::local_image(a, b, Place::Prime(2), Side::Phi)?.size())
}

/// How a ledger entry was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSource {
    Multiplicative(ReductionType),
    Additive,
    TwoAdic,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalFactor {
    pub place: Place,
    pub size: u32,
    /// log2(size) - 1.
    pub exponent: i32,
    pub source: FactorSource,
}

/// Per-place sizes |H^1_phi(Q_v)| for the bad odd primes (ascending), 2 and
/// infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFactorLedger {
    pub entries: Vec<LocalFactor>,
    pub total: i32,
    /// Sum over multiplicative odd primes.
    pub t_mult: i32,
    /// Sum over additive odd primes.
    pub t_add: i32,
    pub e_two: i32,
    pub e_inf: i32,
    pub n_additive: u32,
    /// #{odd p : p^2 | B or p^2 | A^2 - 4B}.
    pub square_heavy: u32,
}

fn exponent_of(size: u32) -> Result<i32> {
    if !size.is_power_of_two() || size > 8 {
        return Err(Error::Invariant(format!("local size {size} is not in {{1,2,4,8}}")));
    }
    Ok(size.trailing_zeros() as i32 - 1)
}

/// Assembles t(A, B) from the local sizes.
pub fn tamagawa_exponent(c: &CurvePair) -> Result<LocalFactorLedger> {
    let fb = factor(c.b as i128)?;
    let fd = factor(c.disc_factor() as i128)?;
    let mut primes: Vec<u64> = fb
        .primes()
        .chain(fd.primes())
        .filter(|&p| p != 2)
        .map(|p| p as u64)
        .collect();
    primes.sort_unstable();
    primes.dedup();

    let mut entries = Vec::with_capacity(primes.len() + 2);
    let (mut t_mult, mut t_add, mut n_additive, mut square_heavy) = (0, 0, 0, 0);
    for p in primes {
        let (vb, vd) = (fb.valuation(p as u128), fd.valuation(p as u128));
        if vb >= 2 || vd >= 2 {
            square_heavy += 1;
        }
        let additive = vb > 0 && vd > 0;
        let (size, source) = if additive {
            n_additive += 1;
            (tamagawa_ratio_size(c.a, c.b, p)?, FactorSource::Additive)
        } else {
            let size = mult_size(c.a, c.b, p, vb, vd);
            let split = if vd > 0 {
                jacobi(-2 * c.a as i128 * c.b as i128, p) == 1
            } else {
                jacobi(c.a as i128, p) == 1
            };
            (size, FactorSource::Multiplicative(split_type(split as i8 * 2 - 1)))
        };
        let exponent = exponent_of(size)?;
        if additive {
            t_add += exponent;
        } else {
            t_mult += exponent;
        }
        entries.push(LocalFactor {
            place: Place::Prime(p),
            size,
            exponent,
            source,
        });
    }
    let two = factor_at_two(c.a, c.b)?;
    let e_two = exponent_of(two)?;
    entries.push(LocalFactor {
        place: Place::Prime(2),
        size: two,
        exponent: e_two,
        source: FactorSource::TwoAdic,
    });
    let inf = factor_at_infinity(c.a, c.b);
    let e_inf = exponent_of(inf)?;
    entries.push(LocalFactor {
        place: Place::Infinity,
        size: inf,
        exponent: e_inf,
        source: FactorSource::Real,
    });
    Ok(LocalFactorLedger {
        total: t_mult + t_add + e_two + e_inf,
        entries,
        t_mult,
        t_add,
        e_two,
        e_inf,
        n_additive,
        square_heavy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_reduction(1, 3, 5).unwrap(), ReductionType::Good);
        assert_eq!(classify_reduction(3, 3, 3).unwrap(), ReductionType::Additive);
        assert_eq!(
            classify_reduction(1, 3, 3).unwrap(),
            ReductionType::MultiplicativeSplit
        );
        assert!(matches!(classify_reduction(1, 3, 2), Err(Error::EvenPrime(_))));
        assert!(classify_reduction(1, 3, 9).is_err());
    }

    #[test]
    fn kodaira_index_examples() {
        assert_eq!(kodaira_indices(1, 3, 3).unwrap(), (2, 1));
        assert_eq!(kodaira_indices(1, 3, 11).unwrap(), (1, 2));
        assert_eq!(kodaira_indices(1, 18, 3).unwrap(), (4, 2));
        assert!(kodaira_indices(1, 3, 5).is_err());
        assert!(kodaira_indices(3, 3, 3).is_err());
    }

    #[test]
    fn kodaira_indices_match_tate() {
        for (a, b, p) in [(1, 3, 3), (1, 3, 11), (1, 18, 3), (2, 9, 3), (1, 50, 5), (7, 2, 41)] {
            let (n, n_dual) = kodaira_indices(a, b, p).unwrap();
            let (da, db) = dual_coefficients(a, b).unwrap();
            assert_eq!(reduction_of(a, b, p).unwrap().kodaira, Kodaira::I(n));
            assert_eq!(reduction_of(da, db, p).unwrap().kodaira, Kodaira::I(n_dual));
        }
    }

    #[test]
    fn mult_factor_examples() {
        assert_eq!(mult_factor(1, 3, 11).unwrap(), 4);
        assert_eq!(mult_factor(1, 3, 3).unwrap(), 1);
        // I4 split on E, I2 split on E': 2 * 2 / 4.
        assert_eq!(mult_factor(1, 18, 3).unwrap(), 1);
        assert_eq!(tamagawa_ratio_size(1, 18, 3).unwrap(), 1);
        // A = 2 is a nonresidue mod 3: I4 and I2 both non-split.
        assert_eq!(mult_factor(2, 9, 3).unwrap(), 2);
        assert_eq!(tamagawa_ratio_size(2, 9, 3).unwrap(), 2);
    }

    #[test]
    fn tamagawa_examples() {
        assert_eq!(tamagawa_number(1, 3, 5).unwrap(), 1);
        assert_eq!(tamagawa_number(1, 3, 3).unwrap(), 2);
        assert_eq!(tamagawa_number(1, 3, 11).unwrap(), 1);
        assert!(tamagawa_number(1, 3, 2).is_err());
    }

    #[test]
    fn infinity_examples() {
        assert_eq!(factor_at_infinity(0, 1), 2);
        assert_eq!(factor_at_infinity(0, -1), 1);
        assert_eq!(factor_at_infinity(5, 1), 1);
        assert_eq!(factor_at_infinity(-5, 1), 2);
    }

    #[test]
    fn ledger_for_zero_one() {
        let l = tamagawa_exponent(&CurvePair::new(0, 1).unwrap()).unwrap();
        assert_eq!(l.total, 2);
        assert_eq!((l.e_two, l.e_inf), (2, 0));
        assert_eq!(l.entries.len(), 2);
    }

    #[test]
    fn ledger_for_one_three() {
        let l = tamagawa_exponent(&CurvePair::new(1, 3).unwrap()).unwrap();
        let odd: Vec<(Place, i32)> = l
            .entries
            .iter()
            .filter(|e| matches!(e.place, Place::Prime(p) if p != 2))
            .map(|e| (e.place, e.exponent))
            .collect();
        assert_eq!(odd, vec![(Place::Prime(3), -1), (Place::Prime(11), 1)]);
        assert_eq!(l.total, l.e_two + l.e_inf);
    }

    #[test]
    fn mult_factor_matches_tate_on_a_box() {
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                let Ok(c) = CurvePair::new(a, b) else { continue };
                let fb = factor(c.b as i128 * c.disc_factor() as i128).unwrap();
                for p in fb.primes().filter(|&p| p != 2) {
                    let p = p as u64;
                    if classify_reduction(a, b, p).unwrap().is_multiplicative() {
                        assert_eq!(
                            mult_factor(a, b, p).unwrap(),
                            tamagawa_ratio_size(a, b, p).unwrap(),
                            "({a}, {b}) at {p}"
                        );
                    }
                }
            }
        }
    }
}
