//! Q_p-solvability of d w^2 = d^2 u^4 + a d u^2 v^2 + b v^4.
//!
//! Multiplying by d, a point exists iff
//! F(u, v) = d^3 u^4 + a d^2 u^2 v^2 + b d v^4 takes a value in (Q_p^*)^2 or 0 at a primitive (u, v). The two
//! charts (1, t) with t in Z_p and (t, 1) with t in pZ_p cover P^1(Q_p).

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::TorsorQuartic;
use crate::error::{Error, Result};
use crate::fp::{big_valuation, Fp};

/// Extra refinement levels beyond ord_2 of the quartic's discriminant.
pub const TWO_ADIC_SLACK: u32 = 6;
/// Extra recursion levels beyond ord_p of the discriminant, p odd.
pub const ODD_SLACK: u32 = 4;

/// ord_p of 16 c4 c0 (c2^2 - 4 c4 c0)^2.
fn disc_valuation(t: &TorsorQuartic, p: u64) -> u32 {
    let [c4, c2, c0] = t.binary_coefficients();
    let inner = &c2 * &c2 - BigInt::from(4) * &c4 * &c0;
    let disc = BigInt::from(16) * &c4 * &c0 * &inner * &inner;
    big_valuation(&disc, p)
}

/// [d^3, a d^2, b d] mod 2^128 and ord_2 of the discriminant,
/// 4 + 12 ord(d) + ord(b) + 2 ord(a^2 - 4b).
fn two_adic_data(t: &TorsorQuartic) -> ([u128; 3], u32) {
    let (d, a, b) = (t.d as u128, t.a as u128, t.b as u128);
    let inner = a.wrapping_mul(a).wrapping_sub(b.wrapping_mul(4));
    let disc_ord = 4 + 12 * ord2(d) + ord2(b) + 2 * ord2(inner);
    let c4 = d.wrapping_mul(d).wrapping_mul(d);
    let c2 = a.wrapping_mul(d).wrapping_mul(d);
    ([c4, c2, b.wrapping_mul(d)], disc_ord)
}

pub(crate) fn solvable_two_adic(t: &TorsorQuartic) -> Result<bool> {
    let ([c4, c2, c0], disc_ord) = two_adic_data(t);
    let cap = (disc_ord + TWO_ADIC_SLACK).min(120);
    let x_chart = [c4, 0, c2, 0, c0];
    let y_chart = [c0, 0, c2, 0, c4];
    Ok(refine(&x_chart, 0, 0, cap)? || refine(&y_chart, 0, 1, cap)?)
}

fn ord2(x: u128) -> u32 {
    x.trailing_zeros()
}

/// Coefficients of g(c + s) mod 2^128.
fn taylor(g: &[u128; 5], c: u128) -> [u128; 5] {
    let mut h = *g;
    for i in 0..4 {
        for j in (i..4).rev() {
            h[j] = h[j].wrapping_add(c.wrapping_mul(h[j + 1]));
        }
    }
    h
}

/// Whether g takes a value in Q_2^2 or 0 on c + 2^k Z_2.
fn refine(g: &[u128; 5], c: u128, k: u32, cap: u32) -> Result<bool> {
    let t = taylor(g, c);
    let mu = ord2(t[1]);
    if t[0] == 0 {
        // g(c) = 0 mod 2^128: only a Hensel root in the disc decides.
        if 128 > 2 * mu && 128 - mu >= k {
            return Ok(true);
        }
        return Err(Error::PrecisionExhausted { p: 2, precision: 128 });
    }
    let lambda = ord2(t[0]);
    if lambda + 3 > 128 {
        return Err(Error::PrecisionExhausted { p: 2, precision: 128 });
    }
    if lambda.is_multiple_of(2) && (t[0] >> lambda) & 7 == 1 {
        return Ok(true);
    }
    let spread = (1..5).map(|j| ord2(t[j]) + j as u32 * k).min().unwrap();
    if spread >= lambda + 3 {
        // Every value on the disc is g(c) times a square.
        return Ok(false);
    }
    if lambda > 2 * mu && lambda - mu >= k {
        return Ok(true);
    }
    if k >= cap {
        return Err(Error::PrecisionExhausted { p: 2, precision: k });
    }
    Ok(refine(g, c, k + 1, cap)? || refine(g, c | (1u128 << k), k + 1, cap)?)
}

pub(crate) fn solvable_odd(t: &TorsorQuartic, p: u64) -> Result<bool> {
    solvable_odd_with(t, Fp::new(p))
}

pub(crate) fn solvable_odd_with(t: &TorsorQuartic, fp: Fp) -> Result<bool> {
    let p = fp.p;
    let cap = disc_valuation(t, p) + ODD_SLACK;
    let [c4, c2, c0] = t.binary_coefficients();
    let pb = BigInt::from(p);
    let z = BigInt::zero();
    let x_chart = vec![c4.clone(), z.clone(), c2.clone(), z.clone(), c0.clone()];
    let y_chart = vec![c0, z.clone(), c2 * &pb * &pb, z, c4 * pb.pow(4)];
    Ok(square_value(&fp, x_chart, 0, 0, cap)? || square_value(&fp, y_chart, 0, 0, cap)?)
}

/// Whether h takes a value in p^parity (Q_p^*)^2 or 0 on Z_p.
fn square_value(fp: &Fp, h: Vec<BigInt>, parity: u32, depth: u32, cap: u32) -> Result<bool> {
    let p = fp.p;
    let kappa = h
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| big_valuation(c, p))
        .min()
        .ok_or_else(|| Error::Invariant("zero polynomial in local search".into()))?;
    let pk = BigInt::from(p).pow(kappa);
    let h: Vec<BigInt> = h.into_iter().map(|c| c / &pk).collect();
    let parity = (parity + kappa) % 2;
    let hbar = fp.reduce_big(&h);
    if parity == 0 && fp.takes_nonzero_square(&hbar) {
        return Ok(true);
    }
    // Residues with a unit value are decided: a nonsquare unit, or an even
    // valuation where an odd one is needed. Only roots of hbar remain.
    if hbar.len() <= 1 {
        return Ok(false);
    }
    let dh = fp.derivative(&hbar);
    for r in fp.roots(&hbar) {
        if fp.eval(&dh, r) != 0 {
            // A simple root lifts to an exact zero.
            return Ok(true);
        }
        if depth >= cap {
            return Err(Error::PrecisionExhausted { p, precision: depth });
        }
        if square_value(fp, shift_scale(&h, r, p), parity, depth + 1, cap)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Coefficients of h(r + p s).
fn shift_scale(h: &[BigInt], r: u64, p: u64) -> Vec<BigInt> {
    let r = BigInt::from(r);
    let mut g = h.to_vec();
    let n = g.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            let next = g[j + 1].clone();
            g[j] += &r * next;
        }
    }
    let pb = BigInt::from(p);
    let mut scale = BigInt::from(1);
    for c in g.iter_mut() {
        *c *= &scale;
        scale *= &pb;
    }
    g
}

/// Real solvability: for d < 0 the quadratic d^2 s^2 + a d s + b must be
/// <= 0 somewhere on s >= 0.
pub(crate) fn solvable_real(t: &TorsorQuartic) -> bool {
    if t.d > 0 {
        return true;
    }
    let (a, b, d) = (BigInt::from(t.a), BigInt::from(t.b), BigInt::from(t.d));
    !b.is_positive() || ((&a * &d).is_negative() && &a * &a >= BigInt::from(4) * &b)
}
