//! Prime-field arithmetic and low-degree polynomials over F_p.
//!
//! Polynomials are coefficient vectors in ascending order with no trailing
//! zeros; the zero polynomial is the empty vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::jacobi;

/// Below this bound residues are enumerated instead of factored.
pub(crate) const ENUMERATION_LIMIT: u64 = 64;

pub(crate) type Poly = Vec<u64>;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Fp {
    pub p: u64,
    enumeration_limit: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        Fp::with_enumeration_limit(p, ENUMERATION_LIMIT)
    }

    /// Residues are enumerated for p below `limit` (never below 17, where
    /// the Weil shortcut in [`Fp::takes_nonzero_square`] stops being valid).
    pub fn with_enumeration_limit(p: u64, limit: u64) -> Self {
        Fp {
            p,
            enumeration_limit: limit.max(17),
        }
    }

    pub fn residue(&self, a: &BigInt) -> u64 {
        let r = a % BigInt::from(self.p);
        let r = if r.is_negative() { r + self.p } else { r };
        r.to_u64().expect("residue fits in u64")
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.p as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.p - b % self.p)
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a % self.p) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.p));
        self.pow(a, self.p - 2)
    }

    /// Legendre symbol of a residue.
    pub fn chi(&self, a: u64) -> i8 {
        jacobi(a as i128, self.p)
    }

    pub fn trim(&self, mut f: Poly) -> Poly {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn reduce_big(&self, coeffs: &[BigInt]) -> Poly {
        self.trim(coeffs.iter().map(|c| self.residue(c)).collect())
    }

    pub fn eval(&self, f: &[u64], x: u64) -> u64 {
        f.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &[u64]) -> Poly {
        let d = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| self.mul(c, i as u64 % self.p))
            .collect();
        self.trim(d)
    }

    pub fn monic(&self, f: &[u64]) -> Poly {
        let lead = *f.last().expect("nonzero polynomial");
        let li = self.inv(lead);
        f.iter().map(|&c| self.mul(c, li)).collect()
    }

    /// Quotient and remainder of f by a nonzero g.
    pub fn divrem(&self, f: &[u64], g: &[u64]) -> (Poly, Poly) {
        let g = self.trim(g.to_vec());
        assert!(!g.is_empty(), "division by zero polynomial");
        let mut r = self.trim(f.to_vec());
        if r.len() < g.len() {
            return (Vec::new(), r);
        }
        let li = self.inv(*g.last().unwrap());
        let mut q = vec![0; r.len() - g.len() + 1];
        while r.len() >= g.len() {
            let shift = r.len() - g.len();
            let c = self.mul(*r.last().unwrap(), li);
            q[shift] = c;
            for (i, &gc) in g.iter().enumerate() {
                r[shift + i] = self.sub(r[shift + i], self.mul(c, gc));
            }
            r = self.trim(r);
        }
        (self.trim(q), r)
    }

    pub fn rem(&self, f: &[u64], g: &[u64]) -> Poly {
        self.divrem(f, g).1
    }

    pub fn mul_poly(&self, f: &[u64], g: &[u64]) -> Poly {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; f.len() + g.len() - 1];
        for (i, &a) in f.iter().enumerate() {
            for (j, &b) in g.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(a, b));
            }
        }
        self.trim(out)
    }

    pub fn gcd(&self, f: &[u64], g: &[u64]) -> Poly {
        let (mut a, mut b) = (self.trim(f.to_vec()), self.trim(g.to_vec()));
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        if a.is_empty() {
            a
        } else {
            self.monic(&a)
        }
    }

    /// base^e mod m.
    pub fn powmod_poly(&self, base: &[u64], mut e: u64, m: &[u64]) -> Poly {
        let mut acc = self.rem(&[1], m);
        let mut b = self.rem(base, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.rem(&self.mul_poly(&acc, &b), m);
            }
            b = self.rem(&self.mul_poly(&b, &b), m);
            e >>= 1;
        }
        acc
    }

    /// Distinct roots of a nonzero polynomial, ascending.
    pub fn roots(&self, f: &[u64]) -> Vec<u64> {
        let f = self.trim(f.to_vec());
        if f.len() <= 1 {
            return Vec::new();
        }
        let mut out = if self.p < self.enumeration_limit {
            (0..self.p).filter(|&x| self.eval(&f, x) == 0).collect()
        } else {
            // gcd(f, x^p - x) is the product of the distinct linear factors.
            let xp = self.powmod_poly(&[0, 1], self.p, &f);
            let mut xp_minus_x = xp;
            xp_minus_x.resize(xp_minus_x.len().max(2), 0);
            xp_minus_x[1] = self.sub(xp_minus_x[1], 1);
            let split = self.gcd(&f, &self.trim(xp_minus_x));
            let mut out = Vec::new();
            self.split_linear(&split, &mut out);
            out
        };
        out.sort_unstable();
        out
    }

    /// Splits a monic product of distinct linear factors (Cantor-Zassenhaus
    /// with deterministic shifts).
    fn split_linear(&self, g: &[u64], out: &mut Vec<u64>) {
        match g.len() {
            0 | 1 => {}
            2 => out.push(self.neg(self.mul(g[0], self.inv(g[1])))),
            _ => {
                let half = (self.p - 1) / 2;
                for delta in 0..self.p {
                    let mut h = self.powmod_poly(&[delta, 1], half, g);
                    if h.is_empty() {
                        continue;
                    }
                    h[0] = self.sub(h[0], 1);
                    let h = self.trim(h);
                    let d = self.gcd(g, &h);
                    if d.len() > 1 && d.len() < g.len() {
                        let (q, _) = self.divrem(g, &d);
                        self.split_linear(&d, out);
                        self.split_linear(&self.monic(&q), out);
                        return;
                    }
                }
                unreachable!("no splitting shift found");
            }
        }
    }

    /// Whether f(x) is a nonzero square for some x in F_p.
    ///
    /// For p > 16 and f not a constant times a square, the Weil bound
    /// |sum chi(f(x))| <= 3 sqrt(p) forces a nonzero square value when
    /// deg f <= 4.
    pub fn takes_nonzero_square(&self, f: &[u64]) -> bool {
        let f = self.trim(f.to_vec());
        if f.is_empty() {
            return false;
        }
        if self.p < self.enumeration_limit || f.len() > 5 {
            return (0..self.p).any(|x| self.chi(self.eval(&f, x)) == 1);
        }
        match self.square_cofactor(&f) {
            Some(c) => self.chi(c) == 1,
            None => true,
        }
    }

    /// If f = c * s^2 with s monic, returns c.
    pub fn square_cofactor(&self, f: &[u64]) -> Option<u64> {
        let lead = *f.last()?;
        let m = self.monic(f);
        match m.len() {
            1 => Some(lead),
            3 => {
                let s0 = self.mul(m[1], self.inv(2));
                (self.mul(s0, s0) == m[0]).then_some(lead)
            }
            5 => {
                let s1 = self.mul(m[3], self.inv(2));
                let s0 = self.mul(self.sub(m[2], self.mul(s1, s1)), self.inv(2));
                let ok = self.mul(2, self.mul(s1, s0)) == m[1] && self.mul(s0, s0) == m[0];
                ok.then_some(lead)
            }
            _ => None,
        }
    }
}

/// Smallest positive quadratic nonresidue modulo an odd prime.
pub(crate) fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| jacobi(n as i128, p) == -1).expect("odd prime has a nonresidue")
}

/// The p-adic valuation of a nonzero big integer.
pub(crate) fn big_valuation(x: &BigInt, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}
