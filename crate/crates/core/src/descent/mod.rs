//! 2-isogeny descent: local images of the connecting maps and the Selmer
//! groups Sel_phi(E/Q), Sel_phihat(E'/Q), computed from quartic torsors.
//!
//! Sel_phi is cut out on the classes d | A^2 - 4B by torsors with the dual
//! coefficients (-2A, A^2 - 4B); Sel_phihat on d | B with (A, B).

mod padic;

use num_bigint::BigInt;

use crate::arith::{factor, is_prime, jacobi, squarefree_part};
use crate::error::{Error, Result};
use crate::fp::{least_nonresidue, Fp};
use crate::local::Place;

pub use padic::{ODD_SLACK, TWO_ADIC_SLACK};

/// The curve d w^2 = d^2 u^4 + a d u^2 v^2 + b v^4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorsorQuartic {
    d: i128,
    a: i128,
    b: i128,
}

impl TorsorQuartic {
    /// Requires d squarefree and a^2 - 4b, b nonzero.
    pub fn new(d: i128, a: i128, b: i128) -> Result<Self> {
        if d == 0 || b == 0 {
            return Err(Error::Zero);
        }
        if squarefree_part(d)? != d {
            return Err(Error::NotSquarefree(d.unsigned_abs() as u64));
        }
        let t = TorsorQuartic { d, a, b };
        if t.inner_disc() == BigInt::from(0) {
            return Err(Error::Domain(format!("a^2 = 4b for ({a}, {b})")));
        }
        Ok(t)
    }

    fn unchecked(d: i128, a: i128, b: i128) -> Self {
        TorsorQuartic { d, a, b }
    }

    pub fn d(&self) -> i128 {
        self.d
    }

    pub fn a(&self) -> i128 {
        self.a
    }

    pub fn b(&self) -> i128 {
        self.b
    }

    fn inner_disc(&self) -> BigInt {
        let a = BigInt::from(self.a);
        &a * &a - BigInt::from(4) * BigInt::from(self.b)
    }

    /// [d^3, a d^2, b d]: the point condition is that
    /// d^3 u^4 + a d^2 u^2 v^2 + b d v^4 is a square.
    pub fn binary_coefficients(&self) -> [BigInt; 3] {
        let d = BigInt::from(self.d);
        [
            &d * &d * &d,
            BigInt::from(self.a) * &d * &d,
            BigInt::from(self.b) * &d,
        ]
    }

    /// Whether (u, v, w) lies on the torsor.
    pub fn contains(&self, u: i64, v: i64, w: i64) -> bool {
        let (u, v, w) = (BigInt::from(u), BigInt::from(v), BigInt::from(w));
        let d = BigInt::from(self.d);
        let (u2, v2) = (&u * &u, &v * &v);
        &d * &w * &w
            == &d * &d * &u2 * &u2 + BigInt::from(self.a) * &d * &u2 * &v2 + BigInt::from(self.b) * &v2 * &v2
    }
}

pub fn solvable_real(t: &TorsorQuartic) -> bool {
    padic::solvable_real(t)
}

/// Q_p-solvability. Exhausting the refinement bound is an error.
pub fn solvable_padic(t: &TorsorQuartic, p: u64) -> Result<bool> {
    if !is_prime(p as u128) {
        return Err(Error::NotPrime(p as u128));
    }
    if p == 2 {
        padic::solvable_two_adic(t)
    } else {
        padic::solvable_odd(t, p)
    }
}

/// As [`solvable_padic`] for odd p, enumerating residues below `limit`
/// instead of factoring over F_p.
pub fn solvable_padic_enumerating(t: &TorsorQuartic, p: u64, limit: u64) -> Result<bool> {
    if p == 2 || !is_prime(p as u128) {
        return Err(Error::NotOddPrime(p as u128));
    }
    padic::solvable_odd_with(t, Fp::with_enumeration_limit(p, limit))
}

pub fn solvable_at(t: &TorsorQuartic, place: Place) -> Result<bool> {
    match place {
        Place::Infinity => Ok(solvable_real(t)),
        Place::Prime(p) => solvable_padic(t, p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Phi,
    PhiHat,
}

/// Which coefficient pair each side uses. `Swapped` exists as a negative
/// control for the verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Standard,
    Swapped,
}

impl Side {
    /// Torsor coefficients (a, b) and the integer whose primes support the
    /// Selmer candidates.
    pub fn coefficients(self, a: i64, b: i64, orientation: Orientation) -> (i128, i128) {
        let (a, b) = (a as i128, b as i128);
        let phi_side = match orientation {
            Orientation::Standard => self == Side::Phi,
            Orientation::Swapped => self == Side::PhiHat,
        };
        if phi_side {
            (-2 * a, a * a - 4 * b)
        } else {
            (a, b)
        }
    }

    /// Squarefree part of this is always a Selmer class.
    pub fn forced_class(self, a: i64, b: i64) -> Result<i128> {
        squarefree_part(self.coefficients(a, b, Orientation::Standard).1)
    }
}

/// Square class of d in Q_v^*/(Q_v^*)^2 as a vector over F_2.
///
/// Odd p: bit 0 = ord parity, bit 1 = unit part a nonresidue.
/// p = 2: bit 0 = ord parity, bit 1 = unit = 3 mod 4, bit 2 = unit = +-3 mod 8.
/// Infinity: bit 0 = negative.
pub fn square_class(d: i128, place: Place) -> Result<u8> {
    if d == 0 {
        return Err(Error::Zero);
    }
    Ok(match place {
        Place::Infinity => (d < 0) as u8,
        Place::Prime(p) => {
            let mut m = d.unsigned_abs();
            let parity = (crate::arith::valuation_unchecked(&mut m, p as u128) % 2) as u8;
            let unit = if d < 0 { -(m as i128) } else { m as i128 };
            if p == 2 {
                let r = unit.rem_euclid(8);
                parity | (((r % 4 == 3) as u8) << 1) | (((r == 3 || r == 5) as u8) << 2)
            } else {
                parity | (((jacobi(unit, p) == -1) as u8) << 1)
            }
        }
    })
}

/// One squarefree representative per class, indexed by [`square_class`].
pub fn class_representatives(place: Place) -> Vec<i128> {
    match place {
        Place::Infinity => vec![1, -1],
        Place::Prime(2) => vec![1, 2, -1, -2, 5, 10, -5, -10],
        Place::Prime(p) => {
            let n = least_nonresidue(p) as i128;
            vec![1, p as i128, n, n * p as i128]
        }
    }
}

/// The subgroup of Q_v^*/(Q_v^*)^2 of classes whose torsor is solvable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalImage {
    pub place: Place,
    pub side: Side,
    /// Class keys in the image, ascending.
    keys: Vec<u8>,
}

impl LocalImage {
    pub fn size(&self) -> u32 {
        self.keys.len() as u32
    }

    pub fn keys(&self) -> &[u8] {
        &self.keys
    }

    pub fn representatives(&self) -> Vec<i128> {
        let reps = class_representatives(self.place);
        self.keys.iter().map(|&k| reps[k as usize]).collect()
    }

    pub fn contains(&self, d: i128) -> Result<bool> {
        let k = square_class(d, self.place)?;
        Ok(self.keys.binary_search(&k).is_ok())
    }

    pub fn is_subgroup(&self) -> bool {
        self.keys.first() == Some(&0)
            && self
                .keys
                .iter()
                .all(|&x| self.keys.iter().all(|&y| self.keys.binary_search(&(x ^ y)).is_ok()))
    }
}

fn check_nonsingular(a: i64, b: i64) -> Result<()> {
    if b == 0 || (a as i128) * (a as i128) == 4 * b as i128 {
        return Err(Error::Singular { a, b });
    }
    Ok(())
}

pub fn local_image(a: i64, b: i64, place: Place, side: Side) -> Result<LocalImage> {
    local_image_oriented(a, b, place, side, Orientation::Standard)
}

/// Tests every class of Q_v^*/(Q_v^*)^2 separately, so the subgroup
/// property of the result is a genuine check.
pub fn local_image_oriented(
    a: i64,
    b: i64,
    place: Place,
    side: Side,
    orientation: Orientation,
) -> Result<LocalImage> {
    check_nonsingular(a, b)?;
    if let Place::Prime(p) = place {
        if !is_prime(p as u128) {
            return Err(Error::NotPrime(p as u128));
        }
    }
    let (ta, tb) = side.coefficients(a, b, orientation);
    let mut keys = Vec::new();
    for (k, d) in class_representatives(place).into_iter().enumerate() {
        if solvable_at(&TorsorQuartic::unchecked(d, ta, tb), place)? {
            keys.push(k as u8);
        }
    }
    Ok(LocalImage { place, side, keys })
}

/// A Selmer group as its set of squarefree class representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerSet {
    pub side: Side,
    classes: Vec<i128>,
    pub dim: u32,
}

impl SelmerSet {
    /// Sorts the classes and requires a power-of-two count.
    pub fn new(side: Side, mut classes: Vec<i128>) -> Result<Self> {
        classes.sort_unstable();
        classes.dedup();
        let n = classes.len();
        if !n.is_power_of_two() {
            return Err(Error::Invariant(format!("{n} Selmer classes is not a power of two")));
        }
        Ok(SelmerSet {
            side,
            dim: n.trailing_zeros(),
            classes,
        })
    }

    pub fn classes(&self) -> &[i128] {
        &self.classes
    }

    pub fn contains(&self, d: i128) -> bool {
        self.classes.binary_search(&d).is_ok()
    }

    /// Contains 1 and is closed under products modulo squares.
    pub fn is_subgroup(&self) -> Result<bool> {
        if !self.contains(1) {
            return Ok(false);
        }
        for &x in &self.classes {
            for &y in &self.classes {
                if !self.contains(squarefree_part(x * y)?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Local images of both sides at one place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceImages {
    pub place: Place,
    pub phi: LocalImage,
    pub phihat: LocalImage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descent {
    pub phi: SelmerSet,
    pub phihat: SelmerSet,
    /// Odd primes of B (A^2 - 4B) ascending, then 2, then infinity.
    pub images: Vec<PlaceImages>,
}

impl Descent {
    pub fn exponent(&self) -> i32 {
        self.phi.dim as i32 - self.phihat.dim as i32
    }

    pub fn sel2_lower_bound(&self) -> u32 {
        self.phi.dim.saturating_sub(1)
    }
}

/// Places where a torsor can fail to be solvable.
pub fn relevant_places(a: i64, b: i64) -> Result<Vec<Place>> {
    check_nonsingular(a, b)?;
    let disc = (a as i128) * (a as i128) - 4 * b as i128;
    let mut primes: Vec<u64> = factor(b as i128)?
        .primes()
        .chain(factor(disc)?.primes())
        .filter(|&p| p != 2)
        .map(|p| p as u64)
        .collect();
    primes.sort_unstable();
    primes.dedup();
    let mut places: Vec<Place> = primes.into_iter().map(Place::Prime).collect();
    places.push(Place::Prime(2));
    places.push(Place::Infinity);
    Ok(places)
}

pub fn descend(a: i64, b: i64) -> Result<Descent> {
    descend_oriented(a, b, Orientation::Standard)
}

pub fn descend_oriented(a: i64, b: i64, orientation: Orientation) -> Result<Descent> {
    let places = relevant_places(a, b)?;
    let mut images = Vec::with_capacity(places.len());
    for &place in &places {
        images.push(PlaceImages {
            place,
            phi: local_image_oriented(a, b, place, Side::Phi, orientation)?,
            phihat: local_image_oriented(a, b, place, Side::PhiHat, orientation)?,
        });
    }
    let phi = selmer_from_images(a, b, Side::Phi, &images, orientation)?;
    let phihat = selmer_from_images(a, b, Side::PhiHat, &images, orientation)?;
    Ok(Descent { phi, phihat, images })
}

fn selmer_from_images(
    a: i64,
    b: i64,
    side: Side,
    images: &[PlaceImages],
    orientation: Orientation,
) -> Result<SelmerSet> {
    let (_, support) = side.coefficients(a, b, orientation);
    let mut classes = Vec::new();
    'candidates: for d in crate::arith::signed_squarefree_divisors(support)? {
        for im in images {
            let image = match side {
                Side::Phi => &im.phi,
                Side::PhiHat => &im.phihat,
            };
            if !image.contains(d)? {
                continue 'candidates;
            }
        }
        classes.push(d);
    }
    SelmerSet::new(side, classes)
}

pub fn selmer_phi(a: i64, b: i64) -> Result<SelmerSet> {
    Ok(descend(a, b)?.phi)
}

pub fn selmer_phihat(a: i64, b: i64) -> Result<SelmerSet> {
    Ok(descend(a, b)?.phihat)
}

/// dim Sel_phi - dim Sel_phihat.
pub fn descent_exponent(a: i64, b: i64) -> Result<i32> {
    Ok(descend(a, b)?.exponent())
}

/// max(0, dim Sel_phi - 1): the kernel E'(Q)[2] / phi(E(Q)[2]) has
/// dimension at most 1.
pub fn sel2_lower_bound(a: i64, b: i64) -> Result<u32> {
    Ok(descend(a, b)?.sel2_lower_bound())
}
