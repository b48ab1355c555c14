//! The prime-counting statistics g1, g2, their independent-prime model, and
//! normality diagnostics for t(A, B).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::erf::erfc;

use crate::arith::{factor, small_primes};
use crate::error::{Error, Result};
use crate::family::{density_both, density_rho, CurvePair};

/// Default prime cutoff z.
pub const DEFAULT_Z: u64 = 100;

/// Width of the histogram bins of standardized t.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.25;

fn count_odd_primes(n: i128, z: Option<u64>) -> Result<u32> {
    Ok(factor(n)?
        .primes()
        .filter(|&p| p != 2 && z.is_none_or(|z| p < z as u128))
        .count() as u32)
}

/// Number of odd primes p < z dividing A^2 - 4B; `None` is z = infinity.
pub fn g1(a: i64, b: i64, z: Option<u64>) -> Result<u32> {
    let disc = (a as i128) * (a as i128) - 4 * b as i128;
    if disc == 0 {
        return Err(Error::Singular { a, b });
    }
    count_odd_primes(disc, z)
}

/// Number of odd primes p < z dividing B; `None` is z = infinity.
pub fn g2(a: i64, b: i64, z: Option<u64>) -> Result<u32> {
    if b == 0 {
        return Err(Error::Singular { a, b });
    }
    count_odd_primes(b as i128, z)
}

/// Odd primes below z.
pub fn odd_primes_below(z: u64) -> Vec<u64> {
    let mut out: Vec<u64> = small_primes()
        .iter()
        .map(|&p| p as u64)
        .take_while(|&p| p < z)
        .filter(|&p| p != 2)
        .collect();
    if z > crate::arith::SIEVE_LIMIT as u64 {
        out.extend(
            (crate::arith::SIEVE_LIMIT as u64 + 1..z).filter(|&n| crate::arith::is_prime(n as u128)),
        );
    }
    out
}

/// (g1, g2) at a finite cutoff, by trial division over the given primes.
pub fn g_pair_truncated(c: &CurvePair, primes: &[u64]) -> (u32, u32) {
    let (disc, b) = (c.disc_factor(), c.b);
    let mut out = (0, 0);
    for &p in primes {
        let p = p as i64;
        out.0 += (disc % p == 0) as u32;
        out.1 += (b % p == 0) as u32;
    }
    out
}

/// Joint law of (D_p, D'_p) for one prime.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeLaw {
    pub p: u64,
    pub both: BigRational,
    pub only1: BigRational,
    pub only2: BigRational,
    pub neither: BigRational,
}

impl PrimeLaw {
    pub fn new(p: u64) -> Result<Self> {
        let rho = density_rho(p)?;
        let both = density_both(p)?;
        let only = &rho - &both;
        let neither = BigRational::one() - &both - &only - &only;
        Ok(PrimeLaw {
            p,
            only1: only.clone(),
            only2: only,
            both,
            neither,
        })
    }

    pub fn rho(&self) -> BigRational {
        &self.both + &self.only1
    }
}

/// Independent primes p < z with D = sum D_p, D' = sum D'_p.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeModel {
    pub z: u64,
    pub per_prime: Vec<PrimeLaw>,
}

impl PrimeModel {
    pub fn new(z: u64) -> Result<Self> {
        if z < 3 {
            return Err(Error::Domain(format!("cutoff z = {z} < 3")));
        }
        let per_prime = odd_primes_below(z)
            .into_iter()
            .map(PrimeLaw::new)
            .collect::<Result<_>>()?;
        Ok(PrimeModel { z, per_prime })
    }

    /// sum over odd p < z of rho(p).
    pub fn centering(&self) -> BigRational {
        self.per_prime
            .iter()
            .fold(BigRational::zero(), |acc, l| acc + l.rho())
    }

    /// E[U^i V^j] for i + j <= degree, where U = D - mu, V = D' - mu.
    pub fn moment_tensor(&self, degree: usize) -> Vec<Vec<BigRational>> {
        let mut acc = unit_tensor(degree);
        for law in &self.per_prime {
            let rho = law.rho();
            let one = BigRational::one();
            let zero = BigRational::zero();
            let atoms = [
                (&one - &rho, &one - &rho, &law.both),
                (&one - &rho, &zero - &rho, &law.only1),
                (&zero - &rho, &one - &rho, &law.only2),
                (&zero - &rho, &zero - &rho, &law.neither),
            ];
            let mut local = zero_tensor(degree);
            for (x, y, w) in atoms {
                for i in 0..=degree {
                    for j in 0..=degree - i {
                        local[i][j] += w * pow(&x, i) * pow(&y, j);
                    }
                }
            }
            acc = convolve(&acc, &local, degree);
        }
        acc
    }

    pub fn mixed_moment(&self, k1: usize, k2: usize) -> BigRational {
        self.moment_tensor(k1 + k2)[k1][k2].clone()
    }
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

fn zero_tensor(degree: usize) -> Vec<Vec<BigRational>> {
    (0..=degree)
        .map(|i| vec![BigRational::zero(); degree - i + 1])
        .collect()
}

fn unit_tensor(degree: usize) -> Vec<Vec<BigRational>> {
    let mut t = zero_tensor(degree);
    t[0][0] = BigRational::one();
    t
}

fn binomial(n: usize, k: usize) -> BigRational {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    BigRational::from_integer(c)
}

/// Moments of a sum of independent pairs from the moments of each.
fn convolve(
    f: &[Vec<BigRational>],
    g: &[Vec<BigRational>],
    degree: usize,
) -> Vec<Vec<BigRational>> {
    let mut out = zero_tensor(degree);
    for i in 0..=degree {
        for j in 0..=degree - i {
            let mut s = BigRational::zero();
            for a in 0..=i {
                for b in 0..=j {
                    s += binomial(i, a) * binomial(j, b) * &f[a][b] * &g[i - a][j - b];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

/// Exact centered mixed moment of the model, as a real.
pub fn model_mixed_moment(k1: usize, k2: usize, z: u64) -> Result<f64> {
    if k1 + k2 > 6 {
        return Err(Error::Domain(format!("k1 + k2 = {} > 6", k1 + k2)));
    }
    to_f64(&PrimeModel::new(z)?.mixed_moment(k1, k2))
}

/// Nearest f64 to an exact rational.
pub fn to_f64(x: &BigRational) -> Result<f64> {
    x.to_f64()
        .ok_or_else(|| Error::Overflow(format!("{x} as f64")))
}

/// Counts of (g1, g2) over a set of curves at a fixed cutoff.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JointHistogram {
    counts: BTreeMap<(u32, u32), u64>,
    total: u64,
}

impl JointHistogram {
    pub fn add(&mut self, g: (u32, u32)) {
        *self.counts.entry(g).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &JointHistogram) {
        for (&k, &n) in &other.counts {
            *self.counts.entry(k).or_insert(0) += n;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.counts
    }

    /// Curves with A^2 - 4B a square are skipped.
    pub fn from_curves<I: IntoIterator<Item = CurvePair>>(curves: I, z: u64) -> Self {
        let primes = odd_primes_below(z);
        let mut h = JointHistogram::default();
        for c in curves {
            if !c.two_torsion_full {
                h.add(g_pair_truncated(&c, &primes));
            }
        }
        h
    }

    /// (1/N) sum (g1 - mu)^k1 (g2 - mu)^k2, exactly.
    pub fn mixed_moment(&self, k1: usize, k2: usize, mu: &BigRational) -> Result<BigRational> {
        if self.total == 0 {
            return Err(Error::Empty("no curves in the moment sample"));
        }
        let mut s = BigRational::zero();
        for (&(a, b), &n) in &self.counts {
            let x = BigRational::from_integer(a.into()) - mu;
            let y = BigRational::from_integer(b.into()) - mu;
            s += pow(&x, k1) * pow(&y, k2) * BigRational::from_integer(n.into());
        }
        Ok(s / BigRational::from_integer(self.total.into()))
    }

    /// (mean g1, mean g2).
    pub fn means(&self) -> Result<(f64, f64)> {
        let zero = BigRational::zero();
        Ok((
            to_f64(&self.mixed_moment(1, 0, &zero)?)?,
            to_f64(&self.mixed_moment(0, 1, &zero)?)?,
        ))
    }

    /// Empirical covariance of g1 and g2.
    pub fn covariance(&self) -> Result<f64> {
        let zero = BigRational::zero();
        let m1 = self.mixed_moment(1, 0, &zero)?;
        let m2 = self.mixed_moment(0, 1, &zero)?;
        to_f64(&(self.mixed_moment(1, 1, &zero)? - m1 * m2))
    }
}

/// Empirical against model centered mixed moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub x: u64,
    pub z: u64,
    pub k1: usize,
    pub k2: usize,
    pub empirical: f64,
    pub model: f64,
    pub sample_size: u64,
    pub centering: f64,
}

/// Reports for every (k1, k2) with k1 + k2 <= max_degree, ordered by
/// degree then k1 descending.
pub fn moment_reports(hist: &JointHistogram, x: u64, z: u64, max_degree: usize) -> Result<Vec<MomentReport>> {
    let model = PrimeModel::new(z)?;
    let mu = model.centering();
    let tensor = model.moment_tensor(max_degree);
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        for k1 in (0..=degree).rev() {
            let k2 = degree - k1;
            out.push(MomentReport {
                x,
                z,
                k1,
                k2,
                empirical: to_f64(&hist.mixed_moment(k1, k2, &mu)?)?,
                model: to_f64(&tensor[k1][k2])?,
                sample_size: hist.total(),
                centering: to_f64(&mu)?,
            });
        }
    }
    Ok(out)
}

/// Centered empirical mixed moment of (g1, g2) over a stream of curves.
pub fn empirical_mixed_moment<I: IntoIterator<Item = CurvePair>>(
    curves: I,
    x: u64,
    k1: usize,
    k2: usize,
    z: u64,
) -> Result<MomentReport> {
    let hist = JointHistogram::from_curves(curves, z);
    let model = PrimeModel::new(z)?;
    let mu = model.centering();
    Ok(MomentReport {
        x,
        z,
        k1,
        k2,
        empirical: to_f64(&hist.mixed_moment(k1, k2, &mu)?)?,
        model: to_f64(&model.mixed_moment(k1, k2))?,
        sample_size: hist.total(),
        centering: to_f64(&mu)?,
    })
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// sqrt(2 log log X).
pub fn normalizer(x: u64) -> Result<f64> {
    if x < 16 {
        return Err(Error::Domain(format!("X = {x} < 16")));
    }
    Ok((2.0 * (x as f64).ln().ln()).sqrt())
}

/// sup_s |F_n(s) - Phi(s)| for F_n the empirical distribution of
/// t / sqrt(2 log log X).
pub fn cdf_distance(values: &[i64], x: u64) -> Result<f64> {
    let scale = normalizer(x)?;
    if values.is_empty() {
        return Err(Error::Empty("no values for the distribution distance"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let j = i + sorted[i..].partition_point(|&w| w == v);
        let phi = normal_cdf(v as f64 / scale);
        sup = sup.max((i as f64 / n - phi).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    Ok(sup)
}

/// As [`cdf_distance`] for already standardized real samples.
pub fn cdf_distance_real(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("no values for the distribution distance"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0f64, |sup, (i, &v)| {
        let phi = normal_cdf(v);
        sup.max((i as f64 / n - phi).abs()).max(((i + 1) as f64 / n - phi).abs())
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
    /// count / (n * width).
    pub density: f64,
}

/// Histogram of t / sqrt(2 log log X) on bins [k w, (k + 1) w).
pub fn standardized_histogram(values: &[i64], x: u64, width: f64) -> Result<Vec<HistogramBin>> {
    let scale = normalizer(x)?;
    if values.is_empty() {
        return Err(Error::Empty("no values for the histogram"));
    }
    let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
    for &v in values {
        *bins.entry((v as f64 / scale / width).floor() as i64).or_insert(0) += 1;
    }
    let (lo, hi) = (*bins.keys().next().unwrap(), *bins.keys().last().unwrap());
    let n = values.len() as f64;
    Ok((lo..=hi)
        .map(|k| {
            let count = bins.get(&k).copied().unwrap_or(0);
            HistogramBin {
                left: k as f64 * width,
                right: (k + 1) as f64 * width,
                count,
                density: count as f64 / (n * width),
            }
        })
        .collect())
}

/// Mean and population variance.
pub fn mean_variance(values: &[i64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("no values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyWindow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn g_examples() {
        assert_eq!(g1(1, 3, None).unwrap(), 1);
        assert_eq!(g1(1, 3, Some(10)).unwrap(), 0);
        assert_eq!(g1(1, 18, None).unwrap(), 1);
        assert_eq!(g2(1, 3, None).unwrap(), 1);
        assert_eq!(g2(1, 18, None).unwrap(), 1);
        assert_eq!(g2(1, -2, None).unwrap(), 0);
        assert!(g1(2, 1, None).is_err());
        assert!(g2(2, 0, None).is_err());
    }

    #[test]
    fn truncated_pair_matches_factorization() {
        let primes = odd_primes_below(50);
        for c in FamilyWindow::new(400).iter().step_by(37) {
            assert_eq!(
                g_pair_truncated(&c, &primes),
                (g1(c.a, c.b, Some(50)).unwrap(), g2(c.a, c.b, Some(50)).unwrap())
            );
        }
    }

    #[test]
    fn prime_law_is_a_distribution() {
        for p in odd_primes_below(60) {
            let l = PrimeLaw::new(p).unwrap();
            assert_eq!(&l.both + &l.only1 + &l.only2 + &l.neither, BigRational::one());
            for w in [&l.both, &l.only1, &l.only2, &l.neither] {
                assert!(*w >= BigRational::zero() && *w <= BigRational::one());
            }
        }
    }

    #[test]
    fn single_prime_moments() {
        let m = PrimeModel::new(4).unwrap();
        assert_eq!(m.mixed_moment(1, 0), BigRational::zero());
        let rho = q(121, 364);
        assert_eq!(m.mixed_moment(2, 0), &rho * (BigRational::one() - &rho));
        assert_eq!(m.mixed_moment(1, 1), q(80, 728) - &rho * &rho);
        assert!((model_mixed_moment(2, 0, 4).unwrap() - 0.22193).abs() < 5e-5);
        assert!((model_mixed_moment(1, 1, 4).unwrap() + 0.00061).abs() < 1e-5);
        assert!(model_mixed_moment(4, 3, 10).is_err());
        assert!(PrimeModel::new(2).is_err());
    }

    #[test]
    fn model_symmetry_and_normalization() {
        let m = PrimeModel::new(40).unwrap();
        let t = m.moment_tensor(6);
        assert_eq!(t[0][0], BigRational::one());
        for i in 0..=6 {
            for j in 0..=6 - i {
                assert_eq!(t[i][j], t[j][i]);
            }
        }
    }

    #[test]
    fn difference_variance_closed_form() {
        for z in [3u64, 10, 23, 50] {
            let m = PrimeModel::new(z).unwrap();
            let t = m.moment_tensor(2);
            let dp = &t[2][0] - BigRational::from_integer(2.into()) * &t[1][1] + &t[0][2];
            let closed = m.per_prime.iter().fold(BigRational::zero(), |acc, l| {
                let rho = l.rho();
                let two = BigRational::from_integer(2.into());
                acc + &two * &rho * (BigRational::one() - &rho) - two * (&l.both - &rho * &rho)
            });
            assert_eq!(dp, closed, "z = {z}");
        }
    }

    #[test]
    fn brute_force_model_on_three_primes() {
        // Enumerate all 4^3 outcomes for z = 8 directly.
        let m = PrimeModel::new(8).unwrap();
        let mu = m.centering();
        let laws = &m.per_prime;
        let mut e = BigRational::zero();
        for code in 0..64u32 {
            let (mut d1, mut d2, mut w) = (0i64, 0i64, BigRational::one());
            for (i, l) in laws.iter().enumerate() {
                let (x, y, p) = match (code >> (2 * i)) & 3 {
                    0 => (1, 1, &l.both),
                    1 => (1, 0, &l.only1),
                    2 => (0, 1, &l.only2),
                    _ => (0, 0, &l.neither),
                };
                d1 += x;
                d2 += y;
                w *= p;
            }
            let u = BigRational::from_integer(d1.into()) - &mu;
            let v = BigRational::from_integer(d2.into()) - &mu;
            e += w * pow(&u, 3) * pow(&v, 2);
        }
        assert_eq!(m.mixed_moment(3, 2), e);
    }

    #[test]
    fn empirical_trivial_moment_is_one() {
        let r = empirical_mixed_moment(FamilyWindow::new(50).iter(), 50, 0, 0, 100).unwrap();
        assert_eq!(r.empirical, 1.0);
        assert!(r.sample_size > 0);
        assert!(empirical_mixed_moment(std::iter::empty(), 50, 1, 0, 100).is_err());
    }

    #[test]
    fn cdf_distance_examples() {
        assert!((cdf_distance(&[0, 0, 0], 10_000).unwrap() - 0.5).abs() < 1e-12);
        assert!(cdf_distance(&[1], 15).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample: Vec<f64> = (0..20_000)
            .map(|_| {
                // Box-Muller.
                let (u, v): (f64, f64) = (rand::Rng::gen(&mut rng), rand::Rng::gen(&mut rng));
                (-2.0 * (1.0 - u).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect();
        assert!(cdf_distance_real(&sample).unwrap() < 0.02);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-9);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_4).abs() < 1e-9);
    }

    #[test]
    fn histogram_bins() {
        let h = standardized_histogram(&[0, 0, 1, -1, 3], 10_000, 0.25).unwrap();
        assert_eq!(h.iter().map(|b| b.count).sum::<u64>(), 5);
        let area: f64 = h.iter().map(|b| b.density * (b.right - b.left)).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!(h.windows(2).all(|w| w[0].right == w[1].left));
    }
}
