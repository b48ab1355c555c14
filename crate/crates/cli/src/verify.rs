//! `verify`: invariant suites over a window or a seeded sample of it.

use std::fmt;
use std::io::Write;

use selmerlab::arith::ord_p;
use selmerlab::descent::descend_oriented;
use selmerlab::family::{count_window, density_rho};
use selmerlab::local::{mult_factor, tamagawa_exponent, tamagawa_ratio_size, FactorSource};
use selmerlab::stats::{g1, g2};
use selmerlab::{CurvePair, Place, Side};

use crate::driver::{ordered_map, work_units};
use crate::{CliError, CliResult, RunConfig};

/// Failures echoed per suite.
const FAILURES_SHOWN: usize = 20;

/// Primes whose divisibility frequency of A^2 - 4B is compared with rho(p).
pub const DENSITY_PRIMES: [u64; 3] = [3, 5, 7];

/// Base relative tolerance of the density suite. Only the A^2 - 4B
/// frequencies are gated since the B range is short at small X.
pub const DENSITY_TOLERANCE: f64 = 0.02;

/// Tolerance at X: the base plus p / (2 sqrt X), the relative imbalance of
/// the residue classes of B among the 2 sqrt X stripes. A sample of n
/// curves adds three binomial standard deviations.
pub fn density_tolerance(p: u64, x: u64, rho: f64, sample: Option<u64>) -> f64 {
    let noise = sample.map_or(0.0, |n| 3.0 * ((1.0 - rho) / (n.max(1) as f64 * rho)).sqrt());
    DENSITY_TOLERANCE + p as f64 / (2.0 * (x as f64).sqrt()) + noise
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Duality,
    ProductFormula,
    FactorTable,
    SelmerClosure,
    Decomposition,
    OrientationAnchor,
    Density,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Duality,
        Suite::ProductFormula,
        Suite::FactorTable,
        Suite::SelmerClosure,
        Suite::Decomposition,
        Suite::OrientationAnchor,
        Suite::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::ProductFormula => "product_formula",
            Suite::FactorTable => "factor_table",
            Suite::SelmerClosure => "selmer_closure",
            Suite::Decomposition => "decomposition",
            Suite::OrientationAnchor => "orientation_anchor",
            Suite::Density => "density",
        }
    }
}

/// An offending (A, B, v) with what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub suite: Suite,
    pub a: i64,
    pub b: i64,
    pub place: Option<Place>,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.place.map_or("-".to_string(), |p| p.to_string());
        write!(f, "{}: (A,B,v) = ({}, {}, {}): {}", self.suite.name(), self.a, self.b, v, self.detail)
    }
}

/// Pass and fail tallies per suite.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    pub passed: [u64; 7],
    pub failed: [u64; 7],
    pub failures: Vec<Failure>,
    pub curves: u64,
    /// Members with p | A^2 - 4B, aligned with `DENSITY_PRIMES`.
    pub disc_divisible: [u64; 3],
}

impl Tally {
    fn check(&mut self, suite: Suite, ok: bool, c: &CurvePair, place: Option<Place>, detail: impl FnOnce() -> String) {
        let i = suite as usize;
        if ok {
            self.passed[i] += 1;
        } else {
            self.failed[i] += 1;
            self.failures.push(Failure {
                suite,
                a: c.a,
                b: c.b,
                place,
                detail: detail(),
            });
        }
    }

    fn merge(&mut self, other: Tally) {
        for i in 0..7 {
            self.passed[i] += other.passed[i];
            self.failed[i] += other.failed[i];
        }
        for i in 0..DENSITY_PRIMES.len() {
            self.disc_divisible[i] += other.disc_divisible[i];
        }
        self.curves += other.curves;
        self.failures.extend(other.failures);
    }

    pub fn passed(&self, suite: Suite) -> u64 {
        self.passed[suite as usize]
    }

    pub fn failed(&self, suite: Suite) -> u64 {
        self.failed[suite as usize]
    }

    pub fn total_failed(&self) -> u64 {
        self.failed.iter().sum()
    }

    pub fn total_checks(&self) -> u64 {
        self.passed.iter().sum::<u64>() + self.total_failed()
    }
}

/// Runs every per-curve suite on one curve.
pub fn check_curve(c: &CurvePair, cfg: &RunConfig, t: &mut Tally) {
    t.curves += 1;
    let disc = c.disc_factor() as i128;
    for (i, &p) in DENSITY_PRIMES.iter().enumerate() {
        t.disc_divisible[i] += (disc % p as i128 == 0) as u64;
    }

    let ledger = tamagawa_exponent(c);
    let descent = descend_oriented(c.a, c.b, cfg.orientation);
    let (ledger, descent) = match (ledger, descent) {
        (Ok(l), Ok(d)) => (l, d),
        (l, d) => {
            let detail = l.err().or(d.err()).map(|e| e.to_string()).unwrap_or_default();
            t.check(Suite::ProductFormula, false, c, None, || detail);
            return;
        }
    };

    for im in &descent.images {
        let (sp, sh) = (im.phi.size(), im.phihat.size());
        let expected = im.place.square_class_count();
        t.check(Suite::Duality, sp * sh == expected, c, Some(im.place), || {
            format!("|im phi| |im phihat| = {sp} * {sh}, expected {expected}")
        });
    }

    t.check(Suite::ProductFormula, ledger.total == descent.exponent(), c, None, || {
        format!("ledger {} != descent {}", ledger.total, descent.exponent())
    });

    for e in &ledger.entries {
        let (FactorSource::Multiplicative(_), Place::Prime(p)) = (e.source, e.place) else {
            continue;
        };
        let table = mult_factor(c.a, c.b, p);
        let tate = tamagawa_ratio_size(c.a, c.b, p);
        let ok = matches!((&table, &tate), (Ok(x), Ok(y)) if x == y);
        t.check(Suite::FactorTable, ok, c, Some(e.place), || {
            format!("table {table:?} vs Tate 2c'/c {tate:?}")
        });
    }

    for (set, side) in [(&descent.phi, Side::Phi), (&descent.phihat, Side::PhiHat)] {
        let forced = side.forced_class(c.a, c.b);
        let ok = set.is_subgroup().unwrap_or(false)
            && set.contains(1)
            && forced.as_ref().is_ok_and(|&d| set.contains(d));
        t.check(Suite::SelmerClosure, ok, c, None, || {
            format!("{side:?} set {:?} (forced class {forced:?})", set.classes())
        });
    }

    match (g1(c.a, c.b, None), g2(c.a, c.b, None)) {
        (Ok(x), Ok(y)) => {
            let rest = ledger.total - (x as i32 - y as i32) - ledger.t_add - ledger.e_two - ledger.e_inf;
            t.check(
                Suite::Decomposition,
                rest.unsigned_abs() <= ledger.square_heavy,
                c,
                None,
                || format!("remainder {rest} exceeds {}", ledger.square_heavy),
            );
        }
        (x, y) => t.check(Suite::Decomposition, false, c, None, || format!("g1 {x:?}, g2 {y:?}")),
    }

    for im in &descent.images {
        let Place::Prime(p) = im.place else { continue };
        if p == 2 || c.b % p as i64 == 0 {
            continue;
        }
        if ord_p(disc, p as u128).is_ok_and(|k| k % 2 == 1) {
            let size = im.phi.size();
            t.check(Suite::OrientationAnchor, size == 4, c, Some(im.place), || {
                format!("ord_p(A^2-4B) odd, p does not divide B: |im phi| = {size}, expected 4")
            });
        }
    }
}

/// Runs all suites over the configured window or sample.
pub fn run_suites(cfg: &RunConfig) -> CliResult<Tally> {
    let window = cfg.window();
    let units = work_units(&window, cfg.sample, cfg.seed)?;
    let mut tally = Tally::default();
    ordered_map(
        cfg,
        &units,
        |u| {
            let mut t = Tally::default();
            for c in u.curves(&window) {
                check_curve(&c, cfg, &mut t);
            }
            t
        },
        |t| {
            tally.merge(t);
            Ok(())
        },
    )?;
    if tally.curves == 0 {
        return Ok(tally);
    }

    // Counting: the stripe formula against the listing, on full windows.
    if cfg.sample.is_none() && cfg.include_square_disc {
        let (count, _) = count_window(cfg.xmax);
        let listed = tally.curves;
        let probe = CurvePair::new(0, 1)?;
        tally.check(Suite::Density, count == listed, &probe, None, || {
            format!("stripe count {count} != listed {listed}")
        });
    }
    let n = tally.curves as f64;
    for (i, &p) in DENSITY_PRIMES.iter().enumerate() {
        let rho = selmerlab::stats::to_f64(&density_rho(p)?)?;
        let freq = tally.disc_divisible[i] as f64 / n;
        let rel = (freq - rho).abs() / rho;
        let tol = density_tolerance(p, cfg.xmax, rho, cfg.sample.map(|_| tally.curves));
        let probe = CurvePair::new(0, 1)?;
        let place = Some(Place::Prime(p));
        tally.check(Suite::Density, rel <= tol, &probe, place, || {
            format!("P(p | A^2-4B) = {freq:.5} vs rho = {rho:.5}, relative {rel:.4} > {tol:.4}")
        });
    }
    Ok(tally)
}

pub fn cmd_verify(cfg: &RunConfig, stderr: &mut dyn Write) -> CliResult<()> {
    let tally = run_suites(cfg)?;
    if tally.curves == 0 || tally.total_checks() == 0 {
        return Err(CliError::Failed("nothing verified".into()));
    }
    let mut out = cfg.writer()?;
    writeln!(out, "suite\tpassed\tfailed")?;
    for s in Suite::ALL {
        writeln!(out, "{}\t{}\t{}", s.name(), tally.passed(s), tally.failed(s))?;
    }
    out.flush()?;
    for s in Suite::ALL {
        for f in tally.failures.iter().filter(|f| f.suite == s).take(FAILURES_SHOWN) {
            writeln!(stderr, "{f}")?;
        }
    }
    writeln!(stderr, "{} curves, {} checks, {} failures", tally.curves, tally.total_checks(), tally.total_failed())?;
    if tally.total_failed() > 0 {
        return Err(CliError::Failed(format!("{} verification failures", tally.total_failed())));
    }
    Ok(())
}
