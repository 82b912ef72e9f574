//! Parameter exploration: full-pipeline evaluation, the inner search over
//! the faked-state intensity, the `k_min` bisection, `(k, μ′)` sweeps and
//! distance scans.
//!
//! Every function here evaluates points independently, so callers may farm
//! points out to parallel workers and collect them in input order.

use alloc::vec::Vec;

use crate::decoy::{key_rate, DecoyBounds, RateReport};
use crate::error::{Error, Result};
use crate::faked_states::FakedStateIntensities;
use crate::model::{SystemParams, MAX_MISMATCH};
use crate::observables::{observables, AttackStrategy};
use crate::security::{r_absolute, table1_probs};

/// Observables, decoy bounds, GLLP rate and (for PNRD) the residual secure
/// rate at the distance stored in `p`.
pub fn evaluate(p: &SystemParams, strategy: &AttackStrategy) -> Result<RateReport> {
    strategy.validate()?;
    let obs = observables(p, strategy)?;
    let bounds = DecoyBounds::estimate(&obs, p);
    let rate = key_rate(&obs, &bounds, p);
    let r_abs = match *strategy {
        AttackStrategy::Pnrd { mu_prime, k, .. } => {
            let probs = table1_probs(&FakedStateIntensities::uniform(mu_prime)?, &p.efficiencies(k)?);
            Some(r_absolute(p, strategy, &probs)?)
        }
        _ => None,
    };
    Ok(RateReport {
        observables: obs,
        bounds,
        rate,
        r_absolute: r_abs,
    })
}

/// An attack with `k` and `μ′` left open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyTemplate {
    Qnd,
    Pnrd { eta_e: f64 },
}

impl StrategyTemplate {
    pub fn instantiate(&self, k: f64, mu_prime: f64) -> AttackStrategy {
        match *self {
            StrategyTemplate::Qnd => AttackStrategy::Qnd { mu_prime, k },
            StrategyTemplate::Pnrd { eta_e } => AttackStrategy::Pnrd { mu_prime, k, eta_e },
        }
    }
}

/// Rate for one `(k, μ′)` choice; degenerate observables count as `-inf`.
fn attack_rate(p: &SystemParams, template: StrategyTemplate, k: f64, mu_prime: f64) -> Result<f64> {
    match evaluate(p, &template.instantiate(k, mu_prime)) {
        Ok(r) => Ok(r.rate),
        Err(Error::DegenerateObservables) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestRate {
    pub mu_prime: f64,
    pub rate: f64,
}

/// Grid maximum of the rate over `μ′`. Ties go to the smaller `μ′`.
pub fn best_rate_over_mu_prime(
    p: &SystemParams,
    template: StrategyTemplate,
    k: f64,
    grid: &[f64],
) -> Result<BestRate> {
    let mut best: Option<BestRate> = None;
    for &mu_prime in grid {
        let rate = attack_rate(p, template, k, mu_prime)?;
        match best {
            Some(b) if !(rate > b.rate) => {}
            _ => best = Some(BestRate { mu_prime, rate }),
        }
    }
    best.ok_or(Error::InvalidGrid { name: "mu_prime" })
}

/// Two-stage `μ′` search: a coarse pass over `[0, max]`, then a fine pass
/// of width one coarse step on either side of the coarse optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuPrimeSearch {
    pub max: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
}

impl Default for MuPrimeSearch {
    fn default() -> Self {
        MuPrimeSearch {
            max: 2000.0,
            coarse_step: 10.0,
            fine_step: 1.0,
        }
    }
}

impl MuPrimeSearch {
    pub fn coarse_grid(&self) -> Vec<f64> {
        linspace_step(0.0, self.max, self.coarse_step)
    }

    pub fn fine_grid(&self, center: f64) -> Vec<f64> {
        let lo = (center - self.coarse_step).max(0.0);
        let hi = (center + self.coarse_step).min(self.max);
        linspace_step(lo, hi, self.fine_step)
    }

    pub fn best(&self, p: &SystemParams, template: StrategyTemplate, k: f64) -> Result<BestRate> {
        let coarse = best_rate_over_mu_prime(p, template, k, &self.coarse_grid())?;
        let fine = best_rate_over_mu_prime(p, template, k, &self.fine_grid(coarse.mu_prime))?;
        Ok(if fine.rate > coarse.rate { fine } else { coarse })
    }
}

/// `lo, lo + step, ...` up to and including `hi` (within rounding).
fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = libm::floor((hi - lo) / step + 1e-9) as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KminResult {
    pub distance: f64,
    /// `NaN` when no `k <= 1000` makes the rate positive.
    pub k_min: f64,
    pub mu_prime_at_kmin: f64,
    pub rate_at_kmin: f64,
    pub converged: bool,
}

/// Default bisection tolerance on `k`.
pub const KMIN_TOLERANCE: f64 = 0.5;

/// Smallest mismatch ratio at which some `μ′` gives a positive rate under
/// the QND attack, at the given distance.
pub fn k_min(p: &SystemParams, distance: f64, tol: f64) -> Result<KminResult> {
    k_min_with(
        &p.with_distance(distance),
        StrategyTemplate::Qnd,
        &MuPrimeSearch::default(),
        tol,
    )
}

pub fn k_min_with(
    p: &SystemParams,
    template: StrategyTemplate,
    search: &MuPrimeSearch,
    tol: f64,
) -> Result<KminResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", tol, "tol > 0"));
    }
    p.validate()?;
    let result = |k: f64, best: BestRate, converged: bool| KminResult {
        distance: p.distance,
        k_min: k,
        mu_prime_at_kmin: best.mu_prime,
        rate_at_kmin: best.rate,
        converged,
    };

    let top = search.best(p, template, MAX_MISMATCH)?;
    if !(top.rate > 0.0) {
        return Ok(result(f64::NAN, top, false));
    }
    let bottom = search.best(p, template, 1.0)?;
    if bottom.rate > 0.0 {
        return Ok(result(1.0, bottom, true));
    }

    let (mut lo, mut hi, mut at_hi) = (1.0, MAX_MISMATCH, top);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let b = search.best(p, template, mid)?;
        if b.rate > 0.0 {
            hi = mid;
            at_hi = b;
        } else {
            lo = mid;
        }
    }
    Ok(result(hi, at_hi, true))
}

/// Cartesian grid over distance, `k` and `μ′`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    k_values: Vec<f64>,
    mu_prime_values: Vec<f64>,
    distances: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl SweepGrid {
    pub fn new(k_values: Vec<f64>, mu_prime_values: Vec<f64>, distances: Vec<f64>) -> Result<Self> {
        if !strictly_increasing(&k_values) || k_values[0] < 1.0 || k_values[k_values.len() - 1] > MAX_MISMATCH {
            return Err(Error::InvalidGrid { name: "k" });
        }
        if !strictly_increasing(&mu_prime_values) || mu_prime_values[0] < 0.0 {
            return Err(Error::InvalidGrid { name: "mu_prime" });
        }
        if !strictly_increasing(&distances) || distances[0] < 0.0 {
            return Err(Error::InvalidGrid { name: "distance" });
        }
        Ok(SweepGrid {
            k_values,
            mu_prime_values,
            distances,
        })
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn mu_prime_values(&self) -> &[f64] {
        &self.mu_prime_values
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.k_values.len() * self.mu_prime_values.len() * self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in output order: distance-major, then `k`, then `μ′`.
    pub fn points(&self) -> impl Iterator<Item = SweepPoint> + '_ {
        self.distances.iter().flat_map(move |&distance| {
            self.k_values.iter().flat_map(move |&k| {
                self.mu_prime_values.iter().map(move |&mu_prime| SweepPoint {
                    distance,
                    k,
                    mu_prime,
                })
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub distance: f64,
    pub k: f64,
    pub mu_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub distance: f64,
    pub k: f64,
    pub mu_prime: f64,
    /// `NaN` for degenerate points.
    pub rate: f64,
    pub degenerate: bool,
}

impl SweepRow {
    /// Negative-rate rows are kept in the output but marked.
    pub fn is_positive(&self) -> bool {
        self.rate > 0.0
    }
}

pub fn sweep_point(p: &SystemParams, template: StrategyTemplate, pt: SweepPoint) -> Result<SweepRow> {
    let params = p.with_distance(pt.distance);
    let (rate, degenerate) = match evaluate(&params, &template.instantiate(pt.k, pt.mu_prime)) {
        Ok(r) => (r.rate, false),
        Err(Error::DegenerateObservables) => (f64::NAN, true),
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        distance: pt.distance,
        k: pt.k,
        mu_prime: pt.mu_prime,
        rate,
        degenerate,
    })
}

pub fn sweep_grid(p: &SystemParams, template: StrategyTemplate, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.points().map(|pt| sweep_point(p, template, pt)).collect()
}

/// One distance of a scan. Degenerate points carry `NaN` quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub distance: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    pub y1_lower: f64,
    pub q1_lower: f64,
    pub e1_upper: f64,
    pub rate: f64,
    pub r_absolute: Option<f64>,
    pub degenerate: bool,
}

pub fn scan_point(p: &SystemParams, strategy: &AttackStrategy, distance: f64) -> Result<ScanRow> {
    let params = p.with_distance(distance);
    match evaluate(&params, strategy) {
        Ok(r) => Ok(ScanRow {
            distance,
            q_mu: r.observables.q_mu,
            e_mu: r.observables.e_mu,
            y1_lower: r.bounds.y1_lower,
            q1_lower: r.bounds.q1_lower,
            e1_upper: r.bounds.e1_upper,
            rate: r.rate,
            r_absolute: r.r_absolute,
            degenerate: false,
        }),
        Err(Error::DegenerateObservables) => Ok(ScanRow {
            distance,
            q_mu: 0.0,
            e_mu: f64::NAN,
            y1_lower: f64::NAN,
            q1_lower: f64::NAN,
            e1_upper: f64::NAN,
            rate: f64::NAN,
            r_absolute: None,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

pub fn distance_scan(p: &SystemParams, strategy: &AttackStrategy, distances: &[f64]) -> Result<Vec<ScanRow>> {
    distances.iter().map(|&l| scan_point(p, strategy, l)).collect()
}

/// Largest distance in `[lo, hi]` with a positive rate, found by stepping
/// through the interval and bisecting the last sign change to `tol` km.
/// `None` if the rate is never positive on the step grid.
pub fn max_positive_distance(
    p: &SystemParams,
    strategy: &AttackStrategy,
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let positive = |l: f64| -> Result<bool> { Ok(scan_point(p, strategy, l)?.rate > 0.0) };
    let grid = linspace_step(lo, hi, step);
    let mut last = None;
    for (i, &l) in grid.iter().enumerate() {
        if positive(l)? {
            last = Some(i);
        }
    }
    let Some(i) = last else { return Ok(None) };
    if i + 1 == grid.len() {
        return Ok(Some(grid[i]));
    }
    let (mut a, mut b) = (grid[i], grid[i + 1]);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if positive(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(a))
}
