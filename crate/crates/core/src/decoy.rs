//! Weak+vacuum decoy-state estimation and the GLLP key rate.

use libm::{exp, log2, pow};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::observables::Observables;

/// Truncation order of [`q1_expansion`]. For `mu <= 1` the tail is below
/// `1e-30`.
pub const SERIES_ORDER: usize = 60;

/// `H2(x) = -x log2 x - (1 - x) log2 (1 - x)` with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param("x", x, "0 <= x <= 1"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * log2(x) - (1.0 - x) * log2(1.0 - x))
}

/// A bound together with the value it had before clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub raw: f64,
}

impl Clamped {
    fn within(raw: f64, lo: f64, hi: f64) -> Self {
        let value = if raw.is_nan() { lo } else { raw.clamp(lo, hi) };
        Clamped { value, raw }
    }

    pub fn is_clamped(&self) -> bool {
        self.value != self.raw
    }
}

/// Lower bound on the single-photon yield, clamped to `[0, 1]`.
pub fn y1_lower(obs: &Observables, p: &SystemParams) -> Clamped {
    let (mu, nu, d) = (p.mu, p.nu, p.dark_count);
    let mu2 = mu * mu;
    let raw = mu / (mu * nu - nu * nu)
        * (obs.q_nu * exp(nu) - obs.q_mu * exp(mu) * nu * nu / mu2 - (mu2 - nu * nu) / mu2 * d);
    Clamped::within(raw, 0.0, 1.0)
}

/// `Q1^L = mu exp(-mu) Y1^L`.
pub fn q1_lower(y1: f64, mu: f64) -> f64 {
    mu * exp(-mu) * y1
}

/// Upper bound on the single-photon error rate. Returns `+inf` when the
/// yield bound is zero, meaning the error cannot be bounded.
pub fn e1_upper(obs: &Observables, y1: f64, p: &SystemParams) -> f64 {
    if y1 <= 0.0 {
        return f64::INFINITY;
    }
    (obs.enu_qnu * exp(p.nu) - 0.5 * p.dark_count) / (y1 * p.nu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub y1_lower: f64,
    pub q1_lower: f64,
    /// Unclamped; may be `+inf`.
    pub e1_upper: f64,
    /// `Y1^L` fell outside `[0, 1]` and was clamped.
    pub y1_clamped: bool,
}

impl DecoyBounds {
    pub fn estimate(obs: &Observables, p: &SystemParams) -> Self {
        let y1 = y1_lower(obs, p);
        DecoyBounds {
            y1_lower: y1.value,
            q1_lower: q1_lower(y1.value, p.mu),
            e1_upper: e1_upper(obs, y1.value, p),
            y1_clamped: y1.is_clamped(),
        }
    }

    /// `e1^U` restricted to `[0, 1/2]` for use in the rate.
    pub fn e1_for_rate(&self) -> Clamped {
        Clamped::within(self.e1_upper, 0.0, 0.5)
    }
}

/// Error-correction inefficiency as a function of the QBER. Only the
/// constant form is used.
pub fn error_correction_factor(p: &SystemParams, _qber: f64) -> f64 {
    p.f_ec
}

/// `R = q { -Q_mu f(E_mu) H2(E_mu) + Q1^L [1 - H2(e1^U)] }`. Negative values
/// mean no key can be extracted.
pub fn key_rate(obs: &Observables, bounds: &DecoyBounds, p: &SystemParams) -> f64 {
    let e_mu = obs.e_mu.clamp(0.0, 1.0);
    let cost = obs.q_mu * error_correction_factor(p, e_mu) * entropy(e_mu);
    let e1 = bounds.e1_for_rate().value;
    p.q_sift * (-cost + bounds.q1_lower * (1.0 - entropy(e1)))
}

fn entropy(x: f64) -> f64 {
    binary_entropy(x).unwrap_or(0.0)
}

/// Per-pulse rates for one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub observables: Observables,
    pub bounds: DecoyBounds,
    pub rate: f64,
    /// Only populated for the PNRD strategy.
    pub r_absolute: Option<f64>,
}

impl RateReport {
    pub fn e1_clamped(&self) -> bool {
        self.bounds.e1_for_rate().is_clamped()
    }
}

/// The `i`-th term of the `Q1^L` expansion in the photon-number yields,
/// including the common prefactor.
pub fn q1_expansion_term(i: usize, yield_i: f64, mu: f64, nu: f64) -> f64 {
    let prefactor = mu * mu * exp(-mu) / (mu * nu - nu * nu);
    let e = i as i32 - 2;
    let mut fact = 1.0;
    for j in 2..=i {
        fact *= j as f64;
    }
    prefactor * yield_i * nu * nu * (pow(nu, e as f64) - pow(mu, e as f64)) / fact
}

/// `Q1^L` expressed through the yields `Y_1..Y_N` (`yields[0]` is `Y_1`).
/// Every term with `i >= 2` is non-positive when `nu < mu`.
pub fn q1_expansion(yields: &[f64], mu: f64, nu: f64) -> f64 {
    yields
        .iter()
        .enumerate()
        .map(|(idx, &y)| q1_expansion_term(idx + 1, y, mu, nu))
        .sum()
}
