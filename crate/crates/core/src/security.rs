//! Key bits Eve cannot learn.
//!
//! When Alice and Bob share a basis but Eve measured in the other one, her
//! resend lands in Bob's basis with the opposite of her (random) bit, and the
//! resulting clicks carry Alice's bit without Eve knowing it.

use libm::exp;

use crate::error::{Error, Result};
use crate::faked_states::FakedStateIntensities;
use crate::model::{EfficiencyMatrix, SystemParams};
use crate::observables::{p_single, AttackStrategy};

/// Outcome probabilities for Z-prepared pulses measured by Bob in Z after
/// Eve measured in X. Row `r` is Eve's `t0` resend of bit 1, row `s` her `t1`
/// resend of bit 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Probs {
    pub r0: f64,
    pub r1: f64,
    pub s0: f64,
    pub s1: f64,
    pub double_r: f64,
    pub double_s: f64,
    pub loss_r: f64,
    pub loss_s: f64,
}

fn loss(a: f64, b: f64) -> f64 {
    1.0 - (a + b - a * b)
}

pub fn table1_probs(fs: &FakedStateIntensities, eff: &EfficiencyMatrix) -> Table1Probs {
    let r0 = 0.0;
    let r1 = -libm::expm1(-fs.mu_0 * eff.eta_10);
    let s0 = -libm::expm1(-fs.mu_1 * eff.eta_01);
    let s1 = 0.0;
    Table1Probs {
        r0,
        r1,
        s0,
        s1,
        double_r: r0 * r1,
        double_s: s0 * s1,
        loss_r: loss(r0, r1),
        loss_s: loss(s0, s1),
    }
}

/// Residual absolutely secure rate under the PNRD attack:
/// `(1/8) mu eta_e exp(-mu eta_e) (r1 + s0)`.
pub fn r_absolute(p: &SystemParams, strategy: &AttackStrategy, probs: &Table1Probs) -> Result<f64> {
    match *strategy {
        AttackStrategy::Pnrd { eta_e, .. } => Ok(residual(p_single(p.mu, eta_e), probs)),
        _ => Err(Error::WrongStrategy { expected: "pnrd" }),
    }
}

/// The same bookkeeping for the QND attack, where every single-photon pulse
/// is resent (`mu exp(-mu)` in place of the PNRD fraction).
pub fn r_absolute_qnd(p: &SystemParams, probs: &Table1Probs) -> f64 {
    residual(p.mu * exp(-p.mu), probs)
}

fn residual(resend_fraction: f64, probs: &Table1Probs) -> f64 {
    0.125 * resend_fraction * (probs.r1 + probs.s0)
}
