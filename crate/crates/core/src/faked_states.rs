//! Detection statistics of Eve's faked states.
//!
//! Eve resends the opposite bit in the opposite basis: after reading bit 0
//! she sends bit 1 at timing `t0`, where detector 1 is nearly blind; after
//! reading bit 1 she sends bit 0 at `t1`. With Bob choosing his basis at
//! random, each resend falls into one of four equally likely cases, which is
//! where the 1/4 and 1/8 weights below come from.

use libm::exp;

use crate::error::{Error, Result};
use crate::model::EfficiencyMatrix;

/// Mean photon numbers of the faked states sent at `t0` and `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FakedStateIntensities {
    pub mu_0: f64,
    pub mu_1: f64,
}

impl FakedStateIntensities {
    /// Equal intensity at both timings, which keeps Bob's two detectors
    /// balanced.
    pub fn uniform(mu_prime: f64) -> Result<Self> {
        Self::new(mu_prime, mu_prime)
    }

    pub fn new(mu_0: f64, mu_1: f64) -> Result<Self> {
        if !(mu_0 >= 0.0) {
            return Err(Error::param("mu_0", mu_0, "mu_0 >= 0"));
        }
        if !(mu_1 >= 0.0) {
            return Err(Error::param("mu_1", mu_1, "mu_1 >= 0"));
        }
        Ok(FakedStateIntensities { mu_0, mu_1 })
    }
}

/// Probability that Bob's detector 0 clicks on a faked state.
pub fn p_click_det0(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> f64 {
    let FakedStateIntensities { mu_0, mu_1 } = *fs;
    0.75 + 0.25 * d
        - 0.25
            * (1.0 - d)
            * (exp(-0.5 * mu_0 * eff.eta_00) + exp(-0.5 * mu_1 * eff.eta_01) + exp(-mu_1 * eff.eta_01))
}

/// Probability that Bob's detector 1 clicks on a faked state.
///
/// The last exponent uses `mu_0`: detector 1 only sees the full pulse when
/// it is the `t0` resend measured in the faked state's own basis.
pub fn p_click_det1(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> f64 {
    let FakedStateIntensities { mu_0, mu_1 } = *fs;
    0.75 + 0.25 * d
        - 0.25
            * (1.0 - d)
            * (exp(-0.5 * mu_0 * eff.eta_10) + exp(-0.5 * mu_1 * eff.eta_11) + exp(-mu_0 * eff.eta_10))
}

/// Variant of [`p_click_det1`] whose final exponent reads `mu_1 * eta_10`.
/// Identical to it whenever `mu_0 == mu_1`; kept for regression comparison.
pub fn p_click_det1_mu1_variant(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> f64 {
    let FakedStateIntensities { mu_0, mu_1 } = *fs;
    0.75 + 0.25 * d
        - 0.25
            * (1.0 - d)
            * (exp(-0.5 * mu_0 * eff.eta_10) + exp(-0.5 * mu_1 * eff.eta_11) + exp(-mu_1 * eff.eta_10))
}

/// Probability that at least one of Bob's detectors clicks on a faked state.
pub fn p_arrive(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> f64 {
    let FakedStateIntensities { mu_0, mu_1 } = *fs;
    let single = exp(-mu_1 * eff.eta_01) + exp(-mu_0 * eff.eta_10);
    let split = exp(-0.5 * mu_0 * eff.eta_00 - 0.5 * mu_0 * eff.eta_10)
        + exp(-0.5 * mu_1 * eff.eta_01 - 0.5 * mu_1 * eff.eta_11);
    1.0 - 0.25 * (1.0 - d) * single + 0.25 * d * (1.0 - d) * single
        - 0.25 * (1.0 - d) * (1.0 - d) * split
}

/// Probability that a sifted faked state produces an erroneous bit at Bob.
/// Double clicks are assigned a random bit.
pub fn p_error(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> f64 {
    let FakedStateIntensities { mu_0, mu_1 } = *fs;
    let e = |x: f64| exp(x);
    let first = e(-0.5 * mu_0 * eff.eta_00) + e(-0.5 * mu_1 * eff.eta_11)
        - e(-0.5 * mu_0 * eff.eta_10)
        - e(-0.5 * mu_1 * eff.eta_01)
        - e(-mu_1 * eff.eta_01)
        - e(-mu_0 * eff.eta_10);
    let split = e(-0.5 * mu_0 * eff.eta_00 - 0.5 * mu_0 * eff.eta_10)
        + e(-0.5 * mu_1 * eff.eta_01 - 0.5 * mu_1 * eff.eta_11);
    let single = e(-mu_1 * eff.eta_01) + e(-mu_0 * eff.eta_10);
    0.125 * (1.0 - d) * first - 0.125 * (1.0 - d) * (1.0 - d) * split
        + 0.125 * d * (1.0 - d) * single
        + 0.5
}

/// The four faked-state probabilities evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FakedStateRates {
    pub p_click_det0: f64,
    pub p_click_det1: f64,
    pub p_arrive: f64,
    pub p_error: f64,
}

impl FakedStateRates {
    pub fn new(fs: &FakedStateIntensities, eff: &EfficiencyMatrix, d: f64) -> Self {
        FakedStateRates {
            p_click_det0: p_click_det0(fs, eff, d),
            p_click_det1: p_click_det1(fs, eff, d),
            p_arrive: p_arrive(fs, eff, d),
            p_error: p_error(fs, eff, d),
        }
    }

    /// Error probability after Bob's bit is additionally flipped with
    /// probability `e_detector` on every click.
    pub fn error_with_misalignment(&self, e_detector: f64) -> f64 {
        self.p_error + e_detector * (self.p_arrive - 2.0 * self.p_error)
    }
}
