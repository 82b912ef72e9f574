//! Gains and error gains seen by Alice and Bob.

use libm::exp;

use crate::error::{Error, Result};
use crate::faked_states::{FakedStateIntensities, FakedStateRates};
use crate::model::SystemParams;

/// What Eve does on the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackStrategy {
    /// No eavesdropper.
    Baseline,
    /// Ideal photon-number QND measurement: resend on every single-photon
    /// pulse, block the rest.
    Qnd { mu_prime: f64, k: f64 },
    /// Photon-number-resolving detectors of single-photon efficiency `eta_e`:
    /// resend only when exactly one photon is registered.
    Pnrd { mu_prime: f64, k: f64, eta_e: f64 },
}

impl AttackStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackStrategy::Baseline => Ok(()),
            AttackStrategy::Qnd { mu_prime, k } => check_attack(mu_prime, k),
            AttackStrategy::Pnrd { mu_prime, k, eta_e } => {
                check_attack(mu_prime, k)?;
                if !(eta_e > 0.0 && eta_e <= 1.0) {
                    return Err(Error::param("eta_e", eta_e, "0 < eta_e <= 1"));
                }
                Ok(())
            }
        }
    }

    /// Efficiency with which Eve identifies single-photon pulses; QND is the
    /// `eta_e = 1` limit.
    pub fn eve_efficiency(&self) -> Option<f64> {
        match *self {
            AttackStrategy::Baseline => None,
            AttackStrategy::Qnd { .. } => Some(1.0),
            AttackStrategy::Pnrd { eta_e, .. } => Some(eta_e),
        }
    }

    pub fn mu_prime(&self) -> Option<f64> {
        match *self {
            AttackStrategy::Baseline => None,
            AttackStrategy::Qnd { mu_prime, .. } | AttackStrategy::Pnrd { mu_prime, .. } => {
                Some(mu_prime)
            }
        }
    }

    pub fn mismatch(&self) -> Option<f64> {
        match *self {
            AttackStrategy::Baseline => None,
            AttackStrategy::Qnd { k, .. } | AttackStrategy::Pnrd { k, .. } => Some(k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackStrategy::Baseline => "baseline",
            AttackStrategy::Qnd { .. } => "qnd",
            AttackStrategy::Pnrd { .. } => "pnrd",
        }
    }
}

fn check_attack(mu_prime: f64, k: f64) -> Result<()> {
    if !(mu_prime >= 0.0 && mu_prime.is_finite()) {
        return Err(Error::param("mu_prime", mu_prime, "mu_prime >= 0"));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param("k", k, "k >= 1"));
    }
    Ok(())
}

/// Per-pulse rates measured by the legitimate users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub q_mu: f64,
    pub q_nu: f64,
    pub emu_qmu: f64,
    pub enu_qnu: f64,
    pub e_mu: f64,
}

impl Observables {
    /// Assembles the record, deriving `e_mu = emu_qmu / q_mu`.
    pub fn new(q_mu: f64, q_nu: f64, emu_qmu: f64, enu_qnu: f64) -> Result<Self> {
        if !(q_mu > 0.0) {
            return Err(Error::DegenerateObservables);
        }
        Ok(Observables {
            q_mu,
            q_nu,
            emu_qmu,
            enu_qnu,
            e_mu: emu_qmu / q_mu,
        })
    }
}

/// Probability that Eve's detectors report exactly one photon for a pulse
/// of mean `mu`: `mu * eta_e * exp(-mu * eta_e)`.
pub fn p_single(mu: f64, eta_e: f64) -> f64 {
    let m = mu * eta_e;
    m * exp(-m)
}

/// Observables for an intercept-resend attack that resends on a fraction
/// `p_single(x, eta_e)` of pulses of mean `x` and blocks everything else.
pub fn attack_observables(p: &SystemParams, arrive: f64, error: f64, eta_e: f64) -> Result<Observables> {
    let d = p.dark_count;
    let gain = |x: f64| {
        let s = p_single(x, eta_e);
        (arrive * s + (1.0 - s) * d, error * s + 0.5 * (1.0 - s) * d)
    };
    let (q_mu, emu_qmu) = gain(p.mu);
    let (q_nu, enu_qnu) = gain(p.nu);
    Observables::new(q_mu, q_nu, emu_qmu, enu_qnu)
}

fn faked_state_rates(p: &SystemParams, mu_prime: f64, k: f64) -> Result<FakedStateRates> {
    let eff = p.efficiencies(k)?;
    let fs = FakedStateIntensities::uniform(mu_prime)?;
    Ok(FakedStateRates::new(&fs, &eff, p.dark_count))
}

pub fn observables_qnd(p: &SystemParams, mu_prime: f64, k: f64) -> Result<Observables> {
    check_attack(mu_prime, k)?;
    let r = faked_state_rates(p, mu_prime, k)?;
    attack_observables(p, r.p_arrive, r.error_with_misalignment(p.e_detector), 1.0)
}

pub fn observables_pnrd(p: &SystemParams, mu_prime: f64, k: f64, eta_e: f64) -> Result<Observables> {
    AttackStrategy::Pnrd { mu_prime, k, eta_e }.validate()?;
    let r = faked_state_rates(p, mu_prime, k)?;
    attack_observables(p, r.p_arrive, r.error_with_misalignment(p.e_detector), eta_e)
}

/// Linear-loss channel with no eavesdropper:
/// `Q_x = d + 1 - exp(-eta x)`, `E_x Q_x = d/2 + e_detector (1 - exp(-eta x))`.
pub fn observables_baseline(p: &SystemParams) -> Result<Observables> {
    let eta = p.overall_transmittance()?;
    let d = p.dark_count;
    let gain = |x: f64| {
        let detected = -libm::expm1(-eta * x);
        (d + detected, 0.5 * d + p.e_detector * detected)
    };
    let (q_mu, emu_qmu) = gain(p.mu);
    let (q_nu, enu_qnu) = gain(p.nu);
    Observables::new(q_mu, q_nu, emu_qmu, enu_qnu)
}

pub fn observables(p: &SystemParams, strategy: &AttackStrategy) -> Result<Observables> {
    match *strategy {
        AttackStrategy::Baseline => observables_baseline(p),
        AttackStrategy::Qnd { mu_prime, k } => observables_qnd(p, mu_prime, k),
        AttackStrategy::Pnrd { mu_prime, k, eta_e } => observables_pnrd(p, mu_prime, k, eta_e),
    }
}
