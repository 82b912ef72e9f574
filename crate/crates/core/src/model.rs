//! System constants, channel loss and the mismatch efficiency matrix.

use crate::error::{Error, Result};

/// Ratio between the weak and the strong entry of the efficiency matrix:
/// `eta_01 = t_AB * eta_bob * EFFICIENCY_FLOOR`.
pub const EFFICIENCY_FLOOR: f64 = 1e-4;

/// Largest mismatch ratio considered achievable.
pub const MAX_MISMATCH: f64 = 1000.0;

/// Channel, source and detector constants for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Fiber loss coefficient, dB/km.
    pub alpha: f64,
    /// Dark count probability per detector gate.
    pub dark_count: f64,
    /// Transmittance of Bob's optics and detectors.
    pub eta_bob: f64,
    /// Signal-state mean photon number.
    pub mu: f64,
    /// Decoy-state mean photon number.
    pub nu: f64,
    /// Error-correction inefficiency `f`.
    pub f_ec: f64,
    /// Sifting factor `q`.
    pub q_sift: f64,
    /// Probability that a photon hits the wrong detector.
    pub e_detector: f64,
    /// Fiber length, km.
    pub distance: f64,
}

impl SystemParams {
    /// GYS link constants with an ideal detector (`e_detector = 0`) at 0 km.
    pub const fn gys() -> Self {
        SystemParams {
            alpha: 0.21,
            dark_count: 1.7e-6,
            eta_bob: 0.045,
            mu: 0.48,
            nu: 0.05,
            f_ec: 1.22,
            q_sift: 0.5,
            e_detector: 0.0,
            distance: 0.0,
        }
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.alpha > 0.0 && p.alpha.is_finite()) {
            return Err(Error::param("alpha", p.alpha, "alpha > 0"));
        }
        if !(0.0..1.0).contains(&p.dark_count) {
            return Err(Error::param("dark_count", p.dark_count, "0 <= d < 1"));
        }
        if !(p.eta_bob > 0.0 && p.eta_bob <= 1.0) {
            return Err(Error::param("eta_bob", p.eta_bob, "0 < eta_bob <= 1"));
        }
        if !(p.nu > 0.0 && p.nu.is_finite()) {
            return Err(Error::param("nu", p.nu, "nu > 0"));
        }
        if !(p.mu > p.nu && p.mu.is_finite()) {
            return Err(Error::param("mu", p.mu, "mu > nu"));
        }
        if !(p.f_ec >= 1.0 && p.f_ec.is_finite()) {
            return Err(Error::param("f_ec", p.f_ec, "f_ec >= 1"));
        }
        if !(p.q_sift > 0.0 && p.q_sift <= 1.0) {
            return Err(Error::param("q_sift", p.q_sift, "0 < q_sift <= 1"));
        }
        if !(0.0..=0.5).contains(&p.e_detector) {
            return Err(Error::param("e_detector", p.e_detector, "0 <= e_detector <= 0.5"));
        }
        if !(p.distance >= 0.0 && p.distance.is_finite()) {
            return Err(Error::param("distance", p.distance, "distance >= 0"));
        }
        Ok(())
    }

    /// Channel transmittance at the configured distance.
    pub fn transmittance(&self) -> Result<f64> {
        channel_transmittance(self.alpha, self.distance)
    }

    /// Overall transmittance `t_AB * eta_bob` seen by an honest signal.
    pub fn overall_transmittance(&self) -> Result<f64> {
        Ok(self.transmittance()? * self.eta_bob)
    }

    /// Mismatch efficiency matrix at the configured distance.
    pub fn efficiencies(&self, k: f64) -> Result<EfficiencyMatrix> {
        dem_efficiencies(k, self.transmittance()?, self.eta_bob)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::gys()
    }
}

/// `10^(-alpha L / 10)`.
pub fn channel_transmittance(alpha: f64, distance: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", alpha, "alpha > 0"));
    }
    if !(distance >= 0.0 && distance.is_finite()) {
        return Err(Error::param("distance", distance, "distance >= 0"));
    }
    Ok(libm::pow(10.0, -alpha * distance / 10.0))
}

/// Equivalent transmission-and-detection efficiency of Bob's detector `m`
/// for a pulse arriving at timing `t_n`, stored as `eta_mn`.
///
/// Only the symmetric geometry is modelled: `eta_00 = eta_11 = k * eta_01`
/// and `eta_01 = eta_10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyMatrix {
    pub eta_00: f64,
    pub eta_01: f64,
    pub eta_10: f64,
    pub eta_11: f64,
    pub k: f64,
}

impl EfficiencyMatrix {
    /// `eta[m][n]` lookup used by the simulator.
    pub fn get(&self, detector: usize, timing: usize) -> f64 {
        match (detector, timing) {
            (0, 0) => self.eta_00,
            (0, 1) => self.eta_01,
            (1, 0) => self.eta_10,
            (1, 1) => self.eta_11,
            _ => panic!("detector and timing indices are 0 or 1"),
        }
    }
}

pub fn dem_efficiencies(k: f64, t_ab: f64, eta_bob: f64) -> Result<EfficiencyMatrix> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param("k", k, "k >= 1"));
    }
    if !(t_ab > 0.0 && t_ab <= 1.0) {
        return Err(Error::param("t_ab", t_ab, "0 < t_ab <= 1"));
    }
    if !(eta_bob > 0.0 && eta_bob <= 1.0) {
        return Err(Error::param("eta_bob", eta_bob, "0 < eta_bob <= 1"));
    }
    let weak = t_ab * eta_bob * EFFICIENCY_FLOOR;
    let strong = k * weak;
    if strong > 1.0 {
        return Err(Error::UnphysicalEfficiency { k, eta_00: strong });
    }
    Ok(EfficiencyMatrix {
        eta_00: strong,
        eta_01: weak,
        eta_10: weak,
        eta_11: strong,
        k,
    })
}

/// Poisson probability of `i` photons at mean `mu`.
pub fn poisson_pmf(mu: f64, i: u32) -> f64 {
    if mu == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if i <= 170 {
        let mut term = libm::exp(-mu);
        for j in 1..=i {
            term *= mu / j as f64;
        }
        term
    } else {
        libm::exp(i as f64 * libm::log(mu) - mu - libm::lgamma(i as f64 + 1.0))
    }
}
