//! Analytic-versus-Monte-Carlo comparison tables.

use fsa_core::faked_states::{FakedStateIntensities, FakedStateRates};
use fsa_core::observables::observables;
use fsa_core::oracle::{Estimate, ResendTallies, SimulationRun};
use fsa_core::security::table1_probs;
use fsa_core::{AttackStrategy, SystemParams};

use crate::error::Result;
use crate::parallel;

/// Agreement threshold in binomial standard deviations.
pub const SIGMA_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub point: usize,
    pub strategy: AttackStrategy,
    pub distance: f64,
    pub quantity: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    /// Binomial standard deviation under the analytic value.
    pub std_error: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Raw simulation output behind one validation point.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub pulses: SimulationRun,
    pub resends: Option<ResendTallies>,
}

/// Compares the closed forms at `p.distance` with `n`-sample Monte Carlo
/// runs: `n` signal and `n` decoy pulses, plus `n` isolated resends for
/// attack strategies.
pub fn validate_point(
    p: &SystemParams,
    strategy: &AttackStrategy,
    point: usize,
    n: u64,
    seed: u64,
) -> Result<(Vec<Comparison>, PointRun)> {
    let mut rows = Vec::new();
    let mut push = |quantity: &'static str, est: Estimate, analytic: f64| {
        let z_score = est.z_score(analytic);
        rows.push(Comparison {
            point,
            strategy: *strategy,
            distance: p.distance,
            quantity,
            analytic,
            empirical: est.value,
            std_error: est.sigma_under(analytic),
            z_score,
            pass: z_score <= SIGMA_THRESHOLD,
        });
    };

    let obs = observables(p, strategy)?;
    let pulses = parallel::simulate_pulses(p, strategy, n, seed)?;
    let e = pulses.empirical();
    push("q_mu", e.q_mu, obs.q_mu);
    push("q_nu", e.q_nu, obs.q_nu);
    push("emu_qmu", e.emu_qmu, obs.emu_qmu);
    push("enu_qnu", e.enu_qnu, obs.enu_qnu);

    let resends = match (strategy.mu_prime(), strategy.mismatch()) {
        (Some(mu_prime), Some(k)) => {
            let fs = FakedStateIntensities::uniform(mu_prime)?;
            let eff = p.efficiencies(k)?;
            let r = FakedStateRates::new(&fs, &eff, p.dark_count);
            let tab = table1_probs(&fs, &eff);
            let t = parallel::simulate_resends(&fs, &eff, p.dark_count, p.e_detector, n, seed);
            push("p_click_det0", t.p_click_det0(), r.p_click_det0);
            push("p_click_det1", t.p_click_det1(), r.p_click_det1);
            push("p_arrive", t.p_arrive(), r.p_arrive);
            push("p_error", t.p_error(), r.error_with_misalignment(p.e_detector));
            push("r1", t.r1(), tab.r1);
            push("s0", t.s0(), tab.s0);
            Some(t)
        }
        _ => None,
    };
    Ok((rows, PointRun { pulses, resends }))
}

pub fn all_pass(rows: &[Comparison]) -> bool {
    rows.iter().all(|r| r.pass)
}
