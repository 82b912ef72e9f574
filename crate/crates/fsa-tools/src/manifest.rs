//! JSON run manifests for archiving oracle runs.

use std::io::Write;

use fsa_core::oracle::{Estimate, ResendTallies, StateTallies, SHARD_SIZE};
use fsa_core::{AttackStrategy, SystemParams};
use serde::Serialize;

use crate::error::Result;
use crate::validate::PointRun;

#[derive(Debug, Serialize)]
pub struct Params {
    pub alpha: f64,
    pub dark_count: f64,
    pub eta_bob: f64,
    pub mu: f64,
    pub nu: f64,
    pub f_ec: f64,
    pub q_sift: f64,
    pub e_detector: f64,
    pub distance: f64,
}

impl From<&SystemParams> for Params {
    fn from(p: &SystemParams) -> Self {
        Params {
            alpha: p.alpha,
            dark_count: p.dark_count,
            eta_bob: p.eta_bob,
            mu: p.mu,
            nu: p.nu,
            f_ec: p.f_ec,
            q_sift: p.q_sift,
            e_detector: p.e_detector,
            distance: p.distance,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Qnd { mu_prime: f64, k: f64 },
    Pnrd { mu_prime: f64, k: f64, eta_e: f64 },
}

impl From<&AttackStrategy> for Strategy {
    fn from(s: &AttackStrategy) -> Self {
        match *s {
            AttackStrategy::Baseline => Strategy::Baseline,
            AttackStrategy::Qnd { mu_prime, k } => Strategy::Qnd { mu_prime, k },
            AttackStrategy::Pnrd { mu_prime, k, eta_e } => Strategy::Pnrd { mu_prime, k, eta_e },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Tallies {
    pub pulses: u64,
    pub det0_only: u64,
    pub det1_only: u64,
    pub double_click: u64,
    pub loss: u64,
    pub resends: u64,
    pub sifted: u64,
    pub sifted_clicks: u64,
    pub sifted_errors: u64,
}

impl From<&StateTallies> for Tallies {
    fn from(t: &StateTallies) -> Self {
        Tallies {
            pulses: t.pulses,
            det0_only: t.det0_only,
            det1_only: t.det1_only,
            double_click: t.double_click,
            loss: t.loss,
            resends: t.resends,
            sifted: t.sifted,
            sifted_clicks: t.sifted_clicks,
            sifted_errors: t.sifted_errors,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateRecord {
    pub value: f64,
    pub std_error: f64,
    pub successes: u64,
    pub trials: u64,
}

impl From<Estimate> for EstimateRecord {
    fn from(e: Estimate) -> Self {
        EstimateRecord {
            value: e.value,
            std_error: e.std_error,
            successes: e.successes,
            trials: e.trials,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResendRecord {
    pub trials: u64,
    pub det0_clicks: u64,
    pub det1_clicks: u64,
    pub any_click: u64,
    pub sifted: u64,
    pub sifted_errors: u64,
    pub r_trials: u64,
    pub r1_hits: u64,
    pub s_trials: u64,
    pub s0_hits: u64,
}

impl From<&ResendTallies> for ResendRecord {
    fn from(t: &ResendTallies) -> Self {
        ResendRecord {
            trials: t.trials,
            det0_clicks: t.det0_clicks,
            det1_clicks: t.det1_clicks,
            any_click: t.any_click,
            sifted: t.sifted,
            sifted_errors: t.sifted_errors,
            r_trials: t.r_trials,
            r1_hits: t.r1_hits,
            s_trials: t.s_trials,
            s0_hits: t.s0_hits,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub params: Params,
    pub strategy: Strategy,
    pub seed: u64,
    pub n_pulses: u64,
    pub shard_size: u64,
    pub rng: &'static str,
    pub signal: Tallies,
    pub decoy: Tallies,
    pub q_mu: EstimateRecord,
    pub q_nu: EstimateRecord,
    pub emu_qmu: EstimateRecord,
    pub enu_qnu: EstimateRecord,
    pub resends: Option<ResendRecord>,
}

impl RunManifest {
    pub fn new(p: &SystemParams, run: &PointRun) -> Self {
        let pulses = &run.pulses;
        let e = pulses.empirical();
        RunManifest {
            params: p.into(),
            strategy: (&pulses.strategy).into(),
            seed: pulses.seed,
            n_pulses: pulses.n_pulses,
            shard_size: SHARD_SIZE,
            rng: "ChaCha8Rng::seed_from_u64(seed), stream 2*shard (signal) / 2*shard+1 (decoy) / 2^48+shard (resends)",
            signal: (&pulses.signal).into(),
            decoy: (&pulses.decoy).into(),
            q_mu: e.q_mu.into(),
            q_nu: e.q_nu.into(),
            emu_qmu: e.emu_qmu.into(),
            enu_qnu: e.enu_qnu.into(),
            resends: run.resends.as_ref().map(Into::into),
        }
    }
}

pub fn write_manifests<W: Write>(out: W, manifests: &[RunManifest]) -> Result<()> {
    serde_json::to_writer_pretty(out, manifests)?;
    Ok(())
}
