//! Rayon-backed versions of the core grid and oracle drivers.
//!
//! Each work item is one grid point or one oracle shard; results are
//! collected in input order, so the output matches the sequential core
//! functions bit for bit for any number of threads.

use fsa_core::faked_states::FakedStateIntensities;
use fsa_core::model::EfficiencyMatrix;
use fsa_core::oracle::{self, ResendTallies, SimulationRun, StateType};
use fsa_core::search::{self, KminResult, MuPrimeSearch, ScanRow, StrategyTemplate, SweepGrid, SweepRow};
use fsa_core::{AttackStrategy, Error, SystemParams};
use rayon::prelude::*;

pub fn sweep_grid(p: &SystemParams, template: StrategyTemplate, grid: &SweepGrid) -> Result<Vec<SweepRow>, Error> {
    let points: Vec<_> = grid.points().collect();
    points
        .into_par_iter()
        .map(|pt| search::sweep_point(p, template, pt))
        .collect()
}

pub fn distance_scan(p: &SystemParams, strategy: &AttackStrategy, distances: &[f64]) -> Result<Vec<ScanRow>, Error> {
    distances
        .par_iter()
        .map(|&l| search::scan_point(p, strategy, l))
        .collect()
}

pub fn k_min_scan(p: &SystemParams, distances: &[f64], tol: f64) -> Result<Vec<KminResult>, Error> {
    distances
        .par_iter()
        .map(|&l| search::k_min_with(&p.with_distance(l), StrategyTemplate::Qnd, &MuPrimeSearch::default(), tol))
        .collect()
}

pub fn simulate_pulses(p: &SystemParams, strategy: &AttackStrategy, n: u64, seed: u64) -> Result<SimulationRun, Error> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_pulses",
            value: 0.0,
            expected: "n_pulses >= 1",
        });
    }
    let jobs: Vec<(StateType, u64)> = (0..oracle::shard_count(n))
        .flat_map(|i| [(StateType::Signal, i), (StateType::Decoy, i)])
        .collect();
    let shards = jobs
        .into_par_iter()
        .map(|(state, i)| oracle::simulate_shard(p, strategy, n, seed, state, i).map(|t| (state, t)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(oracle::assemble_run(strategy, n, seed, shards))
}

pub fn simulate_resends(
    fs: &FakedStateIntensities,
    eff: &EfficiencyMatrix,
    dark: f64,
    e_detector: f64,
    n: u64,
    seed: u64,
) -> ResendTallies {
    let shards: Vec<ResendTallies> = (0..oracle::shard_count(n))
        .into_par_iter()
        .map(|i| oracle::simulate_resends_shard(fs, eff, dark, e_detector, n, seed, i))
        .collect();
    let mut total = ResendTallies::default();
    for t in &shards {
        total.merge(t);
    }
    total
}
