//! One-command data tables for each figure of the attack analysis.

use std::io::Write;

use fsa_core::search::{StrategyTemplate, SweepGrid, KMIN_TOLERANCE};
use fsa_core::{AttackStrategy, SystemParams};

use crate::error::Result;
use crate::{parallel, range, table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Recipe {
    /// R over (k, μ′) at 100 km under the QND attack.
    Fig2,
    /// Baseline vs QND attack (k = 310, μ′ = 300): R and Q_μ over distance.
    Fig3,
    /// k_min over distance.
    Fig4,
    /// Baseline vs PNRD attack (k = 1000, μ′ = 900, η_e = 0.1) over distance.
    Fig6,
    /// R and R_absolute over distance for the PNRD attack.
    Fig7,
}

pub const QND_FIG3: AttackStrategy = AttackStrategy::Qnd { mu_prime: 300.0, k: 310.0 };
pub const PNRD_FIG6: AttackStrategy = AttackStrategy::Pnrd { mu_prime: 900.0, k: 1000.0, eta_e: 0.1 };

pub fn scan_distances() -> Vec<f64> {
    range::steps(0.0, 200.0, 1.0)
}

pub fn fig2_grid() -> SweepGrid {
    let mut k = vec![1.0];
    k.extend(range::steps(10.0, 1000.0, 10.0));
    SweepGrid::new(k, range::steps(0.0, 2000.0, 20.0), vec![100.0]).expect("static grid")
}

pub fn fig4_distances() -> Vec<f64> {
    range::steps(0.0, 200.0, 5.0)
}

impl Recipe {
    /// Strategies shown in a distance-scan recipe, baseline first.
    pub fn scan_strategies(self) -> Vec<AttackStrategy> {
        match self {
            Recipe::Fig3 => vec![AttackStrategy::Baseline, QND_FIG3],
            Recipe::Fig6 => vec![AttackStrategy::Baseline, PNRD_FIG6],
            Recipe::Fig7 => vec![PNRD_FIG6],
            Recipe::Fig2 | Recipe::Fig4 => Vec::new(),
        }
    }

    pub fn run<W: Write>(self, p: &SystemParams, out: W) -> Result<()> {
        match self {
            Recipe::Fig2 => {
                let rows = parallel::sweep_grid(p, StrategyTemplate::Qnd, &fig2_grid())?;
                table::write_sweep(out, &rows)
            }
            Recipe::Fig4 => {
                let rows = parallel::k_min_scan(p, &fig4_distances(), KMIN_TOLERANCE)?;
                table::write_kmin(out, &rows)
            }
            Recipe::Fig3 | Recipe::Fig6 | Recipe::Fig7 => {
                let distances = scan_distances();
                let strategies = self.scan_strategies();
                let blocks = strategies
                    .iter()
                    .map(|s| parallel::distance_scan(p, s, &distances))
                    .collect::<Result<Vec<_>, _>>()?;
                table::write_scan(
                    out,
                    strategies.iter().zip(&blocks).map(|(s, rows)| (s.name(), rows.as_slice())),
                )
            }
        }
    }
}
