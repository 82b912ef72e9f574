//! Faked-states attack analysis for weak+vacuum decoy-state BB84 systems whose
//! detectors have an efficiency mismatch.
//!
//! The crate is `no_std` (it needs `alloc` for the parameter-search tables)
//! and is organised bottom-up:
//!
//! - [`model`]: system constants, channel transmittance and the mismatch
//!   efficiency matrix.
//! - [`faked_states`]: click, arrival and error probabilities of Eve's resent
//!   faked states.
//! - [`observables`]: the gains and error gains Alice and Bob observe with no
//!   attack, under a QND-assisted attack and under a PNRD-assisted attack.
//! - [`decoy`]: decoy-state bounds and the GLLP key rate.
//! - [`security`]: outcome probabilities for mismatched-basis resends and the
//!   residual absolutely secure rate.
//! - [`search`]: distance scans, `(k, μ′)` sweeps and the `k_min` bisection.
//! - [`oracle`]: a pulse-level Monte Carlo simulator that checks every closed
//!   form above.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod decoy;
mod error;
pub mod faked_states;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod search;
pub mod security;

pub use decoy::{DecoyBounds, RateReport};
pub use error::{Error, Result};
pub use faked_states::FakedStateIntensities;
pub use model::{EfficiencyMatrix, SystemParams};
pub use observables::{AttackStrategy, Observables};
