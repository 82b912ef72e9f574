//! CSV writers. Floats use 17 significant digits; absent values are empty
//! fields.

use std::io::Write;

use fsa_core::search::{KminResult, ScanRow, SweepRow};
use fsa_core::{AttackStrategy, RateReport};

use crate::error::Result;
use crate::validate::Comparison;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const RATE_HEADER: [&str; 17] = [
    "strategy", "distance", "k", "mu_prime", "eta_e", "q_mu", "q_nu", "emu_qmu", "enu_qnu", "e_mu",
    "y1_lower", "q1_lower", "e1_upper", "rate", "r_absolute", "y1_clamped", "e1_clamped",
];

pub const SCAN_HEADER: [&str; 10] = [
    "strategy", "distance", "q_mu", "e_mu", "y1_lower", "q1_lower", "e1_upper", "rate", "r_absolute",
    "degenerate",
];

pub const SWEEP_HEADER: [&str; 6] = ["distance", "k", "mu_prime", "rate", "positive", "degenerate"];

pub const KMIN_HEADER: [&str; 5] = ["distance", "k_min", "mu_prime_at_kmin", "rate_at_kmin", "converged"];

pub const VALIDATE_HEADER: [&str; 12] = [
    "point", "strategy", "distance", "k", "mu_prime", "eta_e", "quantity", "analytic", "empirical",
    "std_error", "z_score", "pass",
];

fn strategy_fields(s: &AttackStrategy) -> [String; 3] {
    [
        opt(s.mismatch()),
        opt(s.mu_prime()),
        opt(match s {
            AttackStrategy::Pnrd { eta_e, .. } => Some(*eta_e),
            _ => None,
        }),
    ]
}

pub fn write_rate<W: Write>(out: W, strategy: &AttackStrategy, distance: f64, r: &RateReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RATE_HEADER)?;
    let o = &r.observables;
    let b = &r.bounds;
    let [k, mu_prime, eta_e] = strategy_fields(strategy);
    w.write_record([
        strategy.name().to_string(),
        fmt_f64(distance),
        k,
        mu_prime,
        eta_e,
        fmt_f64(o.q_mu),
        fmt_f64(o.q_nu),
        fmt_f64(o.emu_qmu),
        fmt_f64(o.enu_qnu),
        fmt_f64(o.e_mu),
        fmt_f64(b.y1_lower),
        fmt_f64(b.q1_lower),
        fmt_f64(b.e1_upper),
        fmt_f64(r.rate),
        opt(r.r_absolute),
        b.y1_clamped.to_string(),
        r.e1_clamped().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Scan rows for several strategies in one table.
pub fn write_scan<'a, W: Write>(out: W, blocks: impl IntoIterator<Item = (&'a str, &'a [ScanRow])>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCAN_HEADER)?;
    for (label, rows) in blocks {
        for r in rows {
            w.write_record([
                label.to_string(),
                fmt_f64(r.distance),
                fmt_f64(r.q_mu),
                fmt_f64(r.e_mu),
                fmt_f64(r.y1_lower),
                fmt_f64(r.q1_lower),
                fmt_f64(r.e1_upper),
                fmt_f64(r.rate),
                opt(r.r_absolute),
                r.degenerate.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.distance),
            fmt_f64(r.k),
            fmt_f64(r.mu_prime),
            fmt_f64(r.rate),
            r.is_positive().to_string(),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_kmin<W: Write>(out: W, rows: &[KminResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KMIN_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.distance),
            fmt_f64(r.k_min),
            fmt_f64(r.mu_prime_at_kmin),
            fmt_f64(r.rate_at_kmin),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation<W: Write>(out: W, rows: &[Comparison]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALIDATE_HEADER)?;
    for c in rows {
        let [k, mu_prime, eta_e] = strategy_fields(&c.strategy);
        w.write_record([
            c.point.to_string(),
            c.strategy.name().to_string(),
            fmt_f64(c.distance),
            k,
            mu_prime,
            eta_e,
            c.quantity.to_string(),
            fmt_f64(c.analytic),
            fmt_f64(c.empirical),
            fmt_f64(c.std_error),
            fmt_f64(c.z_score),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
