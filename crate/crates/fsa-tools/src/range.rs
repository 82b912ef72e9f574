//! Parsing of value lists such as `0:200:5` or `10,20,40`.

use crate::error::{Result, ToolError};

/// `lo, lo + step, ...` up to `hi` inclusive.
pub fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Parses `lo:hi:step` or a comma-separated list.
pub fn parse_values(key: &str, spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| ToolError::BadValue {
        key: key.to_string(),
        reason,
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(bad("expected lo:hi:step".into()));
        };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(step > 0.0) || hi < lo {
            return Err(bad("need step > 0 and hi >= lo".into()));
        }
        Ok(steps(lo, hi, step))
    } else {
        spec.split(',').map(num).collect()
    }
}
