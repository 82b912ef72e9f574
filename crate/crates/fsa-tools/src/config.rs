//! Flat key-value parameter files and named presets.
//!
//! A config file is TOML with one scalar per line:
//!
//! ```toml
//! preset = "gys"
//! distance = 100
//! e_detector = 0.01
//! ```
//!
//! Keys are the [`SystemParams`] field names; `d` and `L` are accepted as
//! aliases of `dark_count` and `distance`.

use std::path::Path;

use fsa_core::SystemParams;

use crate::error::{Result, ToolError};

/// `gys` with the measured detector error `e_detector = 0.033`.
pub fn gys_with_detector_error() -> SystemParams {
    SystemParams {
        e_detector: 0.033,
        ..SystemParams::gys()
    }
}

pub const PRESET_NAMES: [&str; 2] = ["gys", "gys-edet"];

pub fn preset(name: &str) -> Result<SystemParams> {
    match name {
        "gys" => Ok(SystemParams::gys()),
        "gys-edet" => Ok(gys_with_detector_error()),
        other => Err(ToolError::UnknownPreset(other.to_string())),
    }
}

pub const PARAM_KEYS: [&str; 9] = [
    "alpha",
    "dark_count",
    "eta_bob",
    "mu",
    "nu",
    "f_ec",
    "q_sift",
    "e_detector",
    "distance",
];

pub fn set_param(p: &mut SystemParams, key: &str, value: f64) -> Result<()> {
    let slot = match key {
        "alpha" => &mut p.alpha,
        "dark_count" | "d" => &mut p.dark_count,
        "eta_bob" => &mut p.eta_bob,
        "mu" => &mut p.mu,
        "nu" => &mut p.nu,
        "f_ec" => &mut p.f_ec,
        "q_sift" => &mut p.q_sift,
        "e_detector" => &mut p.e_detector,
        "distance" | "L" => &mut p.distance,
        other => return Err(ToolError::UnknownKey(other.to_string())),
    };
    *slot = value;
    Ok(())
}

/// Applies a config document on top of `base`. A `preset` key, if present,
/// replaces `base` before the other keys are applied.
pub fn parse_config(text: &str, base: SystemParams) -> Result<SystemParams> {
    let table: toml::Table = text.parse()?;
    let mut params = match table.get("preset") {
        Some(toml::Value::String(name)) => preset(name)?,
        Some(_) => {
            return Err(ToolError::BadValue {
                key: "preset".into(),
                reason: "expected a string".into(),
            })
        }
        None => base,
    };
    for (key, value) in &table {
        if key == "preset" {
            continue;
        }
        let v = match value {
            toml::Value::Float(f) => *f,
            toml::Value::Integer(i) => *i as f64,
            _ => {
                return Err(ToolError::BadValue {
                    key: key.clone(),
                    reason: "expected a number".into(),
                })
            }
        };
        set_param(&mut params, key, v)?;
    }
    Ok(params)
}

pub fn load_config(path: &Path, base: SystemParams) -> Result<SystemParams> {
    parse_config(&std::fs::read_to_string(path)?, base)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(spec: &str) -> Result<(String, f64)> {
    let (key, value) = spec.split_once('=').ok_or_else(|| ToolError::BadValue {
        key: spec.to_string(),
        reason: "expected key=value".into(),
    })?;
    let key = key.trim();
    let value = value.trim().parse::<f64>().map_err(|e| ToolError::BadValue {
        key: key.to_string(),
        reason: e.to_string(),
    })?;
    Ok((key.to_string(), value))
}
