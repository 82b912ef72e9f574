use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("unknown preset `{0}` (available: gys, gys-edet)")]
    UnknownPreset(String),
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Model(#[from] fsa_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ToolError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::UnknownKey(_)
            | ToolError::BadValue { .. }
            | ToolError::UnknownPreset(_)
            | ToolError::Parse(_) => 2,
            ToolError::Model(
                fsa_core::Error::InvalidParameter { .. }
                | fsa_core::Error::InvalidGrid { .. }
                | fsa_core::Error::UnphysicalEfficiency { .. }
                | fsa_core::Error::WrongStrategy { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = ToolError> = std::result::Result<T, E>;
