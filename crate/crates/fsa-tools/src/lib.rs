//! File formats, parallel drivers and figure recipes on top of `fsa-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod manifest;
pub mod parallel;
pub mod range;
pub mod recipes;
pub mod table;
pub mod validate;

pub use error::{Result, ToolError};
