//! File formats, configuration and parallel drivers around `qve-core`, plus
//! the implementation of the `qve` command line tool.

use std::fmt;

pub mod commands;
pub mod config;
pub mod format;
pub mod model_file;
pub mod pipeline;

/// Invalid input or configuration, reported with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Process exit code for an error: 2 for usage errors, 3 for numeric
/// failures in the solver pipeline, 1 for anything else (IO).
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        2
    } else if err.chain().any(|e| e.is::<qve_core::Error>()) {
        3
    } else {
        1
    }
}
