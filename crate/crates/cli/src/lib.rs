//! Command-line front end for `noninf`.

pub mod commands;
pub mod config;
pub mod format;
pub mod reproduce;

/// Version tag of the JSON documents written by `--json`.
pub const REPORT_SCHEMA: &str = "noninf-report/1";

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const NUMERICAL: u8 = 2;
    pub const REPRODUCTION: u8 = 3;
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<noninf::Error>()) {
        Some(noninf::Error::Domain(_) | noninf::Error::NoConvergence { .. }) => exit::NUMERICAL,
        _ => exit::VALIDATION,
    }
}
