//! Batch analysis of collective evaluations (likes and dislikes): input
//! formats, run configuration, the staged pipeline, the JSON report and
//! plot-data files. The numerics live in `evalpulse-core`.

mod error;

pub mod compare;
pub mod config;
pub mod ingest;
pub mod lexicons;
pub mod pipeline;
pub mod plots;
pub mod report;
pub mod synthcmd;

pub use error::CliError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const STAGE_FAILED: u8 = 1;
    pub const INPUT: u8 = 2;
}
