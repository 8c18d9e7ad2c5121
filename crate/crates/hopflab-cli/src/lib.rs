//! Library half of the `hopflab` binary: suite configuration, the
//! verification suite itself, and deterministic report rendering. The binary
//! in `main.rs` is a thin argument-parsing shell over these modules, so
//! integration tests can drive the exact same code paths in-process.

pub mod config;
pub mod report;
pub mod suite;
