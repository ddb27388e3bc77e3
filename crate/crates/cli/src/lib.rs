//! Support code for the `epik` command-line tool: artifact files and the
//! benchmark harness.

pub mod artifact;
pub mod bench;
