//! File formats, reports and the `awpp` command line on top of `awpp-core`.

pub mod cli;
mod commands;
pub mod formats;
pub mod report;
