//! File formats, reports and the command-line driver behind the `nearcut`
//! binary.

pub mod app;
pub mod io;
pub mod report;
