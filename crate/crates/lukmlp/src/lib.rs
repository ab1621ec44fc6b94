//! File formats and the command-line front end for `lukmlp-core`.

pub mod cli;
pub mod csv_io;
pub mod manifest;
pub mod model_io;
pub mod trace_io;
