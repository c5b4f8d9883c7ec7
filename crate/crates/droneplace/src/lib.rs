//! Std companion to [`droneplace_core`]: crowd generation, JSON/CSV files,
//! timed experiments and sweeps over a bounded thread pool, and the
//! `droneplace` command-line tool.
//!
//! The placement algorithms themselves live in the core crate and are
//! re-exported as [`core`].

pub use droneplace_core as core;

pub mod crowd;
pub mod experiment;
pub mod io;
pub mod parallel;
pub mod presets;
