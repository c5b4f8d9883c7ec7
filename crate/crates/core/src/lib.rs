//! Placement engine for drone base stations (DBSs) that assist a single
//! ground base station (GBS) in serving an arbitrary crowd of ground users.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs plus an explicit seed, so results are reproducible
//! bit for bit. File formats, timing, threads and the CLI live in the
//! `droneplace` companion crate.
//!
//! Module map:
//!
//! - [`model`]: domain types and input validation
//! - [`channel`]: backhaul, air-to-ground and terrestrial link models
//! - [`geometry`]: elevation-angle solver, minimum enclosing circle, lens areas
//! - [`clustering`]: Hungarian assignment and balanced k-means
//! - [`ddp`]: the iterative data-driven placement search
//! - [`eddp`]: GBS-anchored pre-partitioning on top of [`ddp`]
//! - [`metrics`]: evaluation reports and empirical distributions
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod clustering;
pub mod ddp;
pub mod eddp;
pub mod error;
pub mod geometry;
mod math;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
pub use model::{
    db_to_linear, linear_to_db, Area, Association, DbsSite, Environment, Placement, Point,
    Scenario, SystemConfig, Tag, Violation,
};
