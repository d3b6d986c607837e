//! Simulation and analysis toolkit for light-weight compressed data
//! aggregation (LWCDA) in IoT sensor networks.
//!
//! The pipeline mirrors the protocol end to end:
//!
//! 1. [`topology`] deploys nodes and builds the unit-disc connectivity graph.
//! 2. [`routing`] elects cluster heads, attaches leaves to their nearest head,
//!    links the heads to the sink with a minimum spanning tree and schedules
//!    per-link packet traffic.
//! 3. [`measurement`] turns the clustering into the sparse ±1 measurement
//!    matrix and computes the measurement vector.
//! 4. [`bases`] supplies the sparsifying bases, [`recovery`] runs orthogonal
//!    matching pursuit, and [`analysis`] evaluates coherence, restricted
//!    isometry constants and phase-transition diagrams.
//! 5. [`cost`] accounts transmission cost for LWCDA and the baselines and
//!    [`field`] generates smooth synthetic sensing data.
//!
//! Bases and aggregation schemes are strategies registered by name
//! ([`bases::BasisRegistry`], [`cost::SchemeRegistry`]) so callers can select
//! them from configuration at runtime.

pub mod analysis;
pub mod bases;
pub mod cost;
mod error;
pub mod field;
pub mod linalg;
pub mod measurement;
pub mod recovery;
pub mod rng;
pub mod routing;
pub mod topology;

pub use error::{Error, Result};
