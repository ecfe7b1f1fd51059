//! Fault-tolerant Strassen-like 2x2 matrix multiplication.
//!
//! Combines the Strassen and Winograd sub-multiplications on one set of
//! workers, searches the local relations between them, adds parity
//! sub-multiplications, and measures how often the product can still be
//! reconstructed when workers fail.

pub mod bilinear;
pub mod cli;
pub mod decode;
pub mod error;
pub mod exact;
pub mod matrix;
pub mod peel;
pub mod reliability;
pub mod rng;
pub mod scheme;
pub mod search;
pub mod sim;

pub use error::{Error, Result};

/// Version stamped into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;
