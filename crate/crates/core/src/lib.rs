//! Permutation-modulation space-time block codes for MIMO visible light links.
//!
//! The crate covers the whole link: codebook construction ([`codebook`]),
//! intensity mapping ([`txcodec`]), a line-of-sight Lambertian channel
//! ([`channel`]), linear assignment solvers ([`assignment`]), the receivers
//! ([`detectors`]) and BER analysis and simulation ([`analysis`]). Scenario
//! files and the shipped experiment presets live in [`scenario`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assignment;
pub mod channel;
pub mod codebook;
pub mod detectors;
pub mod error;
pub mod matrix;
pub mod scenario;
pub mod txcodec;

pub use error::{Error, Result};
pub use matrix::Mat;
