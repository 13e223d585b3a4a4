//! Robust relay beamforming for dual-hop MIMO amplify-and-forward multi-relay
//! networks with imperfect CSI.
//!
//! The crate builds MMSE-RZF (and the MF/ZF special cases) relay beamformers,
//! measures ergodic rates under QR-based successive interference
//! cancellation at the destination, and evaluates the large-`K` asymptotic
//! rate from Monte-Carlo eigenvalue expectations.

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod beamformer;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod random_matrix;
pub mod sic;
pub mod verify;

pub use config::{db_to_linear, derive_stream, NetworkConfig, SeedSpec, Stream};
pub use error::{Error, Result};
pub use linalg::CMatrix;
