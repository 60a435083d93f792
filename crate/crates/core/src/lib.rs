//! Finite quantum groups: Haar weights, GNS data, modular theory, the
//! multiplicative unitary, antipode, duality, and numerical verification of
//! the identities relating them.

pub mod analysis;
pub mod antipode;
pub mod builders;
pub mod duality;
pub mod error;
pub mod export;
pub mod gns;
pub mod invariance;
pub mod numlin;
pub mod pipeline;
pub mod report;
pub mod sampling;
pub mod spec_file;
pub mod star_algebra;
pub mod variants;

pub use error::{Error, Result};
pub use numlin::{AntilinearOp, CMatrix, CVector, Tolerance};
