//! Secrecy rate regions for a quantum wiretap channel whose entanglement
//! assistance may be intercepted, plus finite-blocklength coding diagnostics.

pub mod channels;
pub mod codec;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod regions;

pub use error::{Error, Result};
