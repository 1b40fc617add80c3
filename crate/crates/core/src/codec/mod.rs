//! Desk-scale simulation of the random-coding construction.

pub mod codebook;
pub mod maxerror;
pub mod secrecy;
pub mod types;

pub use codebook::{generate_codebook, index_set_size, Codebook};
pub use maxerror::{expurgate, permutation_scheme, ErrorMatrix, Expurgation, PermutationOutcome, Provenance};
pub use secrecy::{
    delta_excess, delta_star, eve_state, CoveringSample, ExcessSample, KeyCount, SecrecyDiagnostics, SecrecyModel,
};
pub use types::{conditional_types, heisenberg_weyl, keyed_unitary, schmidt_decompose, GammaKey, TypeDecomposition};
