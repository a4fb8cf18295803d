//! Competing-product propagation on social networks.
//!
//! Individuals hold exactly one of `R` competing products and switch either by
//! copying a random neighbour (social conversion, probability `α_i`) or by
//! following the product-conversion matrix `Δ` (self conversion). The crate
//! provides the exact Markov simulation, its mean-field approximations, their
//! asymptotic analysis and the stage-wise Nash investment games built on top.

pub mod analysis;
pub mod error;
pub mod games;
pub mod generators;
pub mod graphs;
pub mod markov;
pub mod ncpm;

pub use error::{Error, Result};
pub use graphs::{
    dominant_left_eigenvector, mixing_matrix, CaseLabel, OpenMindedness, ProductConversionGraph,
    SocialNetwork,
};
pub use ncpm::{ProbabilityMatrix, TwoProductParams};
