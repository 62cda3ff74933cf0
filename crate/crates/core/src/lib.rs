//! Mapping tori of free-group endomorphisms.
//!
//! Every endomorphism `phi` of a finitely generated free group `F` has a
//! mapping torus `M(phi) = < F, t | t^-1 g t = phi(g) >`. This crate
//! computes, for any such `phi`, an injective endomorphism `psi` of a
//! smaller free group `F1` presenting the same torus, and machine-verifies
//! the construction:
//!
//! * [`torus::stabilization_index`] finds the least `k` at which the ranks
//!   of the iterated images `phi^n(F)` stabilize (computed by Stallings
//!   folding in [`folding`], cross-checked by Nielsen reduction in
//!   [`oracle`]);
//! * [`torus::injectivize`] extracts a basis of `F1 = phi^k(F)` and the
//!   restriction `psi` in basis coordinates, certified injective by rank
//!   preservation;
//! * [`hnn`] presents both tori and decides the word problem in the
//!   ascending HNN extension `M(psi)` by Britton reduction, which powers
//!   [`hnn::verify_isomorphism`].

pub mod endo;
pub mod error;
pub mod folding;
pub mod hnn;
pub mod oracle;
pub mod torus;
pub mod words;

pub use endo::Endomorphism;
pub use error::{Error, Result};
pub use folding::{extract_basis, StallingsGraph, SubgroupBasis};
pub use hnn::{present_mapping_torus, HnnPresentation, MixedWord};
pub use torus::{injectivize, InjectivizationResult};
pub use words::{Letter, Rank, Word};
