//! Numerical laboratory for the correspondence between the two-block
//! Springer fiber and the union of the subsets `S_a ⊂ (P^1)^{2n}` indexed
//! by crossingless matchings.
//!
//! The crate is layered bottom-up:
//!
//! * [`matchings`]: crossingless matchings and their combinatorics.
//! * [`subspace`]: tolerance-aware subspace arithmetic over `C^d`.
//! * [`nilspace`]: `E = C^N ⊕ C^N`, the shift `z` and the collapse `C`.
//! * [`flagside`]: `Y_m`, `K_a`, `X_{m,i}` and the contraction `q`.
//! * [`sphereside`]: lines, `S_a`, `T_a`, `A_{m,i}`, `I`, and `phi`.
//! * [`harness`]: randomized checks of every step and the report format.

pub mod error;
pub mod flagside;
pub mod harness;
pub mod io;
pub mod matchings;
pub mod membership;
pub mod nilspace;
pub mod sphereside;
pub mod subspace;

pub use error::{Error, Result};
pub use flagside::{Flag, KaVariant};
pub use matchings::Matching;
pub use membership::Membership;
pub use nilspace::NilpotentSpace;
pub use sphereside::{Line, LineTuple};
pub use subspace::{Subspace, Tolerances, Verdict};
