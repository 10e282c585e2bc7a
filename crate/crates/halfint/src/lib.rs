//! Exact-arithmetic workbench for two computational layers that meet in the
//! theory of half-integral weight modular forms:
//!
//! 1. the metaplectic double cover of SL2(Qp) with its Kubota cocycle, and the
//!    genuine Iwahori Hecke algebras H(K0bar, gamma) attached to it, verified
//!    by direct coset-level convolution;
//! 2. spaces of half-integral weight cusp forms presented by truncated
//!    q-expansions over Q, with Hecke operators, Shimura lifts, Kohnen
//!    plus-space extraction and minus-space construction.
//!
//! All arithmetic is exact (big rationals and Q(zeta_8)); there is no floating
//! point in the crate.

pub mod arith;
pub mod basis_gen;
pub mod data_io;
pub mod linalg;
pub mod local_hecke;
pub mod metaplectic;
pub mod qexp;
pub mod shimura;
pub mod spaces;

pub use arith::{CycQ8, Int, Place, Rat};
pub use local_hecke::{CosetKind, CosetLabel, HeckeElement};
pub use metaplectic::{LocalCharacter, Mat2, MetaElement};
pub use qexp::QExpansion;
pub use spaces::{Block, HalfIntegralSpace, NewformData};
