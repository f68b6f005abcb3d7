//! Affine-geometric invariants of curves in R^d, numerical verification of
//! the associated geometric (Jacobian) inequalities, and weighted averaging
//! operators evaluated on explicit box-union sets.

pub mod boxes;
pub mod cli;
pub mod config;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod gi;
pub mod hull;
pub mod hypothesis;
pub mod operators;
pub mod poly;
pub mod quad;
pub mod xray;

pub use curve::{BuiltinName, Curve, Interval, Perturbation, ReparamMap};
pub use error::{Error, Result};
pub use quad::QuadOpts;

// Compile and run the guide's code snippets with `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/hypotheses.md")]
    mod hypotheses {}
    #[doc = include_str!("../../../book/src/geometric-inequality.md")]
    mod geometric_inequality {}
    #[doc = include_str!("../../../book/src/xray-maps.md")]
    mod xray_maps {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
