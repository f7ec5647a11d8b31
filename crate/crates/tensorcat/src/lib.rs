//! Symbolic tensor algebra and tensor calculus.
//!
//! Two equivalent tensor languages over a symbolic scalar field:
//!
//! * a point-free categorical combinator IR ([`roger`]) with a concrete
//!   matrix semantics, and
//! * an Einstein-index tensor-network frontend ([`albert`]) that elaborates
//!   to the combinator IR;
//!
//! plus a differential-geometry layer ([`geometry`]) for metrics, Christoffel
//! symbols, covariant derivatives and curvature, a string-diagram renderer
//! ([`diagram`]), and a small s-expression language ([`parse`]) used by the
//! `tensorcat` binary.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability.

pub mod albert;
pub mod cli;
pub mod diagram;
pub mod error;
mod extract;
pub mod geometry;
pub mod objects;
pub mod parse;
pub mod roger;
pub mod scalar;

pub use error::{Error, Result};
