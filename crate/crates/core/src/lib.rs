//! Pseudoholomorphic Bishop discs and Levi-flat fillings in almost complex
//! four-manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`disc`]: spectral calculus on the unit disc (`dbar`, Cauchy-Green, Schwarz).
//! * [`geometry`]: almost complex structures, Levi forms, exhaustion functions.
//! * [`rh`]: linear Riemann-Hilbert problems.
//! * [`bishop`]: elliptic points, model discs and the nonlinear disc solver.
//! * [`scenario`]: the compiled-in test geometries.
//! * [`continuation`]: leaves, disc families, gluing and the filling hypersurface.

pub mod bishop;
pub mod continuation;
pub mod disc;
pub mod error;
pub mod geometry;
pub mod output;
pub mod quadrature;
pub mod rh;
pub mod scenario;
pub mod types;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/disc-calculus.md")]
    mod disc_calculus {}
    #[doc = include_str!("../../../book/src/riemann-hilbert.md")]
    mod riemann_hilbert {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/bishop-discs.md")]
    mod bishop_discs {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
}
