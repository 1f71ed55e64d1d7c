//! Spectral laboratory for eigenvectors of Erdős–Rényi graphs.
//!
//! The crate samples G(n,p) adjacency matrices and their Wigner normalizations,
//! decomposes them, and measures nodal domains, delocalization, edge
//! statistics and Green function comparisons. Every Monte Carlo quantity is
//! driven by a 64-bit master seed and is reproducible at any worker count.
//!
//! Modules, roughly in dependency order:
//!
//! - [`ensembles`]: samplers and matrix types.
//! - [`spectral`]: eigendecomposition, Green functions, semicircle law.
//! - [`nodal`]: sign vectors, nodal domains and pair-sign statistics.
//! - [`deloc`]: delocalization, rigidity and level-repulsion diagnostics.
//! - [`edge`]: the 2×2 detection system, secular equation and sticking.
//! - [`signpoly`]: weighted Sobolev projection of a smoothed sign.
//! - [`greenlaw`]: resolvent expansion and Lindeberg comparison.
//! - [`harness`]: named experiments, reports and the config format.

pub mod deloc;
pub mod edge;
pub mod ensembles;
mod error;
pub mod greenlaw;
pub mod harness;
mod jsonfloat;
pub mod mmio;
pub mod nodal;
pub mod par;
pub mod quad;
pub mod rng;
pub mod signpoly;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
