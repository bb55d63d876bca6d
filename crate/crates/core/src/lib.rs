//! Lie-ball harmonic analysis: Lie norm geometry, spherical harmonics in `n`
//! variables, the Lie–Fourier expansion `f(x) = Σ_{k,l} r^k p_{k,l}(r²) Y_{k,l}(θ)`,
//! and its holomorphic continuation to the Lie ball.

pub mod cli;
pub mod complex_geometry;
pub mod error;
pub mod harmonic_basis;
pub mod holo_continuation;
pub mod lf_transform;
pub mod poly;
pub mod special_functions;
pub mod sphere_integration;
pub mod verification;

pub use error::{LieError, Result};
