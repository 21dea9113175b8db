//! Torus-equivariant Szegő kernels on weighted CR spheres and the Heisenberg
//! model space, with the machinery to check their leading asymptotics.
//!
//! Module map:
//! * [`lattice`]: weight vectors and the window enumeration of `μ·p`.
//! * [`sphere`]: CR frames, contact scale, Levi form and volume density.
//! * [`quadrature`]: simplex and 1-D rules, sphere moments, Monte-Carlo.
//! * [`hardy`]: monomial norms and the kernels `S_p`, `S_k`, `S_{k,τ}`.
//! * [`model`]: the Heisenberg model, its Bergman diagonal and window bounds.
//! * [`asymptotics`]: Richardson fits and predicted leading constants.

pub mod asymptotics;
pub mod cutoff;
pub mod error;
pub mod hardy;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod sphere;

pub use error::{Error, Result};
