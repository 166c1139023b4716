//! Stochastic particle simulation of the Enskog equation.
//!
//! The crate simulates the `n`-particle binary-collision jump process whose
//! empirical measure approximates solutions of the Enskog equation with hard
//! and soft potentials. Collisions are drawn from a Poisson random measure by
//! thinning against a constant majorant, with an angular cutoff that keeps the
//! event rate finite.
//!
//! Modules:
//!
//! - [`geometry`]: post-collision velocity algebra (`Γ`, the `ξ` shift, `α`).
//! - [`kernels`]: velocity, angular and spatial kernels plus truncation.
//! - [`particles`]: the particle system and its conservation audit.
//! - [`observables`]: moments, collision operators and weak-form residuals.
//! - [`meanfield`]: the tagged particle driven by a frozen flow, energy distance.
//! - [`bounds`]: Povzner inequality, moment envelopes, Bihari–LaSalle.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod bounds;
mod error;
pub mod geometry;
pub mod kernels;
pub mod meanfield;
pub mod observables;
pub mod particles;
pub mod quadrature;
mod vector;

pub use error::{Error, Result};
pub use vector::{SpherePoint, Vector};

/// Seedable counter-based generator used for every stochastic routine.
pub type SimRng = rand_chacha::ChaCha8Rng;
