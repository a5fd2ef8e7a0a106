//! Stationary solutions of the viscous two-phase flow model on the half line
//! with inflow boundary data, and their nonlinear stability under direct time
//! integration.
//!
//! The model couples two compressible fluids through a drag term:
//!
//! ```text
//! ρ_t + (ρu)_x = 0
//! (ρu)_t + (ρu² + p1(ρ))_x = (μ u_x)_x + n(v − u)
//! n_t + (nv)_x = 0
//! (nv)_t + (nv² + p2(n))_x = (n v_x)_x − n(v − u)
//! ```
//!
//! with `p1(ρ) = A1 ρ^γ`, `p2(n) = A2 n^α` and all four fields prescribed at
//! `x = 0`.
//!
//! * [`model`] — constitutive laws, far-field algebra, Mach number.
//! * [`stationary`] — far-field Jacobian, spectrum, manifold shooting.
//! * [`evolution`] — method-of-lines solver and energy diagnostics.
//! * [`analysis`] — tail fits and weighted Hardy-type inequality checks.

pub mod analysis;
pub mod config;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod integrate;
pub mod model;
pub mod stationary;

pub use error::{Error, Result};
pub use model::{FarFieldData, ModelParams, Phase, Regime, RegimeLabel};
