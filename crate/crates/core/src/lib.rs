//! Sliding-mode control of a two-link planar arm.
//!
//! The crate is split along the data flow of a closed-loop experiment:
//!
//! - [`dynamics`]: rigid-body model of the arm (inertia, Coriolis/centrifugal,
//!   gravity, forward/inverse dynamics, energy).
//! - [`control`]: the conventional sliding-mode controller (SMC), the integral
//!   sliding-mode controller (NISMC) and its hybrid extension (HNISMC).
//! - [`sim`]: fixed-step multirate closed-loop simulation with zero-order hold,
//!   measurement filtering, reference generation and disturbance injection.
//! - [`analysis`]: tracking metrics, Lyapunov series and controller comparison.
//! - [`cli`]: configuration files, CSV/SVG export and the command implementations
//!   behind the `arm-smc` binary.
//!
//! Everything is SI internally (m, kg, s, rad, N·m).

pub mod analysis;
#[cfg(feature = "cli")]
pub mod cli;
pub mod control;
pub mod dynamics;
mod error;
pub mod sim;

pub use error::{Error, Result};

/// Planar 2-vector (joint space).
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2×2 matrix (joint space).
pub type Mat2 = nalgebra::Matrix2<f64>;
