//! Spin-extended Bohmian trajectories for analytic two-dimensional Gaussian
//! wave models.
//!
//! The guidance law used throughout is
//!
//! ```text
//! m dx/dt = ∇S − A,    A = −∇log ρ × s
//! ```
//!
//! with `s` a fixed spin eigenvector of magnitude ħ/2. Switching the spin
//! term off recovers the original de Broglie–Bohm law `m dx/dt = ∇S`.
//!
//! Module map:
//!
//! * [`wavefunction`]: analytic Gaussian packets, products, superpositions and
//!   plane waves, evaluated together with their exact derivatives.
//! * [`guidance`]: velocity field, vector potential and the spin-significance
//!   and subluminal diagnostics.
//! * [`fields`]: quantum potentials `Q`, `Q′`, the electric-like and
//!   magnetic-like fields, the Lorentz-like force and residual identities.
//! * [`ensemble`]: canonical ring ensembles, constant-density contours and
//!   seeded density sampling.
//! * [`integrator`]: adaptive Dormand–Prince 5(4) trajectory integration with
//!   event detection, closed-form orbits and Galilean boosts.
//! * [`analysis`]: statistical and physical checks over trajectory sets.
//! * [`scenarios`]: declarative figure presets and the scenario runner.
//! * [`acceptance`]: the end-to-end verification gates.

pub mod acceptance;
pub mod analysis;
pub mod ensemble;
mod error;
pub mod fields;
pub mod guidance;
pub mod integrator;
pub mod scenarios;
pub mod stats;
pub mod wavefunction;

pub use error::{Error, Result};

/// Planar vector used for positions, velocities and gradients.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Spatial vector used for spin, vector potential and field quantities.
pub type Vec3 = nalgebra::Vector3<f64>;
