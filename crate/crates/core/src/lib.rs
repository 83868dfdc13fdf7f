//! Numerical laboratory for a scalar quantum field linearly coupled to a
//! confined particle, where the squared boson mass is replaced by a
//! position-dependent short-range potential ("variable mass").
//!
//! The crate provides every computable object needed to study the infrared
//! behaviour of the model at desk scale:
//!
//! * [`geometry`] — reduction of static pseudo-Riemannian metrics to
//!   variable-mass Schrödinger potentials and a Lieb–Thirring eigenvalue
//!   count bound;
//! * [`scattering`] — generalized eigenfunctions of `-Δ + κw` built from the
//!   Born series of the Lippmann–Schwinger equation, with a proved deviation
//!   envelope and a generalized Fourier transform on grids;
//! * [`kernels`] — the double potential `W(x,y,t)`, its plane-wave and
//!   diagonal companions, closed-form time integrals, propagator kernels and
//!   infrared integral diagnostics;
//! * [`particle`] — grid Schrödinger ground states, the ground-state
//!   transform, and Euler–Maruyama sampling of the associated stationary
//!   diffusion;
//! * [`diagnostics`] — Monte Carlo estimators for the overlap γ(T), tilted
//!   path measures, boson-number observables and infrared scans, plus a
//!   truncated Fock-space cross-check of the pull-through formula.
//!
//! Deterministic numerics (quadrature, special functions, cutoff profiles,
//! closed forms, geometry) are generic over the scalar type through
//! [`scalar::Real`]; the stochastic layers are pinned to `f64`. Concrete
//! `f64` aliases for the main types live at the crate root.

pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod particle;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod scattering;
pub mod special;
pub mod stats;

pub use error::{Error, Result};

/// Default scalar type for the simulation layers.
pub type Scalar = f64;

/// Radial cutoff profile over `f64`.
pub type Cutoff = cutoff::CutoffProfile<f64>;
/// Cutoff shape selector over `f64`.
pub type CutoffShape = cutoff::Shape<f64>;
/// Static metric over `f64`.
pub type Metric = geometry::StaticMetric<f64>;
/// Variable-mass potential over `f64`.
pub type VariableMass = geometry::VariableMass<f64>;
