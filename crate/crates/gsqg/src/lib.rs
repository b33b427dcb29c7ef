//! Pseudo-spectral simulation and verification suite for the surface
//! quasi-geostrophic equation with random time diffusion on the 2-torus.
//!
//! The stochastic equation `d theta + (R_perp theta . grad theta) dt =
//! nu |grad|^s theta dW_t` is conjugated by the propagator
//! `e^{-nu W_t |grad|^s}` into a pathwise deterministic equation with
//! diffusion `-(nu^2/2) |grad|^{2s}`; this crate integrates both forms,
//! tracks Gevrey-weighted norms along trajectories, runs the local
//! fixed-point solver for the mild formulation, and estimates the
//! crossing probability that controls global existence.

pub mod bilinear;
pub mod brownian;
pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod grid;
pub mod ops;
pub mod params;
pub mod picard;
pub mod snapshot;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use field::FourierField;
pub use grid::SpectralGrid;
pub use params::GevreyParams;
