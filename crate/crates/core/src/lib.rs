//! Numerical diagnostics for Gibbs and non-Gibbs behaviour of time-evolved
//! rotor (n-vector) models.
//!
//! The library is organized around five subsystems:
//!
//! * [`kernel`] — circle diffusion kernels in Fourier and wrapped-Gaussian
//!   form, periodic quadrature, and atomic conditioning measures.
//! * [`meanfield`] — the mean-field rate functions `F0`, `F`, the reduced
//!   one-dimensional functional `G` with its log-moment term `L`, and the
//!   transformed single-site kernel.
//! * [`bifurcation`] — minimizer location/classification, equal-depth
//!   bisection for the critical conditioning tilt, and Gibbs/non-Gibbs
//!   evidence verdicts over parameter scans.
//! * [`certificates`] — sufficient-condition certificates: mean-field
//!   `C(F,g)`-based bounds and the lattice Dobrushin machinery (interdependence
//!   matrices, Neumann series, goodness matrices, fineness thresholds).
//! * [`double_layer`] — the conditioned double-layer pair potential, its
//!   ground states, the spin-flop equal-depth tilt, and quadratic-form
//!   recovery diagnostics.
//!
//! All computations are pure functions of their inputs. Parameter scans may
//! run in parallel; aggregation is order-independent, so identical inputs
//! produce bit-identical outputs.

pub mod bifurcation;
pub mod certificates;
pub mod double_layer;
pub mod error;
pub mod kernel;
pub mod meanfield;

pub use error::{CoreError, Result};
