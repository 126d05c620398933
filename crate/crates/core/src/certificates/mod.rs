//! Sufficient-condition certificates for Gibbsianness of transformed systems.
//!
//! * [`meanfield`] — the `C(F,g)`-based smallness conditions: the general
//!   product criterion `C(F,g)·std_α(k) < 1`, the time-evolution threshold
//!   `√2 C (1-e^{-nt})^{1/2} < 1` with its closed-form inversion, and the
//!   discretisation (fineness) criterion `ρ C(F,g) < 1`.
//! * [`lattice`] — the Dobrushin-uniqueness machinery on a finite torus:
//!   Lipschitz constants of the local Hamiltonians, the interdependence
//!   matrix `C̄(t)`, Neumann series `D̄ = Σ C̄ⁿ`, goodness matrices, and the
//!   fineness threshold for discretisations.
//!
//! All certificates are one-sided: `holds = true` certifies the regularity
//! conclusion of the corresponding criterion, `holds = false` is silence, not
//! a converse.

pub mod lattice;
pub mod meanfield;
