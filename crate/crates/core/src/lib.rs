//! Spectral controllability toolkit for the controlled Laguerre and Jacobi
//! diffusion equations.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, configuration and parallel dispatch live in the
//! `spectral-control` companion crate.
//!
//! Layout, bottom-up:
//!
//! - [`special`]: Gamma function (Lanczos).
//! - [`orthopoly`]: orthonormal Laguerre/Jacobi families, recurrences,
//!   derivatives and Sturm-Liouville residuals.
//! - [`tridiag`]: implicit-shift QL for symmetric tridiagonal matrices.
//! - [`quadrature`]: Golub-Welsch Gauss rules and tensor-product Fourier
//!   coefficients.
//! - [`chaos`]: multi-index enumeration, Wiener-Laguerre chaos levels and the
//!   modified Wiener-Jacobi grouping.
//! - [`evolution`]: truncated diagonal systems, semigroups, `B`/`B*` and mild
//!   solutions.
//! - [`control`]: certificates, minimum-norm steering, Gramian spectra and
//!   duality recovery.
//! - [`exprparse`]: a small expression language for actuator profiles.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chaos;
pub mod control;
pub mod evolution;
pub mod exprparse;
pub mod orthopoly;
pub mod quadrature;
pub mod special;
pub mod tridiag;

pub use chaos::{ChaosDecomposition, ChaosLevel, DecompositionKind, MultiIndex};
pub use control::{Certificate, GramianReport, SteeringPlan, Verdict};
pub use evolution::{ControlSignal, DiagonalSystem, Mode, ModeIndex, Provenance, SpectralState};
pub use exprparse::{Ast, Expr};
pub use orthopoly::{FamilyKind, PolyFamily1D, RecurrenceCoeffs};
pub use quadrature::{Profile, QuadRule, TensorQuadrature};

/// Highest polynomial degree (and Gauss rule order) accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 200;

/// Highest number of variables for tensor-product quadrature.
pub const MAX_DIMENSION: usize = 4;
