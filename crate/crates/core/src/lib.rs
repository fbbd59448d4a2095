//! Executable constructions for distributionally uniquely ergodic
//! skew-products on `T x N/Gamma` (Heisenberg-type nilmanifolds) and
//! `T x SU(2)`, `T x S^2`.
//!
//! The crate builds the conjugating loops of the approximation-by-conjugation
//! scheme and checks the cancellation identities they are designed to
//! satisfy, at floating-point precision:
//!
//! * [`rationals`]: reduced fractions and the approximating rotation numbers.
//! * [`nilgroup`]: step-2 nilpotent groups, lattice reduction, quotients.
//! * [`nilfourier`]: coefficient towers and pseudo-polynomial test functions.
//! * [`nilconstruct`]: the staircase `eta`, loops `gamma_k`, periods `qbar_k`.
//! * [`compactgroup`]: `SU(2)`, Wigner matrices, Haar quadrature, `S^2`.
//! * [`equiloops`]: equidistributed loops built by zero finding and continuation.
//! * [`dynamics`]: skew-products, Birkhoff sums, coboundary solvers.
//! * [`certify`]: end-to-end certificates combining the above.

pub mod certify;
pub mod compactgroup;
pub mod dynamics;
pub mod equiloops;
pub mod error;
pub mod group;
pub mod nilconstruct;
pub mod nilfourier;
pub mod nilgroup;
pub mod rationals;

pub use error::{Error, Result};
pub use group::FiberGroup;
