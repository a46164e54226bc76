//! (p,q)-calculus primitives and the bivariate (p,q)-Bleimann-Butzer-Hahn operators.
//!
//! The crate is organised bottom-up:
//!
//! - [`pq`]: (p,q)-integers, binomial coefficients and the Euler identity, with
//!   log-domain evaluation throughout.
//! - [`exact`]: the same identities over exact rationals, used as ground truth.
//! - [`univariate`]: the classical, q- and (p,q)-BBH operators in one variable.
//! - [`bivariate`]: the tensor-product operator, its moments and the shifted
//!   generalization.
//! - [`analysis`]: Korovkin-type convergence tables, moduli of continuity and
//!   rate-of-convergence bound checks on a finite grid.
//! - [`suite`]: the randomized identity suites driven by the CLI `verify` command.

pub mod analysis;
pub mod bivariate;
pub mod error;
pub mod exact;
pub mod numeric;
pub mod pq;
pub mod suite;
pub mod univariate;

pub use bivariate::{
    BivariateOperator, CompositionOrder, GeneralizedSpec, MomentIndex, OperatorSpec,
};
pub use error::{Error, Result};
pub use pq::{LogWeight, PqParams};
