//! Numerical engine for the two-qubit Fermi causality problem in a weakly
//! disordered medium.
//!
//! The library evaluates finite-time transition probabilities for a pair of
//! identical two-level atoms coupled to a massless scalar field, in three
//! measurement configurations (field and both atoms specified, atoms only,
//! atom 2 only), both for the free field and with the O(sigma^2)
//! disorder-averaged correction induced by static random fluctuations of the
//! light cone.
//!
//! Modules:
//! * [`specfun`] - sine and cosine integrals Si, Ci.
//! * [`greens`] - position-space kernels: free Feynman propagator (split and
//!   i-epsilon forms), free Wightman function, disorder kernels.
//! * [`quadrature`] - oscillatory/singular integration machinery and oracles.
//! * [`scenarios`] - assembly of the three scenario probabilities with term
//!   breakdowns and causality diagnostics.
//! * [`asymptotics`] - closed-form precursor and wave-zone expressions.
//!
//! All quantities use natural units (hbar = c = 1).

pub mod asymptotics;
pub mod error;
pub mod greens;
pub mod quadrature;
pub mod scenarios;
pub mod specfun;

pub use error::{Error, Result};
pub use greens::{DeltaTerm, DisorderModel, KernelValue, Regularization, SpacetimeInterval};
pub use quadrature::{IntegralResult, QuadratureSpec};
pub use scenarios::{Scenario, ScenarioResult, SystemParams, TermBreakdown};
