//! Exact and numeric tools for Łojasiewicz gradient inequalities.
//!
//! * [`poly`]: sparse multivariate polynomials over the rationals.
//! * [`snc`]: normal-crossings detection, exponents and constructive constants.
//! * [`blowup`]: point blow-ups of plane curves and chart trees.
//! * [`morse_bott`]: Morse–Bott and order-N generalized checks.
//! * [`flow`]: negative gradient flow and the inequalities it implies.
//! * [`estimator`]: sampling-based exponent estimates.

pub mod blowup;
pub mod estimator;
pub mod flow;
pub mod morse_bott;
pub mod objective;
pub mod poly;
pub mod report;
pub mod sampling;
pub mod snc;

pub use objective::{Function, Objective};
pub use poly::{parse, PolyError, Polynomial, Substitution};
