//! Verification and reduction toolkit for nonclassical (conditional)
//! symmetries of the generalized Huxley family
//!
//! ```text
//! u_t = u_xx + k(x) u^2 (1 - u)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`expr`]: symbolic kernel (parser, differentiation, substitution,
//!   Laurent normal form, numeric evaluation, randomized zero testing);
//! - [`model`]: the equation family, reduction operators and characteristics;
//! - [`detsys`]: generators for every determining system used by the
//!   classification, plus the independent prolongation route;
//! - [`catalog`]: the classified cases and the equivalence group;
//! - [`verify`]: two-route pass/fail certification with JSON reports;
//! - [`ode`], [`reduce`], [`numcheck`]: numerical construction of invariant
//!   solutions and their finite-difference certification;
//! - [`cli`]: the `symred` command line front end.

pub mod catalog;
pub mod cli;
pub mod detsys;
pub mod error;
pub mod expr;
pub mod model;
pub mod numcheck;
pub mod ode;
pub mod reduce;
pub mod verify;

pub use error::{Error, Result};
