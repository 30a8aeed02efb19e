//! Census engine for the polynomial map families z^(p^l) + c and
//! z^((p-1)^l) + c iterated on finite fields F_{p^n}.
//!
//! The crate has four layers:
//!
//! - [`ffield`]: deterministic construction of F_{p^n} and its arithmetic,
//!   plus irreducibility and inert-prime checks;
//! - [`dynamics`]: brute-force ground truth — fixed and 2-periodic point
//!   counts under all six counting conventions, functional-graph cycle
//!   decomposition, and an independent gcd-based root count;
//! - [`predictors`]: the closed-form count claims per family and coefficient
//!   class, kept as exact values or intervals;
//! - [`stats`]: finite-cutoff averaging and density estimators and the
//!   conformance matrix joining claims to observations.
//!
//! All computation is deterministic: no randomness, fixed iteration orders,
//! exact integer/rational arithmetic throughout.

pub mod dynamics;
pub mod ffield;
mod fppoly;
pub mod predictors;
pub mod stats;
