// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum optimal control by adjoint shooting.
//!
//! The crate builds piecewise-constant control pulses for a d-level system
//! from a single traceless Hermitian "adjoint" matrix `g`, and tunes the
//! d²−1 coefficients of `g` until the propagated unitary matches a target
//! gate. A GRAPE baseline over per-step amplitudes, an optimality
//! certificate and a seeded restart harness are provided alongside.
//!
//! Module layout:
//!
//! * [`qudit`]: dense complex matrices, the Gell-Mann generator basis,
//!   control sets and target gates.
//! * [`propagation`]: pulse schedules, step exponentials, fidelities.
//! * [`magicarp`]: pulse construction from `g` and the shooting optimizer.
//! * [`grape`]: analytic-gradient GRAPE with an optional energy penalty.
//! * [`bench`]: restart campaigns and minimal-duration extraction.
//! * [`io`]: CSV/JSON file formats shared with the command-line driver.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cost;
pub mod error;
pub mod grape;
pub mod io;
pub mod magicarp;
pub mod optim;
pub mod propagation;
pub mod qudit;
pub mod report;

pub use error::{Error, Result};
pub use magicarp::{MagicarpConfig, PulseMode};
pub use propagation::{PropagationResult, PulseSchedule};
pub use qudit::{AdjointMatrix, ControlSet, GeneratorBasis, HermitianMatrix, UnitaryMatrix};
pub use report::OptimizationReport;
