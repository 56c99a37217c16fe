// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: must lie in 2..=64")]
    InvalidDimension(usize),

    #[error("level index {index} out of range for dimension {dim} (max {})", dim.saturating_sub(2))]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: defect {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("matrix is not traceless: |tr| = {trace:e}")]
    NotTraceless { trace: f64 },

    #[error("non-finite amplitude at step {step}, control {control}")]
    NonFiniteAmplitude { step: usize, control: usize },

    #[error("degenerate envelope at step {step}: norm {norm:e}")]
    DegenerateEnvelope { step: usize, norm: f64 },

    #[error("objective is not finite at probe {coeffs:?}")]
    NonFiniteObjective { coeffs: Vec<f64> },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors produced by a single objective probe that a line search may
    /// reject without abandoning the run.
    pub fn is_probe_failure(&self) -> bool {
        matches!(
            self,
            Error::DegenerateEnvelope { .. } | Error::NonFiniteObjective { .. }
        )
    }
}
