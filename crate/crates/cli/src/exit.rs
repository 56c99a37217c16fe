// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use magicarp_core::Error;

pub const SUCCESS: u8 = 0;
pub const RUNTIME_FAILURE: u8 = 1;
pub const INVALID_INPUT: u8 = 2;
pub const NOT_OPTIMAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: INVALID_INPUT,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: RUNTIME_FAILURE,
            message: message.into(),
        }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidDimension(_)
            | Error::IndexOutOfRange { .. }
            | Error::NotSquare { .. }
            | Error::NotUnitary { .. }
            | Error::NotTraceless { .. }
            | Error::NonFiniteAmplitude { .. }
            | Error::DegenerateInput(_)
            | Error::InvalidConfig(_)
            | Error::Format(_)
            | Error::Csv(_) => INVALID_INPUT,
            Error::DegenerateEnvelope { .. }
            | Error::NonFiniteObjective { .. }
            | Error::Io(_)
            | Error::Json(_) => RUNTIME_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::runtime(e.to_string())
    }
}
