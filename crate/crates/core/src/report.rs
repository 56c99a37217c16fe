// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optim::StopReason;
use crate::propagation::PulseSchedule;
use crate::qudit::AdjointMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Magicarp,
    Grape,
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub method: Method,
    /// Converged adjoint matrix; absent for GRAPE.
    pub final_g: Option<AdjointMatrix>,
    pub final_schedule: PulseSchedule,
    pub infidelity: f64,
    /// Gate duration in units of `1/Ω_max`.
    pub duration: f64,
    /// Gate duration in units of the unconstrained speed limit `τ_QSL`.
    pub duration_qsl: f64,
    /// Optimizer objective at the start point and after each accepted step.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub seed: u64,
    /// Wall-clock seconds. Left out of [`Self::to_json`] unless asked for,
    /// so that repeated runs serialize identically.
    #[serde(default)]
    pub wall_time: f64,
}

impl OptimizationReport {
    pub fn n_params(&self) -> usize {
        match &self.final_g {
            Some(g) => g.n_params(),
            None => self.final_schedule.n_params(),
        }
    }

    pub fn to_json(&self, include_timing: bool) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if !include_timing {
            if let Some(map) = value.as_object_mut() {
                map.remove("wall_time");
            }
        }
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }
}
