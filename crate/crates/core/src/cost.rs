// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Cost functionals over a propagated schedule.
//!
//! Terminal-only (Mayer), running (Lagrange) and weighted mixtures (Bolza).
//! These are definitions only; the optimizers in this crate minimize the
//! infidelity directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{normalized_infidelity, PropagationResult, PulseSchedule};
use crate::qudit::UnitaryMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunningCost {
    /// `∫ √(Σ_k u_k²) dt`, the gate duration.
    Duration,
    /// `∫ Σ_k u_k² dt`
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunctional {
    /// Normalized infidelity of the final unitary.
    Mayer,
    Lagrange(RunningCost),
    /// `α·Mayer + (1 − α)·Lagrange`
    Bolza {
        alpha: f64,
        running: RunningCost,
    },
}

fn running(cost: RunningCost, schedule: &PulseSchedule) -> f64 {
    match cost {
        RunningCost::Duration => schedule.duration(1.0),
        RunningCost::Energy => schedule.energy(),
    }
}

impl CostFunctional {
    pub fn evaluate(
        &self,
        schedule: &PulseSchedule,
        propagation: &PropagationResult,
        target: &UnitaryMatrix,
    ) -> Result<f64> {
        let mayer = || normalized_infidelity(target, propagation.final_unitary());
        match *self {
            CostFunctional::Mayer => mayer(),
            CostFunctional::Lagrange(r) => Ok(running(r, schedule)),
            CostFunctional::Bolza { alpha, running: r } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidConfig(format!(
                        "Bolza weight must lie in [0, 1], got {alpha}"
                    )));
                }
                Ok(alpha * mayer()? + (1.0 - alpha) * running(r, schedule))
            }
        }
    }
}
