// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Adjoint shooting: pulses are generated self-iteratively from a constant
//! traceless Hermitian matrix `g`,
//!
//! ```text
//! ũ_k(nδt) = ½ ReTr(U(nδt) g U†(nδt) H_k)
//! U((n+1)δt) = exp(−iδt Σ_k u_k(nδt) H_k) U(nδt)
//! ```
//!
//! and the d²−1 coordinates of `g` are tuned by quasi-Newton descent on the
//! gate infidelity with central finite-difference gradients.

mod certificate;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use certificate::{optimality_certificate, Certificate};

use crate::bench::tau_qsl;
use crate::error::{Error, Result};
use crate::optim::{minimize, BfgsSettings, Objective, StopReason};
use crate::propagation::{
    norm2, normalized_infidelity, PropagationResult, PulseSchedule, StepEigen,
};
use crate::qudit::{
    random_adjoint, trace_of_product, AdjointMatrix, CMatrix, ControlSet, GeneratorBasis,
    UnitaryMatrix,
};
use crate::report::{Method, OptimizationReport};

/// Below this envelope norm the pulse direction is undefined.
pub const DEGENERATE_ENVELOPE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseMode {
    /// `u_k = ũ_k`: extremals of the `∫Σu_k²` cost.
    #[default]
    EnergyOptimal,
    /// `u_k = c₀·ũ_k/‖ũ‖` with `c₀ = ‖ũ(0)‖`: constant envelope, the
    /// duration set by the scale of `g`.
    TimeOptimalRenormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initialization {
    RandomNormal { sigma: f64 },
    Explicit { coeffs: Vec<f64> },
}

impl Default for Initialization {
    fn default() -> Self {
        Initialization::RandomNormal { sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagicarpConfig {
    pub mode: PulseMode,
    pub n_steps: usize,
    pub max_iters: usize,
    /// Finite-difference step for the gradient.
    pub grad_step: f64,
    /// Infidelity at which a run counts as converged.
    pub convergence_tol: f64,
    pub stall_tol: f64,
    pub stall_window: usize,
    pub init: Initialization,
    pub seed: u64,
}

impl Default for MagicarpConfig {
    fn default() -> Self {
        Self {
            mode: PulseMode::EnergyOptimal,
            n_steps: 128,
            max_iters: 500,
            grad_step: 1e-6,
            convergence_tol: 1e-7,
            stall_tol: 1e-12,
            stall_window: 25,
            init: Initialization::default(),
            seed: 0,
        }
    }
}

impl MagicarpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if !(self.grad_step > 0.0 && self.grad_step.is_finite()) {
            return bad(format!(
                "grad_step must be positive, got {}",
                self.grad_step
            ));
        }
        if !(self.convergence_tol > 0.0) {
            return bad(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            ));
        }
        if !(self.stall_tol > 0.0) {
            return bad(format!(
                "stall_tol must be positive, got {}",
                self.stall_tol
            ));
        }
        if let Initialization::RandomNormal { sigma } = self.init {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return bad(format!("init sigma must be positive, got {sigma}"));
            }
        }
        Ok(())
    }

    pub(crate) fn bfgs_settings(&self) -> BfgsSettings {
        BfgsSettings {
            max_iters: self.max_iters,
            target_value: Some(self.convergence_tol),
            stall_tol: self.stall_tol,
            stall_window: self.stall_window,
            ..BfgsSettings::default()
        }
    }
}

/// Controls, target and the generator basis for `g`.
#[derive(Debug, Clone)]
pub struct Problem {
    controls: ControlSet,
    target: UnitaryMatrix,
    basis: GeneratorBasis,
}

impl Problem {
    pub fn new(controls: ControlSet, target: UnitaryMatrix) -> Result<Self> {
        if controls.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: controls.dim(),
                found: target.dim(),
            });
        }
        let basis = GeneratorBasis::gell_mann(controls.dim())?;
        Ok(Self {
            controls,
            target,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.controls.dim()
    }

    /// d²−1, independent of the step count.
    pub fn n_params(&self) -> usize {
        self.basis.len()
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn target(&self) -> &UnitaryMatrix {
        &self.target
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }
}

struct Construction {
    amplitudes: Vec<f64>,
    unitaries: Vec<UnitaryMatrix>,
    last: CMatrix,
}

/// `ũ_k = ½ ReTr(g_t H_k)` for every control.
fn projected_amplitudes(g_t: &CMatrix, controls: &ControlSet, out: &mut [f64]) {
    for (o, h) in out.iter_mut().zip(controls.hamiltonians()) {
        *o = 0.5 * trace_of_product(g_t, h.matrix()).re;
    }
}

fn construct(
    g: &CMatrix,
    controls: &ControlSet,
    n_steps: usize,
    mode: PulseMode,
    record: bool,
) -> Result<Construction> {
    let d = controls.dim();
    let k = controls.len();
    let dt = 1.0 / n_steps as f64;
    let mut amplitudes = vec![0.0; n_steps * k];
    let mut unitaries = Vec::with_capacity(if record { n_steps + 1 } else { 0 });
    let mut u = CMatrix::identity(d, d);
    let mut c0 = 0.0;
    for n in 0..n_steps {
        if record {
            unitaries.push(UnitaryMatrix::from_matrix_unchecked(u.clone()));
        }
        let g_t = if n == 0 {
            g.clone()
        } else {
            &u * g * u.adjoint()
        };
        let row = &mut amplitudes[n * k..(n + 1) * k];
        projected_amplitudes(&g_t, controls, row);
        if mode == PulseMode::TimeOptimalRenormalized {
            let norm = norm2(row);
            if !(norm >= DEGENERATE_ENVELOPE) {
                return Err(Error::DegenerateEnvelope { step: n, norm });
            }
            if n == 0 {
                c0 = norm;
            } else {
                let scale = c0 / norm;
                row.iter_mut().for_each(|v| *v *= scale);
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            let control = row.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(Error::NonFiniteAmplitude { step: n, control });
        }
        if row.iter().any(|&v| v != 0.0) {
            let step = StepEigen::new(controls.generator(row)).exp(dt);
            u = step * u;
        }
    }
    if record {
        unitaries.push(UnitaryMatrix::from_matrix_unchecked(u.clone()));
    }
    Ok(Construction {
        amplitudes,
        unitaries,
        last: u,
    })
}

fn check_adjoint(g: &AdjointMatrix, controls: &ControlSet) -> Result<()> {
    if g.dim != controls.dim() {
        return Err(Error::DimensionMismatch {
            expected: controls.dim(),
            found: g.dim,
        });
    }
    Ok(())
}

/// Builds the pulse schedule generated by `g`, interleaving amplitude
/// evaluation and propagation, and returns it with its propagation.
pub fn pulses_from_adjoint(
    g: &AdjointMatrix,
    controls: &ControlSet,
    n_steps: usize,
    mode: PulseMode,
) -> Result<(PulseSchedule, PropagationResult)> {
    check_adjoint(g, controls)?;
    if n_steps == 0 {
        return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
    }
    let gm = g.to_matrix()?;
    let built = construct(&gm, controls, n_steps, mode, true)?;
    let schedule = PulseSchedule::from_flat(n_steps, controls.len(), built.amplitudes)?;
    let envelope = schedule.envelope();
    let duration = schedule.dt() * envelope.iter().sum::<f64>() / controls.omega_max();
    Ok((
        schedule,
        PropagationResult {
            unitaries: built.unitaries,
            envelope,
            duration,
        },
    ))
}

fn check_coeffs(coeffs: &[f64], problem: &Problem) -> Result<()> {
    if coeffs.len() != problem.n_params() {
        return Err(Error::DimensionMismatch {
            expected: problem.n_params(),
            found: coeffs.len(),
        });
    }
    Ok(())
}

/// Normalized infidelity of the gate generated by `g`.
pub fn objective(coeffs: &[f64], problem: &Problem, config: &MagicarpConfig) -> Result<f64> {
    check_coeffs(coeffs, problem)?;
    let g = problem.basis.reconstruct(coeffs)?;
    let built = construct(&g, &problem.controls, config.n_steps, config.mode, false)?;
    let value = normalized_infidelity(
        &problem.target,
        &UnitaryMatrix::from_matrix_unchecked(built.last),
    )?;
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective {
            coeffs: coeffs.to_vec(),
        });
    }
    Ok(value)
}

/// Central differences, `2(d²−1)` objective evaluations.
pub fn gradient(coeffs: &[f64], problem: &Problem, config: &MagicarpConfig) -> Result<Vec<f64>> {
    check_coeffs(coeffs, problem)?;
    let h = config.grad_step;
    let mut probe = coeffs.to_vec();
    let mut grad = Vec::with_capacity(coeffs.len());
    for i in 0..coeffs.len() {
        probe[i] = coeffs[i] + h;
        let plus = objective(&probe, problem, config)?;
        probe[i] = coeffs[i] - h;
        let minus = objective(&probe, problem, config)?;
        probe[i] = coeffs[i];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

struct ShootingObjective<'a> {
    problem: &'a Problem,
    config: &'a MagicarpConfig,
}

impl Objective for ShootingObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        objective(x, self.problem, self.config)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        gradient(x, self.problem, self.config)
    }
}

pub fn initial_coeffs(problem: &Problem, config: &MagicarpConfig) -> Result<Vec<f64>> {
    match &config.init {
        Initialization::RandomNormal { sigma } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Ok(random_adjoint(problem.dim(), *sigma, &mut rng)?.coeffs)
        }
        Initialization::Explicit { coeffs } => {
            check_coeffs(coeffs, problem)?;
            Ok(coeffs.clone())
        }
    }
}

/// Runs the shooting optimizer from the configured initial `g`.
pub fn optimize(problem: &Problem, config: &MagicarpConfig) -> Result<OptimizationReport> {
    config.validate()?;
    let start = Instant::now();
    let x0 = initial_coeffs(problem, config)?;
    let min = minimize(
        &ShootingObjective { problem, config },
        x0,
        &config.bfgs_settings(),
    )?;
    let g = AdjointMatrix::new(problem.dim(), min.x)?;
    let (schedule, prop) = pulses_from_adjoint(&g, &problem.controls, config.n_steps, config.mode)?;
    let omega = problem.controls.omega_max();
    Ok(OptimizationReport {
        method: Method::Magicarp,
        final_g: Some(g),
        final_schedule: schedule,
        infidelity: min.value,
        duration: prop.duration,
        duration_qsl: prop.duration / tau_qsl(problem.dim(), omega)?,
        cost_trace: min.trace,
        iterations: min.iterations,
        converged: min.value <= config.convergence_tol,
        stop_reason: if min.value <= config.convergence_tol {
            StopReason::Converged
        } else {
            min.stop
        },
        seed: config.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
