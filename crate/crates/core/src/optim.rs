// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense BFGS with Armijo backtracking, shared by both optimizers.
//!
//! The engine only sees a flat parameter vector. It keeps the inverse
//! Hessian approximation explicitly, which is fine for the parameter counts
//! involved here (d²−1 for shooting, N·K for GRAPE).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsSettings {
    pub max_iters: usize,
    /// Stop as soon as the objective is at or below this value.
    pub target_value: Option<f64>,
    /// Minimum relative decrease over `stall_window` accepted steps.
    pub stall_tol: f64,
    pub stall_window: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsSettings {
    fn default() -> Self {
        Self {
            max_iters: 500,
            target_value: None,
            stall_tol: 1e-12,
            stall_window: 25,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Stalled,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Objective at the start point and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-major `n × n` inverse Hessian approximation.
struct InverseHessian {
    n: usize,
    m: Vec<f64>,
    fresh: bool,
}

impl InverseHessian {
    fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Self { n, m, fresh: true }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.m[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`; skipped when the
    /// curvature condition fails.
    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        let yy = dot(y, y);
        if !(sy > 1e-12 * dot(s, s).sqrt() * yy.sqrt()) || !sy.is_finite() {
            return;
        }
        let n = self.n;
        if self.fresh {
            let scale = sy / yy;
            self.m.iter_mut().for_each(|v| *v *= scale);
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        for i in 0..n {
            for j in 0..n {
                self.m[i * n + j] +=
                    -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }
}

fn probe<O: Objective>(obj: &O, x: &[f64]) -> Result<Option<f64>> {
    match obj.value(x) {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Ok(None),
        Err(e) if e.is_probe_failure() => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn minimize<O: Objective>(obj: &O, x0: Vec<f64>, settings: &BfgsSettings) -> Result<Minimum> {
    let n = x0.len();
    let mut x = x0;
    let mut f = obj.value(&x)?;
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective { coeffs: x });
    }
    let mut trace = vec![f];
    let reached = |v: f64| settings.target_value.is_some_and(|t| v <= t);
    if reached(f) || n == 0 {
        let stop = if reached(f) {
            StopReason::Converged
        } else {
            StopReason::Stalled
        };
        return Ok(Minimum {
            x,
            value: f,
            trace,
            iterations: 0,
            stop,
        });
    }
    let mut grad = obj.gradient(&x)?;
    let mut hinv = InverseHessian::identity(n);
    let mut iterations = 0;

    let stop = loop {
        if iterations >= settings.max_iters {
            break StopReason::MaxIterations;
        }
        if grad.iter().all(|g| *g == 0.0) {
            break StopReason::Stalled;
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let mut dir: Vec<f64> = hinv.apply(&grad).iter().map(|v| -v).collect();
            let mut slope = dot(&grad, &dir);
            if !(slope < 0.0) || attempt == 1 {
                if attempt == 1 && hinv.fresh {
                    break;
                }
                hinv = InverseHessian::identity(n);
                dir = grad.iter().map(|g| -g).collect();
                slope = dot(&grad, &dir);
            }
            let mut step = 1.0;
            for _ in 0..settings.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
                if let Some(ft) = probe(obj, &trial)? {
                    if ft <= f + settings.armijo * step * slope && ft < f {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                step *= settings.shrink;
            }
            if accepted.is_some() {
                break;
            }
        }

        let Some((x_new, f_new)) = accepted else {
            break StopReason::LineSearchFailed;
        };
        let g_new = obj.gradient(&x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        hinv.update(&s, &y);
        x = x_new;
        f = f_new;
        grad = g_new;
        iterations += 1;
        trace.push(f);

        if reached(f) {
            break StopReason::Converged;
        }
        let w = settings.stall_window;
        if w > 0 && trace.len() > w {
            let old = trace[trace.len() - 1 - w];
            if old - f <= settings.stall_tol * old.abs() {
                break StopReason::Stalled;
            }
        }
    };

    Ok(Minimum {
        x,
        value: f,
        trace,
        iterations,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2))
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ])
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let settings = BfgsSettings {
            target_value: Some(1e-14),
            max_iters: 1000,
            ..Default::default()
        };
        let m = minimize(&Rosenbrock, vec![-1.2, 1.0], &settings).unwrap();
        assert_eq!(m.stop, StopReason::Converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(m.trace.len(), m.iterations + 1);
    }

    struct Quadratic(Vec<f64>);

    impl Objective for Quadratic {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(x.iter().zip(&self.0).map(|(v, a)| a * v * v).sum())
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.iter().zip(&self.0).map(|(v, a)| 2.0 * a * v).collect())
        }
    }

    #[test]
    fn stalls_at_positive_minimum() {
        struct Shifted;
        impl Objective for Shifted {
            fn value(&self, x: &[f64]) -> Result<f64> {
                Ok(1.0 + (x[0] - 2.0).powi(2))
            }
            fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![2.0 * (x[0] - 2.0)])
            }
        }
        let settings = BfgsSettings {
            target_value: Some(1e-7),
            ..Default::default()
        };
        let m = minimize(&Shifted, vec![0.0], &settings).unwrap();
        assert_ne!(m.stop, StopReason::Converged);
        assert_ne!(m.stop, StopReason::MaxIterations);
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let q = Quadratic(vec![1.0, 1e3, 1e-2, 50.0]);
        let settings = BfgsSettings {
            target_value: Some(1e-20),
            ..Default::default()
        };
        let m = minimize(&q, vec![1.0, 1.0, 1.0, 1.0], &settings).unwrap();
        assert_eq!(m.stop, StopReason::Converged);
    }

    #[test]
    fn rejected_probes_do_not_abort() {
        // value fails for x < 0.5, the unconstrained minimum sits at 0
        struct Walled;
        impl Objective for Walled {
            fn value(&self, x: &[f64]) -> Result<f64> {
                if x[0] < 0.5 {
                    Err(Error::DegenerateEnvelope { step: 0, norm: 0.0 })
                } else {
                    Ok(x[0] * x[0])
                }
            }
            fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![2.0 * x[0]])
            }
        }
        let m = minimize(&Walled, vec![3.0], &BfgsSettings::default()).unwrap();
        assert!(m.x[0] >= 0.5 && m.value < 9.0);
    }

    #[test]
    fn immediate_convergence() {
        let settings = BfgsSettings {
            target_value: Some(1e-7),
            ..Default::default()
        };
        let m = minimize(&Quadratic(vec![1.0]), vec![0.0], &settings).unwrap();
        assert_eq!(m.stop, StopReason::Converged);
        assert_eq!(m.iterations, 0);
    }
}
