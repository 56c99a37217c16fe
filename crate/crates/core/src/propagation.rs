// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant unitary propagation on the nominal horizon `[0, 1]`.
//!
//! A schedule holds `N` rows of `K` amplitudes; row `n` is applied on
//! `[nδt, (n+1)δt)` with `δt = 1/N`. Physical duration is reported apart
//! from the nominal clock, as `T = δt·Σ_n c_n / Ω_max` where
//! `c_n = ‖u_n‖₂` is the drive envelope.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{c, AdjointMatrix, CMatrix, ControlSet, UnitaryMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct PulseSchedule {
    n_steps: usize,
    n_controls: usize,
    /// row-major `N × K`
    amplitudes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    n_steps: usize,
    n_controls: usize,
    amplitudes: Vec<Vec<f64>>,
}

impl TryFrom<ScheduleRepr> for PulseSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let s = PulseSchedule::from_rows(r.n_controls, r.amplitudes)?;
        if s.n_steps != r.n_steps {
            return Err(Error::Format(format!(
                "n_steps is {} but {} rows were given",
                r.n_steps, s.n_steps
            )));
        }
        Ok(s)
    }
}

impl From<PulseSchedule> for ScheduleRepr {
    fn from(s: PulseSchedule) -> Self {
        ScheduleRepr {
            n_steps: s.n_steps,
            n_controls: s.n_controls,
            amplitudes: s.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl PulseSchedule {
    pub fn from_flat(n_steps: usize, n_controls: usize, amplitudes: Vec<f64>) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig(
                "schedule needs at least one step".into(),
            ));
        }
        if n_controls == 0 {
            return Err(Error::InvalidConfig(
                "schedule needs at least one control".into(),
            ));
        }
        if amplitudes.len() != n_steps * n_controls {
            return Err(Error::DimensionMismatch {
                expected: n_steps * n_controls,
                found: amplitudes.len(),
            });
        }
        if let Some(i) = amplitudes.iter().position(|u| !u.is_finite()) {
            return Err(Error::NonFiniteAmplitude {
                step: i / n_controls,
                control: i % n_controls,
            });
        }
        Ok(Self {
            n_steps,
            n_controls,
            amplitudes,
        })
    }

    pub fn from_rows(n_controls: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_steps = rows.len();
        let mut flat = Vec::with_capacity(n_steps * n_controls);
        for (n, row) in rows.into_iter().enumerate() {
            if row.len() != n_controls {
                return Err(Error::Format(format!(
                    "step {n} has {} amplitudes, expected {n_controls}",
                    row.len()
                )));
            }
            flat.extend(row);
        }
        Self::from_flat(n_steps, n_controls, flat)
    }

    pub fn zeros(n_steps: usize, n_controls: usize) -> Result<Self> {
        Self::from_flat(n_steps, n_controls, vec![0.0; n_steps * n_controls])
    }

    /// Samples `f(t)` at the left endpoint of each step.
    pub fn from_fn<F>(n_steps: usize, n_controls: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        let dt = 1.0 / n_steps as f64;
        let rows = (0..n_steps).map(|n| f(n as f64 * dt)).collect();
        Self::from_rows(n_controls, rows)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_controls(&self) -> usize {
        self.n_controls
    }

    pub fn n_params(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_steps as f64
    }

    pub fn step(&self, n: usize) -> &[f64] {
        &self.amplitudes[n * self.n_controls..(n + 1) * self.n_controls]
    }

    pub fn rows(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator {
        self.amplitudes.chunks_exact(self.n_controls)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn envelope(&self) -> Vec<f64> {
        self.rows().map(norm2).collect()
    }

    /// Left-endpoint Riemann sum of the envelope, in units of `1/Ω_max`.
    pub fn duration(&self, omega_max: f64) -> f64 {
        self.dt() * self.envelope().iter().sum::<f64>() / omega_max
    }

    /// `δt·Σ_{n,k} u_k²(nδt)`
    pub fn energy(&self) -> f64 {
        self.dt() * self.amplitudes.iter().map(|u| u * u).sum::<f64>()
    }

    /// Steps in reverse order with negated amplitudes; undoes the original
    /// evolution when applied after it.
    pub fn reversed_negated(&self) -> Self {
        let mut flat = Vec::with_capacity(self.amplitudes.len());
        for row in self.rows().rev() {
            flat.extend(row.iter().map(|u| -u));
        }
        Self {
            n_steps: self.n_steps,
            n_controls: self.n_controls,
            amplitudes: flat,
        }
    }

    /// Splits every step into `factor` equal sub-steps with the same
    /// amplitudes, leaving the evolution unchanged.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidConfig(
                "refinement factor must be positive".into(),
            ));
        }
        let mut flat = Vec::with_capacity(self.amplitudes.len() * factor);
        for row in self.rows() {
            for _ in 0..factor {
                flat.extend_from_slice(row);
            }
        }
        Self::from_flat(self.n_steps * factor, self.n_controls, flat)
    }

    /// Multiplies every amplitude by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::from_flat(
            self.n_steps,
            self.n_controls,
            self.amplitudes.iter().map(|u| u * s).collect(),
        )
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    /// `U(nδt)` for `n = 0..=N`, with `unitaries[0] = 1`.
    pub unitaries: Vec<UnitaryMatrix>,
    pub envelope: Vec<f64>,
    /// `T` in units of `1/Ω_max`.
    pub duration: f64,
}

impl PropagationResult {
    pub fn final_unitary(&self) -> &UnitaryMatrix {
        self.unitaries
            .last()
            .expect("propagation always stores U(0)")
    }
}

/// Eigendecomposition of a Hermitian step generator `A = Q Λ Q†`.
#[derive(Debug, Clone)]
pub(crate) struct StepEigen {
    pub vectors: CMatrix,
    pub values: Vec<f64>,
}

impl StepEigen {
    pub fn new(a: CMatrix) -> Self {
        let eig = SymmetricEigen::new(a);
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues.iter().copied().collect(),
        }
    }

    /// `exp(−i·dt·A)`
    pub fn exp(&self, dt: f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -dt * lam);
            for i in 0..d {
                scaled[(i, j)] *= ph;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn check_amplitudes(controls: &ControlSet, amplitudes: &[f64], step: usize) -> Result<()> {
    if amplitudes.len() != controls.len() {
        return Err(Error::DimensionMismatch {
            expected: controls.len(),
            found: amplitudes.len(),
        });
    }
    if let Some(k) = amplitudes.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFiniteAmplitude { step, control: k });
    }
    Ok(())
}

/// `exp(−i·dt·Σ_k u_k H_k)`, computed in the eigenbasis of the generator.
pub fn step_unitary(controls: &ControlSet, amplitudes: &[f64], dt: f64) -> Result<UnitaryMatrix> {
    check_amplitudes(controls, amplitudes, 0)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(raw_step(controls, amplitudes, dt))
}

pub(crate) fn raw_step(controls: &ControlSet, amplitudes: &[f64], dt: f64) -> UnitaryMatrix {
    if amplitudes.iter().all(|&u| u == 0.0) {
        return UnitaryMatrix::identity(controls.dim());
    }
    let eig = StepEigen::new(controls.generator(amplitudes));
    UnitaryMatrix::from_matrix_unchecked(eig.exp(dt))
}

/// `U(nδt) = exp(−iδt Σ_k u_k((n−1)δt) H_k) · U((n−1)δt)` for every step.
pub fn propagate(controls: &ControlSet, schedule: &PulseSchedule) -> Result<PropagationResult> {
    if schedule.n_controls() != controls.len() {
        return Err(Error::DimensionMismatch {
            expected: controls.len(),
            found: schedule.n_controls(),
        });
    }
    let dt = schedule.dt();
    let mut unitaries = Vec::with_capacity(schedule.n_steps() + 1);
    let mut u = UnitaryMatrix::identity(controls.dim());
    unitaries.push(u.clone());
    for (n, row) in schedule.rows().enumerate() {
        check_amplitudes(controls, row, n)?;
        let step = raw_step(controls, row, dt);
        u = UnitaryMatrix::from_matrix_unchecked(step.matrix() * u.matrix());
        unitaries.push(u.clone());
    }
    let envelope = schedule.envelope();
    let duration = dt * envelope.iter().sum::<f64>() / controls.omega_max();
    Ok(PropagationResult {
        unitaries,
        envelope,
        duration,
    })
}

fn check_same_dim(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `Tr(U_targ† U)`
pub fn overlap(target: &UnitaryMatrix, u: &UnitaryMatrix) -> Result<Complex64> {
    check_same_dim(target, u)?;
    Ok(target
        .matrix()
        .iter()
        .zip(u.matrix().iter())
        .map(|(t, x)| t.conj() * x)
        .sum())
}

/// `|Tr(U_targ† U)|²`, in `[0, d²]`.
pub fn gate_fidelity(target: &UnitaryMatrix, u: &UnitaryMatrix) -> Result<f64> {
    Ok(overlap(target, u)?.norm_sqr())
}

/// `1 − |Tr(U_targ† U)|²/d²`, in `[0, 1]`.
pub fn normalized_infidelity(target: &UnitaryMatrix, u: &UnitaryMatrix) -> Result<f64> {
    let d = target.dim() as f64;
    Ok(1.0 - gate_fidelity(target, u)? / (d * d))
}

/// Integrates `λ̇ = −iH(t)λ` from `λ(0) = i·g` with the schedule's own step
/// exponentials and returns `max_n ‖λ(nδt) − U(nδt)·i·g‖_F`.
pub fn verify_adjoint_constancy(
    controls: &ControlSet,
    schedule: &PulseSchedule,
    g: &AdjointMatrix,
) -> Result<f64> {
    if g.dim != controls.dim() {
        return Err(Error::DimensionMismatch {
            expected: controls.dim(),
            found: g.dim,
        });
    }
    let prop = propagate(controls, schedule)?;
    let lambda0 = g.to_matrix()? * c(0.0, 1.0);
    let dt = schedule.dt();
    let mut lambda = lambda0.clone();
    let mut worst = 0.0f64;
    for (n, row) in schedule.rows().enumerate() {
        lambda = raw_step(controls, row, dt).matrix() * lambda;
        let expected = prop.unitaries[n + 1].matrix() * &lambda0;
        worst = worst.max((&lambda - expected).norm());
    }
    Ok(worst)
}

/// Bloch coordinates `(t, x, y, z)` of `U(nδt)|0⟩` for a qubit.
pub fn bloch_trajectory(result: &PropagationResult) -> Result<Vec<[f64; 4]>> {
    let d = result.final_unitary().dim();
    if d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: d,
        });
    }
    let n_steps = result.unitaries.len() - 1;
    Ok(result
        .unitaries
        .iter()
        .enumerate()
        .map(|(n, u)| {
            let a = u.matrix()[(0, 0)];
            let b = u.matrix()[(1, 0)];
            let ab = a.conj() * b;
            [
                n as f64 / n_steps as f64,
                2.0 * ab.re,
                2.0 * ab.im,
                a.norm_sqr() - b.norm_sqr(),
            ]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{nearest_neighbor_control_set, qft, random_unitary, GeneratorBasis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn qubit() -> ControlSet {
        nearest_neighbor_control_set(2).unwrap()
    }

    fn sx() -> CMatrix {
        GeneratorBasis::gell_mann(2).unwrap().generator(0).clone()
    }

    #[test]
    fn zero_amplitudes_give_identity() {
        let u = step_unitary(&qubit(), &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(u, UnitaryMatrix::identity(2));
    }

    #[test]
    fn pauli_exponential_identity() {
        let theta = 0.7;
        let dt = 0.05;
        let u = step_unitary(&qubit(), &[theta / dt, 0.0], dt).unwrap();
        let expected = CMatrix::identity(2, 2) * c(theta.cos(), 0.0) - sx() * c(0.0, theta.sin());
        assert!((u.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn step_rejects_bad_input() {
        assert!(matches!(
            step_unitary(&qubit(), &[f64::NAN, 0.0], 0.1),
            Err(Error::NonFiniteAmplitude { .. })
        ));
        assert!(step_unitary(&qubit(), &[1.0, 0.0], 0.0).is_err());
        assert!(step_unitary(&qubit(), &[1.0], 0.1).is_err());
    }

    #[test]
    fn step_unitarity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=5 {
            let cs = nearest_neighbor_control_set(d).unwrap();
            for _ in 0..20 {
                let amps: Vec<f64> = (0..cs.len())
                    .map(|_| rng.random_range(-10.0..10.0))
                    .collect();
                let dt = rng.random_range(0.001..0.1);
                let u = step_unitary(&cs, &amps, dt).unwrap();
                assert!(u.defect() <= 1e-12, "defect {}", u.defect());
            }
        }
    }

    #[test]
    fn zero_schedule_propagation() {
        let s = PulseSchedule::zeros(10, 2).unwrap();
        let r = propagate(&qubit(), &s).unwrap();
        assert_eq!(r.unitaries.len(), 11);
        assert!(r.unitaries.iter().all(|u| *u == UnitaryMatrix::identity(2)));
        assert_eq!(r.duration, 0.0);
    }

    #[test]
    fn pi_half_rotation_is_x_gate() {
        let n = 16;
        let s = PulseSchedule::from_fn(n, 2, |_| vec![PI / 2.0, 0.0]).unwrap();
        let r = propagate(&qubit(), &s).unwrap();
        let x = UnitaryMatrix::new(sx()).unwrap();
        let expected = sx() * c(0.0, -1.0);
        assert!((r.final_unitary().matrix() - expected).norm() < 1e-13);
        assert!((gate_fidelity(&x, r.final_unitary()).unwrap() - 4.0).abs() < 1e-12);
        assert!((r.duration - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_examples() {
        let v = qft(3).unwrap();
        assert!((gate_fidelity(&v, &v).unwrap() - 9.0).abs() < 1e-12);
        let phased = UnitaryMatrix::new(v.matrix() * Complex64::from_polar(1.0, 0.4)).unwrap();
        assert!((gate_fidelity(&v, &phased).unwrap() - 9.0).abs() < 1e-12);
        let id = UnitaryMatrix::identity(2);
        let x = UnitaryMatrix::new(sx()).unwrap();
        assert_eq!(gate_fidelity(&id, &x).unwrap(), 0.0);
        assert_eq!(normalized_infidelity(&id, &x).unwrap(), 1.0);
        assert!(normalized_infidelity(&v, &v).unwrap().abs() < 1e-15);
        assert!(gate_fidelity(&id, &v).is_err());
    }

    #[test]
    fn duration_matches_envelope_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = PulseSchedule::from_fn(37, 2, |_| {
            vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
        })
        .unwrap();
        let cs = qubit().with_omega_max(2.0).unwrap();
        let r = propagate(&cs, &s).unwrap();
        let sum: f64 = r.envelope.iter().sum();
        assert!((r.duration - sum / 37.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_constancy_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cs = qubit();
        let g = crate::qudit::random_adjoint(2, 1.0, &mut rng).unwrap();
        let zero = PulseSchedule::zeros(5, 2).unwrap();
        assert_eq!(verify_adjoint_constancy(&cs, &zero, &g).unwrap(), 0.0);
        let s = PulseSchedule::from_fn(50, 2, |t| vec![(3.0 * t).sin(), t]).unwrap();
        assert!(verify_adjoint_constancy(&cs, &s, &g).unwrap() < 1e-12);
    }

    #[test]
    fn bloch_examples() {
        let zero = PulseSchedule::zeros(4, 2).unwrap();
        let traj = bloch_trajectory(&propagate(&qubit(), &zero).unwrap()).unwrap();
        assert!(traj.iter().all(|r| r[1..] == [0.0, 0.0, 1.0]));

        let s = PulseSchedule::from_fn(8, 2, |_| vec![PI / 4.0, 0.0]).unwrap();
        let traj = bloch_trajectory(&propagate(&qubit(), &s).unwrap()).unwrap();
        let end = traj.last().unwrap();
        assert!((end[0] - 1.0).abs() < 1e-15);
        assert!(end[1].abs() < 1e-12 && (end[2] + 1.0).abs() < 1e-12 && end[3].abs() < 1e-12);

        let cs3 = nearest_neighbor_control_set(3).unwrap();
        let r3 = propagate(&cs3, &PulseSchedule::zeros(2, 4).unwrap()).unwrap();
        assert!(bloch_trajectory(&r3).is_err());
    }

    #[test]
    fn refinement_preserves_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(2, &mut rng);
        let s = PulseSchedule::from_fn(6, 2, |t| vec![1.0 + t, -2.0 * t]).unwrap();
        let a = propagate(&qubit(), &s).unwrap();
        let b = propagate(&qubit(), &s.refined(3).unwrap()).unwrap();
        let fa = gate_fidelity(&u, a.final_unitary()).unwrap();
        let fb = gate_fidelity(&u, b.final_unitary()).unwrap();
        assert!((fa - fb).abs() < 1e-12);
        assert!((a.duration - b.duration).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(PulseSchedule::zeros(0, 2).is_err());
        assert!(PulseSchedule::from_flat(2, 2, vec![0.0; 3]).is_err());
        assert!(matches!(
            PulseSchedule::from_flat(2, 2, vec![0.0, 0.0, f64::INFINITY, 0.0]),
            Err(Error::NonFiniteAmplitude {
                step: 1,
                control: 0
            })
        ));
        let s = PulseSchedule::zeros(7, 3).unwrap();
        assert!((s.dt() * 7.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_serde_round_trip() {
        let s = PulseSchedule::from_fn(3, 2, |t| vec![t, -t]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: PulseSchedule = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"n_steps":2,"n_controls":2,"amplitudes":[[1.0,2.0]]}"#;
        assert!(serde_json::from_str::<PulseSchedule>(bad).is_err());
    }
}
