// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Optimality test for a given schedule.
//!
//! A time-optimal pulse admits a constant traceless Hermitian `g` with
//! `u_k(t)/c(t) = ½ ReTr(U(t) g U†(t) H_k)` at every step. The condition is
//! linear in the coordinates of `g`, so the best candidate is a linear
//! least-squares fit and the RMS residual measures how far the schedule is
//! from that structure.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::propagation::{propagate, PulseSchedule};
use crate::qudit::{trace_of_product, AdjointMatrix, ControlSet, GeneratorBasis};

use super::DEGENERATE_ENVELOPE;

#[derive(Debug, Clone)]
pub struct Certificate {
    pub g_fit: AdjointMatrix,
    /// Root-mean-square residual over all fitted `(step, control)` pairs.
    pub residual: f64,
    /// Steps left out because their envelope vanishes.
    pub excluded_steps: usize,
}

pub fn optimality_certificate(
    schedule: &PulseSchedule,
    controls: &ControlSet,
) -> Result<Certificate> {
    let prop = propagate(controls, schedule)?;
    let basis = GeneratorBasis::gell_mann(controls.dim())?;
    let p = basis.len();

    let mut rows: Vec<f64> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut excluded = 0;
    for (n, amps) in schedule.rows().enumerate() {
        let c = prop.envelope[n];
        if !(c > DEGENERATE_ENVELOPE) {
            excluded += 1;
            continue;
        }
        let u = &prop.unitaries[n];
        for (kk, h) in controls.hamiltonians().iter().enumerate() {
            // ReTr(U G U† H) = ReTr(G · U† H U)
            let h_back = u.adjoint().conjugate(h.matrix());
            rows.extend(
                basis
                    .generators()
                    .iter()
                    .map(|g| 0.5 * trace_of_product(g, &h_back).re),
            );
            rhs.push(amps[kk] / c);
        }
    }
    if rhs.is_empty() {
        return Err(Error::DegenerateInput(
            "schedule has no step with a nonzero envelope".into(),
        ));
    }
    debug_assert_eq!(rows.len(), rhs.len() * p);

    // normal equations: the unknown count is d²−1, tiny next to the row count
    let mut ata = DMatrix::<f64>::zeros(p, p);
    let mut atb = DVector::<f64>::zeros(p);
    for (row, &b) in rows.chunks_exact(p).zip(&rhs) {
        for i in 0..p {
            atb[i] += row[i] * b;
            for j in 0..p {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    let scale = ata.diagonal().amax().max(f64::MIN_POSITIVE);
    let svd = ata.svd(true, true);
    let x = svd
        .solve(&atb, 1e-12 * scale)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;

    let sum_sq: f64 = rows
        .chunks_exact(p)
        .zip(&rhs)
        .map(|(row, &b)| {
            let fit: f64 = row.iter().zip(x.iter()).map(|(a, c)| a * c).sum();
            (fit - b).powi(2)
        })
        .sum();
    let residual = (sum_sq / rhs.len() as f64).sqrt();

    Ok(Certificate {
        g_fit: AdjointMatrix::new(controls.dim(), x.iter().copied().collect())?,
        residual,
        excluded_steps: excluded,
    })
}
