// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random-restart campaigns across qudit dimensions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magicarp::{optimize, MagicarpConfig, Problem};
use crate::qudit::{check_dim, target_gate, ControlRule, GateName};

/// Infidelity at or below which a run counts toward the minimal duration.
pub const SUCCESS_THRESHOLD: f64 = 1e-7;

/// Unconstrained speed limit of QFT(d): `(π/Ω_max)(1 − 1/d)`.
pub fn tau_qsl(d: usize, omega_max: f64) -> Result<f64> {
    check_dim(d)?;
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    Ok(PI / omega_max * (1.0 - 1.0 / d as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub dims: Vec<usize>,
    pub runs_per_dim: usize,
    pub target: GateName,
    pub control_set: ControlRule,
    pub omega_max: f64,
    pub base_seed: u64,
    /// Per-run settings; its `seed` is replaced by the derived run seed.
    pub magicarp: MagicarpConfig,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5, 6],
            runs_per_dim: 300,
            target: GateName::Qft,
            control_set: ControlRule::NearestNeighbor,
            omega_max: 1.0,
            base_seed: 0,
            magicarp: MagicarpConfig::default(),
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig(
                "benchmark needs at least one dimension".into(),
            ));
        }
        for &d in &self.dims {
            check_dim(d)?;
        }
        if self.runs_per_dim == 0 {
            return Err(Error::InvalidConfig(
                "runs_per_dim must be at least 1".into(),
            ));
        }
        if self.target == GateName::Custom {
            return Err(Error::InvalidConfig(
                "benchmark targets must be defined for every dimension".into(),
            ));
        }
        tau_qsl(2, self.omega_max)?;
        self.magicarp.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub dim: usize,
    pub run_index: usize,
    pub seed: u64,
    pub infidelity: f64,
    pub duration_omega: f64,
    pub duration_qsl: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-run seed, so any single record can be replayed on its own.
pub fn derive_seed(base_seed: u64, dim: usize, run_index: usize) -> u64 {
    let a = splitmix64(base_seed);
    let b = splitmix64(a ^ dim as u64);
    splitmix64(b ^ (run_index as u64).rotate_left(32))
}

pub fn run_one(spec: &BenchmarkSpec, dim: usize, run_index: usize) -> BenchmarkRecord {
    let seed = derive_seed(spec.base_seed, dim, run_index);
    let failed = BenchmarkRecord {
        dim,
        run_index,
        seed,
        infidelity: f64::NAN,
        duration_omega: f64::NAN,
        duration_qsl: f64::NAN,
        iterations: 0,
        converged: false,
    };
    let attempt = || -> Result<BenchmarkRecord> {
        let controls = spec
            .control_set
            .build(dim)?
            .with_omega_max(spec.omega_max)?;
        let problem = Problem::new(controls, target_gate(spec.target, dim, None)?)?;
        let config = MagicarpConfig {
            seed,
            ..spec.magicarp.clone()
        };
        let report = optimize(&problem, &config)?;
        Ok(BenchmarkRecord {
            dim,
            run_index,
            seed,
            infidelity: report.infidelity,
            duration_omega: report.duration,
            duration_qsl: report.duration / tau_qsl(dim, spec.omega_max)?,
            iterations: report.iterations,
            converged: report.converged,
        })
    };
    attempt().unwrap_or(failed)
}

/// Runs every `(dim, run_index)` pair on up to `workers` threads
/// (0 = one per logical core). Output is ordered by `(dim, run_index)`.
pub fn run_campaign(spec: &BenchmarkSpec, workers: usize) -> Result<Vec<BenchmarkRecord>> {
    spec.validate()?;
    let mut dims = spec.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..spec.runs_per_dim).map(move |r| (d, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(d, r)| run_one(spec, d, r)).collect()))
}

/// Smallest `duration_qsl` among runs of `dim` with infidelity ≤ `threshold`.
pub fn minimal_duration(records: &[BenchmarkRecord], dim: usize, threshold: f64) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.dim == dim && r.infidelity <= threshold)
        .map(|r| r.duration_qsl)
        .min_by(|a, b| a.total_cmp(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimSummary {
    pub dim: usize,
    pub runs: usize,
    pub converged: usize,
    pub success_rate: f64,
    /// In units of `τ_QSL`.
    pub minimal_duration: Option<f64>,
    /// Median `duration_qsl` over all finished runs.
    pub median_duration: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn summarize(records: &[BenchmarkRecord], threshold: f64) -> Vec<DimSummary> {
    let mut dims: Vec<usize> = records.iter().map(|r| r.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    dims.into_iter()
        .map(|dim| {
            let of_dim: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.dim == dim).collect();
            let converged = of_dim.iter().filter(|r| r.converged).count();
            DimSummary {
                dim,
                runs: of_dim.len(),
                converged,
                success_rate: converged as f64 / of_dim.len() as f64,
                minimal_duration: minimal_duration(records, dim, threshold),
                median_duration: median(
                    of_dim
                        .iter()
                        .map(|r| r.duration_qsl)
                        .filter(|x| x.is_finite())
                        .collect(),
                ),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(dim: usize, run_index: usize, infidelity: f64, duration_qsl: f64) -> BenchmarkRecord {
        BenchmarkRecord {
            dim,
            run_index,
            seed: 0,
            infidelity,
            duration_omega: duration_qsl,
            duration_qsl,
            iterations: 1,
            converged: infidelity <= 1e-7,
        }
    }

    #[test]
    fn tau_qsl_values() {
        assert!((tau_qsl(2, 1.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((tau_qsl(6, 1.0).unwrap() - 5.0 * PI / 6.0).abs() < 1e-15);
        assert!((tau_qsl(2, 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(tau_qsl(1, 1.0).is_err());
        assert!(tau_qsl(2, 0.0).is_err());
    }

    #[test]
    fn minimal_duration_cases() {
        let recs = vec![
            record(2, 0, 1e-3, 0.9),
            record(2, 1, 5e-8, 1.3),
            record(2, 2, 1e-8, 1.26),
            record(3, 0, 1e-2, 1.0),
        ];
        assert_eq!(minimal_duration(&recs, 2, 1e-7), Some(1.26));
        assert_eq!(minimal_duration(&recs, 3, 1e-7), None);
        assert_eq!(minimal_duration(&recs[1..2], 2, 1e-7), Some(1.3));
        let nan = vec![record(2, 0, f64::NAN, f64::NAN)];
        assert_eq!(minimal_duration(&nan, 2, 1e-7), None);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(7, 2, 0);
        assert_eq!(a, derive_seed(7, 2, 0));
        assert_ne!(a, derive_seed(7, 2, 1));
        assert_ne!(a, derive_seed(7, 3, 0));
        assert_ne!(a, derive_seed(8, 2, 0));
    }

    #[test]
    fn summary_counts() {
        let recs = vec![
            record(2, 0, 1e-8, 1.3),
            record(2, 1, 1e-2, 2.0),
            record(2, 2, 1e-9, 1.25),
        ];
        let s = summarize(&recs, 1e-7);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].converged, 2);
        assert_eq!(s[0].minimal_duration, Some(1.25));
        assert_eq!(s[0].median_duration, Some(1.3));
    }

    #[test]
    fn spec_validation() {
        let mut spec = BenchmarkSpec::default();
        assert!(spec.validate().is_ok());
        spec.dims = vec![1];
        assert!(spec.validate().is_err());
        spec.dims = vec![2];
        spec.runs_per_dim = 0;
        assert!(spec.validate().is_err());
        spec.runs_per_dim = 1;
        spec.target = GateName::Custom;
        assert!(spec.validate().is_err());
    }
}
