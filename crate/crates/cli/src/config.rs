// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//!
//! [problem]
//! dim = 2
//! target = "hadamard"
//! controls = "nearest_neighbor"
//!
//! [magicarp]
//! mode = "time_optimal_renormalized"
//! n_steps = 128
//! ```

use std::path::{Path, PathBuf};

use magicarp_core::bench::BenchmarkSpec;
use magicarp_core::grape::GrapeConfig;
use magicarp_core::qudit::{matrix_from_pairs, target_gate, ControlRule, ControlSet, GateName};
use magicarp_core::{MagicarpConfig, UnitaryMatrix};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

pub const SEED_ENV: &str = "MAGICARP_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub dim: usize,
    pub target: GateName,
    /// Row-major `[re, im]` pairs; required when `target = "custom"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom_target: Option<Vec<Vec<[f64; 2]>>>,
    pub controls: ControlRule,
    pub omega_max: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            target: GateName::Hadamard,
            custom_target: None,
            controls: ControlRule::NearestNeighbor,
            omega_max: 1.0,
        }
    }
}

impl ProblemSpec {
    pub fn control_set(&self) -> Result<ControlSet, CliError> {
        Ok(self
            .controls
            .build(self.dim)?
            .with_omega_max(self.omega_max)?)
    }

    pub fn target_gate(&self) -> Result<UnitaryMatrix, CliError> {
        let custom = match (&self.custom_target, self.target) {
            (Some(rows), GateName::Custom) => Some(matrix_from_pairs(rows)?),
            (None, GateName::Custom) => {
                return Err(CliError::invalid(
                    "problem.custom_target is required for target = \"custom\"",
                ))
            }
            (Some(_), _) => {
                return Err(CliError::invalid(
                    "problem.custom_target is only used with target = \"custom\"",
                ))
            }
            (None, _) => None,
        };
        Ok(target_gate(self.target, self.dim, custom.as_ref())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    /// Independent runs from seeds `seed, seed+1, …`; the shortest converged one is kept.
    pub restarts: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self { restarts: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
    pub threshold: f64,
}

impl Default for CertifySection {
    fn default() -> Self {
        Self {
            schedule: None,
            threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlochSection {
    /// Schedule to replay; without one, the `[magicarp]` optimization is run first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the per-section seeds when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub problem: ProblemSpec,
    pub magicarp: MagicarpConfig,
    pub optimize: OptimizeSection,
    pub grape: GrapeConfig,
    pub benchmark: BenchmarkSpec,
    pub certify: CertifySection,
    pub bloch: BlochSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out_dir: PathBuf::from("magicarp-out"),
            problem: ProblemSpec::default(),
            magicarp: MagicarpConfig::default(),
            optimize: OptimizeSection::default(),
            grape: GrapeConfig::default(),
            benchmark: BenchmarkSpec::default(),
            certify: CertifySection::default(),
            bloch: BlochSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self)
            .map_err(|e| CliError::runtime(format!("cannot serialize config: {e}")))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
                    .map_err(|e| CliError::invalid(format!("{}: {}", p.display(), e.message())))
            }
        }
    }

    /// Applies `--seed`, then `MAGICARP_SEED`, then the file's top-level
    /// `seed`, to every section that takes one.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> Result<(), CliError> {
        let from_env = match env {
            Some(s) => Some(s.trim().parse::<u64>().map_err(|_| {
                CliError::invalid(format!(
                    "{SEED_ENV} must be an unsigned 64-bit integer, got {s:?}"
                ))
            })?),
            None => None,
        };
        if let Some(seed) = flag.or(from_env).or(self.seed) {
            self.seed = Some(seed);
            self.magicarp.seed = seed;
            self.grape.seed = seed;
            self.benchmark.base_seed = seed;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use magicarp_core::magicarp::{Initialization, PulseMode};

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_default_and_custom() {
        let mut cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);

        cfg.seed = Some(42);
        cfg.problem.target = GateName::Custom;
        cfg.problem.custom_target = Some(vec![
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![[1.0, 0.0], [0.0, 0.0]],
        ]);
        cfg.magicarp.mode = PulseMode::TimeOptimalRenormalized;
        cfg.magicarp.init = Initialization::Explicit {
            coeffs: vec![0.1, -2.5e-3, 1.0 / 3.0],
        };
        cfg.grape.penalty_weight = 1e-4;
        cfg.benchmark.dims = vec![2, 3];
        cfg.certify.schedule = Some(PathBuf::from("a/b.csv"));
        cfg.certify.threshold = 0.1 + 0.2;
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = RunConfig::parse(
            r#"
            seed = 3
            [problem]
            dim = 3
            target = "qft"
            [magicarp]
            n_steps = 64
            [magicarp.init]
            kind = "random_normal"
            sigma = 0.5
            [benchmark]
            dims = [2, 3, 4]
            runs_per_dim = 50
            [benchmark.magicarp]
            max_iters = 100
            "#,
        )
        .unwrap();
        assert_eq!(cfg.problem.dim, 3);
        assert_eq!(cfg.magicarp.n_steps, 64);
        assert_eq!(
            cfg.magicarp.init,
            Initialization::RandomNormal { sigma: 0.5 }
        );
        assert_eq!(cfg.benchmark.magicarp.max_iters, 100);
        assert_eq!(cfg.seed, Some(3));
    }

    #[test]
    fn unknown_and_mistyped_fields_rejected() {
        for bad in [
            "sed = 1",
            "[problem]\ndimension = 2",
            "[magicarp]\nn_steps = \"many\"",
            "[problem]\ntarget = \"toffoli\"",
            "[magicarp\n",
        ] {
            let err = RunConfig::parse(bad).unwrap_err();
            assert_eq!(err.code(), 2, "{bad:?}");
        }
    }

    #[test]
    fn seed_precedence() {
        let mut cfg = RunConfig::parse("seed = 5").unwrap();
        cfg.resolve_seed(None, None).unwrap();
        assert_eq!(cfg.magicarp.seed, 5);
        cfg.resolve_seed(None, Some("9")).unwrap();
        assert_eq!(cfg.magicarp.seed, 9);
        assert_eq!(cfg.benchmark.base_seed, 9);
        cfg.resolve_seed(Some(11), Some("9")).unwrap();
        assert_eq!(cfg.grape.seed, 11);
        assert_eq!(cfg.resolve_seed(None, Some("x")).unwrap_err().code(), 2);

        let mut untouched = RunConfig::parse("[magicarp]\nseed = 4").unwrap();
        untouched.resolve_seed(None, None).unwrap();
        assert_eq!(untouched.magicarp.seed, 4);
    }

    #[test]
    fn custom_target_checks() {
        let mut p = ProblemSpec {
            target: GateName::Custom,
            ..ProblemSpec::default()
        };
        assert!(p.target_gate().is_err());
        p.custom_target = Some(vec![
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![[1.0, 0.0], [0.0, 0.0]],
        ]);
        assert!(p.target_gate().is_ok());
        p.custom_target = Some(vec![
            vec![[2.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [1.0, 0.0]],
        ]);
        assert_eq!(p.target_gate().unwrap_err().code(), 2);
    }
}
