// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for d-level systems.
//!
//! Matrices are stored as column-major [`nalgebra::DMatrix`] values. The
//! wrappers here ([`HermitianMatrix`], [`UnitaryMatrix`]) only carry the
//! structural invariant; arithmetic is done on the underlying matrix.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const MAX_DIM: usize = 64;

const UNITARY_TOL: f64 = 1e-10;
const TRACELESS_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(d))
    }
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `ReTr(A†B)`, the real Frobenius inner product.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum())
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Frobenius norm of `U†U − 1`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let d = m.nrows();
    (m.adjoint() * m - CMatrix::identity(d, d)).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Wraps `m` after replacing it by `(m + m†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let sym = (&m + m.adjoint()) * c(0.5, 0.0);
        Ok(Self(sym))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Validates `‖U†U − 1‖_F ≤ 1e-10`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let defect = unitarity_defect(&m);
        if !(defect <= UNITARY_TOL) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self(m))
    }

    /// Caller guarantees unitarity (products and exponentials of Hermitian
    /// generators).
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · other`
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// `U M U†`
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        &self.0 * m * self.0.adjoint()
    }
}

/// Generalized Gell-Mann basis of su(d), normalized to `Tr(G_i G_j) = 2δ_ij`.
///
/// Order: for each pair `j < k` (lexicographic) the symmetric member then
/// the antisymmetric one, followed by the d−1 diagonal members. For d=2
/// this is (σx, σy, σz).
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorBasis {
    pub fn gell_mann(d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut generators = Vec::with_capacity(d * d - 1);
        for j in 0..d {
            for k in (j + 1)..d {
                let mut s = CMatrix::zeros(d, d);
                s[(j, k)] = c(1.0, 0.0);
                s[(k, j)] = c(1.0, 0.0);
                generators.push(s);
                let mut a = CMatrix::zeros(d, d);
                a[(j, k)] = c(0.0, -1.0);
                a[(k, j)] = c(0.0, 1.0);
                generators.push(a);
            }
        }
        for l in 1..d {
            let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = c(scale, 0.0);
            }
            m[(l, l)] = c(-(l as f64) * scale, 0.0);
            generators.push(m);
        }
        Ok(Self { dim: d, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &CMatrix {
        &self.generators[i]
    }

    /// `Σ_i c_i G_i`
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<CMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (g, &w) in self.generators.iter().zip(coeffs) {
            if w != 0.0 {
                m += g * c(w, 0.0);
            }
        }
        Ok(m)
    }

    /// Coordinates `c_i = ReTr(G_i M)/2`. Exact for traceless Hermitian `M`.
    pub fn decompose(&self, m: &CMatrix) -> Result<Vec<f64>> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(self
            .generators
            .iter()
            .map(|g| 0.5 * trace_of_product(g, m).re)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    #[serde(rename = "gell-mann")]
    GellMann,
}

/// The traceless Hermitian matrix `g`, held by its d²−1 Gell-Mann
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointMatrix {
    pub dim: usize,
    pub basis: BasisKind,
    pub coeffs: Vec<f64>,
}

impl AdjointMatrix {
    pub fn new(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if coeffs.len() != dim * dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                found: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "adjoint coefficient {i} is not finite"
            )));
        }
        Ok(Self {
            dim,
            basis: BasisKind::GellMann,
            coeffs,
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim.saturating_mul(dim).saturating_sub(1)])
    }

    /// Projects a Hermitian matrix onto su(d); the trace part is dropped.
    pub fn from_matrix(m: &HermitianMatrix) -> Result<Self> {
        let basis = GeneratorBasis::gell_mann(m.dim())?;
        Self::new(m.dim(), basis.decompose(m.matrix())?)
    }

    pub fn n_params(&self) -> usize {
        self.coeffs.len()
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        GeneratorBasis::gell_mann(self.dim)?.reconstruct(&self.coeffs)
    }

    pub fn to_matrix_in(&self, basis: &GeneratorBasis) -> Result<CMatrix> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.dim(),
            });
        }
        basis.reconstruct(&self.coeffs)
    }
}

/// Hermitian control Hamiltonians `H_k` with drive bound `Ω_max`.
#[derive(Debug, Clone)]
pub struct ControlSet {
    dim: usize,
    hamiltonians: Vec<HermitianMatrix>,
    omega_max: f64,
}

impl ControlSet {
    pub fn new(hamiltonians: Vec<HermitianMatrix>, omega_max: f64) -> Result<Self> {
        let first = hamiltonians
            .first()
            .ok_or_else(|| Error::InvalidConfig("control set is empty".into()))?;
        let dim = first.dim();
        check_dim(dim)?;
        for h in &hamiltonians {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
            let scale = h.matrix().norm().max(1.0);
            if h.trace().abs() > TRACELESS_TOL * scale {
                return Err(Error::NotTraceless {
                    trace: h.trace().abs(),
                });
            }
        }
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "omega_max must be positive, got {omega_max}"
            )));
        }
        Ok(Self {
            dim,
            hamiltonians,
            omega_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.hamiltonians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hamiltonians.is_empty()
    }

    pub fn hamiltonians(&self) -> &[HermitianMatrix] {
        &self.hamiltonians
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn with_omega_max(mut self, omega_max: f64) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "omega_max must be positive, got {omega_max}"
            )));
        }
        self.omega_max = omega_max;
        Ok(self)
    }

    /// `Σ_k u_k H_k`
    pub fn generator(&self, amplitudes: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (h, &u) in self.hamiltonians.iter().zip(amplitudes) {
            if u != 0.0 {
                m += h.matrix() * c(u, 0.0);
            }
        }
        m
    }
}

/// X- and Y-like Pauli matrices on the adjacent levels `k, k+1`.
pub fn generalized_pauli_pair(d: usize, k: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    check_dim(d)?;
    if k + 2 > d {
        return Err(Error::IndexOutOfRange { index: k, dim: d });
    }
    let mut x = CMatrix::zeros(d, d);
    x[(k, k + 1)] = c(1.0, 0.0);
    x[(k + 1, k)] = c(1.0, 0.0);
    let mut y = CMatrix::zeros(d, d);
    y[(k, k + 1)] = c(0.0, -1.0);
    y[(k + 1, k)] = c(0.0, 1.0);
    Ok((HermitianMatrix::new(x)?, HermitianMatrix::new(y)?))
}

/// The 2(d−1) generalized Paulis `(σx_{0,1}, σy_{0,1}, σx_{1,2}, …)`.
pub fn nearest_neighbor_control_set(d: usize) -> Result<ControlSet> {
    check_dim(d)?;
    let mut hs = Vec::with_capacity(2 * (d - 1));
    for k in 0..d - 1 {
        let (x, y) = generalized_pauli_pair(d, k)?;
        hs.push(x);
        hs.push(y);
    }
    ControlSet::new(hs, 1.0)
}

/// All d²−1 Gell-Mann generators as controls.
pub fn full_control_set(d: usize) -> Result<ControlSet> {
    let basis = GeneratorBasis::gell_mann(d)?;
    let hs = basis
        .generators()
        .iter()
        .cloned()
        .map(HermitianMatrix::new)
        .collect::<Result<Vec<_>>>()?;
    ControlSet::new(hs, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRule {
    NearestNeighbor,
    GellMann,
}

impl ControlRule {
    pub fn build(self, d: usize) -> Result<ControlSet> {
        match self {
            ControlRule::NearestNeighbor => nearest_neighbor_control_set(d),
            ControlRule::GellMann => full_control_set(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateName {
    Hadamard,
    Qft,
    Identity,
    Custom,
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(GateName::Hadamard),
            "qft" => Ok(GateName::Qft),
            "identity" => Ok(GateName::Identity),
            "custom" => Ok(GateName::Custom),
            other => Err(Error::InvalidConfig(format!("unknown gate '{other}'"))),
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateName::Hadamard => "hadamard",
            GateName::Qft => "qft",
            GateName::Identity => "identity",
            GateName::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// `(1/√d)·exp(2πi·jk/d)`
pub fn qft(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let m = CMatrix::from_fn(d, d, |j, k| {
        // reduce jk mod d first so the phase stays accurate for larger d
        let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
        Complex64::from_polar(norm, phase)
    });
    Ok(UnitaryMatrix::from_matrix_unchecked(m))
}

/// Builds the named target. `hadamard` for d > 2 is QFT(d).
pub fn target_gate(name: GateName, d: usize, custom: Option<&CMatrix>) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    match name {
        GateName::Hadamard | GateName::Qft => qft(d),
        GateName::Identity => Ok(UnitaryMatrix::identity(d)),
        GateName::Custom => {
            let m = custom.ok_or_else(|| {
                Error::InvalidConfig("custom target requires matrix entries".into())
            })?;
            if m.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
            UnitaryMatrix::new(m.clone())
        }
    }
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let (q, r) = qr.unpack();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| {
        let rii = r[(i, i)];
        if rii.norm() > 0.0 {
            rii / rii.norm()
        } else {
            c(1.0, 0.0)
        }
    }));
    UnitaryMatrix::from_matrix_unchecked(q * phases)
}

/// Random traceless Hermitian matrix with i.i.d. normal Gell-Mann coordinates.
pub fn random_adjoint<R: Rng + ?Sized>(d: usize, sigma: f64, rng: &mut R) -> Result<AdjointMatrix> {
    check_dim(d)?;
    let coeffs = (0..d * d - 1)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    AdjointMatrix::new(d, coeffs)
}

/// Parses a row-major list of `[re, im]` pairs.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Format("matrix literal is empty".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Format(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = rows[i][j];
        c(re, im)
    }))
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli() -> [CMatrix; 3] {
        let b = GeneratorBasis::gell_mann(2).unwrap();
        [
            b.generator(0).clone(),
            b.generator(1).clone(),
            b.generator(2).clone(),
        ]
    }

    #[test]
    fn qubit_gell_mann_is_pauli() {
        let [x, y, z] = pauli();
        assert_eq!(
            x,
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
        );
        assert_eq!(
            y,
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
        );
        assert_eq!(
            z,
            CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
        );
    }

    #[test]
    fn gell_mann_orthonormal_and_traceless() {
        for d in 2..=7 {
            let b = GeneratorBasis::gell_mann(d).unwrap();
            assert_eq!(b.len(), d * d - 1);
            for (i, gi) in b.generators().iter().enumerate() {
                assert!(gi.trace().norm() <= 1e-12);
                assert!((gi - gi.adjoint()).norm() <= 1e-12);
                for (j, gj) in b.generators().iter().enumerate() {
                    let t = trace_of_product(gi, gj);
                    let expected = if i == j { 2.0 } else { 0.0 };
                    assert!((t.re - expected).abs() <= 1e-12 && t.im.abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn pauli_pair_values() {
        let (x, y) = generalized_pauli_pair(2, 0).unwrap();
        let [px, py, _] = pauli();
        assert_eq!(x.matrix(), &px);
        assert_eq!(y.matrix(), &py);

        let (x, y) = generalized_pauli_pair(3, 1).unwrap();
        for m in [x.matrix(), y.matrix()] {
            for i in 0..3 {
                for j in 0..3 {
                    if i == 0 || j == 0 {
                        assert_eq!(m[(i, j)], c(0.0, 0.0));
                    }
                }
            }
            assert!((m.norm() - 2f64.sqrt()).abs() < 1e-15);
            assert_eq!(m.trace(), c(0.0, 0.0));
        }
        assert!(matches!(
            generalized_pauli_pair(4, 3),
            Err(Error::IndexOutOfRange { index: 3, dim: 4 })
        ));
    }

    #[test]
    fn nearest_neighbor_counts_and_orthogonality() {
        assert!(matches!(
            nearest_neighbor_control_set(1),
            Err(Error::InvalidDimension(1))
        ));
        for d in 2..=6 {
            let cs = nearest_neighbor_control_set(d).unwrap();
            assert_eq!(cs.len(), 2 * (d - 1));
            for (i, a) in cs.hamiltonians().iter().enumerate() {
                for (j, b) in cs.hamiltonians().iter().enumerate() {
                    let v = trace_inner(a.matrix(), b.matrix()).unwrap();
                    assert!((v - if i == j { 2.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            let ratio = cs.len() as f64 / (d * d - 1) as f64;
            assert!((ratio - 2.0 / (d as f64 + 1.0)).abs() < 1e-15);
        }
        let cs = nearest_neighbor_control_set(2).unwrap();
        let [px, py, _] = pauli();
        assert_eq!(cs.hamiltonians()[0].matrix(), &px);
        assert_eq!(cs.hamiltonians()[1].matrix(), &py);
    }

    #[test]
    fn trace_inner_examples() {
        let [x, y, _] = pauli();
        assert_eq!(trace_inner(&x, &x).unwrap(), 2.0);
        assert_eq!(trace_inner(&x, &y).unwrap(), 0.0);
        let b = GeneratorBasis::gell_mann(4).unwrap();
        let id = CMatrix::identity(4, 4);
        for g in b.generators() {
            assert!(trace_inner(&id, g).unwrap().abs() < 1e-15);
        }
        assert!(trace_inner(&x, &id).is_err());
    }

    #[test]
    fn qft_examples() {
        let h = target_gate(GateName::Qft, 2, None).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        assert!((h.matrix() - &expected).norm() < 1e-15);
        assert_eq!(target_gate(GateName::Hadamard, 2, None).unwrap(), h);

        let q3 = qft(3).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let r = 1.0 / 3f64.sqrt();
        assert!((q3.matrix()[(1, 0)] - c(r, 0.0)).norm() < 1e-15);
        assert!((q3.matrix()[(1, 1)] - w * r).norm() < 1e-15);
        assert!((q3.matrix()[(1, 2)] - w * w * r).norm() < 1e-15);

        for d in 2..=16 {
            assert!(qft(d).unwrap().defect() <= 1e-12, "d={d}");
        }
        assert_eq!(
            target_gate(GateName::Identity, 5, None).unwrap(),
            UnitaryMatrix::identity(5)
        );
    }

    #[test]
    fn custom_target_validation() {
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            target_gate(GateName::Custom, 2, Some(&bad)),
            Err(Error::NotUnitary { .. })
        ));
        assert!(target_gate(GateName::Custom, 2, None).is_err());
        let [x, ..] = pauli();
        assert!(target_gate(GateName::Custom, 2, Some(&x)).is_ok());
    }

    #[test]
    fn hermitian_symmetrizes() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 1.), c(0., 0.), c(-1., 0.)]);
        let h = HermitianMatrix::new(m).unwrap();
        assert!((h.matrix() - h.matrix().adjoint()).norm() <= 1e-12);
    }

    #[test]
    fn control_set_rejects_trace() {
        let id = HermitianMatrix::new(CMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            ControlSet::new(vec![id], 1.0),
            Err(Error::NotTraceless { .. })
        ));
        assert!(ControlSet::new(vec![], 1.0).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=6 {
            let u = random_unitary(d, &mut rng);
            assert!(u.defect() < 1e-12);
            let det = u.matrix().determinant();
            assert!((det.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pairs_round_trip() {
        let q = qft(3).unwrap();
        let back = matrix_from_pairs(&matrix_to_pairs(q.matrix())).unwrap();
        assert_eq!(&back, q.matrix());
        assert!(matrix_from_pairs(&[vec![[1.0, 0.0]], vec![]]).is_err());
    }
}
