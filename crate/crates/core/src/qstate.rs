//! Density matrices, symmetry sectors and the sector operator basis.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, CMat, CVec, ONE, ZERO};

/// Largest register size accepted by the dense simulator.
pub const MAX_QUBITS: usize = 10;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

/// Density matrix of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, data: CMat) -> Result<Self> {
        let rho = Self::from_raw(n_qubits, data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape checks only. Used on the hot path where states come out of
    /// CPTP maps applied to valid states.
    pub fn from_raw(n_qubits: usize, data: CMat) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.nrows(),
            });
        }
        Ok(Self { n_qubits, data })
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return arg(format!("basis index {index} out of range for {n_qubits} qubits"));
        }
        let mut data = CMat::zeros(dim, dim);
        data[(index, index)] = ONE;
        Ok(Self { n_qubits, data })
    }

    /// `|psi><psi|` for a (not necessarily normalized) state vector.
    pub fn pure(n_qubits: usize, psi: &CVec) -> Result<Self> {
        check_qubits(n_qubits)?;
        if psi.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: psi.len(),
            });
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return arg("zero state vector");
        }
        let v = psi / c(norm, 0.0);
        Ok(Self {
            n_qubits,
            data: &v * v.adjoint(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.data).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.data)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_error(&self.data);
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&self.data);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < PSD_TOL {
            return Err(Error::Validation(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return arg(format!("qubit count {n} outside 1..={MAX_QUBITS}"));
    }
    Ok(())
}

/// An eigenspace of the conserved operator, as an ordered list of
/// computational-basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySector {
    n_qubits: usize,
    label: i64,
    indices: Vec<usize>,
}

impl SymmetrySector {
    pub fn from_indices(n_qubits: usize, label: i64, indices: Vec<usize>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if indices.is_empty() {
            return arg("empty sector");
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return arg("sector indices must be strictly increasing");
        }
        if *indices.last().unwrap() >= 1 << n_qubits {
            return arg("sector index out of range");
        }
        Ok(Self {
            n_qubits,
            label,
            indices,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn label(&self) -> i64 {
        self.label
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Orthogonal complement within the register, labelled `label`.
    pub fn complement(&self, label: i64) -> Result<Self> {
        let rest = (0..1usize << self.n_qubits).filter(|i| !self.contains(*i)).collect();
        Self::from_indices(self.n_qubits, label, rest)
    }

    /// Projector onto the sector as a full matrix.
    pub fn projector(&self) -> CMat {
        let dim = 1usize << self.n_qubits;
        let mut p = CMat::zeros(dim, dim);
        for &i in &self.indices {
            p[(i, i)] = ONE;
        }
        p
    }
}

/// Weight-`gamma` sector of the excitation-number operator.
pub fn sector_indices(n: usize, gamma: usize) -> Result<SymmetrySector> {
    check_qubits(n)?;
    if gamma > n {
        return arg(format!("excitation number {gamma} exceeds qubit count {n}"));
    }
    let indices = (0..1usize << n)
        .filter(|i| i.count_ones() as usize == gamma)
        .collect();
    SymmetrySector::from_indices(n, gamma as i64, indices)
}

/// All number sectors `0..=n`, which partition the computational basis.
pub fn number_sectors(n: usize) -> Result<Vec<SymmetrySector>> {
    (0..=n).map(|g| sector_indices(n, g)).collect()
}

/// Population of `rho` inside `sector`, clamped to `[0, 1]`.
pub fn sector_population(rho: &DensityMatrix, sector: &SymmetrySector) -> Result<f64> {
    if rho.n_qubits() != sector.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: sector.n_qubits(),
            got: rho.n_qubits(),
        });
    }
    Ok(raw_population(rho.matrix(), sector).clamp(0.0, 1.0))
}

/// Unclamped `sum_i m_ii` over the sector.
pub(crate) fn raw_population(m: &CMat, sector: &SymmetrySector) -> f64 {
    sector.indices().iter().map(|&i| m[(i, i)].re).sum()
}

/// Partial trace keeping the qubits in `keep`. Kept qubits are renumbered in
/// ascending order of their original index.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return arg("partial trace must keep at least one qubit");
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return arg("keep set must be distinct qubit indices within the register");
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let scatter = |bits: usize, qubits: &[usize]| {
        qubits
            .iter()
            .enumerate()
            .filter(|(b, _)| bits >> b & 1 == 1)
            .fold(0usize, |acc, (_, &q)| acc | 1 << q)
    };
    let kept_idx: Vec<usize> = (0..dk).map(|l| scatter(l, &kept)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|l| scatter(l, &traced)).collect();
    let m = rho.matrix();
    let out = CMat::from_fn(dk, dk, |a, b| {
        traced_idx
            .iter()
            .map(|&t| m[(kept_idx[a] | t, kept_idx[b] | t)])
            .fold(ZERO, |acc, z| acc + z)
    });
    DensityMatrix::from_raw(kept.len(), out)
}

/// Maximally mixed state of a sector embedded in the full register.
pub fn maximally_mixed(sector: &SymmetrySector) -> DensityMatrix {
    let dim = 1usize << sector.n_qubits();
    let w = c(1.0 / sector.dim() as f64, 0.0);
    let mut data = CMat::zeros(dim, dim);
    for &i in sector.indices() {
        data[(i, i)] = w;
    }
    DensityMatrix {
        n_qubits: sector.n_qubits(),
        data,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    B,
    X,
    Y,
}

/// Hermitian basis element of the operator space over a sector:
/// `B_i = |i><i|`, `X_ij = |i><j| + |j><i|`, `Y_ij = -i|i><j| + i|j><i|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorBasisOperator {
    pub kind: BasisKind,
    pub i: usize,
    pub j: usize,
}

impl SectorBasisOperator {
    pub fn matrix(&self, n_qubits: usize) -> CMat {
        let dim = 1usize << n_qubits;
        let mut m = CMat::zeros(dim, dim);
        match self.kind {
            BasisKind::B => m[(self.i, self.i)] = ONE,
            BasisKind::X => {
                m[(self.i, self.j)] = ONE;
                m[(self.j, self.i)] = ONE;
            }
            BasisKind::Y => {
                m[(self.i, self.j)] = c(0.0, -1.0);
                m[(self.j, self.i)] = c(0.0, 1.0);
            }
        }
        m
    }

    pub fn id(&self) -> String {
        match self.kind {
            BasisKind::B => format!("B_{}", self.i),
            BasisKind::X => format!("X_{}_{}", self.i, self.j),
            BasisKind::Y => format!("Y_{}_{}", self.i, self.j),
        }
    }
}

/// All `d^2` basis operators of a sector: B ascending, then X and Y pairs in
/// lexicographic order.
pub fn sector_basis(sector: &SymmetrySector) -> Vec<SectorBasisOperator> {
    let idx = sector.indices();
    let mut ops: Vec<SectorBasisOperator> = idx
        .iter()
        .map(|&i| SectorBasisOperator {
            kind: BasisKind::B,
            i,
            j: i,
        })
        .collect();
    for kind in [BasisKind::X, BasisKind::Y] {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                ops.push(SectorBasisOperator { kind, i, j });
            }
        }
    }
    ops
}

/// Real coefficients of a Hermitian operator supported on the sector, in the
/// order of [`sector_basis`].
pub fn sector_coefficients(op: &CMat, sector: &SymmetrySector) -> Vec<f64> {
    sector_basis(sector)
        .iter()
        .map(|b| match b.kind {
            BasisKind::B => op[(b.i, b.i)].re,
            BasisKind::X => op[(b.i, b.j)].re,
            BasisKind::Y => -op[(b.i, b.j)].im,
        })
        .collect()
}

pub fn reconstruct_from_coefficients(coeffs: &[f64], sector: &SymmetrySector) -> CMat {
    let dim = 1usize << sector.n_qubits();
    sector_basis(sector)
        .iter()
        .zip(coeffs)
        .fold(CMat::zeros(dim, dim), |acc, (b, &w)| acc + b.matrix(sector.n_qubits()) * c(w, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn sector_enumeration() {
        let s = sector_indices(3, 1).unwrap();
        assert_eq!(s.indices(), &[1, 2, 4]);
        assert_eq!(s.dim(), 3);
        assert_eq!(sector_indices(5, 3).unwrap().dim(), 10);
        assert_eq!(sector_indices(4, 0).unwrap().indices(), &[0]);
        assert!(sector_indices(3, 4).is_err());
        assert!(sector_indices(MAX_QUBITS + 1, 1).is_err());
        assert!(sector_indices(0, 0).is_err());
    }

    #[test]
    fn populations() {
        let mixed = DensityMatrix::new(2, CMat::identity(4, 4) / c(4.0, 0.0)).unwrap();
        let g1 = sector_indices(2, 1).unwrap();
        assert!((sector_population(&mixed, &g1).unwrap() - 0.5).abs() < 1e-15);

        // |110> with qubits 1 and 2 excited
        let rho = DensityMatrix::basis_state(3, 0b110).unwrap();
        assert_eq!(sector_population(&rho, &sector_indices(3, 2).unwrap()).unwrap(), 1.0);
        assert_eq!(sector_population(&rho, &sector_indices(3, 1).unwrap()).unwrap(), 0.0);
        assert!(sector_population(&rho, &g1).is_err());
    }

    #[test]
    fn validation_rejects_bad_states() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(0.5, 0.0);
        assert!(DensityMatrix::new(1, m.clone()).is_err());
        m[(1, 1)] = c(0.5, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(1, m.clone()).is_err());
        m[(1, 0)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(1, m.clone()).is_ok());
        m[(0, 1)] = c(0.9, 0.0);
        m[(1, 0)] = c(0.9, 0.0);
        assert!(DensityMatrix::new(1, m).is_err());
    }

    #[test]
    fn partial_trace_cases() {
        // product state: rho_A on qubit 0, rho_B on qubit 1
        let a = CMat::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.6, 0.0)]);
        let rho = DensityMatrix::new(2, b.kronecker(&a)).unwrap();
        let ra = partial_trace(&rho, &[0]).unwrap();
        assert!(max_abs_diff(ra.matrix(), &a) < 1e-15);
        let rb = partial_trace(&rho, &[1]).unwrap();
        assert!(max_abs_diff(rb.matrix(), &b) < 1e-15);

        let mut psi = CVec::zeros(4);
        psi[0] = ONE;
        psi[3] = ONE;
        let bell = DensityMatrix::pure(2, &psi).unwrap();
        let r = partial_trace(&bell, &[0]).unwrap();
        assert!(max_abs_diff(r.matrix(), &(CMat::identity(2, 2) / c(2.0, 0.0))) < 1e-15);

        let all = partial_trace(&bell, &[1, 0]).unwrap();
        assert_eq!(all.matrix(), bell.matrix());
        assert!(partial_trace(&bell, &[]).is_err());
        assert!(partial_trace(&bell, &[2]).is_err());
    }

    #[test]
    fn mixed_states() {
        let m = maximally_mixed(&sector_indices(2, 1).unwrap());
        let diag: Vec<f64> = m.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 0.5, 0.5, 0.0]);
        let vac = maximally_mixed(&sector_indices(3, 0).unwrap());
        assert_eq!(vac, DensityMatrix::basis_state(3, 0).unwrap());
        for g in 0..=5 {
            let s = sector_indices(5, g).unwrap();
            assert!((maximally_mixed(&s).trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_size_and_order() {
        let s = sector_indices(4, 2).unwrap();
        let ops = sector_basis(&s);
        assert_eq!(ops.len(), 36);
        assert_eq!(ops[0].kind, BasisKind::B);
        assert_eq!(ops[6].id(), "X_3_5");
        assert_eq!(ops[21].id(), "Y_3_5");
        for op in &ops {
            assert!(linalg::hermiticity_error(&op.matrix(4)) == 0.0);
        }
    }
}
