//! One-design ensembles on conserved sectors, exact verification of the
//! one-design conditions, and the exact half-twirl oracle.
//!
//! The number-conserving design draws a uniformly random qubit permutation,
//! compiled to adjacent iSWAPs, followed by an independent fair-coin `Z` on
//! every qubit. Permutations mix populations uniformly within each excitation
//! sector; the random `Z` layer cancels every coherence between distinct
//! basis states. The same ensemble is therefore a one-design on every number
//! sector at once.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channels::{self, accumulate_superop, Channel, Gate, Superoperator};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};
use crate::qstate::{
    self, maximally_mixed, number_sectors, sector_basis, BasisKind, DensityMatrix, SymmetrySector,
};

/// Ensembles larger than this are never enumerated.
pub const ENUMERATION_CAP: u128 = 1_000_000;

const EXACT_THRESHOLD: f64 = 1e-10;

/// One ensemble member as an ideal gate sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignElement {
    pub gates: Vec<Gate>,
}

impl DesignElement {
    pub fn unitary(&self, n: usize) -> CMat {
        channels::gates_unitary(&self.gates, n)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// Random permutation, optionally followed by the random `Z` layer.
    Number { phases: bool },
    Explicit(Vec<DesignElement>),
}

/// A finite, samplable set of unitaries claimed to be a one-design on
/// `sector`. `partition` lists the conserved sectors every member must be
/// block-diagonal across.
#[derive(Debug, Clone)]
pub struct DesignEnsemble {
    name: String,
    n_qubits: usize,
    sector: SymmetrySector,
    partition: Vec<SymmetrySector>,
    kind: Kind,
}

/// Permutation plus random-phase design for excitation-number conservation.
pub fn number_design(n: usize, gamma: usize) -> Result<DesignEnsemble> {
    Ok(DesignEnsemble {
        name: "number".into(),
        n_qubits: n,
        sector: qstate::sector_indices(n, gamma)?,
        partition: number_sectors(n)?,
        kind: Kind::Number { phases: true },
    })
}

/// Qubit permutations without the phase layer; mixes populations but leaves
/// coherences intact.
pub fn permutation_design(n: usize, gamma: usize) -> Result<DesignEnsemble> {
    Ok(DesignEnsemble {
        name: "permutations".into(),
        n_qubits: n,
        sector: qstate::sector_indices(n, gamma)?,
        partition: number_sectors(n)?,
        kind: Kind::Number { phases: false },
    })
}

pub fn identity_design(sector: SymmetrySector, partition: Vec<SymmetrySector>) -> DesignEnsemble {
    DesignEnsemble {
        name: "identity".into(),
        n_qubits: sector.n_qubits(),
        sector,
        partition,
        kind: Kind::Explicit(vec![DesignElement { gates: Vec::new() }]),
    }
}

impl DesignEnsemble {
    /// Uniformly weighted explicit ensemble.
    pub fn explicit(
        name: impl Into<String>,
        sector: SymmetrySector,
        partition: Vec<SymmetrySector>,
        elements: Vec<DesignElement>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return arg("ensemble must contain at least one element");
        }
        Ok(Self {
            name: name.into(),
            n_qubits: sector.n_qubits(),
            sector,
            partition,
            kind: Kind::Explicit(elements),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn sector(&self) -> &SymmetrySector {
        &self.sector
    }

    pub fn partition(&self) -> &[SymmetrySector] {
        &self.partition
    }

    /// Same ensemble targeting another sector of its partition.
    pub fn for_sector(&self, sector: SymmetrySector) -> Self {
        Self {
            sector,
            ..self.clone()
        }
    }

    /// Number of (uniformly weighted) members.
    pub fn size(&self) -> u128 {
        match &self.kind {
            Kind::Number { phases } => {
                let n = self.n_qubits as u128;
                let fact: u128 = (1..=n).product();
                if *phases {
                    fact << n
                } else {
                    fact
                }
            }
            Kind::Explicit(els) => els.len() as u128,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DesignElement {
        match &self.kind {
            Kind::Number { phases } => {
                let mut perm: Vec<usize> = (0..self.n_qubits).collect();
                perm.shuffle(rng);
                let mask = if *phases {
                    (0..self.n_qubits).fold(0usize, |m, q| if rng.random::<bool>() { m | 1 << q } else { m })
                } else {
                    0
                };
                number_element(&perm, mask)
            }
            Kind::Explicit(els) => els[rng.random_range(0..els.len())].clone(),
        }
    }

    /// Every member with its probability weight.
    pub fn enumerate(&self) -> Result<Vec<(DesignElement, f64)>> {
        let size = self.size();
        if size > ENUMERATION_CAP {
            return Err(Error::Capability(format!(
                "ensemble '{}' has {size} elements, above the enumeration cap {ENUMERATION_CAP}",
                self.name
            )));
        }
        let w = 1.0 / size as f64;
        Ok(match &self.kind {
            Kind::Number { phases } => {
                let masks = if *phases { 1usize << self.n_qubits } else { 1 };
                (0..self.n_qubits)
                    .permutations(self.n_qubits)
                    .flat_map(|perm| (0..masks).map(move |mask| (number_element(&perm, mask), w)))
                    .collect()
            }
            Kind::Explicit(els) => els.iter().cloned().map(|e| (e, w)).collect(),
        })
    }
}

fn number_element(perm: &[usize], z_mask: usize) -> DesignElement {
    let mut gates: Vec<Gate> = channels::permutation_to_iswaps(perm)
        .expect("sampled permutation is valid")
        .into_iter()
        .map(Gate::Iswap)
        .collect();
    gates.extend((0..perm.len()).filter(|q| z_mask >> q & 1 == 1).map(Gate::Z));
    DesignElement { gates }
}

/// Largest matrix entry connecting two different sectors of `partition`.
/// Indices outside every listed sector form one extra block.
pub fn block_violation(u: &CMat, partition: &[SymmetrySector]) -> f64 {
    let d = u.nrows();
    let mut label = vec![usize::MAX; d];
    for (k, s) in partition.iter().enumerate() {
        for &i in s.indices() {
            label[i] = k;
        }
    }
    let mut worst = 0.0f64;
    for col in 0..d {
        for row in 0..d {
            if label[row] != label[col] {
                worst = worst.max(u[(row, col)].norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Each sector population projector is averaged to the sector's mixed state.
    Populations,
    /// Symmetric coherences `X_ij` average to zero.
    RealCoherences,
    /// Antisymmetric coherences `Y_ij` average to zero.
    ImaginaryCoherences,
    /// Every member is block-diagonal across the conserved sectors.
    BlockDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMode {
    Exact,
    Statistical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub operator: String,
    pub violation: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ensemble: String,
    pub mode: VerificationMode,
    pub n_qubits: usize,
    pub sector_label: i64,
    pub sector_dim: usize,
    /// Members enumerated (exact) or drawn (statistical).
    pub elements: u64,
    pub passed: bool,
    pub checks: Vec<ConditionCheck>,
}

impl VerificationReport {
    pub fn max_violation(&self, condition: Condition) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.condition == condition)
            .fold(0.0, |m, c| m.max(c.violation))
    }

    pub fn failed_conditions(&self) -> Vec<Condition> {
        let mut out: Vec<Condition> = self.checks.iter().filter(|c| !c.pass).map(|c| c.condition).collect();
        out.dedup();
        out.sort_by_key(|c| *c as u8);
        out.dedup();
        out
    }
}

fn condition_of(kind: BasisKind) -> Condition {
    match kind {
        BasisKind::B => Condition::Populations,
        BasisKind::X => Condition::RealCoherences,
        BasisKind::Y => Condition::ImaginaryCoherences,
    }
}

/// Target of the averaged basis operator: the sector mixed state for `B_i`,
/// zero for coherences.
fn averaged_target(kind: BasisKind, sector: &SymmetrySector) -> CMat {
    match kind {
        BasisKind::B => maximally_mixed(sector).into_matrix(),
        _ => {
            let d = 1usize << sector.n_qubits();
            CMat::zeros(d, d)
        }
    }
}

/// Exact check of the one-design conditions by full enumeration.
pub fn verify_one_design(ensemble: &DesignEnsemble) -> Result<VerificationReport> {
    let n = ensemble.n_qubits();
    let members = ensemble.enumerate()?;
    let unitaries: Vec<(CMat, f64)> = members.iter().map(|(e, w)| (e.unitary(n), *w)).collect();
    let sector = ensemble.sector();

    let block = unitaries
        .iter()
        .map(|(u, _)| block_violation(u, ensemble.partition()))
        .fold(0.0, f64::max);
    let mut checks = vec![ConditionCheck {
        condition: Condition::BlockDiagonal,
        operator: "all".into(),
        violation: block,
        threshold: EXACT_THRESHOLD,
        pass: block <= EXACT_THRESHOLD,
        stderr: None,
        z_score: None,
    }];

    for op in sector_basis(sector) {
        let m = op.matrix(n);
        let avg = linalg::par_sum(unitaries.len(), |k| {
            let (u, w) = &unitaries[k];
            (u * &m * u.adjoint()) * c(*w, 0.0)
        })
        .expect("non-empty ensemble");
        let violation = linalg::max_abs_diff(&avg, &averaged_target(op.kind, sector));
        checks.push(ConditionCheck {
            condition: condition_of(op.kind),
            operator: op.id(),
            violation,
            threshold: EXACT_THRESHOLD,
            pass: violation <= EXACT_THRESHOLD,
            stderr: None,
            z_score: None,
        });
    }
    Ok(VerificationReport {
        ensemble: ensemble.name().into(),
        mode: VerificationMode::Exact,
        n_qubits: n,
        sector_label: sector.label(),
        sector_dim: sector.dim(),
        elements: unitaries.len() as u64,
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Monte-Carlo check: each averaged entry is compared with its target by a
/// z-test at family-wise level `alpha` (Bonferroni over all tested entries).
pub fn verify_one_design_sampled<R: Rng + ?Sized>(
    ensemble: &DesignEnsemble,
    samples: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<VerificationReport> {
    if samples < 2 {
        return arg("statistical verification needs at least two samples");
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return arg("significance level must lie in (0, 1)");
    }
    let n = ensemble.n_qubits();
    let d = 1usize << n;
    let sector = ensemble.sector();
    let basis = sector_basis(sector);
    let mats: Vec<CMat> = basis.iter().map(|b| b.matrix(n)).collect();
    let mut sum: Vec<CMat> = vec![CMat::zeros(d, d); basis.len()];
    // running sums of squared real and imaginary parts
    let mut sq: Vec<CMat> = vec![CMat::zeros(d, d); basis.len()];
    let mut block = 0.0f64;
    for _ in 0..samples {
        let u = ensemble.sample(rng).unitary(n);
        block = block.max(block_violation(&u, ensemble.partition()));
        for (k, m) in mats.iter().enumerate() {
            let img = &u * m * u.adjoint();
            sq[k] += img.map(|z| c(z.re * z.re, z.im * z.im));
            sum[k] += img;
        }
    }
    let tests = (basis.len() * d * d * 2) as f64;
    let z_crit = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / (2.0 * tests));
    let ns = samples as f64;

    let mut checks = vec![ConditionCheck {
        condition: Condition::BlockDiagonal,
        operator: "all".into(),
        violation: block,
        threshold: EXACT_THRESHOLD,
        pass: block <= EXACT_THRESHOLD,
        stderr: None,
        z_score: None,
    }];
    for (k, b) in basis.iter().enumerate() {
        let target = averaged_target(b.kind, sector);
        let mut violation = 0.0f64;
        let mut worst_z = 0.0f64;
        let mut worst_se = 0.0f64;
        for idx in 0..d * d {
            let mean = sum[k][idx] / c(ns, 0.0);
            let part = |m: f64, s2: f64, t: f64| {
                let var = ((s2 / ns - m * m) * ns / (ns - 1.0)).max(0.0);
                let se = (var / ns).sqrt();
                let dev = (m - t).abs();
                let z = if dev <= 1e-12 {
                    0.0
                } else if se == 0.0 {
                    f64::INFINITY
                } else {
                    dev / se
                };
                (dev, se, z)
            };
            for (dev, se, z) in [
                part(mean.re, sq[k][idx].re, target[idx].re),
                part(mean.im, sq[k][idx].im, target[idx].im),
            ] {
                violation = violation.max(dev);
                if z > worst_z {
                    worst_z = z;
                    worst_se = se;
                }
            }
        }
        checks.push(ConditionCheck {
            condition: condition_of(b.kind),
            operator: b.id(),
            violation,
            threshold: z_crit,
            pass: worst_z <= z_crit,
            stderr: Some(worst_se),
            z_score: Some(worst_z),
        });
    }
    Ok(VerificationReport {
        ensemble: ensemble.name().into(),
        mode: VerificationMode::Statistical,
        n_qubits: n,
        sector_label: sector.label(),
        sector_dim: sector.dim(),
        elements: samples as u64,
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Superoperator of the ideal ensemble average `(1/#D) sum_D D`.
pub fn design_average(ensemble: &DesignEnsemble) -> Result<Superoperator> {
    let n = ensemble.n_qubits();
    let d = 1usize << n;
    let members = ensemble.enumerate()?;
    let s = linalg::par_sum(members.len(), |k| {
        let (e, w) = &members[k];
        let mut s = CMat::zeros(d * d, d * d);
        accumulate_superop(&mut s, &e.unitary(n), c(*w, 0.0));
        s
    })
    .expect("non-empty ensemble");
    Superoperator::from_matrix(n, s)
}

/// Averaged one-round map whose powers generate the survival curve.
#[derive(Debug, Clone)]
pub struct HalfTwirl {
    superop: Superoperator,
}

/// One term `alpha * lambda^y` of the survival curve.
#[derive(Debug, Clone, Copy)]
pub struct SpectralTerm {
    pub lambda: C64,
    pub alpha: C64,
}

impl HalfTwirl {
    pub fn from_superoperator(superop: Superoperator) -> Self {
        Self { superop }
    }

    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.superop.eigenvalues()
    }

    /// Decomposes `Tr_sector[ht^y(rho0)]` into `sum alpha_i lambda_i^y` over
    /// the eigenvalues with `|lambda| > zero_tol`, using left and right
    /// eigenvectors of the superoperator.
    pub fn spectral_terms(
        &self,
        rho0: &DensityMatrix,
        sector: &SymmetrySector,
        zero_tol: f64,
    ) -> Result<Vec<SpectralTerm>> {
        let m = self.superop.matrix();
        let d = rho0.dim();
        let mut lams: Vec<C64> = self.eigenvalues()?.into_iter().filter(|z| z.norm() > zero_tol).collect();
        lams.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
        for w in lams.windows(2) {
            if (w[0] - w[1]).norm() < 1e-8 {
                return Err(Error::Capability(format!(
                    "degenerate eigenvalue {} in the retained spectrum",
                    w[0]
                )));
            }
        }
        let mut functional = CVec::zeros(d * d);
        for &i in sector.indices() {
            functional[i + i * d] = c(1.0, 0.0);
        }
        let v = CVec::from_column_slice(rho0.matrix().as_slice());
        let adj = m.adjoint();
        lams.into_iter()
            .map(|lambda| {
                let fail = || Error::Validation(format!("eigenvector for {lambda} not found"));
                let r = linalg::eigenvector(m, lambda).ok_or_else(fail)?;
                let l = linalg::eigenvector(&adj, lambda.conj()).ok_or_else(fail)?;
                let norm = l.dotc(&r);
                let alpha = functional.dot(&r) * l.dotc(&v) / norm;
                Ok(SpectralTerm { lambda, alpha })
            })
            .collect()
    }
}

/// `(1/#D) sum_D noise o D` for gate-independent noise.
pub fn half_twirl(noise: &Channel, ensemble: &DesignEnsemble) -> Result<HalfTwirl> {
    if noise.n_qubits() != ensemble.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.n_qubits(),
            got: noise.n_qubits(),
        });
    }
    let avg = design_average(ensemble)?;
    Ok(HalfTwirl {
        superop: noise.to_superoperator().after(&avg),
    })
}

/// Sector population after `y` applications of the half twirl.
pub fn exact_gamma(ht: &HalfTwirl, y: usize, rho0: &DensityMatrix, sector: &SymmetrySector) -> Result<f64> {
    if rho0.n_qubits() != ht.superop.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: ht.superop.n_qubits(),
            got: rho0.n_qubits(),
        });
    }
    let mut m = rho0.matrix().clone();
    for _ in 0..y {
        m = ht.superop.apply_matrix(&m);
    }
    qstate::sector_population(&DensityMatrix::from_raw(rho0.n_qubits(), m)?, sector)
}

/// Population flow between sectors: `T[to][from] = Tr_to[map(mixed_from)]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub labels: Vec<i64>,
    pub matrix: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.matrix[to][from]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.labels.len())
            .map(|from| self.matrix.iter().map(|row| row[from]).sum())
            .collect()
    }
}

pub fn transition_matrix(map: &Superoperator, partition: &[SymmetrySector]) -> Result<TransitionMatrix> {
    let k = partition.len();
    let mut matrix = vec![vec![0.0; k]; k];
    for (from, s) in partition.iter().enumerate() {
        let out = map.apply_matrix(maximally_mixed(s).matrix());
        for (to, t) in partition.iter().enumerate() {
            matrix[to][from] = qstate::raw_population(&out, t);
        }
    }
    Ok(TransitionMatrix {
        labels: partition.iter().map(|s| s.label()).collect(),
        matrix,
    })
}

/// `(1/#D^2) sum_{C,D} C o noise o D` as a superoperator.
pub fn double_average(noise: &Channel, ensemble: &DesignEnsemble) -> Result<Superoperator> {
    let avg = design_average(ensemble)?;
    Ok(avg.after(&noise.to_superoperator().after(&avg)))
}

/// Sector transition rates of the doubly design-averaged noise.
pub fn double_average_transition_matrix(noise: &Channel, ensemble: &DesignEnsemble) -> Result<TransitionMatrix> {
    let map = double_average(noise, ensemble)?;
    transition_matrix(&map, ensemble.partition())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::dilated_noise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ensemble_sizes() {
        assert_eq!(number_design(3, 1).unwrap().size(), 48);
        assert_eq!(number_design(4, 2).unwrap().size(), 384);
        assert_eq!(permutation_design(3, 1).unwrap().size(), 6);
        assert_eq!(number_design(3, 1).unwrap().enumerate().unwrap().len(), 48);
        let weights: f64 = number_design(3, 2).unwrap().enumerate().unwrap().iter().map(|(_, w)| w).sum();
        assert!((weights - 1.0).abs() < 1e-12);
        assert!(matches!(number_design(10, 5).unwrap().enumerate(), Err(Error::Capability(_))));
    }

    #[test]
    fn enumerated_average_of_basis_state_is_mixed() {
        let ens = number_design(3, 1).unwrap();
        let rho = DensityMatrix::basis_state(3, 0b001).unwrap();
        let avg = linalg::tree_sum(
            ens.enumerate()
                .unwrap()
                .iter()
                .map(|(e, w)| {
                    let u = e.unitary(3);
                    (&u * rho.matrix() * u.adjoint()) * c(*w, 0.0)
                })
                .collect(),
        )
        .unwrap();
        let target = maximally_mixed(ens.sector());
        assert!(linalg::max_abs_diff(&avg, target.matrix()) < 1e-12);
    }

    #[test]
    fn exact_verification_small_cases() {
        let rep = verify_one_design(&number_design(3, 1).unwrap()).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.checks.len(), 1 + 9);
        assert!(rep.max_violation(Condition::RealCoherences) < 1e-12);
        assert!(rep.max_violation(Condition::ImaginaryCoherences) < 1e-12);

        let perms = verify_one_design(&permutation_design(3, 1).unwrap()).unwrap();
        assert!(!perms.passed);
        assert!(perms.max_violation(Condition::Populations) < 1e-12);
        assert!(perms.failed_conditions().contains(&Condition::RealCoherences));

        let s = qstate::sector_indices(3, 1).unwrap();
        let id = verify_one_design(&identity_design(s, number_sectors(3).unwrap())).unwrap();
        assert!(!id.passed);
        assert!((id.max_violation(Condition::Populations) - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn statistical_mode_accepts_design_and_rejects_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = verify_one_design_sampled(&number_design(3, 1).unwrap(), 4000, 1e-3, &mut rng).unwrap();
        assert!(rep.passed, "{:?}", rep.failed_conditions());
        let s = qstate::sector_indices(3, 1).unwrap();
        let id = identity_design(s, number_sectors(3).unwrap());
        let rep = verify_one_design_sampled(&id, 100, 1e-3, &mut rng).unwrap();
        assert!(!rep.passed);
    }

    #[test]
    fn identity_noise_half_twirl_never_decays() {
        let ens = number_design(3, 1).unwrap();
        let ht = half_twirl(&Channel::identity(3), &ens).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 0b001).unwrap();
        for y in 0..6 {
            assert!((exact_gamma(&ht, y, &rho0, ens.sector()).unwrap() - 1.0).abs() < 1e-12);
        }
        let t = double_average_transition_matrix(&Channel::identity(3), &ens).unwrap();
        for (a, row) in t.matrix.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_gamma_one_equals_enumerated_single_step_mean() {
        let ens = number_design(3, 1).unwrap();
        let noise = dilated_noise(3, (0, 1), 0.1, 7).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 0b001).unwrap();
        let ht = half_twirl(&noise, &ens).unwrap();
        let oracle = exact_gamma(&ht, 1, &rho0, ens.sector()).unwrap();
        let members = ens.enumerate().unwrap();
        let mean: f64 = members
            .iter()
            .map(|(e, w)| {
                let u = e.unitary(3);
                let mid = DensityMatrix::from_raw(3, &u * rho0.matrix() * u.adjoint()).unwrap();
                w * qstate::sector_population(&noise.apply(&mid).unwrap(), ens.sector()).unwrap()
            })
            .sum();
        assert!((oracle - mean).abs() < 1e-12);
        assert!(oracle < 1.0);
    }
}
