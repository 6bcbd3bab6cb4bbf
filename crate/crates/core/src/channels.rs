//! Gates and noise as CPTP maps.
//!
//! A [`Channel`] stores its Kraus operators on the qubits it actually touches
//! and applies them locally; [`Channel::kraus_full`] gives the `2^n x 2^n`
//! operators when a dense form is needed.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, CMat, C64, I, ONE, ZERO};
use crate::qstate::{DensityMatrix, MAX_QUBITS};

const COMPLETENESS_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    n_qubits: usize,
    support: Vec<usize>,
    kraus: Vec<CMat>,
}

impl Channel {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            support: Vec::new(),
            kraus: vec![linalg::identity(1)],
        }
    }

    /// Channel from Kraus operators acting on `support` (local dimension
    /// `2^support.len()`), checked for completeness.
    pub fn from_kraus(n_qubits: usize, support: Vec<usize>, kraus: Vec<CMat>) -> Result<Self> {
        check_support(n_qubits, &support)?;
        if kraus.is_empty() {
            return arg("channel needs at least one Kraus operator");
        }
        let dl = 1usize << support.len();
        if let Some(k) = kraus.iter().find(|k| k.nrows() != dl || k.ncols() != dl) {
            return Err(Error::DimensionMismatch {
                expected: dl,
                got: k.nrows(),
            });
        }
        let ch = Self {
            n_qubits,
            support,
            kraus,
        };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::Validation(format!(
                "Kraus operators are not trace preserving (deviation {err:e})"
            )));
        }
        Ok(ch)
    }

    /// Single-Kraus channel `rho -> U rho U^dagger` for a local unitary.
    pub fn unitary(n_qubits: usize, support: Vec<usize>, u: CMat) -> Result<Self> {
        check_support(n_qubits, &support)?;
        if u.nrows() != 1 << support.len() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << support.len(),
                got: u.nrows(),
            });
        }
        let err = linalg::unitarity_error(&u);
        if err > UNITARY_TOL {
            return Err(Error::Validation(format!("matrix is not unitary (deviation {err:e})")));
        }
        Ok(Self {
            n_qubits,
            support,
            kraus: vec![u],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn kraus_local(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn kraus_full(&self) -> Vec<CMat> {
        self.kraus
            .iter()
            .map(|k| linalg::embed(k, &self.support, self.n_qubits))
            .collect()
    }

    pub fn completeness_error(&self) -> f64 {
        let dl = 1usize << self.support.len();
        let sum = self
            .kraus
            .iter()
            .fold(CMat::zeros(dl, dl), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs_diff(&sum, &linalg::identity(dl))
    }

    /// Same Kraus operators moved onto another qubit set of equal size.
    pub fn relocated(&self, support: Vec<usize>) -> Result<Self> {
        if support.len() != self.support.len() {
            return arg("relocation must keep the support size");
        }
        check_support(self.n_qubits, &support)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            support,
            kraus: self.kraus.clone(),
        })
    }

    /// In-place application to an arbitrary operator (used for coherences and
    /// superoperator columns, not only states).
    pub fn apply_in_place(&self, m: &mut CMat) {
        if self.kraus.len() == 1 {
            linalg::apply_left(&self.kraus[0], &self.support, m);
            linalg::apply_right_adjoint(&self.kraus[0], &self.support, m);
            return;
        }
        let mut acc = CMat::zeros(m.nrows(), m.ncols());
        for k in &self.kraus {
            let mut t = m.clone();
            linalg::apply_left(k, &self.support, &mut t);
            linalg::apply_right_adjoint(k, &self.support, &mut t);
            acc += t;
        }
        *m = acc;
    }

    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let mut out = m.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: rho.n_qubits(),
            });
        }
        DensityMatrix::from_raw(self.n_qubits, self.apply_matrix(rho.matrix()))
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Channel) -> Result<Channel> {
        if self.n_qubits != first.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: first.n_qubits,
            });
        }
        let mut union: Vec<usize> = self.support.iter().chain(&first.support).copied().collect();
        union.sort_unstable();
        union.dedup();
        let lift = |ch: &Channel| -> Vec<CMat> {
            let pos: Vec<usize> = ch
                .support
                .iter()
                .map(|q| union.iter().position(|u| u == q).unwrap())
                .collect();
            ch.kraus
                .iter()
                .map(|k| linalg::embed(k, &pos, union.len()))
                .collect()
        };
        let outer = lift(self);
        let inner = lift(first);
        let mut kraus = Vec::with_capacity(outer.len() * inner.len());
        for a in &outer {
            for b in &inner {
                let p = a * b;
                if linalg::max_abs(&p) > 0.0 {
                    kraus.push(p);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(CMat::zeros(1 << union.len(), 1 << union.len()));
        }
        Ok(Channel {
            n_qubits: self.n_qubits,
            support: union,
            kraus,
        })
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d = 1usize << self.n_qubits;
        let mut s = CMat::zeros(d * d, d * d);
        for k in self.kraus_full() {
            accumulate_superop(&mut s, &k, ONE);
        }
        Superoperator {
            n_qubits: self.n_qubits,
            matrix: s,
        }
    }
}

fn check_support(n_qubits: usize, support: &[usize]) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return arg(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != support.len() || s.iter().any(|&q| q >= n_qubits) {
        return arg(format!("invalid support {support:?} on {n_qubits} qubits"));
    }
    Ok(())
}

/// `S += w * conj(K) (x) K`, i.e. `vec(K X K^dagger)` in column-stacking
/// convention, iterating only over nonzero entries of `K`.
pub(crate) fn accumulate_superop(s: &mut CMat, k: &CMat, w: C64) {
    let d = k.nrows();
    let nz: Vec<(usize, usize, C64)> = (0..d)
        .flat_map(|col| (0..d).map(move |row| (row, col)))
        .filter_map(|(r, cl)| {
            let z = k[(r, cl)];
            (z != ZERO).then_some((r, cl, z))
        })
        .collect();
    for &(a, cc, kac) in &nz {
        let kac = kac * w;
        for &(b, e, kbe) in &nz {
            s[(a + b * d, cc + e * d)] += kac * kbe.conj();
        }
    }
}

/// Full unitary channel; `U` must be `2^n x 2^n`.
pub fn unitary_channel(u: &CMat) -> Result<Channel> {
    let n = u.nrows().trailing_zeros() as usize;
    if !u.is_square() || u.nrows() != 1 << n {
        return arg("unitary must be square with power-of-two dimension");
    }
    Channel::unitary(n, (0..n).collect(), u.clone())
}

pub fn compose(a: &Channel, b: &Channel) -> Result<Channel> {
    a.after(b)
}

pub fn apply(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

pub fn to_superoperator(ch: &Channel) -> Superoperator {
    ch.to_superoperator()
}

/// Matrix acting on column-stacked density matrices,
/// `vec(rho)[i + j d] = rho[i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n_qubits: usize,
    matrix: CMat,
}

impl Superoperator {
    pub fn identity(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: linalg::identity(d * d),
        }
    }

    pub fn from_matrix(n_qubits: usize, matrix: CMat) -> Result<Self> {
        let d2 = 1usize << (2 * n_qubits);
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                got: matrix.nrows(),
            });
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let d = m.nrows();
        let v = linalg::CVec::from_column_slice(m.as_slice());
        let out = &self.matrix * v;
        CMat::from_column_slice(d, d, out.as_slice())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_raw(self.n_qubits, self.apply_matrix(rho.matrix()))
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Superoperator) -> Superoperator {
        Superoperator {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &first.matrix,
        }
    }

    /// Deviation of `Tr(S(X))` from `Tr(X)` over the matrix-unit basis.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = 1usize << self.n_qubits;
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let tr: C64 = (0..d).map(|i| self.matrix[(i + i * d, col)]).sum();
            let expected = if col % d == col / d { ONE } else { ZERO };
            worst = worst.max((tr - expected).norm());
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        linalg::eigenvalues(&self.matrix)
            .ok_or_else(|| Error::Validation("Schur decomposition did not converge".into()))
    }
}

/// Two-qubit iSWAP: `|01> -> i|10>`, `|10> -> i|01>`, `|00>` and `|11>` fixed.
pub fn iswap_matrix() -> CMat {
    CMat::from_row_slice(
        4,
        4,
        &[
            ONE, ZERO, ZERO, ZERO, //
            ZERO, ZERO, I, ZERO, //
            ZERO, I, ZERO, ZERO, //
            ZERO, ZERO, ZERO, ONE,
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Iswap {
    pub a: usize,
    pub b: usize,
}

/// Ideal (noiseless) gate.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Iswap(Iswap),
    Z(usize),
    Unitary { support: Vec<usize>, matrix: Arc<CMat> },
}

impl Gate {
    pub fn unitary(support: Vec<usize>, matrix: CMat) -> Self {
        Gate::Unitary {
            support,
            matrix: Arc::new(matrix),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            Gate::Iswap(g) => vec![g.a, g.b],
            Gate::Z(q) => vec![*q],
            Gate::Unitary { support, .. } => support.clone(),
        }
    }

    pub fn local_matrix(&self) -> CMat {
        match self {
            Gate::Iswap(_) => iswap_matrix(),
            Gate::Z(_) => linalg::pauli::z(),
            Gate::Unitary { matrix, .. } => (**matrix).clone(),
        }
    }

    pub fn full_matrix(&self, n: usize) -> CMat {
        linalg::embed(&self.local_matrix(), &self.support(), n)
    }

    /// Conjugates `m` by the gate in place.
    pub fn apply_in_place(&self, m: &mut CMat) {
        let support = self.support();
        let u = self.local_matrix();
        match linalg::monomial_form(&u) {
            Some((perm, phase)) if m.is_square() => linalg::conjugate_monomial(&perm, &phase, &support, m),
            _ => {
                linalg::apply_left(&u, &support, m);
                linalg::apply_right_adjoint(&u, &support, m);
            }
        }
    }

    pub fn as_channel(&self, n: usize) -> Result<Channel> {
        Channel::unitary(n, self.support(), self.local_matrix())
    }
}

/// One step of a simulated circuit.
#[derive(Debug, Clone)]
pub enum Instruction {
    Gate(Gate),
    Channel(Arc<Channel>),
}

impl Instruction {
    pub fn apply_in_place(&self, m: &mut CMat) {
        match self {
            Instruction::Gate(g) => g.apply_in_place(m),
            Instruction::Channel(ch) => ch.apply_in_place(m),
        }
    }
}

pub fn run_instructions(instructions: &[Instruction], m: &mut CMat) {
    for ins in instructions {
        ins.apply_in_place(m);
    }
}

/// Product of the ideal gates, in order of application.
pub fn gates_unitary(gates: &[Gate], n: usize) -> CMat {
    let mut u = linalg::identity(1 << n);
    for g in gates {
        linalg::apply_left(&g.local_matrix(), &g.support(), &mut u);
    }
    u
}

/// Decomposes a qubit permutation into adjacent iSWAPs (bubble-sort network).
///
/// `perm[q]` is the site that the excitation on qubit `q` moves to. The
/// composed iSWAPs realize this on excitation patterns up to a
/// basis-state-dependent phase.
pub fn permutation_to_iswaps(perm: &[usize]) -> Result<Vec<Iswap>> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return arg(format!("{perm:?} is not a permutation"));
        }
        seen[p] = true;
    }
    // arrangement[site] = original qubit whose content currently sits at `site`
    let mut arrangement: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if perm[arrangement[k]] > perm[arrangement[k + 1]] {
                arrangement.swap(k, k + 1);
                out.push(Iswap { a: k, b: k + 1 });
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(out)
}

/// Seeded random Hermitian matrix with standard-normal real and imaginary
/// parts, normalized to unit spectral norm.
pub fn random_hermitian(dim: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMat::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            g[(r, col)] = c(re, im);
        }
    }
    let h = (&g + g.adjoint()).scale(0.5);
    let norm = linalg::hermitian_spectral_norm(&h);
    h / c(norm, 0.0)
}

/// Local Kraus operators of the dilated pair noise: `exp(-i eps H)` on two
/// system qubits plus two ancillas prepared in `|00>`, ancillas traced out.
pub fn dilated_pair_kraus(epsilon: f64, seed: u64) -> Result<Vec<CMat>> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return arg(format!("noise strength must be a finite non-negative number, got {epsilon}"));
    }
    if epsilon == 0.0 {
        return Ok(vec![linalg::identity(4)]);
    }
    let h = random_hermitian(16, seed);
    let u = linalg::expm_hermitian(&h, epsilon);
    // local bits 0,1 = system pair, bits 2,3 = ancillas
    Ok((0..4)
        .map(|m| CMat::from_fn(4, 4, |r, col| u[(r + 4 * m, col)]))
        .collect())
}

/// Near-identity noise on a qubit pair obtained from a seeded unitary
/// dilation; deterministic for a fixed seed.
pub fn dilated_noise(n_sys: usize, support: (usize, usize), epsilon: f64, seed: u64) -> Result<Channel> {
    if support.0 == support.1 {
        return arg("noise support must be two distinct qubits");
    }
    let kraus = dilated_pair_kraus(epsilon, seed)?;
    Channel::from_kraus(n_sys, vec![support.0, support.1], kraus)
}

/// All `4^n` Pauli strings as full matrices, index digits base 4 with qubit 0
/// lowest (0 = I, 1 = X, 2 = Y, 3 = Z).
fn pauli_basis(n: usize) -> Vec<CMat> {
    let singles = [
        linalg::pauli::id(),
        linalg::pauli::x(),
        linalg::pauli::y(),
        linalg::pauli::z(),
    ];
    (0..1usize << (2 * n))
        .map(|code| {
            let mut m = linalg::identity(1 << n);
            for q in 0..n {
                let p = code >> (2 * q) & 3;
                if p != 0 {
                    linalg::apply_left(&singles[p], &[q], &mut m);
                }
            }
            m
        })
        .collect()
}

/// `rho -> (1 - p) rho + p I / d` on the whole register.
pub fn depolarizing(n: usize, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return arg(format!("depolarizing probability {p} outside [0, 1]"));
    }
    let n_ops = 1usize << (2 * n);
    let tail = p / n_ops as f64;
    let kraus = pauli_basis(n)
        .into_iter()
        .enumerate()
        .filter_map(|(code, m)| {
            let w = if code == 0 { 1.0 - p + tail } else { tail };
            (w > 0.0).then(|| m * c(w.sqrt(), 0.0))
        })
        .collect();
    Channel::from_kraus(n, (0..n).collect(), kraus)
}

/// Independent bit flips with probability `p` on every qubit.
pub fn bit_flip(n: usize, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return arg(format!("flip probability {p} outside [0, 1]"));
    }
    let mut ch = Channel::identity(n);
    for q in 0..n {
        let local = Channel::from_kraus(
            n,
            vec![q],
            vec![linalg::identity(2) * c((1.0 - p).sqrt(), 0.0), linalg::pauli::x() * c(p.sqrt(), 0.0)],
        )?;
        ch = local.after(&ch)?;
    }
    Ok(ch)
}

/// Coherent `exp(-i theta X / 2)` on every qubit.
pub fn x_rotation(n: usize, theta: f64) -> Result<Channel> {
    let single = linalg::expm_hermitian(&linalg::pauli::x(), theta / 2.0);
    let mut u = linalg::identity(1 << n);
    for q in 0..n {
        linalg::apply_left(&single, &[q], &mut u);
    }
    Channel::unitary(n, (0..n).collect(), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qstate::DensityMatrix;

    fn random_state(n: usize, seed: u64) -> DensityMatrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << n;
        let g = CMat::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m);
        DensityMatrix::new(n, m / tr).unwrap()
    }

    #[test]
    fn unitary_channel_examples() {
        let id = unitary_channel(&linalg::identity(4)).unwrap();
        let rho = random_state(2, 1);
        assert!(max_abs_diff(id.apply(&rho).unwrap().matrix(), rho.matrix()) < 1e-15);

        let x = unitary_channel(&linalg::pauli::x()).unwrap();
        let out = x.apply(&DensityMatrix::basis_state(1, 0).unwrap()).unwrap();
        assert_eq!(out, DensityMatrix::basis_state(1, 1).unwrap());

        let mut bad = linalg::identity(2);
        bad[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(unitary_channel(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn iswap_action() {
        let u = Gate::Iswap(Iswap { a: 0, b: 1 }).full_matrix(2);
        // |01> in left-to-right qubit order is index 0b10 (qubit 1 excited)
        assert_eq!(u[(0b01, 0b10)], I);
        assert_eq!(u[(0b10, 0b01)], I);
        assert_eq!(u[(0, 0)], ONE);
        assert_eq!(u[(3, 3)], ONE);
    }

    #[test]
    fn permutation_networks() {
        assert!(permutation_to_iswaps(&[0, 1, 2]).unwrap().is_empty());
        assert_eq!(permutation_to_iswaps(&[1, 0]).unwrap(), vec![Iswap { a: 0, b: 1 }]);
        assert!(permutation_to_iswaps(&[0, 0]).is_err());
        assert!(permutation_to_iswaps(&[0, 2]).is_err());

        // excitation on qubit 0 -> 1 -> 2 -> 0
        let gates: Vec<Gate> = permutation_to_iswaps(&[1, 2, 0])
            .unwrap()
            .into_iter()
            .map(Gate::Iswap)
            .collect();
        let u = gates_unitary(&gates, 3);
        for (from, to) in [(0b001, 0b010), (0b010, 0b100), (0b100, 0b001)] {
            let col = u.column(from);
            assert!((col[to].norm() - 1.0).abs() < 1e-14);
            assert!(col.iter().enumerate().all(|(r, z)| r == to || z.norm() < 1e-14));
        }
    }

    #[test]
    fn dilated_noise_is_cptp_and_deterministic() {
        let zero = dilated_noise(3, (0, 2), 0.0, 11).unwrap();
        let rho = random_state(3, 4);
        assert_eq!(zero.apply(&rho).unwrap().matrix(), rho.matrix());
        for seed in 0..5 {
            let ch = dilated_noise(3, (2, 1), 0.3, seed).unwrap();
            assert!(ch.completeness_error() < 1e-10);
        }
        let a = dilated_noise(2, (0, 1), 0.15, 42).unwrap();
        let b = dilated_noise(2, (0, 1), 0.15, 42).unwrap();
        assert_eq!(a, b);
        assert!(dilated_noise(2, (0, 1), -0.1, 1).is_err());
    }

    #[test]
    fn dilated_noise_vanishes_linearly() {
        let rho = random_state(3, 8);
        let dev = |eps: f64| {
            let ch = dilated_noise(3, (0, 1), eps, 5).unwrap();
            max_abs_diff(ch.apply(&rho).unwrap().matrix(), rho.matrix())
        };
        let (d3, d2) = (dev(1e-3), dev(1e-2));
        // O(eps): deviation scales by ~10 between the two strengths
        let slope = (d2 / d3).log10();
        assert!((0.9..=1.1).contains(&slope), "log-slope {slope}");
    }

    #[test]
    fn composition_and_superoperators() {
        let noise = dilated_noise(2, (0, 1), 0.2, 3).unwrap();
        let id = Channel::identity(2);
        let composed = compose(&id, &noise).unwrap();
        for seed in 0..20 {
            let rho = random_state(2, 100 + seed);
            let a = composed.apply(&rho).unwrap();
            let b = noise.apply(&rho).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
        }

        assert_eq!(id.to_superoperator(), Superoperator::identity(2));

        let u = Gate::Iswap(Iswap { a: 0, b: 1 }).full_matrix(2);
        let v = linalg::embed(&linalg::expm_hermitian(&linalg::pauli::y(), 0.3), &[1], 2);
        let uv = compose(&unitary_channel(&u).unwrap(), &unitary_channel(&v).unwrap()).unwrap();
        let direct = unitary_channel(&(&u * &v)).unwrap();
        let rho = random_state(2, 77);
        assert!(max_abs_diff(uv.apply(&rho).unwrap().matrix(), direct.apply(&rho).unwrap().matrix()) < 1e-12);

        // superoperator agrees with Kraus application on every matrix unit
        let s = noise.to_superoperator();
        for i in 0..4 {
            for j in 0..4 {
                let mut e = CMat::zeros(4, 4);
                e[(i, j)] = ONE;
                assert!(max_abs_diff(&s.apply_matrix(&e), &noise.apply_matrix(&e)) < 1e-10);
            }
        }
        assert!(s.trace_preservation_error() < 1e-10);
        let max_mod = s.eigenvalues().unwrap().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(max_mod <= 1.0 + 1e-10);
    }

    #[test]
    fn standard_noise_channels() {
        let dep = depolarizing(2, 0.3).unwrap();
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let out = dep.apply(&rho).unwrap();
        assert!((out.matrix()[(0, 0)].re - (0.7 + 0.3 / 4.0)).abs() < 1e-14);
        assert!((out.matrix()[(3, 3)].re - 0.3 / 4.0).abs() < 1e-14);

        let bf = bit_flip(3, 0.1).unwrap();
        assert!(bf.completeness_error() < 1e-12);
        let out = bf.apply(&DensityMatrix::basis_state(3, 0).unwrap()).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.9f64.powi(3)).abs() < 1e-14);

        let xr = x_rotation(1, std::f64::consts::PI).unwrap();
        let out = xr.apply(&DensityMatrix::basis_state(1, 0).unwrap()).unwrap();
        assert!((out.matrix()[(1, 1)].re - 1.0).abs() < 1e-14);
    }
}
