//! Dense complex matrix helpers shared by the simulator.
//!
//! Qubit `q` is bit `q` of a computational-basis index (qubit 0 is the
//! least-significant bit). Local operators on `k` qubits are `2^k x 2^k`
//! matrices whose local bit `b` refers to `support[b]`.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn unitarity_error(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Basis offsets of a set of qubits: `offsets[l]` scatters the bits of the
/// local index `l` onto the support positions.
fn local_offsets(support: &[usize]) -> Vec<usize> {
    let k = support.len();
    (0..1usize << k)
        .map(|l| {
            support
                .iter()
                .enumerate()
                .filter(|(b, _)| l >> b & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | (1 << q))
        })
        .collect()
}

/// All basis indices with the support bits cleared.
fn local_bases(support: &[usize], n: usize) -> Vec<usize> {
    let mask = support.iter().fold(0usize, |acc, &q| acc | (1 << q));
    (0..1usize << n).filter(|i| i & mask == 0).collect()
}

/// Embeds a local operator into the full `2^n`-dimensional space.
pub fn embed(op: &CMat, support: &[usize], n: usize) -> CMat {
    let mut full = identity(1 << n);
    apply_left(op, support, &mut full);
    full
}

/// `m <- op_full * m` without forming `op_full`.
pub fn apply_left(op: &CMat, support: &[usize], m: &mut CMat) {
    let k = support.len();
    let dl = 1usize << k;
    debug_assert_eq!(op.nrows(), dl);
    let offsets = local_offsets(support);
    let n = m.nrows().trailing_zeros() as usize;
    let bases = local_bases(support, n);
    let rows = m.nrows();
    let cols = m.ncols();
    let data = m.as_mut_slice();
    let mut v = vec![ZERO; dl];
    for col in 0..cols {
        let column = &mut data[col * rows..(col + 1) * rows];
        for &base in &bases {
            for l in 0..dl {
                v[l] = column[base | offsets[l]];
            }
            for r in 0..dl {
                let mut acc = ZERO;
                for l in 0..dl {
                    acc += op[(r, l)] * v[l];
                }
                column[base | offsets[r]] = acc;
            }
        }
    }
}

/// Monomial form of a local operator: `op |l> = phase[l] |perm[l]>`, or
/// `None` if some column has more than one non-zero entry.
pub fn monomial_form(op: &CMat) -> Option<(Vec<usize>, Vec<C64>)> {
    let dl = op.ncols();
    let mut perm = Vec::with_capacity(dl);
    let mut phase = Vec::with_capacity(dl);
    for l in 0..dl {
        let column = op.column(l);
        let mut nz = column.iter().enumerate().filter(|(_, z)| **z != ZERO);
        let (r, z) = nz.next()?;
        if nz.next().is_some() {
            return None;
        }
        perm.push(r);
        phase.push(*z);
    }
    Some((perm, phase))
}

/// `m <- U m U^dagger` for a monomial local `U` given by [`monomial_form`].
pub fn conjugate_monomial(perm: &[usize], phase: &[C64], support: &[usize], m: &mut CMat) {
    let d = m.nrows();
    debug_assert_eq!(d, m.ncols());
    let offsets = local_offsets(support);
    let mask = offsets[offsets.len() - 1];
    let mut dest = vec![0usize; d];
    let mut ph = vec![ONE; d];
    for x in 0..d {
        let l = support.iter().enumerate().fold(0, |acc, (b, &q)| acc | ((x >> q & 1) << b));
        dest[x] = (x & !mask) | offsets[perm[l]];
        ph[x] = phase[l];
    }
    let src = m.as_slice();
    let mut out = vec![ZERO; d * d];
    for y in 0..d {
        let cy = ph[y].conj();
        let col = dest[y] * d;
        for x in 0..d {
            out[dest[x] + col] = ph[x] * cy * src[x + y * d];
        }
    }
    m.as_mut_slice().copy_from_slice(&out);
}

/// `m <- m * op_full^dagger` without forming `op_full`.
pub fn apply_right_adjoint(op: &CMat, support: &[usize], m: &mut CMat) {
    let k = support.len();
    let dl = 1usize << k;
    debug_assert_eq!(op.nrows(), dl);
    let offsets = local_offsets(support);
    let n = m.ncols().trailing_zeros() as usize;
    let bases = local_bases(support, n);
    let rows = m.nrows();
    let data = m.as_mut_slice();
    let conj: Vec<C64> = op.iter().map(|z| z.conj()).collect();
    // conj is column-major: conj[r + l * dl] = conj(op[r, l])
    let mut v = vec![ZERO; dl];
    for &base in &bases {
        for row in 0..rows {
            for l in 0..dl {
                v[l] = data[(base | offsets[l]) * rows + row];
            }
            for cidx in 0..dl {
                let mut acc = ZERO;
                for l in 0..dl {
                    acc += v[l] * conj[cidx + l * dl];
                }
                data[(base | offsets[cidx]) * rows + row] = acc;
            }
        }
    }
}

/// `exp(-i t H)` for Hermitian `H`, via its eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMat::from_diagonal(&DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&lam| C64::from_polar(1.0, -t * lam)),
    ));
    v * phases * v.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues().min()
}

/// Largest eigenvalue modulus of a Hermitian matrix (its spectral norm).
pub fn hermitian_spectral_norm(m: &CMat) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// All eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(m: &CMat) -> Option<Vec<C64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)?;
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

/// Eigenvector for a known (simple) eigenvalue by shifted inverse iteration.
pub fn eigenvector(m: &CMat, lambda: C64) -> Option<CVec> {
    let n = m.nrows();
    let shift = lambda + c(1e-11 * (1.0 + lambda.norm()), 0.0);
    let shifted = m - identity(n) * shift;
    let lu = shifted.lu();
    let mut x = CVec::from_element(n, c(1.0, 0.37));
    for _ in 0..4 {
        let y = lu.solve(&x)?;
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        x = y / c(norm, 0.0);
    }
    Some(x)
}

/// Kronecker product `a (x) b`, with `b` on the low-order qubits.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Pairwise sum in a fixed tree shape.
pub fn tree_sum(mut items: Vec<CMat>) -> Option<CMat> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

const REDUCE_CHUNK: usize = 16;

/// `sum_k f(k)` over `0..count`, computed in parallel but reduced in an order
/// that does not depend on the number of worker threads.
pub fn par_sum<F>(count: usize, f: F) -> Option<CMat>
where
    F: Fn(usize) -> CMat + Sync,
{
    use rayon::prelude::*;
    let chunks: Vec<CMat> = (0..count.div_ceil(REDUCE_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(count);
            let mut acc = f(lo);
            for k in lo + 1..hi {
                acc += f(k);
            }
            acc
        })
        .collect();
    tree_sum(chunks)
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }
    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }
    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }
    pub fn id() -> CMat {
        identity(2)
    }

    /// Full matrix of a Pauli string; character `q` acts on qubit `q`.
    pub fn string(s: &str) -> Option<CMat> {
        let n = s.len();
        let mut m = identity(1 << n);
        for (q, ch) in s.chars().enumerate() {
            let p = match ch.to_ascii_uppercase() {
                'I' => continue,
                'X' => x(),
                'Y' => y(),
                'Z' => z(),
                _ => return None,
            };
            apply_left(&p, &[q], &mut m);
        }
        Some(m)
    }
}
