//! Exponential-decay fits of survival curves.
//!
//! The model is `Γ_y = Σ_i A_i λ_i^y + B` with one or two exponentials, fitted by
//! weighted Levenberg–Marquardt with rates and offset constrained to `[0, 1]`.
//! `Γ_1` is the model value at `y = 1` including the offset, and `μ = 1 − Γ_1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::protocol::DecayCurve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// 1 or 2.
    pub max_order: usize,
    /// Order 2 is kept only if it lowers the weighted residual sum by this factor.
    pub order2_factor: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_order: 1,
            order2_factor: 4.0,
            max_iterations: 2000,
        }
    }
}

impl FitOptions {
    pub fn order(max_order: usize) -> Self {
        Self {
            max_order,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    InverseVariance,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub order: usize,
    pub amplitudes: Vec<f64>,
    pub rates: Vec<f64>,
    /// Free offset `B` (steady-state sector population).
    pub offset: f64,
    pub offset_included_in_gamma1: bool,
    pub weighting: Weighting,
    /// Square root of the weighted residual sum.
    pub residual_norm: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// Ratio of the fitted curve at `y = 1` and `y = 0`.
    pub gamma1_over_gamma0: Option<f64>,
    pub gamma1_stderr: f64,
    pub mu: f64,
    pub mu_stderr: f64,
    pub rate_stderr: Vec<f64>,
    /// Parameter order: `A_1, λ_1, [A_2, λ_2,] B`.
    pub covariance: Vec<Vec<f64>>,
    pub iterations: usize,
    pub n_points: usize,
    pub input_fingerprint: String,
}

impl FitResult {
    pub fn model(&self, y: f64) -> f64 {
        self.offset
            + self
                .amplitudes
                .iter()
                .zip(&self.rates)
                .map(|(a, l)| a * l.powf(y))
                .sum::<f64>()
    }

    /// Dominant (slowest) rate.
    pub fn lambda(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of amplitudes, the SPAM-sensitive part of the curve.
    pub fn total_amplitude(&self) -> f64 {
        self.amplitudes.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub mu: f64,
    pub stderr: f64,
}

/// `μ = 1 − Γ_1`.
pub fn mu_from_gamma1(gamma1: f64) -> f64 {
    1.0 - gamma1
}

pub fn extract_mu(fit: &FitResult) -> MuEstimate {
    MuEstimate {
        mu: fit.mu,
        stderr: fit.mu_stderr,
    }
}

fn params_len(order: usize) -> usize {
    2 * order + 1
}

/// Model value and gradient with respect to the parameters.
fn eval(order: usize, p: &[f64], y: f64, grad: &mut [f64]) -> f64 {
    let mut f = p[2 * order];
    for i in 0..order {
        let (a, l) = (p[2 * i], p[2 * i + 1]);
        let ly = l.powf(y);
        f += a * ly;
        grad[2 * i] = ly;
        grad[2 * i + 1] = if y == 0.0 { 0.0 } else { a * y * l.powf(y - 1.0) };
    }
    grad[2 * order] = 1.0;
    f
}

fn project(order: usize, p: &mut [f64]) {
    for i in 0..order {
        p[2 * i + 1] = p[2 * i + 1].clamp(0.0, 1.0);
    }
    p[2 * order] = p[2 * order].clamp(0.0, 1.0);
}

struct Problem<'a> {
    ys: &'a [f64],
    gs: &'a [f64],
    ws: &'a [f64],
}

impl Problem<'_> {
    fn chi2(&self, order: usize, p: &[f64]) -> f64 {
        let mut grad = vec![0.0; params_len(order)];
        self.ys
            .iter()
            .zip(self.gs)
            .zip(self.ws)
            .map(|((&y, &g), &w)| {
                let r = eval(order, p, y, &mut grad) - g;
                w * r * r
            })
            .sum()
    }

    /// Weighted Jacobian and residual vector.
    fn linearize(&self, order: usize, p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let m = params_len(order);
        let mut j = DMatrix::zeros(self.ys.len(), m);
        let mut r = DVector::zeros(self.ys.len());
        let mut grad = vec![0.0; m];
        for (k, ((&y, &g), &w)) in self.ys.iter().zip(self.gs).zip(self.ws).enumerate() {
            let sw = w.sqrt();
            r[k] = sw * (eval(order, p, y, &mut grad) - g);
            for (c, gv) in grad.iter().enumerate() {
                j[(k, c)] = sw * gv;
            }
        }
        (j, r)
    }

    /// Best amplitudes and offset for fixed rates (weighted linear least squares).
    fn linear_start(&self, rates: &[f64]) -> Vec<f64> {
        let order = rates.len();
        let m = params_len(order);
        let mut x = DMatrix::zeros(self.ys.len(), m - order);
        let mut b = DVector::zeros(self.ys.len());
        for (k, ((&y, &g), &w)) in self.ys.iter().zip(self.gs).zip(self.ws).enumerate() {
            let sw = w.sqrt();
            for (i, l) in rates.iter().enumerate() {
                x[(k, i)] = sw * l.powf(y);
            }
            x[(k, order)] = sw;
            b[k] = sw * g;
        }
        let coef = x
            .svd(true, true)
            .solve(&b, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(order + 1));
        let mut p = vec![0.0; m];
        for (i, l) in rates.iter().enumerate() {
            p[2 * i] = coef[i];
            p[2 * i + 1] = *l;
        }
        p[2 * order] = coef[order];
        project(order, &mut p);
        p
    }

    /// Levenberg–Marquardt with box projection. Returns parameters, residual
    /// sum, iteration count, and the residual trace.
    fn minimize(&self, order: usize, start: Vec<f64>, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
        let m = params_len(order);
        let mut p = start;
        let mut chi = self.chi2(order, &p);
        let mut trace = vec![chi];
        let mut damp = 1e-3;
        for it in 0..max_iter {
            let (j, r) = self.linearize(order, &p);
            let g = j.transpose() * &r;
            let h = j.transpose() * &j;
            let scale = h.diagonal().iter().copied().fold(0.0, f64::max).max(1e-300);
            let mut accepted = None;
            while damp < 1e16 {
                let mut a = h.clone();
                for d in 0..m {
                    a[(d, d)] += damp * h[(d, d)].max(1e-12 * scale);
                }
                let step = match a.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&g)),
                    None => match a.lu().solve(&(-&g)) {
                        Some(s) => s,
                        None => {
                            damp *= 10.0;
                            continue;
                        }
                    },
                };
                let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                project(order, &mut trial);
                let c = self.chi2(order, &trial);
                if c.is_finite() && c < chi {
                    accepted = Some((trial, c));
                    damp = (damp / 3.0).max(1e-12);
                    break;
                }
                damp *= 4.0;
            }
            match accepted {
                None => return Ok((p, chi, it)),
                Some((trial, c)) => {
                    let moved = p
                        .iter()
                        .zip(&trial)
                        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
                        .fold(0.0, f64::max);
                    let gain = chi - c;
                    p = trial;
                    chi = c;
                    trace.push(chi);
                    if gain <= 1e-15 * chi + 1e-32 || moved < 1e-14 {
                        return Ok((p, chi, it + 1));
                    }
                }
            }
        }
        Err(Error::NoConvergence {
            message: format!("decay fit did not converge in {max_iter} iterations"),
            residual_trace: trace,
        })
    }
}

fn weights(curve: &DecayCurve) -> (Vec<f64>, Weighting) {
    let se: Vec<f64> = curve.points.iter().map(|p| p.stderr).collect();
    let min_pos = se.iter().copied().filter(|s| *s > 0.0 && s.is_finite()).fold(f64::INFINITY, f64::min);
    if !min_pos.is_finite() {
        return (vec![1.0; se.len()], Weighting::Uniform);
    }
    let w = se
        .iter()
        .map(|&s| {
            let s = if s > 0.0 && s.is_finite() { s } else { min_pos };
            1.0 / (s * s)
        })
        .collect();
    (w, Weighting::InverseVariance)
}

/// Symmetric pseudo-inverse of a positive semidefinite matrix.
fn pseudo_inverse(h: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = h.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut inv = DMatrix::zeros(h.nrows(), h.ncols());
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > top * 1e-12 && ev > 0.0 {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / ev;
        }
    }
    inv
}

/// Fits `Γ_y` against length. Needs at least three distinct lengths.
pub fn fit_decay(curve: &DecayCurve, opts: FitOptions) -> Result<FitResult> {
    if !(1..=2).contains(&opts.max_order) {
        return arg("fit order must be 1 or 2");
    }
    let ys: Vec<f64> = curve.points.iter().map(|p| p.length as f64).collect();
    let mut distinct = curve.lengths();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return arg("at least three distinct lengths are needed for a decay fit");
    }
    let gs = curve.means();
    if gs.iter().any(|g| !g.is_finite()) {
        return arg("curve contains non-finite values");
    }
    let (ws, weighting) = weights(curve);
    let prob = Problem {
        ys: &ys,
        gs: &gs,
        ws: &ws,
    };

    let mut best: Option<(usize, Vec<f64>, f64, usize)> = None;
    let mut last_err = None;
    for l0 in [0.5, 0.9, 0.99] {
        match prob.minimize(1, prob.linear_start(&[l0]), opts.max_iterations) {
            Ok((p, chi, it)) => {
                if best.as_ref().is_none_or(|b| chi < b.2) {
                    best = Some((1, p, chi, it));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(mut chosen) = best else {
        return Err(last_err.expect("at least one start ran"));
    };

    if opts.max_order == 2 && ys.len() > params_len(2) {
        let l1 = chosen.1[1];
        let mut best2: Option<(Vec<f64>, f64, usize)> = None;
        for l2 in [0.5, 0.9, 0.99, l1 * l1] {
            if (l2 - l1).abs() < 1e-6 {
                continue;
            }
            if let Ok((p, chi, it)) = prob.minimize(2, prob.linear_start(&[l1, l2]), opts.max_iterations) {
                if best2.as_ref().is_none_or(|b| chi < b.1) {
                    best2 = Some((p, chi, it));
                }
            }
        }
        let chi1 = chosen.2;
        if let Some((p, chi2, it)) = best2 {
            if chi1 > 1e-24 * ys.len() as f64 && chi2 * opts.order2_factor <= chi1 {
                chosen = (2, p, chi2, it);
            }
        }
    }

    let (order, p, chi, iterations) = chosen;
    Ok(finish(curve, &prob, order, p, chi, iterations, weighting))
}

fn finish(
    curve: &DecayCurve,
    prob: &Problem,
    order: usize,
    mut p: Vec<f64>,
    chi: f64,
    iterations: usize,
    weighting: Weighting,
) -> FitResult {
    // Two-exponential fits are reported slowest rate first.
    if order == 2 && p[1] < p[3] {
        p.swap(0, 2);
        p.swap(1, 3);
    }
    let m = params_len(order);
    let (j, _) = prob.linearize(order, &p);
    let mut cov = pseudo_inverse(&(j.transpose() * &j));
    let n = prob.ys.len();
    if weighting == Weighting::Uniform && n > m {
        cov *= chi / (n - m) as f64;
    }
    let mut g1 = vec![0.0; m];
    let gamma1 = eval(order, &p, 1.0, &mut g1);
    let mut g0 = vec![0.0; m];
    let gamma0 = eval(order, &p, 0.0, &mut g0);
    let gv = DVector::from_vec(g1);
    let var1 = (gv.transpose() * &cov * &gv)[(0, 0)].max(0.0);
    FitResult {
        order,
        amplitudes: (0..order).map(|i| p[2 * i]).collect(),
        rates: (0..order).map(|i| p[2 * i + 1]).collect(),
        offset: p[2 * order],
        offset_included_in_gamma1: true,
        weighting,
        residual_norm: chi.sqrt(),
        gamma0,
        gamma1,
        gamma1_over_gamma0: (gamma0 != 0.0).then(|| gamma1 / gamma0),
        gamma1_stderr: var1.sqrt(),
        mu: mu_from_gamma1(gamma1),
        mu_stderr: var1.sqrt(),
        rate_stderr: (0..order).map(|i| cov[(2 * i + 1, 2 * i + 1)].max(0.0).sqrt()).collect(),
        covariance: (0..m).map(|r| (0..m).map(|c| cov[(r, c)]).collect()).collect(),
        iterations,
        n_points: n,
        input_fingerprint: curve.fingerprint(),
    }
}

/// Interleaved estimate of a target operation's leakage rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavedEstimate {
    pub mu_interleaved: f64,
    pub mu_reference: f64,
    /// `max(0, μ_ID − μ_D)`.
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    pub dimension: usize,
    pub p_reference: f64,
    pub p_interleaved: f64,
    pub bound_formula: String,
}

/// Bound formula applied by [`interleaved_estimate`], written out in full.
pub const BOUND_FORMULA: &str = "p_X = 1 - d*mu_X/(d-1); \
E = min{ (d-1)*(|p_D - p_ID/p_D| + (1 - p_D))/d, \
2*(d^2-1)*(1-p_D)/(p_D*d^2) + 4*sqrt(1-p_D)*sqrt(d^2-1)/p_D }; \
interval = [max(0, point - E), point + E]";

/// Point estimate `μ_I = μ_ID − μ_D` (clamped at 0) with the standard
/// interleaved-benchmarking error interval.
///
/// Each rate is mapped to a depolarizing parameter `p = 1 − dμ/(d−1)` of the
/// measured sector of dimension `d`, and the half width is
///
/// ```text
/// E = min{ (d−1)(|p_D − p_ID/p_D| + (1 − p_D))/d,
///          2(d²−1)(1 − p_D)/(p_D d²) + 4√(1 − p_D)√(d²−1)/p_D }
/// ```
///
/// The interval is `[max(0, μ_I − E), μ_I + E]`. Dimensions below 2 are
/// treated as 2. A non-positive `p_D` yields an unbounded interval.
pub fn interleaved_estimate(mu_id: f64, mu_d: f64, dimension: usize) -> InterleavedEstimate {
    let d = dimension.max(2) as f64;
    let p = |mu: f64| 1.0 - d * mu / (d - 1.0);
    let (p_d, p_id) = (p(mu_d), p(mu_id));
    let point = (mu_id - mu_d).max(0.0);
    let e = if p_d > 0.0 {
        let e1 = (d - 1.0) * ((p_d - p_id / p_d).abs() + (1.0 - p_d)) / d;
        let e2 = 2.0 * (d * d - 1.0) * (1.0 - p_d) / (p_d * d * d)
            + 4.0 * (1.0 - p_d).max(0.0).sqrt() * (d * d - 1.0).sqrt() / p_d;
        e1.min(e2)
    } else {
        f64::INFINITY
    };
    InterleavedEstimate {
        mu_interleaved: mu_id,
        mu_reference: mu_d,
        point,
        lower: (point - e).max(0.0),
        upper: point + e,
        half_width: e,
        dimension: dimension.max(2),
        p_reference: p_d,
        p_interleaved: p_id,
        bound_formula: BOUND_FORMULA.to_string(),
    }
}
