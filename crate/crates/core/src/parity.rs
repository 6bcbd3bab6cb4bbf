//! Parity-sector benchmarking.
//!
//! The even (odd) subspace of `n` qubits is the direct sum of the number
//! sectors with even (odd) excitation count. Because the number design is a
//! one-design on every number sector at once, the one-step preservation of a
//! parity subspace started from its mixed state splits into per-sector runs:
//!
//! ```text
//! Γ_1^even = Σ_{γ even} (d_γ / 2^(n-1)) Γ_1^γ
//! ```
//!
//! This holds for noise that does not depend on the design element.

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, Gate};
use crate::error::{arg, Result};
use crate::fitting::{fit_decay, interleaved_estimate, FitOptions, FitResult, InterleavedEstimate};
use crate::linalg::{self, c, CMat};
use crate::onedesign::number_design;
use crate::protocol::{self, estimate_curve, interleaved_curve, DecayCurve, ExperimentSpec, InterleaveSet, NoiseModel};
use crate::qstate::{self, SymmetrySector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn residue(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParitySectorWeight {
    pub gamma: usize,
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityDecomposition {
    pub n_qubits: usize,
    pub parity: Parity,
    pub sectors: Vec<ParitySectorWeight>,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number sectors making up one parity subspace, weighted by `d_γ / 2^(n-1)`.
pub fn parity_decomposition(n: usize, parity: Parity) -> Result<ParityDecomposition> {
    if n == 0 || n % 2 == 1 {
        return arg(format!("parity decomposition needs an even qubit count, got {n}"));
    }
    if n > qstate::MAX_QUBITS {
        return arg(format!("at most {} qubits are supported", qstate::MAX_QUBITS));
    }
    let half = (1usize << (n - 1)) as f64;
    let sectors = (parity.residue()..=n)
        .step_by(2)
        .map(|gamma| {
            let dim = binomial(n, gamma);
            ParitySectorWeight {
                gamma,
                dim,
                weight: dim as f64 / half,
            }
        })
        .collect();
    Ok(ParityDecomposition {
        n_qubits: n,
        parity,
        sectors,
    })
}

/// Basis indices with the given excitation parity (label 0 even, 1 odd).
pub fn parity_subspace(n: usize, parity: Parity) -> Result<SymmetrySector> {
    let r = parity.residue() as u32;
    let idx = (0..1usize << n).filter(|i| i.count_ones() % 2 == r).collect();
    SymmetrySector::from_indices(n, r as i64, idx)
}

pub fn parity_partition(n: usize) -> Result<Vec<SymmetrySector>> {
    Ok(vec![parity_subspace(n, Parity::Even)?, parity_subspace(n, Parity::Odd)?])
}

/// Weighted combination of per-sector one-step preservations.
pub fn parity_gamma1(per_sector: &[(usize, f64)], decomp: &ParityDecomposition) -> Result<f64> {
    if per_sector.len() != decomp.sectors.len() {
        return arg(format!(
            "expected {} sectors, got {}",
            decomp.sectors.len(),
            per_sector.len()
        ));
    }
    let mut total = 0.0;
    for s in &decomp.sectors {
        let hits: Vec<f64> = per_sector.iter().filter(|(g, _)| *g == s.gamma).map(|(_, v)| *v).collect();
        match hits.as_slice() {
            [v] => total += s.weight * v,
            [] => return arg(format!("sector {} is missing", s.gamma)),
            _ => return arg(format!("sector {} is given more than once", s.gamma)),
        }
    }
    Ok(total)
}

/// `exp(−iθ(σ⁻σ⁻ + σ⁺σ⁺))` on the pair `(q1, q2)`: a rotation in the
/// `{|00⟩, |11⟩}` block that changes the excitation number by ±2.
pub fn pair_gate(q1: usize, q2: usize, theta: f64) -> Result<Gate> {
    if q1 == q2 {
        return arg("pair gate needs two distinct qubits");
    }
    let mut h = CMat::zeros(4, 4);
    h[(0, 3)] = c(1.0, 0.0);
    h[(3, 0)] = c(1.0, 0.0);
    Ok(Gate::unitary(vec![q1, q2], linalg::expm_hermitian(&h, theta)))
}

/// `Tr_P[noise(mixed_P)]` for the parity subspace `P`.
pub fn parity_preservation(noise: &Channel, parity: Parity) -> Result<f64> {
    let sub = parity_subspace(noise.n_qubits(), parity)?;
    let out = noise.apply_matrix(qstate::maximally_mixed(&sub).matrix());
    Ok(qstate::raw_population(&out, &sub))
}

/// Exact leakage of a noisy interleave set out of the parity subspace.
pub fn interleave_leakage(set: &InterleaveSet, n: usize, parity: Parity) -> Result<f64> {
    Ok(protocol::interleave_leakage(set, &parity_subspace(n, parity)?))
}

/// Per-sector reference and interleaved campaigns for one parity subspace.
#[derive(Debug, Clone)]
pub struct ParityBenchmark {
    pub n_qubits: usize,
    pub parity: Parity,
    pub noise: NoiseModel,
    pub interleave: InterleaveSet,
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    pub shots: u64,
    pub seed: u64,
    pub fit: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRun {
    pub gamma: usize,
    pub dim: usize,
    pub weight: f64,
    pub reference: DecayCurve,
    pub reference_fit: FitResult,
    pub interleaved: DecayCurve,
    pub interleaved_fit: FitResult,
    pub mu_reference: f64,
    pub mu_interleaved: f64,
    /// `μ_ID − μ_D` for this sector, unclamped.
    pub mu_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub decomposition: ParityDecomposition,
    pub sectors: Vec<SectorRun>,
    pub combined_gamma1_reference: f64,
    pub combined_gamma1_interleaved: f64,
    pub combined_mu_reference: f64,
    pub combined_mu_interleaved: f64,
    /// Estimate for the interleaved operation with bounds for the full
    /// parity subspace (dimension `2^(n-1)`).
    pub estimate: InterleavedEstimate,
}

impl ParityBenchmark {
    /// Spec for one number sector; the readout is the whole parity subspace.
    pub fn sector_spec(&self, gamma: usize, interleaved: bool) -> Result<ExperimentSpec> {
        let n = self.n_qubits;
        let mut spec = ExperimentSpec::new(
            number_design(n, gamma)?,
            self.noise.clone(),
            self.lengths.clone(),
            self.n_sequences,
            self.seed,
        )
        .with_measurement(parity_subspace(n, self.parity)?, parity_partition(n)?)
        .with_shots(self.shots)
        .with_stream_tag(((gamma as u64) << 1) | interleaved as u64);
        if interleaved {
            spec = spec.with_interleave(self.interleave.clone());
        }
        Ok(spec)
    }
}

pub fn parity_benchmark(cfg: &ParityBenchmark) -> Result<ParityReport> {
    let decomp = parity_decomposition(cfg.n_qubits, cfg.parity)?;
    let mut sectors = Vec::new();
    for s in &decomp.sectors {
        let reference = estimate_curve(&cfg.sector_spec(s.gamma, false)?)?;
        let interleaved = interleaved_curve(&cfg.sector_spec(s.gamma, true)?)?;
        let reference_fit = fit_decay(&reference, cfg.fit)?;
        let interleaved_fit = fit_decay(&interleaved, cfg.fit)?;
        sectors.push(SectorRun {
            gamma: s.gamma,
            dim: s.dim,
            weight: s.weight,
            mu_reference: reference_fit.mu,
            mu_interleaved: interleaved_fit.mu,
            mu_difference: interleaved_fit.mu - reference_fit.mu,
            reference,
            reference_fit,
            interleaved,
            interleaved_fit,
        });
    }
    let g_ref: Vec<(usize, f64)> = sectors.iter().map(|s| (s.gamma, s.reference_fit.gamma1)).collect();
    let g_int: Vec<(usize, f64)> = sectors.iter().map(|s| (s.gamma, s.interleaved_fit.gamma1)).collect();
    let combined_gamma1_reference = parity_gamma1(&g_ref, &decomp)?;
    let combined_gamma1_interleaved = parity_gamma1(&g_int, &decomp)?;
    let combined_mu_reference = 1.0 - combined_gamma1_reference;
    let combined_mu_interleaved = 1.0 - combined_gamma1_interleaved;
    let estimate = interleaved_estimate(
        combined_mu_interleaved,
        combined_mu_reference,
        1usize << (cfg.n_qubits - 1),
    );
    Ok(ParityReport {
        decomposition: decomp,
        sectors,
        combined_gamma1_reference,
        combined_gamma1_interleaved,
        combined_mu_reference,
        combined_mu_interleaved,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dilated_noise, Superoperator};
    use crate::onedesign::{double_average_transition_matrix, number_design, DesignEnsemble};
    use crate::protocol::ExactOracle;
    use crate::qstate::DensityMatrix;

    #[test]
    fn decompositions() {
        let d = parity_decomposition(4, Parity::Even).unwrap();
        let got: Vec<(usize, usize)> = d.sectors.iter().map(|s| (s.gamma, s.dim)).collect();
        assert_eq!(got, vec![(0, 1), (2, 6), (4, 1)]);
        assert_eq!(d.sectors.iter().map(|s| s.weight).collect::<Vec<_>>(), vec![0.125, 0.75, 0.125]);
        let d = parity_decomposition(6, Parity::Even).unwrap();
        assert_eq!(d.sectors.len(), 4);
        assert!((d.sectors.iter().map(|s| s.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        let d = parity_decomposition(6, Parity::Odd).unwrap();
        assert_eq!(d.sectors.iter().map(|s| s.dim).collect::<Vec<_>>(), vec![6, 20, 6]);
        assert!(parity_decomposition(5, Parity::Even).is_err());
    }

    #[test]
    fn combination_arithmetic() {
        let d = parity_decomposition(4, Parity::Even).unwrap();
        assert_eq!(parity_gamma1(&[(0, 1.0), (2, 1.0), (4, 1.0)], &d).unwrap(), 1.0);
        let g = parity_gamma1(&[(0, 1.0), (2, 0.99), (4, 1.0)], &d).unwrap();
        assert!((g - 0.9925).abs() < 1e-12);
        assert!(parity_gamma1(&[(0, 1.0), (2, 0.99)], &d).is_err());
        assert!(parity_gamma1(&[(0, 1.0), (2, 0.99), (2, 1.0)], &d).is_err());
        assert!(parity_gamma1(&[(0, 1.0), (2, 0.99), (3, 1.0)], &d).is_err());
    }

    #[test]
    fn pair_gate_structure() {
        assert!(linalg::max_abs_diff(&pair_gate(0, 1, 0.0).unwrap().local_matrix(), &linalg::identity(4)) < 1e-15);
        let u = pair_gate(0, 1, std::f64::consts::FRAC_PI_2).unwrap().local_matrix();
        assert!((u[(3, 0)] - c(0.0, -1.0)).norm() < 1e-12);
        assert!(u[(0, 0)].norm() < 1e-12);
        let parity_op = linalg::pauli::string("ZZZZ").unwrap();
        for theta in [0.3, 1.1, 2.9] {
            let full = pair_gate(1, 3, theta).unwrap().full_matrix(4);
            assert!(linalg::max_abs_diff(&(&full * &parity_op), &(&parity_op * &full)) < 1e-12);
        }
        assert!(pair_gate(2, 2, 0.1).is_err());
    }

    #[test]
    fn pair_gate_moves_population_by_two() {
        let ch = pair_gate(1, 2, 0.7).unwrap().as_channel(4).unwrap();
        let design: DesignEnsemble = number_design(4, 2).unwrap();
        let t = double_average_transition_matrix(&ch, &design).unwrap();
        for to in 0..=4 {
            for from in 0..=4 {
                let dg = (to as i64 - from as i64).abs();
                if dg != 0 && dg != 2 {
                    assert!(t.get(to, from).abs() < 1e-12, "T[{to},{from}] = {}", t.get(to, from));
                }
            }
        }
        assert!(t.get(4, 2) > 1e-3);
    }

    #[test]
    fn decomposition_identity_exact() {
        // Parity-preserving global noise: a noisy pair gate on (0, 2).
        let leak = dilated_noise(4, (1, 3), 0.2, 11).unwrap();
        let pg = pair_gate(0, 2, 0.4).unwrap().as_channel(4).unwrap();
        for noise in [pg.clone(), leak.after(&pg).unwrap()] {
            let decomp = parity_decomposition(4, Parity::Even).unwrap();
            let cfg = ParityBenchmark {
                n_qubits: 4,
                parity: Parity::Even,
                noise: NoiseModel::global(noise.clone()),
                interleave: InterleaveSet::new(vec![pair_gate(0, 1, 0.1).unwrap()], None).unwrap(),
                lengths: vec![1],
                n_sequences: 1,
                shots: 0,
                seed: 1,
                fit: FitOptions::default(),
            };
            let per: Vec<(usize, f64)> = decomp
                .sectors
                .iter()
                .map(|s| {
                    let spec = cfg.sector_spec(s.gamma, false).unwrap();
                    (s.gamma, ExactOracle::new(&spec).unwrap().gamma(1))
                })
                .collect();
            let combined = parity_gamma1(&per, &decomp).unwrap();
            let even = parity_subspace(4, Parity::Even).unwrap();
            let direct_spec = cfg
                .sector_spec(2, false)
                .unwrap()
                .with_initial_state(qstate::maximally_mixed(&even));
            let direct = ExactOracle::new(&direct_spec).unwrap().gamma(1);
            assert!((combined - direct).abs() < 1e-10);
            assert!((combined - parity_preservation(&noise, Parity::Even).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn interleave_leakage_matches_superoperator() {
        let noise = dilated_noise(4, (1, 2), 0.3, 5).unwrap();
        let g = pair_gate(1, 2, std::f64::consts::FRAC_PI_4).unwrap();
        let set = InterleaveSet::new(vec![g.clone()], Some(noise.clone())).unwrap();
        let s: Superoperator = noise.to_superoperator().after(&g.as_channel(4).unwrap().to_superoperator());
        let even = parity_subspace(4, Parity::Even).unwrap();
        let out = s.apply(&DensityMatrix::new(4, qstate::maximally_mixed(&even).into_matrix()).unwrap()).unwrap();
        let want = 1.0 - qstate::sector_population(&out, &even).unwrap();
        assert!((interleave_leakage(&set, 4, Parity::Even).unwrap() - want).abs() < 1e-12);
        assert!(want > 0.0);
    }
}
