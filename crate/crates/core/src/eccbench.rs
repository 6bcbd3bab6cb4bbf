//! Benchmarking the codespace of a stabilizer code as an engineered symmetry.
//!
//! Each round applies a logical Clifford (identity on the orthocomplement of
//! the codespace), a randomizer that scrambles phases between the codespace
//! and the syndrome spaces, and the round noise. The survival is the codespace
//! population.
//!
//! Only the three-qubit bit-flip code is built in. Pauli strings use the
//! convention that character `q` acts on qubit `q`.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, Gate, Instruction};
use crate::error::{arg, Error, Result};
use crate::fitting::{fit_decay, interleaved_estimate, FitOptions, FitResult, InterleavedEstimate};
use crate::linalg::{self, c, CMat, C64};
use crate::onedesign::{DesignElement, DesignEnsemble};
use crate::protocol::{estimate_curve, DecayCurve, ExperimentSpec, InterleaveSet, NoiseModel, RandomStage};
use crate::qstate::SymmetrySector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub name: String,
    pub n_physical: usize,
    pub n_logical: usize,
    pub generators: Vec<String>,
    pub distance: usize,
    /// Basis indices of `|0̄⟩` and `|1̄⟩`.
    pub logical_basis: Vec<usize>,
    pub logical_x: String,
    pub logical_z: String,
    /// Syndrome sectors; the first is the codespace.
    pub syndrome_sectors: Vec<Vec<usize>>,
    /// Qubit flipped by majority-vote correction for each non-trivial syndrome sector.
    pub corrections: Vec<Option<usize>>,
}

pub fn build_code(name: &str) -> Result<StabilizerCode> {
    match name {
        "three_qubit_bitflip" => Ok(StabilizerCode {
            name: name.to_string(),
            n_physical: 3,
            n_logical: 1,
            generators: vec!["ZZI".into(), "IZZ".into()],
            distance: 3,
            logical_basis: vec![0, 7],
            logical_x: "XXX".into(),
            logical_z: "ZII".into(),
            syndrome_sectors: vec![vec![0, 7], vec![1, 6], vec![2, 5], vec![3, 4]],
            corrections: vec![None, Some(0), Some(1), Some(2)],
        }),
        other => arg(format!("unknown code '{other}'")),
    }
}

impl StabilizerCode {
    pub fn codespace(&self) -> SymmetrySector {
        SymmetrySector::from_indices(self.n_physical, 0, self.logical_basis.clone()).expect("static code data")
    }

    pub fn partition(&self) -> Vec<SymmetrySector> {
        let code = self.codespace();
        let rest = code.complement(1).expect("static code data");
        vec![code, rest]
    }

    pub fn projector(&self) -> CMat {
        self.codespace().projector()
    }

    pub fn generator_matrices(&self) -> Vec<CMat> {
        self.generators
            .iter()
            .map(|g| linalg::pauli::string(g).expect("static code data"))
            .collect()
    }

    pub fn syndrome_projectors(&self) -> Vec<CMat> {
        self.syndrome_sectors
            .iter()
            .map(|idx| {
                SymmetrySector::from_indices(self.n_physical, 0, idx.clone())
                    .expect("static code data")
                    .projector()
            })
            .collect()
    }

    /// Stabilizer group elements as lists of Z gates.
    fn stabilizer_group(&self) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let gens: Vec<usize> = self
            .generators
            .iter()
            .map(|g| g.chars().enumerate().filter(|(_, ch)| *ch == 'Z').fold(0, |m, (q, _)| m | 1 << q))
            .collect();
        for combo in 0..1usize << gens.len() {
            let mask = gens.iter().enumerate().filter(|(k, _)| combo >> k & 1 == 1).fold(0, |m, (_, g)| m ^ g);
            seen.insert(mask);
        }
        let mut masks: Vec<usize> = seen.into_iter().collect();
        masks.sort_unstable();
        masks
            .into_iter()
            .map(|m| (0..self.n_physical).filter(|q| m >> q & 1 == 1).collect())
            .collect()
    }

    /// Embeds a logical single-qubit operator on the codespace, identity elsewhere.
    pub fn embed_logical(&self, op: &CMat) -> CMat {
        let mut u = linalg::identity(1 << self.n_physical);
        for (a, &ia) in self.logical_basis.iter().enumerate() {
            for (b, &ib) in self.logical_basis.iter().enumerate() {
                u[(ia, ib)] = op[(a, b)];
            }
        }
        u
    }
}

/// The single-qubit Clifford group modulo global phase, generated from H and S.
pub fn single_qubit_cliffords() -> Vec<CMat> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = CMat::from_row_slice(2, 2, &[c(s2, 0.0), c(s2, 0.0), c(s2, 0.0), c(-s2, 0.0)]);
    let s = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    let canon = |m: &CMat| -> (CMat, Vec<i64>) {
        let pivot = m.iter().find(|z| z.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
        let m = m * (pivot.conj() / pivot.norm());
        let key = m
            .iter()
            .flat_map(|z| [(z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64])
            .collect();
        (m, key)
    };
    let (id, key) = canon(&linalg::identity(2));
    let mut seen = HashSet::from([key]);
    let mut group = vec![id];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier].clone();
        frontier += 1;
        for gen in [&h, &s] {
            let (m, key) = canon(&(gen * &g));
            if seen.insert(key) {
                group.push(m);
            }
        }
    }
    group
}

/// Logical Cliffords on the codespace as a design over `{code, complement}`.
pub fn logical_clifford_ensemble(code: &StabilizerCode) -> Result<DesignEnsemble> {
    if code.n_logical != 1 {
        return Err(Error::Capability("only single-logical-qubit codes are supported".into()));
    }
    let support: Vec<usize> = (0..code.n_physical).collect();
    let elements = single_qubit_cliffords()
        .iter()
        .map(|cl| DesignElement {
            gates: vec![Gate::Unitary {
                support: support.clone(),
                matrix: Arc::new(code.embed_logical(cl)),
            }],
        })
        .collect();
    DesignEnsemble::explicit("logical_clifford", code.codespace(), code.partition(), elements)
}

/// Logical gate `diag(1, e^{iπ/4})` on the codespace.
pub fn logical_t_gate(code: &StabilizerCode) -> Gate {
    let mut t = linalg::identity(2);
    t[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    Gate::unitary((0..code.n_physical).collect(), code.embed_logical(&t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomizerChoice {
    /// Independent probability-½ Z on every physical qubit.
    PhaseLayer,
    /// Non-selective syndrome measurement.
    MeasureOnly,
    /// Syndrome measurement followed by a uniformly random stabilizer element.
    MeasureAndRandomCorrect,
}

/// Non-selective syndrome measurement `ρ ↦ Σ_s Π_s ρ Π_s`.
pub fn syndrome_measurement(code: &StabilizerCode) -> Result<Channel> {
    Channel::from_kraus(code.n_physical, (0..code.n_physical).collect(), code.syndrome_projectors())
}

/// Majority-vote correction: measure the syndrome and flip the indicated qubit.
pub fn majority_vote_correction(code: &StabilizerCode) -> Result<Channel> {
    let n = code.n_physical;
    let kraus = code
        .syndrome_projectors()
        .into_iter()
        .zip(&code.corrections)
        .map(|(p, corr)| match corr {
            Some(q) => linalg::embed(&linalg::pauli::x(), &[*q], n) * p,
            None => p,
        })
        .collect();
    Channel::from_kraus(n, (0..n).collect(), kraus)
}

/// Per-round randomizer as a sampled stage.
pub fn randomizer_stage(choice: RandomizerChoice, code: &StabilizerCode) -> Result<RandomStage> {
    let n = code.n_physical;
    let z_list = |qs: &[usize]| -> Vec<Instruction> { qs.iter().map(|&q| Instruction::Gate(Gate::Z(q))).collect() };
    let alternatives = match choice {
        RandomizerChoice::PhaseLayer => (0..1usize << n)
            .map(|mask| z_list(&(0..n).filter(|q| mask >> q & 1 == 1).collect::<Vec<_>>()))
            .collect(),
        RandomizerChoice::MeasureOnly => vec![vec![Instruction::Channel(Arc::new(syndrome_measurement(code)?))]],
        RandomizerChoice::MeasureAndRandomCorrect => {
            let meas = Arc::new(syndrome_measurement(code)?);
            code.stabilizer_group()
                .iter()
                .map(|qs| {
                    let mut v = vec![Instruction::Channel(meas.clone())];
                    v.extend(z_list(qs));
                    v
                })
                .collect()
        }
    };
    RandomStage::new(format!("{choice:?}"), alternatives)
}

/// Averaged randomizer as a single channel.
pub fn randomizer(choice: RandomizerChoice, code: &StabilizerCode) -> Result<Channel> {
    let n = code.n_physical;
    let stage = randomizer_stage(choice, code)?;
    let w = c((1.0 / stage.alternatives.len() as f64).sqrt(), 0.0);
    let mut kraus = Vec::new();
    for alt in &stage.alternatives {
        let mut ks = vec![linalg::identity(1 << n)];
        for ins in alt {
            let next: Vec<CMat> = match ins {
                Instruction::Gate(g) => vec![g.full_matrix(n)],
                Instruction::Channel(ch) => ch.kraus_full(),
            };
            ks = next.iter().flat_map(|k| ks.iter().map(move |prev| k * prev)).collect();
        }
        kraus.extend(ks.into_iter().map(|k| k * w));
    }
    Channel::from_kraus(n, (0..n).collect(), kraus)
}

/// `(μ_F + μ_M + μ_G)^d`.
pub fn logical_error_bound(mu_f: f64, mu_m: f64, mu_g: f64, d: usize) -> Result<f64> {
    if [mu_f, mu_m, mu_g].iter().any(|r| !(*r >= 0.0)) {
        return arg("error rates must be non-negative");
    }
    if d < 1 {
        return arg("code distance must be at least 1");
    }
    Ok((mu_f + mu_m + mu_g).powi(d as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRates {
    pub feedback: f64,
    pub measurement: f64,
    pub gate: f64,
}

#[derive(Debug, Clone)]
pub struct EccBenchmark {
    pub code: StabilizerCode,
    pub noise: NoiseModel,
    pub randomizer: RandomizerChoice,
    /// Optional interleaved logical gate (with its noise).
    pub interleave: Option<InterleaveSet>,
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    pub shots: u64,
    pub seed: u64,
    pub fit: FitOptions,
    /// Externally estimated randomizer error rate `μ_R`.
    pub mu_randomizer: Option<f64>,
    pub component_rates: Option<ComponentRates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavedEcc {
    pub curve: DecayCurve,
    pub fit: FitResult,
    pub estimate: InterleavedEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EccReport {
    pub code: StabilizerCode,
    pub randomizer: RandomizerChoice,
    pub curve: DecayCurve,
    pub fit: FitResult,
    /// Leakage of the compound randomizer-plus-Clifford round.
    pub mu_rc: f64,
    pub mu_randomizer: Option<f64>,
    /// `μ_RC − μ_R` when `μ_R` is supplied.
    pub mu_clifford: Option<f64>,
    pub interleaved: Option<InterleavedEcc>,
    pub logical_error_bound: Option<f64>,
}

impl EccBenchmark {
    pub fn spec(&self, interleaved: bool) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(
            logical_clifford_ensemble(&self.code)?,
            self.noise.clone(),
            self.lengths.clone(),
            self.n_sequences,
            self.seed,
        )
        .with_randomizer(randomizer_stage(self.randomizer, &self.code)?)
        .with_shots(self.shots)
        .with_stream_tag(interleaved as u64);
        if interleaved {
            let set = self
                .interleave
                .clone()
                .ok_or_else(|| Error::Argument("no interleaved gate configured".into()))?;
            spec = spec.with_interleave(set);
        }
        Ok(spec)
    }
}

pub fn ecc_benchmark(cfg: &EccBenchmark) -> Result<EccReport> {
    let curve = estimate_curve(&cfg.spec(false)?)?;
    let fit = fit_decay(&curve, cfg.fit)?;
    let mu_rc = fit.mu;
    let interleaved = match &cfg.interleave {
        Some(_) => {
            let curve = estimate_curve(&cfg.spec(true)?)?;
            let ifit = fit_decay(&curve, cfg.fit)?;
            let estimate = interleaved_estimate(ifit.mu, mu_rc, cfg.code.logical_basis.len());
            Some(InterleavedEcc {
                curve,
                fit: ifit,
                estimate,
            })
        }
        None => None,
    };
    let logical_error_bound = cfg
        .component_rates
        .map(|r| logical_error_bound(r.feedback, r.measurement, r.gate, cfg.code.distance))
        .transpose()?;
    Ok(EccReport {
        code: cfg.code.clone(),
        randomizer: cfg.randomizer,
        mu_clifford: cfg.mu_randomizer.map(|r| mu_rc - r),
        mu_randomizer: cfg.mu_randomizer,
        curve,
        fit,
        mu_rc,
        interleaved,
        logical_error_bound,
    })
}
