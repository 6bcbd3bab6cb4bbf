//! Monte-Carlo benchmarking engine.
//!
//! A round applies a sampled design element (with any per-gate noise), an
//! optional randomizer stage, the global noise channel, and optionally a
//! uniformly sampled interleaved gate followed by its own noise. After `y`
//! rounds the population of the measured sector is read out, either exactly
//! or from a binomial shot sample.
//!
//! Every sequence draws from its own ChaCha stream selected by
//! `(stream tag, length, sequence index)`, so curves are bit-identical for a
//! fixed master seed regardless of how many worker threads run them.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{self, Channel, Gate, Instruction};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, CMat};
use crate::onedesign::{self, block_violation, DesignElement, DesignEnsemble, HalfTwirl};
use crate::qstate::{self, DensityMatrix, SymmetrySector};

/// Sequence lengths used when none are configured.
pub const DEFAULT_LENGTHS: [usize; 9] = [1, 2, 4, 6, 8, 12, 16, 24, 32];

/// Default schedule, dropping lengths whose predicted survival `(1 - mu)^y`
/// falls below `floor` (at least three lengths are always kept).
pub fn length_schedule(mu_guess: f64, floor: f64) -> Vec<usize> {
    let keep: Vec<usize> = DEFAULT_LENGTHS
        .iter()
        .copied()
        .filter(|&y| (1.0 - mu_guess).powi(y as i32) >= floor)
        .collect();
    if keep.len() >= 3 {
        keep
    } else {
        DEFAULT_LENGTHS[..3].to_vec()
    }
}

#[derive(Debug, Clone)]
pub enum NoiseModel {
    Noiseless,
    /// The same channel after every design element.
    Global(Arc<Channel>),
    /// A two-qubit channel after every iSWAP, on that iSWAP's pair. The
    /// channel is given on support `[0, 1]` and relocated to each pair.
    PerIswap(Arc<Channel>),
    /// Round-dependent global noise; round `j` uses `schedule[j % len]`.
    Schedule(Vec<Arc<Channel>>),
}

impl NoiseModel {
    pub fn global(ch: Channel) -> Self {
        NoiseModel::Global(Arc::new(ch))
    }

    pub fn per_iswap(pair_channel: Channel) -> Result<Self> {
        if pair_channel.support().len() != 2 {
            return arg("per-iSWAP noise must act on exactly two qubits");
        }
        Ok(NoiseModel::PerIswap(Arc::new(pair_channel)))
    }
}

/// A stage that applies one of several instruction lists, chosen uniformly.
#[derive(Debug, Clone)]
pub struct RandomStage {
    pub name: String,
    pub alternatives: Vec<Vec<Instruction>>,
}

impl RandomStage {
    pub fn new(name: impl Into<String>, alternatives: Vec<Vec<Instruction>>) -> Result<Self> {
        if alternatives.is_empty() {
            return arg("random stage needs at least one alternative");
        }
        Ok(Self {
            name: name.into(),
            alternatives,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[Instruction] {
        if self.alternatives.len() == 1 {
            &self.alternatives[0]
        } else {
            &self.alternatives[rng.random_range(0..self.alternatives.len())]
        }
    }

    /// Exact average over the alternatives.
    pub fn average(&self, m: &CMat) -> CMat {
        let w = c(1.0 / self.alternatives.len() as f64, 0.0);
        let parts = self
            .alternatives
            .iter()
            .map(|alt| {
                let mut t = m.clone();
                channels::run_instructions(alt, &mut t);
                t * w
            })
            .collect();
        linalg::tree_sum(parts).expect("non-empty stage")
    }
}

/// Gates interleaved between design rounds, each followed by `noise`.
#[derive(Debug, Clone)]
pub struct InterleaveSet {
    pub gates: Vec<Gate>,
    pub noise: Option<Arc<Channel>>,
}

impl InterleaveSet {
    pub fn new(gates: Vec<Gate>, noise: Option<Channel>) -> Result<Self> {
        if gates.is_empty() {
            return arg("interleave set must contain at least one gate");
        }
        Ok(Self {
            gates,
            noise: noise.map(Arc::new),
        })
    }

    fn stage(&self) -> RandomStage {
        let alternatives = self
            .gates
            .iter()
            .map(|g| {
                let mut v = vec![Instruction::Gate(g.clone())];
                if let Some(n) = &self.noise {
                    v.push(Instruction::Channel(n.clone()));
                }
                v
            })
            .collect();
        RandomStage {
            name: "interleave".into(),
            alternatives,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Spam {
    pub prep: Option<Arc<Channel>>,
    pub meas: Option<Arc<Channel>>,
}

/// Full description of one benchmarking campaign.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub design: DesignEnsemble,
    /// Sector whose population is read out.
    pub measure: SymmetrySector,
    /// Conserved sectors that interleaved gates must respect.
    pub partition: Vec<SymmetrySector>,
    pub initial_state: DensityMatrix,
    pub noise: NoiseModel,
    pub randomizer: Option<RandomStage>,
    pub interleave: Option<InterleaveSet>,
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    /// 0 reads out the exact population.
    pub shots: u64,
    pub spam: Spam,
    pub seed: u64,
    /// Selects an independent family of sequence streams for the same seed.
    pub stream_tag: u64,
}

/// Lowest-index basis state of the sector; for number sectors this is the
/// state with the `gamma` lowest qubits excited.
pub fn default_initial_state(sector: &SymmetrySector) -> DensityMatrix {
    DensityMatrix::basis_state(sector.n_qubits(), sector.indices()[0]).expect("sector index is in range")
}

impl ExperimentSpec {
    pub fn new(design: DesignEnsemble, noise: NoiseModel, lengths: Vec<usize>, n_sequences: usize, seed: u64) -> Self {
        let measure = design.sector().clone();
        Self {
            initial_state: default_initial_state(&measure),
            partition: design.partition().to_vec(),
            measure,
            design,
            noise,
            randomizer: None,
            interleave: None,
            lengths,
            n_sequences,
            shots: 0,
            spam: Spam::default(),
            seed,
            stream_tag: 0,
        }
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_interleave(mut self, set: InterleaveSet) -> Self {
        self.interleave = Some(set);
        self
    }

    pub fn with_randomizer(mut self, stage: RandomStage) -> Self {
        self.randomizer = Some(stage);
        self
    }

    pub fn with_initial_state(mut self, rho: DensityMatrix) -> Self {
        self.initial_state = rho;
        self
    }

    pub fn with_measurement(mut self, measure: SymmetrySector, partition: Vec<SymmetrySector>) -> Self {
        self.measure = measure;
        self.partition = partition;
        self
    }

    pub fn with_stream_tag(mut self, tag: u64) -> Self {
        self.stream_tag = tag;
        self
    }

    /// Adds preparation and measurement errors.
    pub fn with_spam(mut self, prep: Option<Channel>, meas: Option<Channel>) -> Self {
        self.spam = Spam {
            prep: prep.map(Arc::new),
            meas: meas.map(Arc::new),
        };
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.design.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if self.lengths.is_empty() {
            return arg("at least one sequence length is required");
        }
        if self.lengths[0] < 1 || self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return arg("lengths must be strictly increasing and at least 1");
        }
        if self.n_sequences < 1 {
            return arg("n_sequences must be at least 1");
        }
        if self.measure.n_qubits() != n || self.initial_state.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.measure.n_qubits(),
            });
        }
        let channels_n = [&self.spam.prep, &self.spam.meas]
            .into_iter()
            .flatten()
            .map(|c| c.n_qubits())
            .chain(match &self.noise {
                NoiseModel::Global(ch) | NoiseModel::PerIswap(ch) => vec![ch.n_qubits()],
                NoiseModel::Schedule(v) => v.iter().map(|c| c.n_qubits()).collect(),
                NoiseModel::Noiseless => vec![],
            });
        for m in channels_n {
            if m != n {
                return Err(Error::DimensionMismatch { expected: n, got: m });
            }
        }
        if let NoiseModel::Schedule(v) = &self.noise {
            if v.is_empty() {
                return arg("noise schedule is empty");
            }
        }
        if let Some(set) = &self.interleave {
            for g in &set.gates {
                let v = block_violation(&g.full_matrix(n), &self.partition);
                if v > 1e-12 {
                    return Err(Error::Validation(format!(
                        "interleaved gate on {:?} mixes conserved sectors (off-block entry {v:e})",
                        g.support()
                    )));
                }
            }
            if let Some(ch) = &set.noise {
                if ch.n_qubits() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: ch.n_qubits(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Deterministic stream for sequence `index` at length `length`.
pub fn sequence_rng(seed: u64, tag: u64, length: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix(splitmix(tag ^ splitmix(length as u64)) ^ index as u64));
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-run caches derived from a validated spec.
struct Engine<'a> {
    spec: &'a ExperimentSpec,
    /// iSWAP followed by the pair noise, keyed by the iSWAP's pair.
    noisy_iswaps: HashMap<(usize, usize), Channel>,
    interleave: Option<RandomStage>,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let mut noisy_iswaps = HashMap::new();
        if let NoiseModel::PerIswap(pair) = &spec.noise {
            let n = spec.n_qubits();
            for a in 0..n {
                for b in a + 1..n {
                    let noise = pair.relocated(vec![a, b])?;
                    let gate = Gate::Iswap(channels::Iswap { a, b }).as_channel(n)?;
                    noisy_iswaps.insert((a, b), noise.after(&gate)?);
                }
            }
        }
        Ok(Self {
            spec,
            noisy_iswaps,
            interleave: spec.interleave.as_ref().map(InterleaveSet::stage),
        })
    }

    fn apply_element(&self, element: &DesignElement, m: &mut CMat) {
        for g in &element.gates {
            match (g, self.noisy_iswaps.is_empty()) {
                (Gate::Iswap(s), false) => {
                    let key = (s.a.min(s.b), s.a.max(s.b));
                    self.noisy_iswaps[&key].apply_in_place(m);
                }
                _ => g.apply_in_place(m),
            }
        }
    }

    fn apply_global_noise(&self, round: usize, m: &mut CMat) {
        match &self.spec.noise {
            NoiseModel::Global(ch) => ch.apply_in_place(m),
            NoiseModel::Schedule(v) => v[round % v.len()].apply_in_place(m),
            _ => {}
        }
    }

    fn prepare(&self) -> CMat {
        let mut m = self.spec.initial_state.matrix().clone();
        if let Some(p) = &self.spec.spam.prep {
            p.apply_in_place(&mut m);
        }
        m
    }

    fn read_out(&self, mut m: CMat) -> f64 {
        if let Some(p) = &self.spec.spam.meas {
            p.apply_in_place(&mut m);
        }
        qstate::raw_population(&m, &self.spec.measure).clamp(0.0, 1.0)
    }

    fn run<R: Rng + ?Sized>(&self, y: usize, rng: &mut R) -> f64 {
        let mut m = self.prepare();
        for round in 0..y {
            let element = self.spec.design.sample(rng);
            self.apply_element(&element, &mut m);
            if let Some(r) = &self.spec.randomizer {
                channels::run_instructions(r.sample(rng), &mut m);
            }
            self.apply_global_noise(round, &mut m);
            if let Some(stage) = &self.interleave {
                channels::run_instructions(stage.sample(rng), &mut m);
            }
        }
        let p = self.read_out(m);
        sample_shots(p, self.spec.shots, rng)
    }
}

fn sample_shots<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> f64 {
    if shots == 0 {
        return p;
    }
    let hits = Binomial::new(shots, p).expect("probability clamped to [0, 1]").sample(rng);
    hits as f64 / shots as f64
}

/// Survival of one random sequence of length `y`.
pub fn run_sequence<R: Rng + ?Sized>(spec: &ExperimentSpec, y: usize, rng: &mut R) -> Result<f64> {
    Ok(Engine::new(spec)?.run(y, rng))
}

/// Exact one-application leakage of a noisy interleave set out of `sector`,
/// averaged over its gates and started from the sector's mixed state.
pub fn interleave_leakage(set: &InterleaveSet, sector: &SymmetrySector) -> f64 {
    let mixed = qstate::maximally_mixed(sector);
    let kept: f64 = set
        .gates
        .iter()
        .map(|g| {
            let mut m = mixed.matrix().clone();
            g.apply_in_place(&mut m);
            if let Some(ch) = &set.noise {
                ch.apply_in_place(&mut m);
            }
            qstate::raw_population(&m, sector)
        })
        .sum();
    1.0 - kept / set.gates.len() as f64
}

/// Choices made in one round of a fixed sequence.
#[derive(Debug, Clone)]
pub struct RoundChoice {
    pub element: DesignElement,
    pub randomizer: usize,
    pub interleave: usize,
}

/// Exact survival of a fully specified sequence (no sampling anywhere).
pub fn run_fixed_sequence(spec: &ExperimentSpec, rounds: &[RoundChoice]) -> Result<f64> {
    let engine = Engine::new(spec)?;
    let mut m = engine.prepare();
    for (round, choice) in rounds.iter().enumerate() {
        engine.apply_element(&choice.element, &mut m);
        if let Some(r) = &spec.randomizer {
            let alt = r
                .alternatives
                .get(choice.randomizer)
                .ok_or_else(|| Error::Argument("randomizer choice out of range".into()))?;
            channels::run_instructions(alt, &mut m);
        }
        engine.apply_global_noise(round, &mut m);
        if let Some(stage) = &engine.interleave {
            let alt = stage
                .alternatives
                .get(choice.interleave)
                .ok_or_else(|| Error::Argument("interleave choice out of range".into()))?;
            channels::run_instructions(alt, &mut m);
        }
    }
    Ok(engine.read_out(m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub length: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n_sequences: usize,
    pub shots: u64,
}

/// Mean survival per sequence length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub points: Vec<CurvePoint>,
}

pub const CSV_HEADER: [&str; 5] = ["length", "mean", "stderr", "n_sequences", "shots"];

impl DecayCurve {
    pub fn lengths(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.length).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.length.to_string(),
                p.mean.to_string(),
                p.stderr.to_string(),
                p.n_sequences.to_string(),
                p.shots.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii output")
    }

    /// Parses curve CSV. Only `length` and `mean` are required; a missing
    /// `stderr` column is reported through the returned flag and read as 0.
    pub fn from_csv(text: &str) -> Result<(DecayCurve, bool)> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(ic_len), Some(ic_mean)) = (col("length"), col("mean")) else {
            return Err(Error::Parse("CSV needs 'length' and 'mean' columns".into()));
        };
        let (ic_se, ic_n, ic_shots) = (col("stderr"), col("n_sequences"), col("shots"));
        let mut points = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let line = row + 2;
            let field = |i: usize| -> Result<&str> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("line {line}: missing field {}", headers.get(i).unwrap_or("?"))))
            };
            let num = |i: usize| -> Result<f64> {
                let s = field(i)?;
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: '{s}' is not a number")))
            };
            let int = |i: usize| -> Result<u64> {
                let s = field(i)?;
                s.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("line {line}: '{s}' is not a non-negative integer")))
            };
            points.push(CurvePoint {
                length: int(ic_len)? as usize,
                mean: num(ic_mean)?,
                stderr: ic_se.map(num).transpose()?.unwrap_or(0.0),
                n_sequences: ic_n.map(int).transpose()?.unwrap_or(1) as usize,
                shots: ic_shots.map(int).transpose()?.unwrap_or(0),
            });
        }
        if points.is_empty() {
            return Err(Error::Parse("CSV has no data rows".into()));
        }
        Ok((DecayCurve { points }, ic_se.is_none()))
    }

    /// Whitespace-separated `length mean stderr` rows for plotting.
    pub fn to_plot_data(&self) -> String {
        let mut s = String::from("# length mean stderr\n");
        for p in &self.points {
            s.push_str(&format!("{} {} {}\n", p.length, p.mean, p.stderr));
        }
        s
    }

    /// SHA-256 of the CSV serialization.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}

fn aggregate(spec: &ExperimentSpec, survivals: &[f64]) -> DecayCurve {
    let ns = spec.n_sequences;
    let points = spec
        .lengths
        .iter()
        .enumerate()
        .map(|(li, &length)| {
            let chunk = &survivals[li * ns..(li + 1) * ns];
            let mean = chunk.iter().sum::<f64>() / ns as f64;
            let stderr = if ns > 1 {
                let var = chunk.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (ns - 1) as f64;
                (var / ns as f64).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                length,
                mean,
                stderr,
                n_sequences: ns,
                shots: spec.shots,
            }
        })
        .collect();
    DecayCurve { points }
}

/// Mean survival and standard error at every configured length.
pub fn estimate_curve(spec: &ExperimentSpec) -> Result<DecayCurve> {
    let engine = Engine::new(spec)?;
    let ns = spec.n_sequences;
    let survivals: Vec<f64> = (0..spec.lengths.len() * ns)
        .into_par_iter()
        .map(|task| {
            let y = spec.lengths[task / ns];
            let mut rng = sequence_rng(spec.seed, spec.stream_tag, y, task % ns);
            engine.run(y, &mut rng)
        })
        .collect();
    Ok(aggregate(spec, &survivals))
}

/// Curve of the interleaved sequences; `spec.interleave` must be set.
pub fn interleaved_curve(spec: &ExperimentSpec) -> Result<DecayCurve> {
    if spec.interleave.is_none() {
        return arg("interleaved curve requested without an interleave set");
    }
    estimate_curve(spec)
}

/// Exact expectation of the protocol by full enumeration of the design and
/// exact averaging of every other random stage.
pub struct ExactOracle<'a> {
    engine: Engine<'a>,
    members: Vec<(DesignElement, f64)>,
    /// Ideal design average, when the noise does not depend on the element.
    ideal_average: Option<channels::Superoperator>,
}

impl<'a> ExactOracle<'a> {
    pub fn new(spec: &'a ExperimentSpec) -> Result<Self> {
        let engine = Engine::new(spec)?;
        if matches!(spec.noise, NoiseModel::Schedule(_)) {
            return Err(Error::Capability("exact oracle needs stationary noise".into()));
        }
        let members = spec.design.enumerate()?;
        let ideal_average = if engine.noisy_iswaps.is_empty() && spec.n_qubits() <= 5 {
            Some(onedesign::design_average(&spec.design)?)
        } else {
            None
        };
        Ok(Self {
            engine,
            members,
            ideal_average,
        })
    }

    /// One round averaged over every random choice.
    pub fn apply_round(&self, m: &CMat) -> CMat {
        let mut out = match &self.ideal_average {
            Some(s) => s.apply_matrix(m),
            None => linalg::par_sum(self.members.len(), |k| {
                let (e, w) = &self.members[k];
                let mut t = m.clone();
                self.engine.apply_element(e, &mut t);
                t * c(*w, 0.0)
            })
            .expect("non-empty ensemble"),
        };
        if let Some(r) = &self.engine.spec.randomizer {
            out = r.average(&out);
        }
        self.engine.apply_global_noise(0, &mut out);
        if let Some(stage) = &self.engine.interleave {
            out = stage.average(&out);
        }
        out
    }

    /// Exact expected survival at each length (including SPAM).
    pub fn curve(&self, lengths: &[usize]) -> Vec<f64> {
        let mut m = self.engine.prepare();
        let mut done = 0;
        lengths
            .iter()
            .map(|&y| {
                while done < y {
                    m = self.apply_round(&m);
                    done += 1;
                }
                self.engine.read_out(m.clone())
            })
            .collect()
    }

    pub fn gamma(&self, y: usize) -> f64 {
        self.curve(&[y])[0]
    }

    /// Dense superoperator of the averaged round.
    pub fn half_twirl(&self) -> Result<HalfTwirl> {
        let n = self.engine.spec.n_qubits();
        let d = 1usize << n;
        let columns: Vec<CMat> = (0..d * d)
            .into_par_iter()
            .map(|unit| {
                let mut e = CMat::zeros(d, d);
                e[(unit % d, unit / d)] = c(1.0, 0.0);
                self.apply_round(&e)
            })
            .collect();
        let mut s = CMat::zeros(d * d, d * d);
        for (col, m) in columns.iter().enumerate() {
            s.column_mut(col).copy_from_slice(m.as_slice());
        }
        Ok(HalfTwirl::from_superoperator(channels::Superoperator::from_matrix(n, s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::dilated_noise;
    use crate::onedesign::number_design;

    fn spec_n3(noise: NoiseModel) -> ExperimentSpec {
        ExperimentSpec::new(number_design(3, 1).unwrap(), noise, vec![1, 2, 4], 10, 5)
    }

    #[test]
    fn identity_noise_survives() {
        let spec = spec_n3(NoiseModel::Noiseless);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for y in [1, 3, 7] {
            assert!((run_sequence(&spec, y, &mut rng).unwrap() - 1.0).abs() < 1e-12);
        }
        let shots = spec_n3(NoiseModel::Noiseless).with_shots(100);
        assert_eq!(run_sequence(&shots, 5, &mut rng).unwrap(), 1.0);
        let curve = estimate_curve(&spec).unwrap();
        for p in &curve.points {
            assert!((p.mean - 1.0).abs() < 1e-12);
            assert!(p.stderr < 1e-12);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = spec_n3(NoiseModel::Noiseless);
        spec.lengths = vec![2, 2];
        assert!(spec.validate().is_err());
        spec.lengths = vec![0, 1];
        assert!(spec.validate().is_err());
        spec.lengths = vec![];
        assert!(spec.validate().is_err());
        let mut spec = spec_n3(NoiseModel::Noiseless);
        spec.n_sequences = 0;
        assert!(spec.validate().is_err());

        // X on one qubit changes the excitation number
        let bad = InterleaveSet::new(vec![Gate::unitary(vec![0], linalg::pauli::x())], None).unwrap();
        let spec = spec_n3(NoiseModel::Noiseless).with_interleave(bad);
        assert!(matches!(estimate_curve(&spec), Err(Error::Validation(_))));
        let no_set = spec_n3(NoiseModel::Noiseless);
        assert!(interleaved_curve(&no_set).is_err());
    }

    #[test]
    fn full_enumeration_matches_oracle() {
        let noise = dilated_noise(3, (0, 1), 0.1, 7).unwrap();
        let spec = spec_n3(NoiseModel::global(noise));
        let members = spec.design.enumerate().unwrap();
        let mean: f64 = members
            .iter()
            .map(|(e, w)| {
                let rc = RoundChoice {
                    element: e.clone(),
                    randomizer: 0,
                    interleave: 0,
                };
                w * run_fixed_sequence(&spec, &[rc]).unwrap()
            })
            .sum();
        let oracle = ExactOracle::new(&spec).unwrap();
        assert!((oracle.gamma(1) - mean).abs() < 1e-12);
        let ht = onedesign::half_twirl(
            match &spec.noise {
                NoiseModel::Global(ch) => ch,
                _ => unreachable!(),
            },
            &spec.design,
        )
        .unwrap();
        let g1 = onedesign::exact_gamma(&ht, 1, &spec.initial_state, &spec.measure).unwrap();
        assert!((g1 - mean).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let noise = dilated_noise(3, (1, 2), 0.2, 3).unwrap();
        let spec = spec_n3(NoiseModel::global(noise)).with_shots(50);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_curve(&spec).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a.to_csv(), run(8).to_csv());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let curve = DecayCurve {
            points: vec![
                CurvePoint { length: 1, mean: 0.99, stderr: 0.001, n_sequences: 10, shots: 0 },
                CurvePoint { length: 4, mean: 0.1 + 0.2, stderr: 0.0, n_sequences: 10, shots: 0 },
            ],
        };
        let text = curve.to_csv();
        assert!(text.starts_with("length,mean,stderr,n_sequences,shots\n"));
        let (back, missing) = DecayCurve::from_csv(&text).unwrap();
        assert_eq!(back, curve);
        assert!(!missing);
        let (_, missing) = DecayCurve::from_csv("length,mean\n1,0.9\n2,0.8\n").unwrap();
        assert!(missing);
        assert!(DecayCurve::from_csv("length,mean\n1,abc\n").is_err());
        assert!(DecayCurve::from_csv("a,b\n1,2\n").is_err());
        assert!(DecayCurve::from_csv("length,mean\n").is_err());
    }

    #[test]
    fn schedule_clipping() {
        assert_eq!(length_schedule(0.0, 0.5).len(), DEFAULT_LENGTHS.len());
        let short = length_schedule(0.1, 0.2);
        assert!(short.iter().all(|&y| 0.9f64.powi(y as i32) >= 0.2));
        assert_eq!(length_schedule(0.9, 0.5), vec![1, 2, 4]);
    }
}
