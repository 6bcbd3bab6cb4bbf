//! Config-driven campaigns: the JSON schema and a runner that produces the
//! output files in memory.
//!
//! Outputs depend only on the config, so reruns with the same seed are
//! byte-identical whatever the worker count.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::channels::{self, Channel, Gate, Iswap};
use crate::eccbench::{self, ComponentRates, EccBenchmark, RandomizerChoice};
use crate::error::{Error, Result};
use crate::fitting::{fit_decay, interleaved_estimate, FitOptions, FitResult};
use crate::onedesign::{self, DesignEnsemble, VerificationReport};
use crate::parity::{self, Parity, ParityBenchmark};
use crate::protocol::{self, DecayCurve, ExactOracle, ExperimentSpec, InterleaveSet, NoiseModel, DEFAULT_LENGTHS};
use crate::qstate::{self, DensityMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema_version: u32,
    pub n_qubits: usize,
    pub experiment: Experiment,
    #[serde(default)]
    pub noise: ChannelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interleave: Option<InterleaveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    pub n_sequences: usize,
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub spam: SpamConfig,
    /// Master seed; there is no implicit entropy source.
    pub seed: u64,
    #[serde(default = "default_fit_order")]
    pub fit_order: usize,
    /// Basis index of the initial state; defaults to the lowest index in the sector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<usize>,
    /// Also compute the exact expected curve by enumerating the design.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_fit_order() -> usize {
    1
}

fn default_output_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Dat]
}

fn default_pair_theta() -> f64 {
    FRAC_PI_4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Dat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignChoice {
    #[default]
    Number,
    Permutation,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Number {
        sector: usize,
        #[serde(default)]
        design: DesignChoice,
    },
    Parity {
        parity: Parity,
    },
    Ecc {
        code: String,
        randomizer: RandomizerChoice,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu_randomizer: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        component_rates: Option<ComponentRates>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    #[default]
    Identity,
    /// Dilated unitary noise on one qubit pair.
    Dilated { qubits: [usize; 2], epsilon: f64, seed: u64 },
    /// Dilated pair noise after every iSWAP (design noise only).
    PerIswapDilated { epsilon: f64, seed: u64 },
    Depolarizing { p: f64 },
    BitFlip { p: f64 },
    XRotation { theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateConfig {
    Identity,
    Pair {
        qubits: [usize; 2],
        #[serde(default = "default_pair_theta")]
        theta: f64,
    },
    Iswap {
        qubits: [usize; 2],
    },
    Z {
        qubit: usize,
    },
    LogicalT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveConfig {
    pub gates: Vec<GateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<ChannelConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas: Option<ChannelConfig>,
}

fn field_err<T>(field: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Validation(format!("field `{field}`: {msg}")))
}

impl ChannelConfig {
    pub fn build(&self, n: usize, field: &str) -> Result<Channel> {
        let wrap = |r: Result<Channel>| r.map_err(|e| Error::Validation(format!("field `{field}`: {e}")));
        match self {
            ChannelConfig::Identity => Ok(Channel::identity(n)),
            ChannelConfig::Dilated { qubits, epsilon, seed } => {
                wrap(channels::dilated_noise(n, (qubits[0], qubits[1]), *epsilon, *seed))
            }
            ChannelConfig::PerIswapDilated { .. } => field_err(field, "per-iSWAP noise is only valid as design noise"),
            ChannelConfig::Depolarizing { p } => wrap(channels::depolarizing(n, *p)),
            ChannelConfig::BitFlip { p } => wrap(channels::bit_flip(n, *p)),
            ChannelConfig::XRotation { theta } => wrap(channels::x_rotation(n, *theta)),
        }
    }

    pub fn noise_model(&self, n: usize) -> Result<NoiseModel> {
        match self {
            ChannelConfig::Identity => Ok(NoiseModel::Noiseless),
            ChannelConfig::PerIswapDilated { epsilon, seed } => {
                let pair = channels::dilated_noise(n, (0, 1), *epsilon, *seed)
                    .map_err(|e| Error::Validation(format!("field `noise`: {e}")))?;
                NoiseModel::per_iswap(pair)
            }
            other => Ok(NoiseModel::global(other.build(n, "noise")?)),
        }
    }
}

impl GateConfig {
    fn build(&self, n: usize, code: Option<&eccbench::StabilizerCode>) -> Result<Gate> {
        let check = |qs: &[usize]| -> Result<()> {
            if qs.iter().any(|&q| q >= n) || (qs.len() == 2 && qs[0] == qs[1]) {
                return field_err("interleave.gates", format!("invalid qubits {qs:?} for {n} qubits"));
            }
            Ok(())
        };
        match self {
            GateConfig::Identity => Ok(Gate::unitary(vec![], crate::linalg::identity(1))),
            GateConfig::Pair { qubits, theta } => {
                check(qubits)?;
                parity::pair_gate(qubits[0], qubits[1], *theta)
            }
            GateConfig::Iswap { qubits } => {
                check(qubits)?;
                Ok(Gate::Iswap(Iswap {
                    a: qubits[0],
                    b: qubits[1],
                }))
            }
            GateConfig::Z { qubit } => {
                check(&[*qubit])?;
                Ok(Gate::Z(*qubit))
            }
            GateConfig::LogicalT => match code {
                Some(c) => Ok(eccbench::logical_t_gate(c)),
                None => field_err("interleave.gates", "logical_t needs an ecc experiment"),
            },
        }
    }
}

/// Parses a config, reporting the line and column of syntax and type errors
/// and the field name of semantic errors.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let cfg: CampaignConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl CampaignConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.lengths.clone().unwrap_or_else(|| DEFAULT_LENGTHS.to_vec())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions::order(self.fit_order)
    }

    fn code(&self) -> Result<Option<eccbench::StabilizerCode>> {
        match &self.experiment {
            Experiment::Ecc { code, .. } => {
                eccbench::build_code(code).map(Some).map_err(|e| Error::Validation(format!("field `experiment.code`: {e}")))
            }
            _ => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return field_err(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            );
        }
        if self.n_qubits == 0 || self.n_qubits > qstate::MAX_QUBITS {
            return field_err("n_qubits", format!("must be between 1 and {}", qstate::MAX_QUBITS));
        }
        if self.n_sequences == 0 {
            return field_err("n_sequences", "must be at least 1");
        }
        if !(1..=2).contains(&self.fit_order) {
            return field_err("fit_order", "must be 1 or 2");
        }
        let lengths = self.lengths();
        if lengths.len() < 3 || lengths[0] < 1 || lengths.windows(2).any(|w| w[0] >= w[1]) {
            return field_err("lengths", "need at least three strictly increasing lengths, all at least 1");
        }
        if self.formats.is_empty() {
            return field_err("formats", "at least one output format is required");
        }
        match &self.experiment {
            Experiment::Number { sector, .. } => {
                if *sector > self.n_qubits {
                    return field_err("experiment.sector", format!("must be at most n_qubits = {}", self.n_qubits));
                }
            }
            Experiment::Parity { .. } => {
                if self.n_qubits % 2 == 1 {
                    return field_err("n_qubits", "parity experiments need an even qubit count");
                }
                if self.interleave.is_none() {
                    return field_err("interleave", "parity experiments need an interleaved gate");
                }
                if self.initial_state.is_some() {
                    return field_err("initial_state", "parity experiments start in each number sector");
                }
            }
            Experiment::Ecc { .. } => {
                let code = self.code()?.expect("ecc experiment");
                if code.n_physical != self.n_qubits {
                    return field_err("n_qubits", format!("code '{}' has {} qubits", code.name, code.n_physical));
                }
            }
        }
        if let Some(i) = self.initial_state {
            if i >= 1usize << self.n_qubits {
                return field_err("initial_state", "basis index out of range");
            }
        }
        // Building every object surfaces remaining range errors with field names.
        self.noise.noise_model(self.n_qubits)?;
        if let Some(p) = &self.spam.prep {
            p.build(self.n_qubits, "spam.prep")?;
        }
        if let Some(m) = &self.spam.meas {
            m.build(self.n_qubits, "spam.meas")?;
        }
        if let Some(set) = self.interleave_set()? {
            if set.gates.is_empty() {
                return field_err("interleave.gates", "must not be empty");
            }
        }
        Ok(())
    }

    fn interleave_set(&self) -> Result<Option<InterleaveSet>> {
        let Some(ic) = &self.interleave else {
            return Ok(None);
        };
        if ic.gates.is_empty() {
            return field_err("interleave.gates", "must not be empty");
        }
        let code = self.code()?;
        let gates = ic
            .gates
            .iter()
            .map(|g| g.build(self.n_qubits, code.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let noise = ic
            .noise
            .as_ref()
            .map(|c| c.build(self.n_qubits, "interleave.noise"))
            .transpose()?;
        InterleaveSet::new(gates, noise).map(Some)
    }

    /// Design ensemble used for `number` and `ecc` experiments.
    pub fn ensemble(&self) -> Result<DesignEnsemble> {
        let n = self.n_qubits;
        match &self.experiment {
            Experiment::Number { sector, design } => match design {
                DesignChoice::Number => onedesign::number_design(n, *sector),
                DesignChoice::Permutation => onedesign::permutation_design(n, *sector),
                DesignChoice::Identity => Ok(onedesign::identity_design(
                    qstate::sector_indices(n, *sector)?,
                    qstate::number_sectors(n)?,
                )),
            },
            Experiment::Ecc { .. } => eccbench::logical_clifford_ensemble(&self.code()?.expect("ecc experiment")),
            Experiment::Parity { .. } => Err(Error::Argument(
                "parity experiments use one number design per sector; verify a number experiment instead".into(),
            )),
        }
    }

    fn apply_common(&self, mut spec: ExperimentSpec) -> Result<ExperimentSpec> {
        let n = self.n_qubits;
        spec = spec.with_shots(self.shots).with_spam(
            self.spam.prep.as_ref().map(|c| c.build(n, "spam.prep")).transpose()?,
            self.spam.meas.as_ref().map(|c| c.build(n, "spam.meas")).transpose()?,
        );
        if let Some(i) = self.initial_state {
            spec = spec.with_initial_state(DensityMatrix::basis_state(n, i)?);
        }
        Ok(spec)
    }

    /// Experiment spec for `number` and `ecc` campaigns.
    pub fn experiment_spec(&self, interleaved: bool) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(
            self.ensemble()?,
            self.noise.noise_model(self.n_qubits)?,
            self.lengths(),
            self.n_sequences,
            self.seed,
        )
        .with_stream_tag(interleaved as u64);
        if let Experiment::Ecc { randomizer, .. } = &self.experiment {
            spec = spec.with_randomizer(eccbench::randomizer_stage(*randomizer, &self.code()?.expect("ecc"))?);
        }
        if interleaved {
            let set = self
                .interleave_set()?
                .ok_or_else(|| Error::Argument("no interleave set configured".into()))?;
            spec = spec.with_interleave(set);
        }
        self.apply_common(spec)
    }
}

/// Files produced by a campaign, keyed by relative file name.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub files: BTreeMap<String, String>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct OracleSummary {
    lengths: Vec<usize>,
    gamma: Vec<f64>,
    gamma1: f64,
    mu: f64,
}

fn oracle_summary(spec: &ExperimentSpec) -> Result<OracleSummary> {
    let oracle = ExactOracle::new(spec)?;
    let gamma = oracle.curve(&spec.lengths);
    let gamma1 = oracle.gamma(1);
    Ok(OracleSummary {
        lengths: spec.lengths.clone(),
        gamma,
        gamma1,
        mu: 1.0 - gamma1,
    })
}

struct Writer<'a> {
    cfg: &'a CampaignConfig,
    files: BTreeMap<String, String>,
}

impl Writer<'_> {
    fn curve(&mut self, stem: &str, curve: &DecayCurve, fit: &FitResult) {
        if self.cfg.formats.contains(&Format::Csv) {
            self.files.insert(format!("{stem}.csv"), curve.to_csv());
        }
        if self.cfg.formats.contains(&Format::Dat) {
            self.files.insert(format!("{stem}.dat"), curve.to_plot_data());
        }
        if self.cfg.formats.contains(&Format::Json) {
            self.files.insert(format!("{stem}_fit.json"), pretty(fit));
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs the configured campaign.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    cfg.validate()?;
    let mut w = Writer {
        cfg,
        files: BTreeMap::new(),
    };
    let (result, summary) = match &cfg.experiment {
        Experiment::Number { .. } => run_number(cfg, &mut w)?,
        Experiment::Parity { parity } => run_parity(cfg, *parity, &mut w)?,
        Experiment::Ecc {
            mu_randomizer,
            component_rates,
            ..
        } => run_ecc(cfg, *mu_randomizer, *component_rates, &mut w)?,
    };
    let report = json!({
        "config": cfg,
        "seed": cfg.seed,
        "result": result,
    });
    if cfg.formats.contains(&Format::Json) {
        w.files.insert("report.json".into(), pretty(&report));
    }
    Ok(CampaignOutput {
        files: w.files,
        summary,
    })
}

fn run_number(cfg: &CampaignConfig, w: &mut Writer) -> Result<(serde_json::Value, String)> {
    let spec = cfg.experiment_spec(false)?;
    let curve = protocol::estimate_curve(&spec)?;
    let fit = fit_decay(&curve, cfg.fit_options())?;
    w.curve("reference", &curve, &fit);
    let mut summary = format!("reference: mu = {:.6e} +- {:.2e}\n", fit.mu, fit.mu_stderr);
    let mut result = json!({ "reference": { "curve": curve, "fit": fit } });
    if cfg.oracle {
        let o = oracle_summary(&spec)?;
        summary.push_str(&format!("reference oracle: mu = {:.6e}\n", o.mu));
        result["reference"]["oracle"] = json!(o);
    }
    if cfg.interleave.is_some() {
        let ispec = cfg.experiment_spec(true)?;
        let icurve = protocol::interleaved_curve(&ispec)?;
        let ifit = fit_decay(&icurve, cfg.fit_options())?;
        w.curve("interleaved", &icurve, &ifit);
        let est = interleaved_estimate(ifit.mu, fit.mu, spec.measure.dim());
        summary.push_str(&format!(
            "interleaved: mu = {:.6e}; estimate {:.6e} in [{:.6e}, {:.6e}]\n",
            ifit.mu, est.point, est.lower, est.upper
        ));
        result["interleaved"] = json!({ "curve": icurve, "fit": ifit });
        if cfg.oracle {
            result["interleaved"]["oracle"] = json!(oracle_summary(&ispec)?);
            let set = cfg.interleave_set()?.expect("interleave configured");
            result["interleaved"]["exact_leakage"] = json!(protocol::interleave_leakage(&set, &spec.measure));
        }
        result["estimate"] = json!(est);
    }
    Ok((result, summary))
}

fn run_parity(cfg: &CampaignConfig, parity: Parity, w: &mut Writer) -> Result<(serde_json::Value, String)> {
    let n = cfg.n_qubits;
    let bench = ParityBenchmark {
        n_qubits: n,
        parity,
        noise: cfg.noise.noise_model(n)?,
        interleave: cfg.interleave_set()?.expect("validated"),
        lengths: cfg.lengths(),
        n_sequences: cfg.n_sequences,
        shots: cfg.shots,
        seed: cfg.seed,
        fit: cfg.fit_options(),
    };
    let report = parity::parity_benchmark(&bench)?;
    for s in &report.sectors {
        w.curve(&format!("sector{}_reference", s.gamma), &s.reference, &s.reference_fit);
        w.curve(&format!("sector{}_interleaved", s.gamma), &s.interleaved, &s.interleaved_fit);
    }
    let e = &report.estimate;
    let summary = format!(
        "combined: mu_D = {:.6e}, mu_ID = {:.6e}; estimate {:.6e} in [{:.6e}, {:.6e}]\n",
        report.combined_mu_reference, report.combined_mu_interleaved, e.point, e.lower, e.upper
    );
    let mut result = json!(report);
    if cfg.oracle {
        result["exact_interleave_leakage"] = json!(parity::interleave_leakage(&bench.interleave, n, parity)?);
    }
    Ok((result, summary))
}

fn run_ecc(
    cfg: &CampaignConfig,
    mu_randomizer: Option<f64>,
    component_rates: Option<ComponentRates>,
    w: &mut Writer,
) -> Result<(serde_json::Value, String)> {
    let Experiment::Ecc { randomizer, .. } = &cfg.experiment else {
        unreachable!("called for ecc experiments")
    };
    let bench = EccBenchmark {
        code: cfg.code()?.expect("ecc"),
        noise: cfg.noise.noise_model(cfg.n_qubits)?,
        randomizer: *randomizer,
        interleave: cfg.interleave_set()?,
        lengths: cfg.lengths(),
        n_sequences: cfg.n_sequences,
        shots: cfg.shots,
        seed: cfg.seed,
        fit: cfg.fit_options(),
        mu_randomizer,
        component_rates,
    };
    let report = eccbench::ecc_benchmark(&bench)?;
    w.curve("reference", &report.curve, &report.fit);
    if let Some(i) = &report.interleaved {
        w.curve("interleaved", &i.curve, &i.fit);
    }
    let summary = format!("mu_RC = {:.6e} +- {:.2e}\n", report.mu_rc, report.fit.mu_stderr);
    let mut result = json!(report);
    if cfg.oracle {
        result["oracle"] = json!(oracle_summary(&bench.spec(false)?)?);
    }
    Ok((result, summary))
}

/// Verification of the configured ensemble, exact or from `samples` draws.
pub fn run_verification(cfg: &CampaignConfig, samples: Option<usize>) -> Result<VerificationReport> {
    cfg.validate()?;
    let ens = cfg.ensemble()?;
    match samples {
        None => onedesign::verify_one_design(&ens),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            onedesign::verify_one_design_sampled(&ens, s, 0.01, &mut rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "n_qubits": 3,
        "experiment": {"kind": "number", "sector": 1},
        "n_sequences": 4,
        "lengths": [1, 2, 4],
        "seed": 9
    }"#;

    #[test]
    fn minimal_config_runs_flat() {
        let cfg = parse_config(MINIMAL).unwrap();
        let out = run_campaign(&cfg).unwrap();
        let (curve, _) = DecayCurve::from_csv(&out.files["reference.csv"]).unwrap();
        assert!(curve.points.iter().all(|p| p.mean == 1.0));
        assert!(out.files.contains_key("reference.dat"));
        assert!(out.files.contains_key("reference_fit.json"));
        let report: serde_json::Value = serde_json::from_str(&out.files["report.json"]).unwrap();
        assert_eq!(report["seed"], 9);
        assert_eq!(report["config"]["n_qubits"], 3);
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "schema_version": 1, "n_qubits": 4,
            "experiment": {"kind": "parity", "parity": "even"},
            "noise": {"type": "dilated", "qubits": [0, 2], "epsilon": 0.1, "seed": 3},
            "interleave": {"gates": [{"type": "pair", "qubits": [1, 2]}], "noise": {"type": "depolarizing", "p": 0.01}},
            "n_sequences": 5, "shots": 100, "seed": 18446744073709551615,
            "spam": {"prep": {"type": "bit_flip", "p": 0.02}},
            "formats": ["csv"]
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
        let ecc = r#"{"schema_version": 1, "n_qubits": 3, "n_sequences": 2, "seed": 1,
            "experiment": {"kind": "ecc", "code": "three_qubit_bitflip", "randomizer": "measure_only", "mu_randomizer": 0.001},
            "noise": {"type": "x_rotation", "theta": 0.05}, "interleave": {"gates": [{"type": "logical_t"}]}}"#;
        let cfg = parse_config(ecc).unwrap();
        assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_location() {
        let unknown = MINIMAL.replace("\"seed\": 9", "\"seed\": 9, \"sed\": 1");
        let e = parse_config(&unknown).unwrap_err().to_string();
        assert!(e.contains("sed") && e.contains("line"), "{e}");
        let missing_seed = MINIMAL.replace(",\n        \"seed\": 9", "");
        assert!(parse_config(&missing_seed).unwrap_err().to_string().contains("seed"));
        let bad_sector = MINIMAL.replace("\"sector\": 1", "\"sector\": 7");
        assert!(parse_config(&bad_sector).unwrap_err().to_string().contains("experiment.sector"));
        let bad_version = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(parse_config(&bad_version).unwrap_err().to_string().contains("schema_version"));
        let bad_noise = MINIMAL.replace("\"seed\": 9", "\"seed\": 9, \"noise\": {\"type\": \"depolarizing\", \"p\": 2.0}");
        assert!(parse_config(&bad_noise).unwrap_err().to_string().contains("noise"));
    }

    #[test]
    fn verification_modes() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert!(run_verification(&cfg, None).unwrap().passed);
        assert!(run_verification(&cfg, Some(500)).unwrap().passed);
        let perm = parse_config(&MINIMAL.replace("\"sector\": 1", "\"sector\": 1, \"design\": \"permutation\"")).unwrap();
        assert!(!run_verification(&perm, None).unwrap().passed);
    }
}
