//! Batch experiment driver: sweep definitions, paired Monte Carlo trials,
//! CSV/JSON artifacts, and static SVG charts.
//!
//! An experiment is described by an [`ExperimentSpec`] (usually loaded from a
//! TOML file). [`run_experiment`] expands it into one job per `(sweep point,
//! trial)`, runs every requested scheme on identical channels within a trial
//! (trial `i` always uses seed `base_seed + i`), and writes `results.csv`,
//! `summary.json`, `manifest.json`, `failures.csv`, and one SVG chart per
//! sweep axis into the output directory.
//!
//! All artifacts are deterministic functions of the spec file and seed, across
//! runs and across worker thread counts, with one documented exception: the
//! `runtime_s` column records wall-clock time unless `record_runtime` is
//! disabled, in which case it is written as zero and the whole output set is
//! byte-stable.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{alternate_with_q_search, min_sinr_fixed, AoAjhbfScheme, AoConfig};
use crate::channel::synthesize_channel;
use crate::error::{Error, Result};
use crate::priors::{build_priors, quantizer_alpha, EstimationConfig, EstimationMode, PriorStreams};
use crate::scene::{generate_scenario, ScenarioConfig};
use crate::wmmse::WmmseScheme;

/// Column order of `results.csv`; stable across releases.
pub const RESULTS_HEADER: &str =
    "sweep_axis,sweep_value,scheme,trial,seed,q_watts,jsr_db,min_xi_db,runtime_s";

/// Column order of `failures.csv`.
pub const FAILURES_HEADER: &str = "sweep_axis,sweep_value,scheme,trial,seed,error";

/// The jamming-to-signal ratio definition used everywhere in the artifacts,
/// echoed verbatim into `summary.json` and `manifest.json` so downstream
/// consumers can tell which convention produced the numbers.
pub const JSR_FORMULA: &str =
    "jsr_db = 10*log10(G*K*q_star / (K*P_max)) = 10*log10(G*q_star/P_max); \
     floored at -300 dB when the ratio is zero";

/// One-sided significance level for paired scheme comparisons.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Floor applied to all dB quantities so logs of zero stay finite.
pub const DB_FLOOR: f64 = -300.0;

/// Registered transceiver design strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    /// Alternating quotient combiners + smoothed max-min precoders with
    /// phase-shifter factorization, run on quantized channel estimates.
    AoAjhbf,
    /// Weighted-MMSE baseline under the same jamming-power search.
    Wmmse,
    /// The first scheme on unquantized estimates (same estimation noise
    /// draws, quantization stage disabled).
    AoAjhbfNoquant,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::AoAjhbf, SchemeId::Wmmse, SchemeId::AoAjhbfNoquant];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::AoAjhbf => "ao-ajhbf",
            SchemeId::Wmmse => "wmmse",
            SchemeId::AoAjhbfNoquant => "ao-ajhbf-noquant",
        }
    }

    /// Whether this scheme consumes the quantized prior set.
    pub fn quantized(&self) -> bool {
        !matches!(self, SchemeId::AoAjhbfNoquant)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scheme '{s}'")))
    }
}

/// Scenario quantity varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Antennas per access point.
    MPerAp,
    /// Number of jammers; the total jammer antenna budget of the base
    /// config is held fixed and split evenly across them.
    JammerCount,
    /// Target estimation NMSE (synthetic estimation mode only).
    Nmse,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::MPerAp => "m-per-ap",
            SweepAxis::JammerCount => "jammer-count",
            SweepAxis::Nmse => "nmse",
        }
    }

    /// Identifier used in artifact file names.
    pub fn slug(&self) -> &'static str {
        match self {
            SweepAxis::MPerAp => "m_per_ap",
            SweepAxis::JammerCount => "jammer_count",
            SweepAxis::Nmse => "nmse",
        }
    }

    /// Human-readable chart axis label.
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::MPerAp => "antennas per AP",
            SweepAxis::JammerCount => "jammer count",
            SweepAxis::Nmse => "target NMSE",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::MPerAp, SweepAxis::JammerCount, SweepAxis::Nmse]
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep axis '{s}'")))
    }
}

/// Named base configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Reduced antenna counts for sub-minute suites.
    Desk,
    /// Full-size antenna counts.
    Paper,
}

impl Preset {
    pub fn scenario(&self) -> ScenarioConfig {
        match self {
            Preset::Desk => ScenarioConfig::desk(),
            Preset::Paper => ScenarioConfig::paper(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::Parse(format!("unknown preset '{other}' (expected desk|paper)"))),
        }
    }
}

/// One sweep: an axis and the values it takes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Overrides for the alternating outer loop.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoOverrides {
    /// Improvement rounds of the outer loop.
    pub rounds: Option<usize>,
}

fn default_name() -> String {
    "experiment".to_string()
}

fn default_true() -> bool {
    true
}

/// Full description of a batch experiment; deserializable from TOML.
///
/// Required keys: `version` (must be 1), `trials`, `base_seed`, `schemes`,
/// and at least one `[[sweeps]]` table. The scenario baseline comes from
/// `preset` (default desk) or an explicit `[scenario]` table, never both.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Schema version; this release reads version 1.
    pub version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    /// Named scenario baseline; mutually exclusive with `scenario`.
    #[serde(default)]
    pub preset: Option<Preset>,
    /// Monte Carlo trials per sweep point.
    pub trials: usize,
    /// Trial `i` runs with seed `base_seed + i`.
    pub base_seed: u64,
    /// Schemes run on every trial, in this order.
    pub schemes: Vec<SchemeId>,
    /// Output directory; CLI flags may override it.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub sweeps: Vec<SweepSpec>,
    /// Explicit scenario baseline; unset fields fall back to the desk
    /// values. The per-trial seed overwrites `rng_seed`.
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
    /// Estimation / quantization settings shared by all points.
    #[serde(default)]
    pub estimation: Option<EstimationConfig>,
    #[serde(default)]
    pub ao: Option<AoOverrides>,
    /// When false, the `runtime_s` column is written as zero so repeated
    /// runs are byte-identical.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

impl ExperimentSpec {
    /// Parse from TOML text and validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Parse(format!("experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Load from a TOML file and validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Scenario baseline before sweep overrides.
    pub fn base_scenario(&self) -> Result<ScenarioConfig> {
        match (&self.scenario, &self.preset) {
            (Some(_), Some(_)) => Err(Error::Config(
                "specify either 'preset' or a [scenario] table, not both".into(),
            )),
            (Some(sc), None) => Ok(sc.clone()),
            (None, Some(p)) => Ok(p.scenario()),
            (None, None) => Ok(ScenarioConfig::desk()),
        }
    }

    /// Estimation settings baseline.
    pub fn base_estimation(&self) -> EstimationConfig {
        self.estimation.clone().unwrap_or_default()
    }

    /// Outer-loop configuration after overrides.
    pub fn ao_config(&self) -> AoConfig {
        let mut cfg = AoConfig::default();
        if let Some(ao) = &self.ao {
            if let Some(rounds) = ao.rounds {
                cfg.rounds = rounds;
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::Config(format!(
                "unsupported experiment spec version {} (this release reads version 1)",
                self.version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must be non-empty".into()));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(Error::Config(format!("scheme '{s}' listed twice")));
            }
        }
        if self.sweeps.is_empty() {
            return Err(Error::Config("at least one [[sweeps]] table is required".into()));
        }
        let base = self.base_scenario()?;
        base.validate()?;
        let est = self.base_estimation();
        est.validate(base.ues)?;
        for (i, sweep) in self.sweeps.iter().enumerate() {
            if self.sweeps[..i].iter().any(|s| s.axis == sweep.axis) {
                return Err(Error::Config(format!("sweep axis '{}' listed twice", sweep.axis)));
            }
            if sweep.values.is_empty() {
                return Err(Error::Config(format!("sweep '{}' has no values", sweep.axis)));
            }
            for (j, &v) in sweep.values.iter().enumerate() {
                if sweep.values[..j].contains(&v) {
                    return Err(Error::Config(format!(
                        "sweep '{}' lists value {v} twice",
                        sweep.axis
                    )));
                }
                validate_sweep_value(&base, &est, sweep.axis, v)?;
            }
        }
        Ok(())
    }
}

fn require_positive_integer(axis: SweepAxis, v: f64) -> Result<usize> {
    if !v.is_finite() || v.fract() != 0.0 || v < 1.0 {
        return Err(Error::Config(format!(
            "sweep '{axis}' needs positive integer values, got {v}"
        )));
    }
    Ok(v as usize)
}

fn validate_sweep_value(
    base: &ScenarioConfig,
    est: &EstimationConfig,
    axis: SweepAxis,
    v: f64,
) -> Result<()> {
    match axis {
        SweepAxis::MPerAp => {
            let m = require_positive_integer(axis, v)?;
            if m < base.ap_rf_chains {
                return Err(Error::Config(format!(
                    "sweep value {m} antennas per AP is below the {} RF chains",
                    base.ap_rf_chains
                )));
            }
        }
        SweepAxis::JammerCount => {
            let g = require_positive_integer(axis, v)?;
            let total = base.jammers * base.jammer_antennas;
            if total == 0 {
                return Err(Error::Config(
                    "jammer-count sweep needs a base config with jammers".into(),
                ));
            }
            if total % g != 0 {
                return Err(Error::Config(format!(
                    "cannot split {total} total jammer antennas evenly over {g} jammers"
                )));
            }
        }
        SweepAxis::Nmse => {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!(
                    "sweep 'nmse' values must lie in (0, 1], got {v}"
                )));
            }
            if est.mode != EstimationMode::SyntheticNmse {
                return Err(Error::Config(
                    "nmse sweep requires the synthetic-nmse estimation mode".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Specialize the baseline configs to one sweep point.
pub fn apply_sweep(
    base: &ScenarioConfig,
    est: &EstimationConfig,
    axis: SweepAxis,
    value: f64,
) -> Result<(ScenarioConfig, EstimationConfig)> {
    validate_sweep_value(base, est, axis, value)?;
    let mut scenario = base.clone();
    let mut est = est.clone();
    match axis {
        SweepAxis::MPerAp => scenario.ap_antennas = value as usize,
        SweepAxis::JammerCount => {
            let g = value as usize;
            scenario.jammer_antennas = base.jammers * base.jammer_antennas / g;
            scenario.jammers = g;
        }
        SweepAxis::Nmse => est.nmse_target = value,
    }
    Ok((scenario, est))
}

/// One completed scheme run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub trial: usize,
    pub seed: u64,
    /// Largest jamming power per jammer that keeps every user feasible.
    pub q_watts: f64,
    /// Total resistible jamming power over the total power budget, in dB.
    pub jsr_db: f64,
    /// Smallest per-user SINR bound at `q_watts`, in dB.
    pub min_xi_db: f64,
    /// Scheme wall time in seconds (zero when runtime recording is off).
    pub runtime_s: f64,
}

/// One scheme run that errored; the experiment continues past it.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialFailure {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

/// Jamming-to-signal ratio in dB; see [`JSR_FORMULA`].
pub fn jsr_db(q_watts: f64, jammers: usize, p_max_watts: f64) -> f64 {
    let linear = jammers as f64 * q_watts / p_max_watts;
    if linear <= 0.0 {
        DB_FLOOR
    } else {
        (10.0 * linear.log10()).max(DB_FLOOR)
    }
}

fn to_db_floored(linear: f64) -> f64 {
    if linear <= 0.0 {
        DB_FLOOR
    } else {
        (10.0 * linear.log10()).max(DB_FLOOR)
    }
}

struct TrialJob {
    axis: SweepAxis,
    value: f64,
    trial: usize,
    seed: u64,
    scenario: ScenarioConfig,
    estimation: EstimationConfig,
}

struct SchedulePlan<'a> {
    schemes: &'a [SchemeId],
    ao: AoConfig,
    record_runtime: bool,
}

fn run_scheme(
    scheme: SchemeId,
    scenario: &ScenarioConfig,
    priors: &crate::priors::PriorSet,
    ao: &AoConfig,
) -> Result<(f64, f64)> {
    let outcome = match scheme {
        SchemeId::AoAjhbf | SchemeId::AoAjhbfNoquant => {
            let mut s = AoAjhbfScheme::for_scenario(scenario);
            alternate_with_q_search(priors, &mut s, ao)?
        }
        SchemeId::Wmmse => {
            let mut s = WmmseScheme::for_scenario(scenario);
            alternate_with_q_search(priors, &mut s, ao)?
        }
    };
    let q = outcome.search.q_watts;
    let min_xi = min_sinr_fixed(priors, &outcome.state, q);
    Ok((q, min_xi))
}

/// Run every scheme of one trial on shared channels and priors.
fn run_point_trial(job: &TrialJob, plan: &SchedulePlan) -> (Vec<RunRecord>, Vec<TrialFailure>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let fail = |scheme: SchemeId, error: String| TrialFailure {
        sweep_axis: job.axis,
        sweep_value: job.value,
        scheme,
        trial: job.trial,
        seed: job.seed,
        error,
    };

    let mut scenario_cfg = job.scenario.clone();
    scenario_cfg.rng_seed = job.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let prepared = generate_scenario(&scenario_cfg, &mut rng)
        .and_then(|scenario| synthesize_channel(&scenario, &mut rng).map(|cw| (scenario, cw)));
    let (scenario, (geometry, channels)) = match prepared {
        Ok(v) => v,
        Err(e) => {
            failures.extend(plan.schemes.iter().map(|&s| fail(s, e.to_string())));
            return (records, failures);
        }
    };

    // Both prior sets reuse the same stream seeds, so the unquantized
    // variant sees the identical estimation noise draws.
    let build = |est: &EstimationConfig| {
        build_priors(&scenario, &geometry, &channels, est, &mut PriorStreams::from_seed(job.seed))
    };
    let quantized = plan
        .schemes
        .iter()
        .any(|s| s.quantized())
        .then(|| build(&job.estimation));
    let unquantized = plan.schemes.contains(&SchemeId::AoAjhbfNoquant).then(|| {
        let mut est = job.estimation.clone();
        est.quantizer_bits = None;
        build(&est)
    });

    for &scheme in plan.schemes {
        let priors = if scheme.quantized() { &quantized } else { &unquantized };
        let priors = match priors.as_ref().expect("prior set prepared for scheme") {
            Ok(p) => p,
            Err(e) => {
                failures.push(fail(scheme, e.to_string()));
                continue;
            }
        };
        let started = Instant::now();
        match run_scheme(scheme, &scenario.config, priors, &plan.ao) {
            Ok((q, min_xi)) => records.push(RunRecord {
                sweep_axis: job.axis,
                sweep_value: job.value,
                scheme,
                trial: job.trial,
                seed: job.seed,
                q_watts: q,
                jsr_db: jsr_db(q, scenario.config.jammers, scenario.config.p_max_watts),
                min_xi_db: to_db_floored(min_xi),
                // Quantized to the csv column's microsecond precision so
                // summarizing the written table reproduces the run summary.
                runtime_s: if plan.record_runtime {
                    (started.elapsed().as_secs_f64() * 1e6).round() / 1e6
                } else {
                    0.0
                },
            }),
            Err(e) => failures.push(fail(scheme, e.to_string())),
        }
    }
    (records, failures)
}

/// Render records in the stable `results.csv` schema.
pub fn results_csv_string(records: &[RunRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{:?},{},{},{},{:?},{:?},{:?},{:.6}\n",
            r.sweep_axis,
            r.sweep_value,
            r.scheme,
            r.trial,
            r.seed,
            r.q_watts,
            r.jsr_db,
            r.min_xi_db,
            r.runtime_s
        ));
    }
    out
}

/// Render failures; the error text is flattened so rows never need quoting.
pub fn failures_csv_string(failures: &[TrialFailure]) -> String {
    let mut out = String::from(FAILURES_HEADER);
    out.push('\n');
    for f in failures {
        let flat: String = f
            .error
            .chars()
            .map(|ch| match ch {
                ',' => ';',
                '\n' | '\r' => ' ',
                c => c,
            })
            .collect();
        out.push_str(&format!(
            "{},{:?},{},{},{},{flat}\n",
            f.sweep_axis, f.sweep_value, f.scheme, f.trial, f.seed
        ));
    }
    out
}

/// Parse text in the `results.csv` schema.
pub fn parse_results_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == RESULTS_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Parse(format!(
                "unexpected results header '{header}' (expected '{RESULTS_HEADER}')"
            )))
        }
        None => return Err(Error::Parse("empty results file".into())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse(format!(
                "line {}: expected 9 fields, found {}",
                idx + 1,
                fields.len()
            )));
        }
        let num = |j: usize| -> Result<f64> {
            fields[j]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: field {}: {e}", idx + 1, j + 1)))
        };
        records.push(RunRecord {
            sweep_axis: fields[0].parse()?,
            sweep_value: num(1)?,
            scheme: fields[2].parse()?,
            trial: fields[3]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: trial: {e}", idx + 1)))?,
            seed: fields[4]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: seed: {e}", idx + 1)))?,
            q_watts: num(5)?,
            jsr_db: num(6)?,
            min_xi_db: num(7)?,
            runtime_s: num(8)?,
        });
    }
    Ok(records)
}

/// Read and parse a `results.csv` file.
pub fn load_results_csv(path: &Path) -> Result<Vec<RunRecord>> {
    parse_results_csv(&fs::read_to_string(path)?)
}

/// Aggregates for one `(axis, value, scheme)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub trials: usize,
    pub mean_q_watts: f64,
    /// Arithmetic mean of the per-trial dB values.
    pub mean_jsr_db: f64,
    /// dB of the mean linear ratio; robust to the -300 dB floor.
    pub linear_mean_jsr_db: f64,
    /// Sample standard deviation of the dB values; absent below 2 trials.
    pub stddev_jsr_db: Option<f64>,
    pub stderr_jsr_db: Option<f64>,
    pub mean_min_xi_db: f64,
    pub mean_runtime_s: f64,
}

/// Direction of the mean JSR along one axis for one scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    Flat,
    Mixed,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl fmt::Display for TrendDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendDirection::Increasing => "increasing",
            TrendDirection::Decreasing => "decreasing",
            TrendDirection::Flat => "flat",
            TrendDirection::Mixed => "mixed",
            TrendDirection::NotApplicable => "n/a",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub sweep_axis: SweepAxis,
    pub scheme: SchemeId,
    pub direction: TrendDirection,
    /// True when every step moves strictly in the stated direction.
    pub strict: bool,
    pub points: usize,
}

/// Paired one-sided sign test of `scheme` beating `baseline` on `q_watts`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub baseline: SchemeId,
    pub pairs: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Exact binomial tail probability; absent when every pair tied.
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// Everything `summary.json` holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: u32,
    pub jsr_formula: String,
    pub significance_level: f64,
    pub points: Vec<PointSummary>,
    pub trends: Vec<TrendVerdict>,
    pub comparisons: Vec<PairedComparison>,
}

/// Exact one-sided sign test: probability of at least `wins` successes in
/// `informative` fair coin flips.
pub fn sign_test_p_one_sided(wins: usize, informative: usize) -> f64 {
    if informative == 0 {
        return 1.0;
    }
    let n = informative;
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let p: f64 = (wins.min(n)..=n)
        .map(|i| (ln_fact[n] - ln_fact[i] - ln_fact[n - i] - ln_half_n).exp())
        .sum();
    p.min(1.0)
}

/// Key wrapper giving f64 a total order for grouping.
#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn trend_of(means: &[f64]) -> (TrendDirection, bool) {
    if means.len() < 2 {
        return (TrendDirection::NotApplicable, false);
    }
    let (mut up, mut down, mut zero) = (0usize, 0usize, 0usize);
    for pair in means.windows(2) {
        let d = pair[1] - pair[0];
        if d > 0.0 {
            up += 1;
        } else if d < 0.0 {
            down += 1;
        } else {
            zero += 1;
        }
    }
    if up == 0 && down == 0 {
        (TrendDirection::Flat, false)
    } else if down == 0 {
        (TrendDirection::Increasing, zero == 0)
    } else if up == 0 {
        (TrendDirection::Decreasing, zero == 0)
    } else {
        (TrendDirection::Mixed, false)
    }
}

/// Aggregate records into per-point statistics, per-axis trend verdicts,
/// and paired scheme comparisons.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut groups: BTreeMap<(SweepAxis, OrdF64, SchemeId), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.sweep_axis, OrdF64(r.sweep_value), r.scheme))
            .or_default()
            .push(r);
    }

    let points: Vec<PointSummary> = groups
        .iter()
        .map(|(&(axis, OrdF64(value), scheme), rows)| {
            let n = rows.len();
            let mean_jsr = mean(rows.iter().map(|r| r.jsr_db));
            let stddev = (n >= 2).then(|| {
                let ss: f64 = rows.iter().map(|r| (r.jsr_db - mean_jsr).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            });
            PointSummary {
                sweep_axis: axis,
                sweep_value: value,
                scheme,
                trials: n,
                mean_q_watts: mean(rows.iter().map(|r| r.q_watts)),
                mean_jsr_db: mean_jsr,
                linear_mean_jsr_db: to_db_floored(mean(
                    rows.iter().map(|r| 10f64.powf(r.jsr_db / 10.0)),
                )),
                stddev_jsr_db: stddev,
                stderr_jsr_db: stddev.map(|s| s / (n as f64).sqrt()),
                mean_min_xi_db: mean(rows.iter().map(|r| r.min_xi_db)),
                mean_runtime_s: mean(rows.iter().map(|r| r.runtime_s)),
            }
        })
        .collect();

    // Trend of the mean dB JSR along each axis, per scheme, values ascending.
    let mut by_axis_scheme: BTreeMap<(SweepAxis, SchemeId), Vec<&PointSummary>> = BTreeMap::new();
    for p in &points {
        by_axis_scheme.entry((p.sweep_axis, p.scheme)).or_default().push(p);
    }
    let trends: Vec<TrendVerdict> = by_axis_scheme
        .iter()
        .map(|(&(axis, scheme), pts)| {
            let means: Vec<f64> = pts.iter().map(|p| p.mean_jsr_db).collect();
            let (direction, strict) = trend_of(&means);
            TrendVerdict { sweep_axis: axis, scheme, direction, strict, points: pts.len() }
        })
        .collect();

    // Paired per-trial comparisons of the proposed scheme against every
    // other scheme present at the same point.
    let mut comparisons = Vec::new();
    let mut cells: BTreeMap<(SweepAxis, OrdF64), Vec<SchemeId>> = BTreeMap::new();
    for &(axis, value, scheme) in groups.keys() {
        cells.entry((axis, value)).or_default().push(scheme);
    }
    for (&(axis, OrdF64(value)), schemes) in &cells {
        if !schemes.contains(&SchemeId::AoAjhbf) {
            continue;
        }
        let own: BTreeMap<usize, f64> = groups[&(axis, OrdF64(value), SchemeId::AoAjhbf)]
            .iter()
            .map(|r| (r.trial, r.q_watts))
            .collect();
        for &baseline in schemes.iter().filter(|&&s| s != SchemeId::AoAjhbf) {
            let (mut wins, mut ties, mut losses) = (0usize, 0usize, 0usize);
            for r in &groups[&(axis, OrdF64(value), baseline)] {
                let Some(&q_own) = own.get(&r.trial) else { continue };
                if q_own > r.q_watts {
                    wins += 1;
                } else if q_own < r.q_watts {
                    losses += 1;
                } else {
                    ties += 1;
                }
            }
            let informative = wins + losses;
            let p_value = (informative > 0).then(|| sign_test_p_one_sided(wins, informative));
            comparisons.push(PairedComparison {
                sweep_axis: axis,
                sweep_value: value,
                scheme: SchemeId::AoAjhbf,
                baseline,
                pairs: wins + ties + losses,
                wins,
                ties,
                losses,
                p_value,
                significant: p_value.is_some_and(|p| p < SIGNIFICANCE_LEVEL),
            });
        }
    }

    Summary {
        version: 1,
        jsr_formula: JSR_FORMULA.to_string(),
        significance_level: SIGNIFICANCE_LEVEL,
        points,
        trends,
        comparisons,
    }
}

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn scheme_color(s: SchemeId) -> &'static str {
    match s {
        SchemeId::AoAjhbf => "#1f77b4",
        SchemeId::Wmmse => "#d62728",
        SchemeId::AoAjhbfNoquant => "#2ca02c",
    }
}

struct ChartSeries {
    scheme: SchemeId,
    /// `(raw value, transformed x, mean, stderr)` sorted by x.
    pts: Vec<(f64, f64, f64, Option<f64>)>,
}

/// Build one line chart; `axis` None renders bare axes for an empty summary.
fn svg_chart(axis: Option<SweepAxis>, series: &[ChartSeries]) -> String {
    let x0 = MARGIN_L;
    let x1 = CHART_W - MARGIN_R;
    let y0 = CHART_H - MARGIN_B;
    let y1 = MARGIN_T;

    let xs: Vec<f64> = series.iter().flat_map(|s| s.pts.iter().map(|p| p.1)).collect();
    let (mut xmin, mut xmax) = bounds(&xs, 0.0);
    if xmin == xmax {
        xmin -= 0.5;
        xmax += 0.5;
    }
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| {
            s.pts.iter().flat_map(|&(_, _, m, e)| {
                let e = e.unwrap_or(0.0);
                [m - e, m + e]
            })
        })
        .collect();
    let (mut ymin, mut ymax) = bounds(&ys, 0.0);
    if ymin == ymax {
        ymin -= 1.0;
        ymax += 1.0;
    } else {
        let pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }
    let px = |x: f64| x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
    let py = |y: f64| y0 - (y - ymin) / (ymax - ymin) * (y0 - y1);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W:.0}\" height=\"{CHART_H:.0}\" \
         viewBox=\"0 0 {CHART_W:.0} {CHART_H:.0}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{CHART_W:.0}\" height=\"{CHART_H:.0}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<line class=\"axis\" x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line class=\"axis\" x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n"
    ));

    // X ticks at the sweep values themselves.
    let mut seen = Vec::new();
    for s in series {
        for &(raw, x, _, _) in &s.pts {
            if seen.iter().any(|&(r, _)| r == raw) {
                continue;
            }
            seen.push((raw, x));
        }
    }
    seen.sort_by(|a, b| a.1.total_cmp(&b.1));
    for &(raw, x) in &seen {
        let label = match axis {
            Some(SweepAxis::Nmse) => format!("{raw:?}"),
            _ => format!("{raw:.0}"),
        };
        let p = px(x);
        svg.push_str(&format!(
            "<line x1=\"{p:.2}\" y1=\"{y0:.2}\" x2=\"{p:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{p:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{label}</text>\n",
            y0 + 22.0
        ));
    }
    // Y ticks: five evenly spaced levels.
    for i in 0..5 {
        let y = ymin + (ymax - ymin) * i as f64 / 4.0;
        let p = py(y);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{p:.2}\" x2=\"{x0:.2}\" y2=\"{p:.2}\" stroke=\"black\"/>\n",
            x0 - 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y:.1}</text>\n",
            x0 - 10.0,
            p + 4.0
        ));
    }

    for s in series {
        let color = scheme_color(s.scheme);
        for &(_, x, m, e) in &s.pts {
            let Some(e) = e else { continue };
            if e <= 0.0 {
                continue;
            }
            let (cx, ylo, yhi) = (px(x), py(m - e), py(m + e));
            svg.push_str(&format!(
                "<line class=\"errbar\" x1=\"{cx:.2}\" y1=\"{ylo:.2}\" x2=\"{cx:.2}\" y2=\"{yhi:.2}\" stroke=\"{color}\"/>\n"
            ));
            for yc in [ylo, yhi] {
                svg.push_str(&format!(
                    "<line class=\"errbar\" x1=\"{:.2}\" y1=\"{yc:.2}\" x2=\"{:.2}\" y2=\"{yc:.2}\" stroke=\"{color}\"/>\n",
                    cx - 4.0,
                    cx + 4.0
                ));
            }
        }
        let path: Vec<String> =
            s.pts.iter().map(|&(_, x, m, _)| format!("{:.2},{:.2}", px(x), py(m))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(_, x, m, _) in &s.pts {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>\n",
                px(x),
                py(m)
            ));
        }
    }

    for (i, s) in series.iter().enumerate() {
        let color = scheme_color(s.scheme);
        let y = y1 + 10.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line class=\"legend\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            x0 + 12.0,
            x0 + 40.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            x0 + 46.0,
            y + 4.0,
            s.scheme
        ));
    }

    let x_label = axis.map(|a| a.label()).unwrap_or("sweep value");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        (x0 + x1) / 2.0,
        CHART_H - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">mean JSR (dB)</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">mean resistible JSR vs {x_label}</text>\n",
        (x0 + x1) / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64], fallback: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if min > max {
        (fallback, fallback)
    } else {
        (min, max)
    }
}

/// Write one JSR chart per sweep axis present in the summary; an empty
/// summary yields a single bare-axes chart. Returns the written paths.
pub fn emit_plots(summary: &Summary, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    if summary.points.is_empty() {
        let path = out_dir.join("jsr_vs_empty.svg");
        fs::write(&path, svg_chart(None, &[]))?;
        written.push(path);
        return Ok(written);
    }
    let mut by_axis: BTreeMap<SweepAxis, BTreeMap<SchemeId, Vec<&PointSummary>>> = BTreeMap::new();
    for p in &summary.points {
        by_axis.entry(p.sweep_axis).or_default().entry(p.scheme).or_default().push(p);
    }
    for (axis, by_scheme) in &by_axis {
        let series: Vec<ChartSeries> = by_scheme
            .iter()
            .map(|(&scheme, pts)| {
                let mut pts: Vec<(f64, f64, f64, Option<f64>)> = pts
                    .iter()
                    .map(|p| {
                        let x = if *axis == SweepAxis::Nmse {
                            p.sweep_value.log10()
                        } else {
                            p.sweep_value
                        };
                        (p.sweep_value, x, p.mean_jsr_db, p.stderr_jsr_db)
                    })
                    .collect();
                pts.sort_by(|a, b| a.1.total_cmp(&b.1));
                ChartSeries { scheme, pts }
            })
            .collect();
        let path = out_dir.join(format!("jsr_vs_{}.svg", axis.slug()));
        fs::write(&path, svg_chart(Some(*axis), &series))?;
        written.push(path);
    }
    Ok(written)
}

/// Reproducibility sidecar written next to the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub name: String,
    pub preset: Option<Preset>,
    pub base_seed: u64,
    pub trials: usize,
    pub schemes: Vec<SchemeId>,
    pub sweeps: Vec<SweepSpec>,
    pub scenario: ScenarioConfig,
    pub estimation: EstimationConfig,
    pub ao_rounds: usize,
    pub quantizer_bits: Option<u32>,
    /// Exact scaling factor of the configured quantizer resolution
    /// (1.0 when quantization is disabled).
    pub quantizer_alpha: f64,
    pub jsr_formula: String,
    pub record_runtime: bool,
    /// Scheme runs attempted: sweep points x trials x schemes.
    pub scheme_trials: usize,
}

/// Everything one experiment produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
    pub failures: Vec<TrialFailure>,
    pub summary: Summary,
    pub out_dir: PathBuf,
    pub results_csv: PathBuf,
    pub failures_csv: PathBuf,
    pub summary_json: PathBuf,
    pub manifest_json: PathBuf,
    pub plots: Vec<PathBuf>,
    pub scheme_trials: usize,
}

impl RunReport {
    /// Fraction of scheme runs that errored.
    pub fn failure_fraction(&self) -> f64 {
        if self.scheme_trials == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.scheme_trials as f64
        }
    }
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serializing artifact: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Run the full experiment and write every artifact.
///
/// `threads` pins the worker pool size (results are identical for any
/// value); `out_dir_override` wins over the spec's own output directory.
pub fn run_experiment(
    spec: &ExperimentSpec,
    threads: Option<usize>,
    out_dir_override: Option<&Path>,
) -> Result<RunReport> {
    spec.validate()?;
    let out_dir = out_dir_override
        .map(Path::to_path_buf)
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}-out", spec.name)));
    fs::create_dir_all(&out_dir)?;

    let base = spec.base_scenario()?;
    let est = spec.base_estimation();
    let mut jobs = Vec::new();
    for sweep in &spec.sweeps {
        for &value in &sweep.values {
            let (scenario, estimation) = apply_sweep(&base, &est, sweep.axis, value)?;
            for trial in 0..spec.trials {
                jobs.push(TrialJob {
                    axis: sweep.axis,
                    value,
                    trial,
                    seed: spec.base_seed + trial as u64,
                    scenario: scenario.clone(),
                    estimation: estimation.clone(),
                });
            }
        }
    }
    let plan = SchedulePlan {
        schemes: &spec.schemes,
        ao: spec.ao_config(),
        record_runtime: spec.record_runtime,
    };

    let execute = || -> Vec<(Vec<RunRecord>, Vec<TrialFailure>)> {
        jobs.par_iter().map(|job| run_point_trial(job, &plan)).collect()
    };
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(execute),
        None => execute(),
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in outputs {
        records.extend(r);
        failures.extend(f);
    }
    let scheme_trials = jobs.len() * spec.schemes.len();

    let summary = summarize(&records);
    let manifest = RunManifest {
        version: 1,
        name: spec.name.clone(),
        preset: spec.preset,
        base_seed: spec.base_seed,
        trials: spec.trials,
        schemes: spec.schemes.clone(),
        sweeps: spec.sweeps.clone(),
        scenario: ScenarioConfig { rng_seed: spec.base_seed, ..base },
        estimation: est.clone(),
        ao_rounds: spec.ao_config().rounds,
        quantizer_bits: est.quantizer_bits,
        quantizer_alpha: match est.quantizer_bits {
            Some(bits) => quantizer_alpha(bits)?,
            None => 1.0,
        },
        jsr_formula: JSR_FORMULA.to_string(),
        record_runtime: spec.record_runtime,
        scheme_trials,
    };

    let results_csv = out_dir.join("results.csv");
    fs::write(&results_csv, results_csv_string(&records))?;
    let failures_csv = out_dir.join("failures.csv");
    fs::write(&failures_csv, failures_csv_string(&failures))?;
    let summary_json = out_dir.join("summary.json");
    fs::write(&summary_json, to_json_pretty(&summary)?)?;
    let manifest_json = out_dir.join("manifest.json");
    fs::write(&manifest_json, to_json_pretty(&manifest)?)?;
    let plots = emit_plots(&summary, &out_dir)?;

    Ok(RunReport {
        records,
        failures,
        summary,
        out_dir,
        results_csv,
        failures_csv,
        summary_json,
        manifest_json,
        plots,
        scheme_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::LargeScaleModel;

    fn tiny_scenario() -> ScenarioConfig {
        ScenarioConfig {
            aps: 2,
            ues: 2,
            jammers: 1,
            ap_antennas: 4,
            ap_rf_chains: 2,
            ue_antennas: 2,
            ue_rf_chains: 1,
            jammer_antennas: 2,
            ue_paths: 2,
            jammer_paths: 2,
            p_max_watts: 4.0,
            noise_watts: 1e-3,
            large_scale: LargeScaleModel::Fixed { gain: 1e-2 },
            ..ScenarioConfig::desk()
        }
    }

    fn tiny_estimation() -> EstimationConfig {
        EstimationConfig { n_stat: 4, tau_p: 2.0, ..EstimationConfig::default() }
    }

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            version: 1,
            name: "tiny".into(),
            preset: None,
            trials: 2,
            base_seed: 7,
            schemes: vec![SchemeId::AoAjhbf, SchemeId::Wmmse, SchemeId::AoAjhbfNoquant],
            out_dir: None,
            sweeps: vec![SweepSpec { axis: SweepAxis::MPerAp, values: vec![4.0, 6.0] }],
            scenario: Some(tiny_scenario()),
            estimation: Some(tiny_estimation()),
            ao: Some(AoOverrides { rounds: Some(1) }),
            record_runtime: false,
        }
    }

    #[test]
    fn toml_parsing_accepts_good_specs_and_rejects_bad_ones() {
        let good = r#"
            version = 1
            name = "demo"
            trials = 2
            base_seed = 11
            schemes = ["ao-ajhbf", "wmmse"]

            [[sweeps]]
            axis = "m-per-ap"
            values = [16, 36]

            [estimation]
            nmse_target = 0.05
        "#;
        let spec = ExperimentSpec::from_toml_str(good).unwrap();
        assert_eq!(spec.trials, 2);
        assert_eq!(spec.base_seed, 11);
        assert_eq!(spec.schemes, vec![SchemeId::AoAjhbf, SchemeId::Wmmse]);
        assert_eq!(spec.sweeps[0].values, vec![16.0, 36.0]);
        assert!((spec.base_estimation().nmse_target - 0.05).abs() < 1e-15);

        let cases = [
            ("unknown key", good.replace("name = \"demo\"", "nmae = \"demo\"")),
            ("bad version", good.replace("version = 1", "version = 2")),
            ("bad scheme", good.replace("\"wmmse\"", "\"zf\"")),
            ("dup scheme", good.replace("\"wmmse\"", "\"ao-ajhbf\"")),
            ("zero trials", good.replace("trials = 2", "trials = 0")),
            ("dup values", good.replace("values = [16, 36]", "values = [16, 16]")),
            ("m below chains", good.replace("values = [16, 36]", "values = [4]")),
            ("fractional m", good.replace("values = [16, 36]", "values = [16.5]")),
            (
                "nmse in pilot mode",
                good.replace("axis = \"m-per-ap\"", "axis = \"nmse\"")
                    .replace("values = [16, 36]", "values = [0.1]")
                    .replace("nmse_target = 0.05", "mode = \"pilot-mmse\""),
            ),
        ];
        for (what, text) in cases {
            assert!(ExperimentSpec::from_toml_str(&text).is_err(), "{what} was accepted");
        }

        // Hyphen-formatted estimation keys follow the scenario table in
        // using field names verbatim, so snake_case must be rejected.
        let both = format!("preset = \"paper\"\n[scenario]\nues = 4\n{good}");
        assert!(ExperimentSpec::from_toml_str(&both).is_err(), "preset+scenario accepted");
    }

    #[test]
    fn sweep_overrides_change_exactly_the_swept_quantity() {
        let base = ScenarioConfig::desk();
        let est = EstimationConfig::default();

        let (sc, e) = apply_sweep(&base, &est, SweepAxis::MPerAp, 36.0).unwrap();
        assert_eq!(sc.ap_antennas, 36);
        assert_eq!((sc.jammers, e.nmse_target), (base.jammers, est.nmse_target));

        // Desk base: 2 jammers x 18 antennas = 36 total, split evenly.
        for (g, per) in [(1usize, 36usize), (2, 18), (4, 9), (3, 12)] {
            let (sc, _) = apply_sweep(&base, &est, SweepAxis::JammerCount, g as f64).unwrap();
            assert_eq!((sc.jammers, sc.jammer_antennas), (g, per));
        }
        assert!(apply_sweep(&base, &est, SweepAxis::JammerCount, 5.0).is_err());

        let (sc, e) = apply_sweep(&base, &est, SweepAxis::Nmse, 0.1).unwrap();
        assert_eq!(sc, base);
        assert!((e.nmse_target - 0.1).abs() < 1e-15);
    }

    #[test]
    fn jsr_matches_formula_and_floors_at_zero() {
        assert_eq!(jsr_db(0.0, 3, 8.0), -300.0);
        assert_eq!(jsr_db(1.0, 0, 8.0), -300.0);
        let v = jsr_db(2.0, 3, 8.0);
        assert!((v - 10.0 * (3.0 * 2.0 / 8.0f64).log10()).abs() < 1e-12);
        // Values below the floor clamp to it.
        assert_eq!(jsr_db(1e-40, 1, 1.0), -300.0);
    }

    #[test]
    fn single_trial_single_scheme_yields_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec {
            trials: 1,
            schemes: vec![SchemeId::Wmmse],
            sweeps: vec![SweepSpec { axis: SweepAxis::MPerAp, values: vec![4.0] }],
            ..tiny_spec()
        };
        let report = run_experiment(&spec, Some(2), Some(dir.path())).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.failures.is_empty());
        let r = &report.records[0];
        assert_eq!((r.trial, r.seed, r.scheme), (0, 7, SchemeId::Wmmse));
        assert!(r.q_watts.is_finite() && r.q_watts >= 0.0);
        for path in [&report.results_csv, &report.failures_csv, &report.summary_json, &report.manifest_json]
        {
            assert!(path.exists(), "missing {}", path.display());
        }
        // Single sweep point: the trend is not applicable.
        assert!(report
            .summary
            .trends
            .iter()
            .all(|t| t.direction == TrendDirection::NotApplicable));
    }

    #[test]
    fn paired_schemes_share_seeds_and_feasible_rows_meet_the_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec();
        let report = run_experiment(&spec, Some(2), Some(dir.path())).unwrap();
        assert_eq!(report.records.len(), 2 * 2 * 3);
        assert!(report.failures.is_empty());
        for value in [4.0, 6.0] {
            for trial in 0..2 {
                let rows: Vec<_> = report
                    .records
                    .iter()
                    .filter(|r| r.sweep_value == value && r.trial == trial)
                    .collect();
                assert_eq!(rows.len(), 3);
                assert!(rows.iter().all(|r| r.seed == 7 + trial as u64));
            }
        }
        // Resolved jamming powers are feasible: the final minimum SINR
        // bound stays at or above the threshold (0 dB here).
        for r in &report.records {
            if r.q_watts > 0.0 {
                assert!(r.min_xi_db >= -1e-6, "row {r:?} below threshold");
            }
            let expect = jsr_db(r.q_watts, 1, 4.0);
            assert!((r.jsr_db - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn reruns_and_thread_counts_are_byte_identical() {
        let spec = tiny_spec();
        let mut blobs = Vec::new();
        for threads in [Some(1), Some(3), None] {
            let dir = tempfile::tempdir().unwrap();
            let report = run_experiment(&spec, threads, Some(dir.path())).unwrap();
            let mut all = Vec::new();
            for path in [&report.results_csv, &report.failures_csv, &report.summary_json, &report.manifest_json]
            {
                all.extend(fs::read(path).unwrap());
            }
            for plot in &report.plots {
                all.extend(fs::read(plot).unwrap());
            }
            blobs.push(all);
        }
        assert_eq!(blobs[0], blobs[1], "1 vs 3 worker threads");
        assert_eq!(blobs[0], blobs[2], "pinned vs default pool");
    }

    #[test]
    fn csv_round_trips_exactly() {
        let records = vec![
            RunRecord {
                sweep_axis: SweepAxis::Nmse,
                sweep_value: 0.01,
                scheme: SchemeId::AoAjhbf,
                trial: 3,
                seed: 10,
                q_watts: 1.2345678901234567e-13,
                jsr_db: -300.0,
                min_xi_db: 0.1,
                runtime_s: 0.25,
            },
            RunRecord {
                sweep_axis: SweepAxis::MPerAp,
                sweep_value: 36.0,
                scheme: SchemeId::AoAjhbfNoquant,
                trial: 0,
                seed: 0,
                q_watts: 8.0,
                jsr_db: 3.0103,
                min_xi_db: -1e-9,
                runtime_s: 0.0,
            },
        ];
        let text = results_csv_string(&records);
        let mut parsed = parse_results_csv(&text).unwrap();
        // runtime_s is written with fixed precision, everything else exact.
        for (p, r) in parsed.iter_mut().zip(&records) {
            assert!((p.runtime_s - r.runtime_s).abs() < 1e-6);
            p.runtime_s = r.runtime_s;
        }
        assert_eq!(parsed, records);

        assert!(parse_results_csv("not,a,results,file\n").is_err());
        assert!(parse_results_csv(&format!("{RESULTS_HEADER}\nshort,row\n")).is_err());
        let bad_scheme = format!("{RESULTS_HEADER}\nm-per-ap,8.0,zf,0,0,1.0,1.0,1.0,0.0\n");
        assert!(parse_results_csv(&bad_scheme).is_err());
    }

    #[test]
    fn sign_test_matches_hand_computed_tail_probabilities() {
        assert!((sign_test_p_one_sided(3, 3) - 0.125).abs() < 1e-15);
        assert!((sign_test_p_one_sided(4, 5) - 6.0 / 32.0).abs() < 1e-15);
        assert!((sign_test_p_one_sided(9, 10) - 11.0 / 1024.0).abs() < 1e-14);
        assert!((sign_test_p_one_sided(0, 5) - 1.0).abs() < 1e-15);
        assert!((sign_test_p_one_sided(20, 20) - 0.5f64.powi(20)).abs() < 1e-18);
        assert_eq!(sign_test_p_one_sided(0, 0), 1.0);
    }

    fn hand_record(
        value: f64,
        scheme: SchemeId,
        trial: usize,
        q: f64,
    ) -> RunRecord {
        RunRecord {
            sweep_axis: SweepAxis::MPerAp,
            sweep_value: value,
            scheme,
            trial,
            seed: trial as u64,
            q_watts: q,
            jsr_db: jsr_db(q, 2, 8.0),
            min_xi_db: 0.0,
            runtime_s: 0.0,
        }
    }

    #[test]
    fn summarize_reports_stats_trends_and_paired_tests() {
        // 20 paired trials at each of two sweep values; the proposed scheme
        // wins every pair, and its mean rises with the sweep value.
        let mut records = Vec::new();
        for &value in &[8.0, 16.0] {
            for trial in 0..20 {
                let bump = value / 8.0;
                records.push(hand_record(value, SchemeId::AoAjhbf, trial, 1.0 * bump));
                records.push(hand_record(value, SchemeId::Wmmse, trial, 0.5 * bump));
            }
        }
        let summary = summarize(&records);
        assert_eq!(summary.points.len(), 4);
        for p in &summary.points {
            assert_eq!(p.trials, 20);
            // Identical values per cell: zero spread.
            assert_eq!(p.stddev_jsr_db, Some(0.0));
            assert_eq!(p.stderr_jsr_db, Some(0.0));
            // Constant cells make the dB mean and linear mean agree.
            assert!((p.mean_jsr_db - p.linear_mean_jsr_db).abs() < 1e-9);
        }
        let trend = |scheme: SchemeId| {
            summary
                .trends
                .iter()
                .find(|t| t.scheme == scheme)
                .unwrap()
        };
        assert_eq!(trend(SchemeId::AoAjhbf).direction, TrendDirection::Increasing);
        assert!(trend(SchemeId::AoAjhbf).strict);
        assert_eq!(summary.comparisons.len(), 2);
        for c in &summary.comparisons {
            assert_eq!((c.wins, c.ties, c.losses), (20, 0, 0));
            let p = c.p_value.unwrap();
            assert!((p - 0.5f64.powi(20)).abs() < 1e-18);
            assert!(c.significant);
        }

        // Three wins are not enough evidence at the 5% level.
        let few: Vec<RunRecord> = (0..3)
            .flat_map(|t| {
                [
                    hand_record(8.0, SchemeId::AoAjhbf, t, 1.0),
                    hand_record(8.0, SchemeId::Wmmse, t, 0.5),
                ]
            })
            .collect();
        let s = summarize(&few);
        assert!((s.comparisons[0].p_value.unwrap() - 0.125).abs() < 1e-12);
        assert!(!s.comparisons[0].significant);

        // All-tie pairs carry no information.
        let ties: Vec<RunRecord> = (0..4)
            .flat_map(|t| {
                [
                    hand_record(8.0, SchemeId::AoAjhbf, t, 1.0),
                    hand_record(8.0, SchemeId::Wmmse, t, 1.0),
                ]
            })
            .collect();
        let s = summarize(&ties);
        assert_eq!(s.comparisons[0].p_value, None);
        assert!(!s.comparisons[0].significant);
    }

    #[test]
    fn trend_classification_covers_all_shapes() {
        assert_eq!(trend_of(&[1.0]), (TrendDirection::NotApplicable, false));
        assert_eq!(trend_of(&[1.0, 2.0, 3.0]), (TrendDirection::Increasing, true));
        assert_eq!(trend_of(&[1.0, 1.0, 3.0]), (TrendDirection::Increasing, false));
        assert_eq!(trend_of(&[3.0, 2.0, 1.0]), (TrendDirection::Decreasing, true));
        assert_eq!(trend_of(&[1.0, 1.0, 1.0]), (TrendDirection::Flat, false));
        assert_eq!(trend_of(&[1.0, 2.0, 1.5]), (TrendDirection::Mixed, false));
    }

    #[test]
    fn charts_have_expected_element_counts_and_parse() {
        // Two schemes, three points each, with spread for error bars.
        let mut records = Vec::new();
        for &value in &[8.0, 16.0, 36.0] {
            for trial in 0..3 {
                let jitter = 0.1 * trial as f64;
                records.push(hand_record(value, SchemeId::AoAjhbf, trial, value + jitter));
                records.push(hand_record(value, SchemeId::Wmmse, trial, 0.5 * value + jitter));
            }
        }
        let summary = summarize(&records);
        let dir = tempfile::tempdir().unwrap();
        let plots = emit_plots(&summary, dir.path()).unwrap();
        assert_eq!(plots.len(), 1);
        let text = fs::read_to_string(&plots[0]).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
        assert_eq!(count("polyline"), 2, "one line per scheme");
        assert_eq!(count("circle"), 6, "one marker per point");
        let errbars = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("errbar"))
            .count();
        assert_eq!(errbars, 18, "bar plus two caps per point");

        // Empty summary: bare axes, still valid XML, exit success.
        let empty = summarize(&[]);
        let plots = emit_plots(&empty, dir.path()).unwrap();
        let text = fs::read_to_string(&plots[0]).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 0);
        assert!(
            doc.descendants()
                .filter(|n| n.attribute("class") == Some("axis"))
                .count()
                == 2
        );
    }

    #[test]
    fn manifest_echoes_exact_quantizer_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec {
            trials: 1,
            schemes: vec![SchemeId::Wmmse],
            sweeps: vec![SweepSpec { axis: SweepAxis::MPerAp, values: vec![4.0] }],
            ..tiny_spec()
        };
        let report = run_experiment(&spec, Some(1), Some(dir.path())).unwrap();
        let manifest: RunManifest =
            serde_json::from_str(&fs::read_to_string(&report.manifest_json).unwrap()).unwrap();
        assert_eq!(manifest.quantizer_bits, Some(4));
        assert_eq!(manifest.quantizer_alpha, 0.990503);
        assert_eq!(manifest.scheme_trials, 1);
        assert_eq!(manifest.jsr_formula, JSR_FORMULA);
    }

    #[test]
    fn per_trial_failures_are_recorded_and_the_run_continues() {
        // Bypass spec validation to force a per-trial scenario error.
        let mut bad = tiny_scenario();
        bad.ap_antennas = 1; // below the RF chain count
        let job = TrialJob {
            axis: SweepAxis::MPerAp,
            value: 1.0,
            trial: 0,
            seed: 3,
            scenario: bad,
            estimation: tiny_estimation(),
        };
        let plan = SchedulePlan {
            schemes: &[SchemeId::AoAjhbf, SchemeId::Wmmse],
            ao: AoConfig::default(),
            record_runtime: false,
        };
        let (records, failures) = run_point_trial(&job, &plan);
        assert!(records.is_empty());
        assert_eq!(failures.len(), 2);
        assert!(failures.iter().all(|f| !f.error.is_empty()));
        let text = failures_csv_string(&failures);
        assert_eq!(text.lines().count(), 3);
        assert!(!text.lines().nth(1).unwrap().contains('\n'));

        let report = RunReport {
            records: vec![],
            failures: failures.clone(),
            summary: summarize(&[]),
            out_dir: PathBuf::new(),
            results_csv: PathBuf::new(),
            failures_csv: PathBuf::new(),
            summary_json: PathBuf::new(),
            manifest_json: PathBuf::new(),
            plots: vec![],
            scheme_trials: 4,
        };
        assert!((report.failure_fraction() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantization_toggle_separates_the_paired_variants() {
        // The noquant variant shares channels and estimation draws with the
        // quantized one, so its resistible power should differ only through
        // the quantization stage — and never by a wild margin.
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec {
            trials: 2,
            schemes: vec![SchemeId::AoAjhbf, SchemeId::AoAjhbfNoquant],
            sweeps: vec![SweepSpec { axis: SweepAxis::Nmse, values: vec![0.05] }],
            ..tiny_spec()
        };
        let report = run_experiment(&spec, Some(2), Some(dir.path())).unwrap();
        assert_eq!(report.records.len(), 4);
        for trial in 0..2 {
            let q_of = |scheme: SchemeId| {
                report
                    .records
                    .iter()
                    .find(|r| r.trial == trial && r.scheme == scheme)
                    .unwrap()
                    .q_watts
            };
            let (ql, qn) = (q_of(SchemeId::AoAjhbf), q_of(SchemeId::AoAjhbfNoquant));
            assert!(ql.is_finite() && qn.is_finite());
            assert!(ql >= 0.0 && qn >= 0.0);
        }
    }
}
