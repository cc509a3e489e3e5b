//! Synthetic ammeter traces: jittered sampling schedules, pulse-windowed
//! current injection, additive noise, seeded campaigns and the trace CSV
//! format.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::photo::induced_current;
use crate::rng::{derive_seed, stream};
use crate::scenario::{NoiseKind, NoiseModel, Scenario, ScenarioError};
use crate::netlist::{CellLibrary, ChipDesign};

/// One ammeter reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time_us: f64,
    pub current_ua: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub scenario_digest: String,
    pub seed: u64,
}

/// A timestamped current trace. Timestamps increase strictly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<Sample>,
    pub meta: TraceMeta,
}

impl Trace {
    pub fn currents(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.current_ua)
    }
}

/// A seeded batch of traces from one scenario. Per-trace seeds derive from
/// the campaign seed and the trace index, so the set is reproducible and
/// order-independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub scenario: Scenario,
    pub campaign_seed: u64,
    pub traces: Vec<Trace>,
}

/// A scenario with its design resolved and the pulse-window current computed
/// once. Synthesizing a trace then costs only schedule and noise draws.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub lib: CellLibrary,
    pub design: ChipDesign,
    /// Total induced current while the pulse is on (µA).
    pub pulse_total_ua: f64,
    pub digest: String,
}

impl ResolvedScenario {
    pub fn resolve(scenario: Scenario) -> Result<ResolvedScenario, ScenarioError> {
        scenario.check()?;
        let (lib, design) = crate::scenario::resolve_design(&scenario.design)?;
        let breakdown = induced_current(
            &design,
            &lib,
            &scenario.pattern,
            &scenario.spot,
            &scenario.params,
        )?;
        let digest = scenario.digest();
        Ok(ResolvedScenario { scenario, lib, design, pulse_total_ua: breakdown.total, digest })
    }
}

/// Sampling timestamps: t0 = 0, each increment drawn uniformly from
/// [jitter.0, jitter.1] µs. A degenerate interval gives an exact arithmetic
/// sequence.
pub fn sample_schedule(rng: &mut ChaCha12Rng, n: usize, jitter: (f64, f64)) -> Vec<f64> {
    assert!(n >= 1, "schedule needs at least one sample");
    let (lo, hi) = jitter;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n);
    out.push(t);
    for _ in 1..n {
        let dt = if hi > lo { rng.random_range(lo..hi) } else { lo };
        t += dt;
        out.push(t);
    }
    out
}

fn noise_sample(rng: &mut ChaCha12Rng, model: &NoiseModel) -> f64 {
    if model.amplitude == 0.0 {
        return 0.0;
    }
    match model.kind {
        NoiseKind::Uniform => rng.random_range(-model.amplitude..model.amplitude),
        NoiseKind::Gaussian => Normal::new(0.0, model.amplitude)
            .expect("positive sigma")
            .sample(rng),
    }
}

/// Synthesize one trace from a per-trace seed. The schedule is drawn first,
/// then one noise value per sample in index order.
pub fn synthesize_trace(rs: &ResolvedScenario, trace_seed: u64) -> Trace {
    let s = &rs.scenario;
    let mut rng = stream(trace_seed);
    let times = sample_schedule(&mut rng, s.n_samples, (s.jitter_us[0], s.jitter_us[1]));
    let samples = times
        .into_iter()
        .map(|t| {
            let noise = noise_sample(&mut rng, &s.noise);
            let pulse = if s.spot.pulse_covers(t) { rs.pulse_total_ua } else { 0.0 };
            Sample { time_us: t, current_ua: noise + pulse }
        })
        .collect();
    Trace { samples, meta: TraceMeta { scenario_digest: rs.digest.clone(), seed: trace_seed } }
}

/// Synthesize `n_traces` traces. Trace `i` uses seed
/// `derive_seed(scenario.seed, i)` and is identical however the batch is
/// evaluated.
pub fn synthesize_campaign(rs: &ResolvedScenario, n_traces: usize) -> TraceSet {
    assert!(n_traces >= 1, "campaign needs at least one trace");
    let campaign_seed = rs.scenario.seed;
    let traces = (0..n_traces)
        .map(|i| synthesize_trace(rs, derive_seed(campaign_seed, i as u64)))
        .collect();
    TraceSet { scenario: rs.scenario.clone(), campaign_seed, traces }
}

pub const TRACE_CSV_HEADER: &str = "trace_index,sample_index,time_us,current_uA";

/// Render a trace set as CSV: fixed header, one row per sample, six decimal
/// digits on every value.
pub fn export_csv(ts: &TraceSet) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for (ti, trace) in ts.traces.iter().enumerate() {
        for (si, sample) in trace.samples.iter().enumerate() {
            out.push_str(&format!(
                "{ti},{si},{:.6},{:.6}\n",
                sample.time_us, sample.current_ua
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("missing header line")]
    MissingHeader,
}

/// Parse trace CSV back into per-trace sample lists. Inverse of
/// [`export_csv`] up to the 10⁻⁶ export precision.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<Sample>>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TRACE_CSV_HEADER => {}
        _ => return Err(CsvError::MissingHeader),
    }
    let mut traces: Vec<Vec<Sample>> = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CsvError::Malformed(idx + 1, "expected 4 fields".into()));
        }
        let ti: usize = fields[0]
            .parse()
            .map_err(|_| CsvError::Malformed(idx + 1, "bad trace index".into()))?;
        let time_us: f64 = fields[2]
            .parse()
            .map_err(|_| CsvError::Malformed(idx + 1, "bad time".into()))?;
        let current_ua: f64 = fields[3]
            .parse()
            .map_err(|_| CsvError::Malformed(idx + 1, "bad current".into()))?;
        if ti == traces.len() {
            traces.push(Vec::new());
        }
        let Some(slot) = traces.get_mut(ti) else {
            return Err(CsvError::Malformed(idx + 1, "trace indices out of order".into()));
        };
        slot.push(Sample { time_us, current_ua });
    }
    Ok(traces)
}
