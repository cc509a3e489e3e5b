//! Traces-to-success estimation: how many traces a majority-vote
//! nearest-template distinguisher needs to separate two scenarios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{classify_pattern, Decision};
use crate::netlist::InputPattern;
use crate::rng::derive_seed;
use crate::scenario::{Scenario, ScenarioError};
use crate::trace::{synthesize_trace, ResolvedScenario};

#[derive(Debug, Clone, Copy)]
pub struct DistinguishConfig {
    /// Required majority-vote accuracy, strictly between 0.5 and 1.
    pub target_accuracy: f64,
    /// Largest trace count to try.
    pub cap: usize,
    /// Monte-Carlo resamples per candidate count (per scenario side).
    pub resamples: usize,
    pub seed: u64,
}

impl DistinguishConfig {
    pub fn new(target_accuracy: f64, cap: usize) -> Self {
        DistinguishConfig { target_accuracy, cap, resamples: 10_000, seed: 0x0b1c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguishOutcome {
    /// Smallest N <= cap reaching the target accuracy; `None` if the cap was
    /// exhausted first.
    pub n: Option<usize>,
    /// Estimated accuracy of a single-trace decision.
    pub single_trace_accuracy: f64,
    /// (N, estimated accuracy) for every candidate tried, in order.
    pub evaluated: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistinguishError {
    #[error("target accuracy must lie strictly between 0.5 and 1")]
    BadTarget,
    #[error("cap must be at least 1")]
    BadCap,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Estimate by Monte-Carlo the smallest trace count N such that classifying N
/// fresh traces and taking the strict majority reaches `target_accuracy`,
/// averaged over both scenarios. A vote tie (possible for even N, or when
/// traces classify as ambiguous) counts as a failure.
pub fn traces_to_distinguish(
    scenario_a: &Scenario,
    scenario_b: &Scenario,
    cfg: &DistinguishConfig,
) -> Result<DistinguishOutcome, DistinguishError> {
    if !(cfg.target_accuracy > 0.5 && cfg.target_accuracy < 1.0) {
        return Err(DistinguishError::BadTarget);
    }
    if cfg.cap < 1 {
        return Err(DistinguishError::BadCap);
    }

    let rs_a = ResolvedScenario::resolve(scenario_a.clone())?;
    let rs_b = ResolvedScenario::resolve(scenario_b.clone())?;
    let templates = BTreeMap::from([
        (rs_a.scenario.pattern.clone(), rs_a.pulse_total_ua),
        (rs_b.scenario.pattern.clone(), rs_b.pulse_total_ua),
    ]);
    let noise_amp = rs_a.scenario.noise.amplitude.max(rs_b.scenario.noise.amplitude);

    let mut evaluated = Vec::new();
    let mut single_trace_accuracy = 0.0;
    let mut n_star = None;
    // Each synthesized trace gets a fresh derived seed from a global counter,
    // so the estimate is deterministic for a fixed config.
    let mut draw = 0u64;

    for n in 1..=cfg.cap {
        let mut correct = 0usize;
        for _ in 0..cfg.resamples {
            for (rs, truth) in [(&rs_a, &rs_a.scenario.pattern), (&rs_b, &rs_b.scenario.pattern)] {
                let mut votes: BTreeMap<InputPattern, usize> = BTreeMap::new();
                for _ in 0..n {
                    let trace = synthesize_trace(rs, derive_seed(cfg.seed, draw));
                    draw += 1;
                    if let Ok(result) = classify_pattern(&trace, &templates, noise_amp) {
                        if let Decision::Pattern(p) = result.decided {
                            *votes.entry(p).or_default() += 1;
                        }
                    }
                }
                if majority(&votes) == Some(truth) {
                    correct += 1;
                }
            }
        }
        let accuracy = correct as f64 / (2 * cfg.resamples) as f64;
        if n == 1 {
            single_trace_accuracy = accuracy;
        }
        evaluated.push((n, accuracy));
        if accuracy >= cfg.target_accuracy {
            n_star = Some(n);
            break;
        }
    }

    Ok(DistinguishOutcome { n: n_star, single_trace_accuracy, evaluated })
}

/// Strict majority across votes; `None` on a tie or when nothing voted.
fn majority(votes: &BTreeMap<InputPattern, usize>) -> Option<&InputPattern> {
    let mut ranked: Vec<(&InputPattern, usize)> = votes.iter().map(|(p, c)| (p, *c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    match ranked.as_slice() {
        [] => None,
        [only] => Some(only.0),
        [first, second, ..] if first.1 > second.1 => Some(first.0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photo::{Kappa, LaserSpot, ObicParams};
    use crate::scenario::{NoiseKind, NoiseModel};

    fn scenario(pattern: &str, noise_amp: f64) -> Scenario {
        Scenario {
            design: "builtin:nand2".to_string(),
            pattern: InputPattern::new(pattern).unwrap(),
            spot: LaserSpot::new(3.0, 1.05, 9.0),
            params: ObicParams {
                p_th: 6.5,
                p_k: 1.5,
                i_sat: 2000.0,
                kappa: Kappa { ndiff: 2.0, pdiff: 0.2, nwell: 1.0 },
            },
            noise: NoiseModel { kind: NoiseKind::Uniform, amplitude: noise_amp },
            n_samples: 25,
            jitter_us: [11.0, 12.0],
            seed: 42,
        }
    }

    #[test]
    fn zero_noise_distinct_means_need_one_trace() {
        let cfg = DistinguishConfig { resamples: 200, ..DistinguishConfig::new(0.95, 10) };
        let out =
            traces_to_distinguish(&scenario("01", 0.0), &scenario("11", 0.0), &cfg).unwrap();
        assert_eq!(out.n, Some(1));
        assert_eq!(out.single_trace_accuracy, 1.0);
    }

    #[test]
    fn absurd_noise_exhausts_the_cap() {
        let cfg = DistinguishConfig { resamples: 50, ..DistinguishConfig::new(0.95, 3) };
        let out =
            traces_to_distinguish(&scenario("01", 1e6), &scenario("11", 1e6), &cfg).unwrap();
        assert_eq!(out.n, None);
        assert_eq!(out.evaluated.len(), 3);
    }

    #[test]
    fn identical_patterns_are_indistinguishable() {
        let cfg = DistinguishConfig { resamples: 50, ..DistinguishConfig::new(0.9, 3) };
        let out =
            traces_to_distinguish(&scenario("01", 0.1), &scenario("01", 0.1), &cfg).unwrap();
        assert_eq!(out.n, None);
    }

    #[test]
    fn bad_target_is_rejected() {
        let cfg = DistinguishConfig::new(0.5, 10);
        assert_eq!(
            traces_to_distinguish(&scenario("01", 0.1), &scenario("11", 0.1), &cfg),
            Err(DistinguishError::BadTarget)
        );
    }
}
