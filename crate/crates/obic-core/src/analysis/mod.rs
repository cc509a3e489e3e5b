//! The attack/calibration side: pulse-window detection, template
//! classification of traces, set-level leakage statistics, traces-to-success
//! estimation and model fitting against measured anchors.

mod distinguish;
mod fit;

pub use distinguish::{
    traces_to_distinguish, DistinguishConfig, DistinguishError, DistinguishOutcome,
};
pub use fit::{
    fit_params, paper_anchors, parse_anchor_csv, serialize_anchor_csv, Anchor, FitContext,
    FitError, FitOptions, FitResult, ANCHOR_CSV_HEADER,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::netlist::InputPattern;
use crate::trace::Trace;

/// Longest contiguous run of samples with current strictly above `threshold`,
/// as inclusive (start, end) indices. Ties go to the earliest run; `None`
/// when no sample exceeds the threshold.
pub fn detect_pulse_window(trace: &Trace, threshold: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, sample) in trace.samples.iter().enumerate() {
        if sample.current_ua > threshold {
            run_start.get_or_insert(i);
        } else if let Some(start) = run_start.take() {
            best = longer(best, (start, i - 1));
        }
    }
    if let Some(start) = run_start {
        best = longer(best, (start, trace.samples.len() - 1));
    }
    best
}

fn longer(best: Option<(usize, usize)>, candidate: (usize, usize)) -> Option<(usize, usize)> {
    match best {
        Some((s, e)) if e - s >= candidate.1 - candidate.0 => Some((s, e)),
        _ => Some(candidate),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error("window {start}..={end} is empty or out of range for {len} samples")]
    EmptyWindow { start: usize, end: usize, len: usize },
}

/// Arithmetic mean of the currents over an inclusive sample window.
pub fn in_pulse_mean(trace: &Trace, window: (usize, usize)) -> Result<f64, WindowError> {
    let (start, end) = window;
    let len = trace.samples.len();
    if start > end || end >= len {
        return Err(WindowError::EmptyWindow { start, end, len });
    }
    let slice = &trace.samples[start..=end];
    Ok(slice.iter().map(|s| s.current_ua).sum::<f64>() / slice.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatError {
    #[error("need at least two samples per set")]
    TooFewSamples,
    #[error("both sets have zero variance")]
    DegenerateVariance,
}

/// Welch's unequal-variance t statistic between two sets of means.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<f64, StatError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatError::TooFewSamples);
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let se2 = va / a.len() as f64 + vb / b.len() as f64;
    if se2 == 0.0 {
        return Err(StatError::DegenerateVariance);
    }
    Ok((ma - mb) / se2.sqrt())
}

/// Sample mean and unbiased (n-1) variance.
fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// What the distinguisher decided for one trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Pattern(InputPattern),
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub decided: Decision,
    /// Distance from the observed in-pulse mean to the winning template (µA).
    pub score: f64,
    /// gap / (gap + noise amplitude): a bounded separation heuristic, not a
    /// probability.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("need at least two templates")]
    TooFewTemplates,
    #[error("no pulse window detected above {threshold} µA")]
    NoPulseDetected { threshold: String },
}

/// Nearest-template decision on the in-pulse mean. The detection threshold is
/// half the smallest template level, which sits above the baseline band for
/// any usable template set. An exact midpoint between the two nearest
/// templates is reported as ambiguous.
pub fn classify_pattern(
    trace: &Trace,
    templates: &BTreeMap<InputPattern, f64>,
    noise_amplitude: f64,
) -> Result<ClassificationResult, ClassifyError> {
    if templates.len() < 2 {
        return Err(ClassifyError::TooFewTemplates);
    }
    let threshold = 0.5 * templates.values().cloned().fold(f64::INFINITY, f64::min);
    let window = detect_pulse_window(trace, threshold).ok_or(ClassifyError::NoPulseDetected {
        threshold: format!("{threshold}"),
    })?;
    let mean = in_pulse_mean(trace, window).expect("detected window is in range");

    let mut ranked: Vec<(&InputPattern, f64)> =
        templates.iter().map(|(p, level)| (p, (mean - level).abs())).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let (best_pattern, best_d) = ranked[0];
    let (_, second_d) = ranked[1];

    if best_d == second_d {
        return Ok(ClassificationResult {
            decided: Decision::Ambiguous,
            score: best_d,
            confidence: 0.0,
        });
    }
    let gap = second_d - best_d;
    Ok(ClassificationResult {
        decided: Decision::Pattern(best_pattern.clone()),
        score: best_d,
        confidence: gap / (gap + noise_amplitude),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{Sample, Trace, TraceMeta};

    fn trace(currents: &[f64]) -> Trace {
        Trace {
            samples: currents
                .iter()
                .enumerate()
                .map(|(i, &c)| Sample { time_us: 11.0 * i as f64, current_ua: c })
                .collect(),
            meta: TraceMeta { scenario_digest: "test".into(), seed: 0 },
        }
    }

    fn pat(s: &str) -> InputPattern {
        InputPattern::new(s).unwrap()
    }

    #[test]
    fn flat_noise_has_no_window() {
        let t = trace(&[0.05, -0.08, 0.02, 0.09, -0.01]);
        assert_eq!(detect_pulse_window(&t, 0.3), None);
    }

    #[test]
    fn step_on_6_to_15_is_found() {
        let mut currents = vec![0.0; 25];
        for c in currents.iter_mut().take(16).skip(6) {
            *c = 0.75;
        }
        let t = trace(&currents);
        assert_eq!(detect_pulse_window(&t, 0.3), Some((6, 15)));
    }

    #[test]
    fn all_above_threshold_spans_everything() {
        let t = trace(&[1.0; 7]);
        assert_eq!(detect_pulse_window(&t, 0.3), Some((0, 6)));
    }

    #[test]
    fn earliest_of_equal_runs_wins() {
        let t = trace(&[1.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(detect_pulse_window(&t, 0.5), Some((0, 1)));
    }

    #[test]
    fn mean_of_constant_window() {
        let t = trace(&[0.81; 10]);
        assert!((in_pulse_mean(&t, (2, 7)).unwrap() - 0.81).abs() < 1e-12);
        assert_eq!(in_pulse_mean(&t, (3, 3)).unwrap(), 0.81);
    }

    #[test]
    fn bad_windows_are_rejected() {
        let t = trace(&[0.0; 5]);
        assert!(in_pulse_mean(&t, (3, 2)).is_err());
        assert!(in_pulse_mean(&t, (0, 5)).is_err());
    }

    #[test]
    fn welch_t_matches_hand_computed_value() {
        // means 0.81 and 0.75, each with sample variance 1e-4 over 3 points:
        // t = 0.06 / sqrt(1e-4/3 + 1e-4/3)
        let a = [0.80, 0.82, 0.81];
        let b = [0.74, 0.76, 0.75];
        let expected = 0.06 / (2.0 * 1e-4f64 / 3.0).sqrt();
        let t = welch_t(&a, &b).unwrap();
        assert!((t - expected).abs() < 1e-12);
        assert!((t - 7.348_469_228_349_534).abs() < 1e-9);
    }

    #[test]
    fn welch_t_is_antisymmetric_and_zero_on_equal_sets() {
        let a = [1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 3.0];
        assert_eq!(welch_t(&a, &b).unwrap(), 0.0);
        let c = [0.5, 0.7, 0.65];
        assert_eq!(welch_t(&a, &c).unwrap(), -welch_t(&c, &a).unwrap());
    }

    #[test]
    fn degenerate_variance_is_reported() {
        let a = [1.0, 1.0, 1.0];
        assert_eq!(welch_t(&a, &a), Err(StatError::DegenerateVariance));
        assert_eq!(welch_t(&[1.0], &a), Err(StatError::TooFewSamples));
    }

    fn templates() -> BTreeMap<InputPattern, f64> {
        BTreeMap::from([(pat("01"), 0.81), (pat("11"), 0.75)])
    }

    fn pulse_trace(level: f64) -> Trace {
        let mut currents = vec![0.0; 25];
        for c in currents.iter_mut().take(16).skip(6) {
            *c = level;
        }
        trace(&currents)
    }

    #[test]
    fn nearest_template_wins() {
        let r = classify_pattern(&pulse_trace(0.80), &templates(), 0.1).unwrap();
        assert_eq!(r.decided, Decision::Pattern(pat("01")));
    }

    #[test]
    fn exact_midpoint_is_ambiguous() {
        // Binary-exact levels so the two distances tie bit-for-bit.
        let templates = BTreeMap::from([(pat("01"), 1.0), (pat("11"), 0.5)]);
        let r = classify_pattern(&pulse_trace(0.75), &templates, 0.1).unwrap();
        assert_eq!(r.decided, Decision::Ambiguous);
        assert_eq!(r.confidence, 0.0);
    }

    #[test]
    fn zero_noise_exact_match_has_full_confidence() {
        let r = classify_pattern(&pulse_trace(0.75), &templates(), 0.0).unwrap();
        assert_eq!(r.decided, Decision::Pattern(pat("11")));
        assert_eq!(r.score, 0.0);
        assert_eq!(r.confidence, 1.0);
    }

    #[test]
    fn no_pulse_is_an_error() {
        let flat = trace(&[0.01; 25]);
        assert!(matches!(
            classify_pattern(&flat, &templates(), 0.1),
            Err(ClassifyError::NoPulseDetected { .. })
        ));
    }

    #[test]
    fn common_mode_shift_leaves_decision_unchanged() {
        let shift = 0.4;
        let shifted: BTreeMap<InputPattern, f64> =
            templates().into_iter().map(|(p, v)| (p, v + shift)).collect();
        let mut t = pulse_trace(0.80);
        for s in &mut t.samples {
            s.current_ua += shift;
        }
        let base = classify_pattern(&pulse_trace(0.80), &templates(), 0.1).unwrap();
        let moved = classify_pattern(&t, &shifted, 0.1).unwrap();
        assert_eq!(base.decided, moved.decided);
    }
}
