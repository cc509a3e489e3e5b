//! Command-line driver for the obic pipeline.
//!
//! Subcommands: `fixtures`, `simulate`, `scan`, `attack`, `calibrate`.
//! Scenarios and anchors come from files; flags stay minimal so runs are
//! reproducible from the configs alone. Every command is deterministic for a
//! fixed config and seed.
//!
//! Exit codes: 0 success, 1 input error, 2 model error, 3 non-convergence.
//! Any nonzero exit prints a one-line diagnostic to stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use obic_core::analysis::{
    detect_pulse_window, fit_params, in_pulse_mean, parse_anchor_csv, traces_to_distinguish,
    welch_t, DistinguishConfig, FitContext, FitError, FitOptions,
};
use obic_core::eval::{evaluate_chip, DEFAULT_VDD};
use obic_core::netlist::{
    build_chain, builtin_fixtures, serialize_cell_library, serialize_chip, InputPattern,
};
use obic_core::photo::breakdown_from_bias;
use obic_core::scenario::{resolve_design, Scenario};
use obic_core::trace::{export_csv, synthesize_campaign, ResolvedScenario, TraceSet};

#[derive(Parser)]
#[command(name = "obic", version, about = "Laser-induced static-power simulation and analysis")]
struct Cli {
    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the built-in cell library and a 4-cell NAND chain chip.
    Fixtures {
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize traces for a scenario; write CSV plus a summary JSON.
    Simulate {
        scenario: PathBuf,
        /// Number of traces to synthesize.
        #[arg(long, default_value_t = 1)]
        traces: usize,
        /// Override the scenario's campaign seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Trace CSV path; the summary lands next to it as *.summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the spot centre over a grid and report totals per pattern.
    Scan {
        /// Scenario template providing design, spot shape and parameters.
        scenario: PathBuf,
        /// Comma-separated input patterns, e.g. 01,11.
        #[arg(long)]
        patterns: String,
        /// Grid as x0,x1,y0,y1,step (µm, inclusive bounds, positive step).
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate traces-to-distinguish for two scenarios differing in pattern.
    Attack {
        scenario_a: PathBuf,
        scenario_b: PathBuf,
        /// Required majority-vote accuracy.
        #[arg(long, default_value_t = 0.95)]
        target: f64,
        /// Largest trace count to try.
        #[arg(long, default_value_t = 100)]
        cap: usize,
        /// Monte-Carlo resamples per candidate count.
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
        /// Seed for the Monte-Carlo estimate.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit model parameters to an anchor CSV; write the fit report JSON.
    Calibrate {
        anchors: PathBuf,
        /// Scenario template providing design, spot geometry and the kappa
        /// gauge for the fit.
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Input(String),
    Model(String),
    NonConvergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Model(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Model(m) | CliError::NonConvergence(m) => m,
        }
    }
}

fn input_err(context: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {detail}"))
}

fn model_err(context: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Model(format!("{context}: {detail}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fixtures { out } => cmd_fixtures(out, cli.quiet),
        Command::Simulate { scenario, traces, seed, out } => {
            cmd_simulate(scenario, *traces, *seed, out, cli.quiet)
        }
        Command::Scan { scenario, patterns, grid, out } => {
            cmd_scan(scenario, patterns, grid, out, cli.quiet)
        }
        Command::Attack { scenario_a, scenario_b, target, cap, resamples, seed, out } => {
            cmd_attack(scenario_a, scenario_b, *target, *cap, *resamples, *seed, out, cli.quiet)
        }
        Command::Calibrate { anchors, scenario, out } => {
            cmd_calibrate(anchors, scenario, out, cli.quiet)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| input_err(&format!("cannot read {}", path.display()), e))
}

fn write_file(path: &Path, content: &str, quiet: bool) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| input_err(&format!("cannot create {}", parent.display()), e))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| input_err(&format!("cannot write {}", path.display()), e))?;
    if !quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = read_file(path)?;
    Scenario::from_json(&text)
        .map_err(|e| input_err(&format!("invalid scenario {}", path.display()), e))
}

fn resolve(scenario: Scenario) -> Result<ResolvedScenario, CliError> {
    ResolvedScenario::resolve(scenario).map_err(|e| model_err("scenario rejected", e))
}

fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_fixtures(out: &Path, quiet: bool) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| input_err(&format!("cannot create {}", out.display()), e))?;
    let lib = builtin_fixtures();
    write_file(&out.join("cells.netlist"), &serialize_cell_library(&lib), quiet)?;

    let tie = BTreeMap::from([("In2".to_string(), true)]);
    let chain = build_chain(lib.cell("NAND2X1").expect("fixture"), 4, &tie)
        .expect("builtin chain is well-formed");
    write_file(&out.join("nand2_chain4.netlist"), &serialize_chip(&chain), quiet)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct SimulateSummary {
    pattern: String,
    traces: usize,
    /// Total induced current while the pulse is on (µA).
    pulse_total_ua: f64,
    /// Detected window of the first trace, when any sample clears the
    /// detection threshold.
    window: Option<(usize, usize)>,
    /// Average of per-trace in-pulse means over detected windows (µA).
    in_pulse_mean_ua: Option<f64>,
    detection_threshold_ua: f64,
}

/// Detection threshold used by `simulate` and `attack` summaries: above the
/// noise band, below any usable signal.
fn summary_threshold(noise_amplitude: f64) -> f64 {
    3.0 * noise_amplitude + 1e-6
}

fn cmd_simulate(
    scenario_path: &Path,
    traces: usize,
    seed: Option<u64>,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    if traces == 0 {
        return Err(input_err("--traces", "must be at least 1"));
    }
    let mut scenario = load_scenario(scenario_path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let rs = resolve(scenario)?;
    let set = synthesize_campaign(&rs, traces);
    write_file(out, &export_csv(&set), quiet)?;

    let threshold = summary_threshold(rs.scenario.noise.amplitude);
    let mut means = Vec::new();
    let mut first_window = None;
    for (i, trace) in set.traces.iter().enumerate() {
        if let Some(window) = detect_pulse_window(trace, threshold) {
            if i == 0 {
                first_window = Some(window);
            }
            means.push(in_pulse_mean(trace, window).expect("window in range"));
        }
    }
    let summary = SimulateSummary {
        pattern: rs.scenario.pattern.to_string(),
        traces,
        pulse_total_ua: rs.pulse_total_ua,
        window: first_window,
        in_pulse_mean_ua: if means.is_empty() {
            None
        } else {
            Some(means.iter().sum::<f64>() / means.len() as f64)
        },
        detection_threshold_ua: threshold,
    };
    write_file(&summary_path(out), &pretty_json(&summary), quiet)
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

fn cmd_scan(
    scenario_path: &Path,
    patterns: &str,
    grid: &str,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let patterns: Vec<InputPattern> = patterns
        .split(',')
        .map(|p| InputPattern::new(p.trim()).map_err(|e| input_err("--patterns", e)))
        .collect::<Result<_, _>>()?;
    if patterns.is_empty() {
        return Err(input_err("--patterns", "need at least one pattern"));
    }
    let g: Vec<f64> = grid
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| input_err("--grid", e)))
        .collect::<Result<_, _>>()?;
    let [x0, x1, y0, y1, step] = g.as_slice() else {
        return Err(input_err("--grid", "expected x0,x1,y0,y1,step"));
    };
    if !(*step > 0.0) {
        return Err(input_err("--grid", "step must be positive"));
    }
    if x1 < x0 || y1 < y0 {
        return Err(input_err("--grid", "bounds must be ordered"));
    }

    let (lib, design) = resolve_design(&scenario.design).map_err(|e| input_err("design", e))?;
    // Bias states per pattern are position-independent; compute them once.
    let mut bias_per_pattern = Vec::new();
    for pattern in &patterns {
        let eval = evaluate_chip(&design, &lib, pattern, DEFAULT_VDD)
            .map_err(|e| model_err("evaluation failed", e))?;
        bias_per_pattern.push(eval.bias.entries);
    }

    let mut csv = String::from("x_um,y_um,pattern,total_uA\n");
    let nx = ((x1 - x0) / step).round() as usize;
    let ny = ((y1 - y0) / step).round() as usize;
    for ix in 0..=nx {
        let x = x0 + ix as f64 * step;
        for iy in 0..=ny {
            let y = y0 + iy as f64 * step;
            let mut spot = scenario.spot;
            spot.cx = x;
            spot.cy = y;
            for (pattern, bias) in patterns.iter().zip(&bias_per_pattern) {
                let total = breakdown_from_bias(bias, &spot, &scenario.params).total;
                csv.push_str(&format!("{x},{y},{pattern},{total:.6}\n"));
            }
        }
    }
    write_file(out, &csv, quiet)
}

#[derive(serde::Serialize)]
struct AttackReport {
    pattern_a: String,
    pattern_b: String,
    target_accuracy: f64,
    cap: usize,
    /// Smallest trace count reaching the target; null when the cap was
    /// exhausted (informative, not an error).
    n_traces_to_target: Option<usize>,
    single_trace_accuracy: f64,
    /// (candidate N, estimated accuracy) pairs in evaluation order.
    evaluated: Vec<(usize, f64)>,
    /// Welch's t over in-pulse means of a 1000-trace campaign pair; null when
    /// a variance degenerates (e.g. noise-free scenarios).
    welch_t_1000: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack(
    path_a: &Path,
    path_b: &Path,
    target: f64,
    cap: usize,
    resamples: usize,
    seed: Option<u64>,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let a = load_scenario(path_a)?;
    let b = load_scenario(path_b)?;
    // The pair must be identical apart from the pattern under test.
    let mut a_masked = a.clone();
    a_masked.pattern = b.pattern.clone();
    if a_masked != b {
        return Err(input_err(
            "scenario pair",
            "scenarios must differ only in their input pattern",
        ));
    }

    let mut cfg = DistinguishConfig::new(target, cap);
    cfg.resamples = resamples;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let outcome = traces_to_distinguish(&a, &b, &cfg).map_err(|e| match e {
        obic_core::analysis::DistinguishError::Scenario(se) => model_err("scenario rejected", se),
        other => input_err("attack config", other),
    })?;

    let t = campaign_welch(&a, &b)?;
    let report = AttackReport {
        pattern_a: a.pattern.to_string(),
        pattern_b: b.pattern.to_string(),
        target_accuracy: target,
        cap,
        n_traces_to_target: outcome.n,
        single_trace_accuracy: outcome.single_trace_accuracy,
        evaluated: outcome.evaluated,
        welch_t_1000: t,
    };
    write_file(out, &pretty_json(&report), quiet)
}

/// Welch's t between the in-pulse means of two 1000-trace campaigns.
fn campaign_welch(a: &Scenario, b: &Scenario) -> Result<Option<f64>, CliError> {
    let mut means = Vec::new();
    for scenario in [a, b] {
        let rs = resolve(scenario.clone())?;
        let set = synthesize_campaign(&rs, 1000);
        let threshold = summary_threshold(rs.scenario.noise.amplitude);
        means.push(collect_means(&set, threshold));
    }
    Ok(welch_t(&means[0], &means[1]).ok())
}

fn collect_means(set: &TraceSet, threshold: f64) -> Vec<f64> {
    set.traces
        .iter()
        .filter_map(|t| {
            detect_pulse_window(t, threshold).map(|w| in_pulse_mean(t, w).expect("window in range"))
        })
        .collect()
}

fn cmd_calibrate(
    anchors_path: &Path,
    scenario_path: &Path,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let anchors = parse_anchor_csv(&read_file(anchors_path)?)
        .map_err(|e| input_err(&format!("invalid anchors {}", anchors_path.display()), e))?;
    if anchors.len() < 3 {
        return Err(input_err("anchors", "need at least 3 anchors"));
    }
    let scenario = load_scenario(scenario_path)?;
    let ctx =
        FitContext::from_scenario(&scenario, &anchors).map_err(|e| model_err("fit context", e))?;
    match fit_params(&anchors, &ctx, &FitOptions::default()) {
        Ok(result) => write_file(out, &pretty_json(&result), quiet),
        Err(FitError::NonConvergence(best)) => {
            write_file(out, &pretty_json(&*best), quiet)?;
            Err(CliError::NonConvergence(format!(
                "fit did not converge (residual {} µA); best-so-far written to {}",
                best.residual_ua,
                out.display()
            )))
        }
        Err(e @ FitError::Underdetermined(_)) => Err(input_err("anchors", e)),
        Err(e @ FitError::UnknownPattern(_)) => Err(model_err("fit", e)),
    }
}
