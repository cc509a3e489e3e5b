//! Switch-level static evaluation.
//!
//! Transistors are ideal voltage-controlled switches: an NMOS conducts when
//! its gate is HIGH, a PMOS when its gate is LOW, and both pass full levels.
//! A net is HIGH when it reaches the supply rail through conducting devices,
//! LOW when it reaches ground, FLOAT when it reaches neither. Levels are
//! computed by fixpoint iteration, which terminates because the set of
//! conducting transistors only grows as gate levels resolve.
//!
//! The evaluator also enumerates PN junction sites and their reverse-bias
//! state: n+ diffusion against the p-substrate is reverse-biased when its net
//! is HIGH, p+ diffusion against the n-well when its net is LOW, and the
//! well/substrate junction is reverse-biased whenever the cell is powered.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geom::Rect;
use crate::netlist::{
    Cell, CellLibrary, ChipDesign, InputPattern, NetKind, TransistorKind,
};

/// Default supply voltage for the 250 nm fixtures. Configurable per
/// assignment; the rail value only scales reported bias magnitudes.
pub const DEFAULT_VDD: f64 = 2.5;

/// Static logic level of a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    High,
    Low,
    Float,
}

impl Level {
    pub fn from_bit(bit: bool) -> Level {
        if bit {
            Level::High
        } else {
            Level::Low
        }
    }
}

/// Per-net logic levels for one evaluated input pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAssignment {
    pub levels: BTreeMap<String, Level>,
    pub vdd: f64,
}

impl NodeAssignment {
    pub fn level(&self, net: &str) -> Option<Level> {
        self.levels.get(net).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("pattern has {got} digits but cell {cell:?} has {expected} inputs")]
    PatternLength { cell: String, expected: usize, got: usize },
    #[error("net {net:?} is driven by both rails (static short)")]
    ShortCircuit { net: String },
    #[error("gate net {net:?} stays floating but drives further logic")]
    UnresolvedGate { net: String },
    #[error("cell {0:?} must have exactly one output")]
    NotSingleOutput(String),
    #[error("cell {cell:?} is missing a {kind} net")]
    MissingRail { cell: String, kind: &'static str },
    #[error("chip references unknown cell {0:?}")]
    UnknownCell(String),
    #[error("instance {instance:?} leaves cell input {pin:?} undriven")]
    UndrivenInput { instance: String, pin: String },
    #[error("chip instances form a cycle at {0:?}")]
    CyclicChip(String),
}

/// Evaluate one cell under a static input pattern. Pattern digits map onto
/// the cell's input nets in declaration order.
pub fn evaluate_static(cell: &Cell, pattern: &InputPattern) -> Result<NodeAssignment, EvalError> {
    evaluate_with_vdd(cell, pattern, DEFAULT_VDD)
}

pub fn evaluate_with_vdd(
    cell: &Cell,
    pattern: &InputPattern,
    vdd: f64,
) -> Result<NodeAssignment, EvalError> {
    let inputs = cell.input_nets();
    if inputs.len() != pattern.len() {
        return Err(EvalError::PatternLength {
            cell: cell.name.clone(),
            expected: inputs.len(),
            got: pattern.len(),
        });
    }
    let mut fixed: BTreeMap<&str, Level> = BTreeMap::new();
    for (net, bit) in inputs.iter().zip(pattern.bits()) {
        fixed.insert(net.id.as_str(), Level::from_bit(bit));
    }
    evaluate_fixed(cell, &fixed, vdd)
}

/// Core fixpoint evaluation with externally driven nets pre-assigned.
/// Supply and ground rails are added to `fixed` internally.
fn evaluate_fixed(
    cell: &Cell,
    driven: &BTreeMap<&str, Level>,
    vdd: f64,
) -> Result<NodeAssignment, EvalError> {
    let supply = cell
        .supply_net()
        .ok_or(EvalError::MissingRail { cell: cell.name.clone(), kind: "supply" })?
        .id
        .clone();
    let ground = cell
        .ground_net()
        .ok_or(EvalError::MissingRail { cell: cell.name.clone(), kind: "ground" })?
        .id
        .clone();

    let mut fixed: BTreeMap<&str, Level> = driven.clone();
    fixed.insert(supply.as_str(), Level::High);
    fixed.insert(ground.as_str(), Level::Low);

    let mut levels: BTreeMap<String, Level> = cell
        .nets
        .iter()
        .map(|n| {
            let lv = fixed.get(n.id.as_str()).copied().unwrap_or(Level::Float);
            (n.id.clone(), lv)
        })
        .collect();

    // The conducting set grows monotonically, so |transistors| + 1 rounds
    // suffice to reach the fixpoint.
    for _ in 0..=cell.transistors.len() {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for t in &cell.transistors {
            let gate = levels.get(&t.gate).copied().unwrap_or(Level::Float);
            let on = match t.kind {
                TransistorKind::Nmos => gate == Level::High,
                TransistorKind::Pmos => gate == Level::Low,
            };
            if on {
                adjacency.entry(t.source.as_str()).or_default().push(t.drain.as_str());
                adjacency.entry(t.drain.as_str()).or_default().push(t.source.as_str());
            }
        }

        let from_supply = reachable(&supply, &adjacency);
        let from_ground = reachable(&ground, &adjacency);
        if let Some(net) = from_supply.intersection(&from_ground).next() {
            return Err(EvalError::ShortCircuit { net: net.to_string() });
        }

        let mut changed = false;
        for net in &cell.nets {
            if fixed.contains_key(net.id.as_str()) {
                continue;
            }
            let new = if from_supply.contains(net.id.as_str()) {
                Level::High
            } else if from_ground.contains(net.id.as_str()) {
                Level::Low
            } else {
                Level::Float
            };
            let slot = levels.get_mut(&net.id).expect("net present");
            if *slot != new {
                *slot = new;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    for t in &cell.transistors {
        if levels.get(&t.gate).copied() == Some(Level::Float) {
            return Err(EvalError::UnresolvedGate { net: t.gate.clone() });
        }
    }

    Ok(NodeAssignment { levels, vdd })
}

fn reachable<'a>(start: &'a str, adjacency: &BTreeMap<&'a str, Vec<&'a str>>) -> BTreeSet<&'a str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(net) = queue.pop_front() {
        if let Some(next) = adjacency.get(net) {
            for &n in next {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    // The start rail itself is not "reachable through a transistor" unless a
    // conducting loop returns to it; keep it, callers compare distinct rails.
    seen
}

/// Output level for every input pattern of a single-output cell.
pub fn truth_table(cell: &Cell) -> Result<BTreeMap<InputPattern, Level>, EvalError> {
    let outputs = cell.output_nets();
    if outputs.len() != 1 {
        return Err(EvalError::NotSingleOutput(cell.name.clone()));
    }
    let out_id = outputs[0].id.clone();
    let n = cell.input_nets().len();
    let mut table = BTreeMap::new();
    for pattern in InputPattern::enumerate(n) {
        let assign = evaluate_static(cell, &pattern)?;
        table.insert(pattern, assign.level(&out_id).expect("output net evaluated"));
    }
    Ok(table)
}

/// Kind of PN junction acting as a photocurrent generation site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionKind {
    /// n+ diffusion against the p-substrate (NMOS source/drain).
    NdiffPsub,
    /// p+ diffusion against the n-well (PMOS source/drain).
    PdiffNwell,
    /// The n-well against the p-substrate; reverse-biased whenever powered.
    NwellPsub,
}

/// One PN junction with its geometry and electrical attachment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionSite {
    pub kind: JunctionKind,
    pub rect: Rect,
    /// Net the diffusion belongs to; `None` for the well/substrate junction.
    pub attached_net: Option<String>,
    /// Cell name or placement instance id the site belongs to.
    pub owner: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEntry {
    pub site: JunctionSite,
    pub reverse_biased: bool,
    /// Reverse-bias magnitude in volts; 0 whenever not reverse-biased.
    pub bias_magnitude: f64,
}

/// Reverse-bias states of every junction site under one node assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub entries: Vec<BiasEntry>,
    /// Floating nets encountered while classifying sites. Their junctions
    /// contribute no reverse bias.
    pub float_nets: Vec<String>,
}

impl BiasReport {
    pub fn reverse_biased(&self) -> impl Iterator<Item = &BiasEntry> {
        self.entries.iter().filter(|e| e.reverse_biased)
    }

    pub fn count_biased(&self, kind: JunctionKind) -> usize {
        self.entries.iter().filter(|e| e.reverse_biased && e.site.kind == kind).count()
    }
}

/// Enumerate junction sites of a cell (two diffusion sites per transistor
/// plus the well/substrate site) and classify their bias under `assign`.
pub fn reverse_biased_junctions(cell: &Cell, assign: &NodeAssignment) -> BiasReport {
    junctions_for(cell, assign, &cell.name, 0.0, 0.0)
}

fn junctions_for(
    cell: &Cell,
    assign: &NodeAssignment,
    owner: &str,
    dx: f64,
    dy: f64,
) -> BiasReport {
    let mut entries = Vec::new();
    let mut float_nets: BTreeSet<String> = BTreeSet::new();

    for t in &cell.transistors {
        let kind = match t.kind {
            TransistorKind::Nmos => JunctionKind::NdiffPsub,
            TransistorKind::Pmos => JunctionKind::PdiffNwell,
        };
        for (net, rect) in [(&t.source, &t.source_diff), (&t.drain, &t.drain_diff)] {
            let level = assign.level(net).unwrap_or(Level::Float);
            if level == Level::Float {
                float_nets.insert(net.clone());
            }
            let biased = match kind {
                JunctionKind::NdiffPsub => level == Level::High,
                JunctionKind::PdiffNwell => level == Level::Low,
                JunctionKind::NwellPsub => unreachable!(),
            };
            entries.push(BiasEntry {
                site: JunctionSite {
                    kind,
                    rect: rect.translate(dx, dy),
                    attached_net: Some(net.clone()),
                    owner: owner.to_string(),
                },
                reverse_biased: biased,
                bias_magnitude: if biased { assign.vdd } else { 0.0 },
            });
        }
    }

    entries.push(BiasEntry {
        site: JunctionSite {
            kind: JunctionKind::NwellPsub,
            rect: cell.well.translate(dx, dy),
            attached_net: None,
            owner: owner.to_string(),
        },
        reverse_biased: true,
        bias_magnitude: assign.vdd,
    });

    BiasReport { entries, float_nets: float_nets.into_iter().collect() }
}

/// Full static evaluation of a placed chip.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipEval {
    /// Global net levels, including rails and tied constants.
    pub global_levels: BTreeMap<String, Level>,
    /// Per-instance assignments in placement order.
    pub instances: Vec<(String, NodeAssignment)>,
    /// Junction bias entries across all instances, geometry translated to
    /// chip coordinates.
    pub bias: BiasReport,
}

/// Evaluate a chip: tied nets and pattern digits fix the boundary, then
/// instances are evaluated in dependency order so every cell sees fully
/// resolved inputs. Pattern digits map to `ChipDesign::free_inputs` order.
pub fn evaluate_chip(
    design: &ChipDesign,
    lib: &CellLibrary,
    pattern: &InputPattern,
    vdd: f64,
) -> Result<ChipEval, EvalError> {
    let free = design.free_inputs(lib);
    if free.len() != pattern.len() {
        return Err(EvalError::PatternLength {
            cell: design.name.clone(),
            expected: free.len(),
            got: pattern.len(),
        });
    }

    let mut global: BTreeMap<String, Level> = BTreeMap::new();
    for (net, level) in &design.ties {
        global.insert(net.clone(), Level::from_bit(*level));
    }
    for (net, bit) in free.iter().zip(pattern.bits()) {
        global.insert(net.clone(), Level::from_bit(bit));
    }

    let order = topo_order(design, lib)?;
    let mut instances: Vec<(String, NodeAssignment)> = Vec::with_capacity(order.len());
    let mut bias_entries = Vec::new();
    let mut float_nets: BTreeSet<String> = BTreeSet::new();

    for idx in order {
        let placement = &design.placements[idx];
        let cell = lib
            .cell(&placement.cell)
            .ok_or_else(|| EvalError::UnknownCell(placement.cell.clone()))?;

        let mut driven: BTreeMap<&str, Level> = BTreeMap::new();
        for (pin, global_net) in &placement.pin_map {
            let Some(net) = cell.net(pin) else { continue };
            match net.kind {
                NetKind::Input => {
                    let level =
                        global.get(global_net).copied().ok_or(EvalError::UndrivenInput {
                            instance: placement.instance.clone(),
                            pin: pin.clone(),
                        })?;
                    if level == Level::Float {
                        return Err(EvalError::UndrivenInput {
                            instance: placement.instance.clone(),
                            pin: pin.clone(),
                        });
                    }
                    driven.insert(pin.as_str(), level);
                }
                NetKind::Supply => {
                    global.insert(global_net.clone(), Level::High);
                }
                NetKind::Ground => {
                    global.insert(global_net.clone(), Level::Low);
                }
                _ => {}
            }
        }

        let assign = evaluate_fixed(cell, &driven, vdd)?;

        for (pin, global_net) in &placement.pin_map {
            if cell.net(pin).map(|n| n.kind) == Some(NetKind::Output) {
                if let Some(level) = assign.level(pin) {
                    global.insert(global_net.clone(), level);
                }
            }
        }

        let report = junctions_for(
            cell,
            &assign,
            &placement.instance,
            placement.origin.x,
            placement.origin.y,
        );
        bias_entries.extend(report.entries);
        float_nets.extend(report.float_nets);
        instances.push((placement.instance.clone(), assign));
    }

    Ok(ChipEval {
        global_levels: global,
        instances,
        bias: BiasReport { entries: bias_entries, float_nets: float_nets.into_iter().collect() },
    })
}

/// Topological order of placements along output->input edges.
fn topo_order(design: &ChipDesign, lib: &CellLibrary) -> Result<Vec<usize>, EvalError> {
    let n = design.placements.len();
    let mut produced: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, p) in design.placements.iter().enumerate() {
        let cell = lib.cell(&p.cell).ok_or_else(|| EvalError::UnknownCell(p.cell.clone()))?;
        for (pin, global) in &p.pin_map {
            if cell.net(pin).map(|x| x.kind) == Some(NetKind::Output) {
                produced.insert(global.as_str(), i);
            }
        }
    }
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (i, p) in design.placements.iter().enumerate() {
        let cell = lib.cell(&p.cell).expect("checked above");
        for (pin, global) in &p.pin_map {
            if cell.net(pin).map(|x| x.kind) == Some(NetKind::Input) {
                if let Some(&src) = produced.get(global.as_str()) {
                    deps[src].push(i);
                    indegree[i] += 1;
                }
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &next in &deps[i] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                queue.push_back(next);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(EvalError::CyclicChip(design.placements[stuck].instance.clone()));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_chain, builtin_fixtures, inv, nand2, nor2};

    fn pat(s: &str) -> InputPattern {
        InputPattern::new(s).unwrap()
    }

    #[test]
    fn nand2_11_pulls_out_and_m_low() {
        let a = evaluate_static(&nand2(), &pat("11")).unwrap();
        assert_eq!(a.level("OUT"), Some(Level::Low));
        assert_eq!(a.level("M"), Some(Level::Low));
    }

    #[test]
    fn nand2_01_leaves_out_high_m_low() {
        let a = evaluate_static(&nand2(), &pat("01")).unwrap();
        assert_eq!(a.level("OUT"), Some(Level::High));
        assert_eq!(a.level("M"), Some(Level::Low));
    }

    #[test]
    fn nand2_00_floats_internal_node() {
        let a = evaluate_static(&nand2(), &pat("00")).unwrap();
        assert_eq!(a.level("OUT"), Some(Level::High));
        assert_eq!(a.level("M"), Some(Level::Float));
    }

    #[test]
    fn truth_tables_match_boolean_definitions() {
        let nand = truth_table(&nand2()).unwrap();
        assert_eq!(nand[&pat("00")], Level::High);
        assert_eq!(nand[&pat("01")], Level::High);
        assert_eq!(nand[&pat("10")], Level::High);
        assert_eq!(nand[&pat("11")], Level::Low);

        let nor = truth_table(&nor2()).unwrap();
        assert_eq!(nor[&pat("00")], Level::High);
        assert_eq!(nor[&pat("01")], Level::Low);
        assert_eq!(nor[&pat("10")], Level::Low);
        assert_eq!(nor[&pat("11")], Level::Low);

        let inv_table = truth_table(&inv()).unwrap();
        assert_eq!(inv_table[&pat("0")], Level::High);
        assert_eq!(inv_table[&pat("1")], Level::Low);
    }

    #[test]
    fn bias_report_nand2_01() {
        let cell = nand2();
        let a = evaluate_static(&cell, &pat("01")).unwrap();
        let report = reverse_biased_junctions(&cell, &a);
        // Exactly one n+ site is reverse-biased: the NMOS drain on OUT.
        let ndiff: Vec<&BiasEntry> = report
            .reverse_biased()
            .filter(|e| e.site.kind == JunctionKind::NdiffPsub)
            .collect();
        assert_eq!(ndiff.len(), 1);
        assert_eq!(ndiff[0].site.attached_net.as_deref(), Some("OUT"));
        assert_eq!(ndiff[0].bias_magnitude, DEFAULT_VDD);
        // The p+ sites on OUT are not biased (OUT is HIGH), the well is.
        assert!(report
            .entries
            .iter()
            .filter(|e| e.site.kind == JunctionKind::PdiffNwell
                && e.site.attached_net.as_deref() == Some("OUT"))
            .all(|e| !e.reverse_biased));
        assert_eq!(report.count_biased(JunctionKind::NwellPsub), 1);
    }

    #[test]
    fn bias_report_nand2_11() {
        let cell = nand2();
        let a = evaluate_static(&cell, &pat("11")).unwrap();
        let report = reverse_biased_junctions(&cell, &a);
        assert_eq!(report.count_biased(JunctionKind::NdiffPsub), 0);
        let pdiff_out = report
            .reverse_biased()
            .filter(|e| e.site.kind == JunctionKind::PdiffNwell)
            .count();
        assert_eq!(pdiff_out, 2); // both PMOS drains on OUT
        assert_eq!(report.count_biased(JunctionKind::NwellPsub), 1);
    }

    #[test]
    fn well_site_is_always_biased() {
        for cell in [inv(), nand2(), nor2()] {
            let n = cell.input_nets().len();
            for p in InputPattern::enumerate(n) {
                let a = evaluate_static(&cell, &p).unwrap();
                let report = reverse_biased_junctions(&cell, &a);
                assert_eq!(report.count_biased(JunctionKind::NwellPsub), 1);
            }
        }
    }

    #[test]
    fn ndiff_bias_count_01_exceeds_11() {
        let cell = nand2();
        let r01 = reverse_biased_junctions(&cell, &evaluate_static(&cell, &pat("01")).unwrap());
        let r11 = reverse_biased_junctions(&cell, &evaluate_static(&cell, &pat("11")).unwrap());
        assert!(r01.count_biased(JunctionKind::NdiffPsub) > r11.count_biased(JunctionKind::NdiffPsub));
    }

    #[test]
    fn no_short_circuit_on_fixtures() {
        for cell in [inv(), nand2(), nor2()] {
            let n = cell.input_nets().len();
            for p in InputPattern::enumerate(n) {
                evaluate_static(&cell, &p).unwrap();
            }
        }
    }

    #[test]
    fn float_net_is_flagged_not_biased() {
        let cell = nand2();
        let a = evaluate_static(&cell, &pat("00")).unwrap();
        let report = reverse_biased_junctions(&cell, &a);
        assert_eq!(report.float_nets, vec!["M".to_string()]);
        assert!(report
            .entries
            .iter()
            .filter(|e| e.site.attached_net.as_deref() == Some("M"))
            .all(|e| !e.reverse_biased && e.bias_magnitude == 0.0));
    }

    #[test]
    fn chain_evaluation_alternates_cell_states() {
        let lib = builtin_fixtures();
        let tie = std::collections::BTreeMap::from([("In2".to_string(), true)]);
        let chip = build_chain(&nand2(), 4, &tie).unwrap();
        // Chain input 0: u0 sees 01 -> OUT high, u1 sees 11 -> low, ...
        let eval = evaluate_chip(&chip, &lib, &pat("0"), DEFAULT_VDD).unwrap();
        assert_eq!(eval.global_levels["N1"], Level::High);
        assert_eq!(eval.global_levels["N2"], Level::Low);
        assert_eq!(eval.global_levels["N3"], Level::High);
        assert_eq!(eval.global_levels["N4"], Level::Low);
        // 4 instances x (8 diffusion sites + 1 well site) / per cell: 9 each.
        assert_eq!(eval.bias.entries.len(), 4 * 9);
    }

    #[test]
    fn pattern_length_mismatch_is_reported() {
        let err = evaluate_static(&nand2(), &pat("1")).unwrap_err();
        assert!(matches!(err, EvalError::PatternLength { expected: 2, got: 1, .. }));
    }
}
