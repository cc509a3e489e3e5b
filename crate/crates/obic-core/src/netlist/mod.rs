//! Transistor-level standard-cell model with diffusion/well geometry, the
//! line-based netlist format, and built-in fixture cells.
//!
//! A [`Cell`] is a set of named nets plus MOS transistors whose source/drain
//! diffusion rectangles are first-class geometry; a [`ChipDesign`] places cell
//! instances and wires them through pin renaming. Libraries and chips round-trip
//! through the textual format in [`parse`]/[`write`].

mod chain;
mod fixtures;
mod parse;
mod write;

pub use chain::{build_chain, ChainError};
pub use fixtures::{builtin_fixtures, inv, nand2, nor2};
pub use parse::{parse_cell_library, parse_document, ParseError};
pub use write::{serialize_cell_library, serialize_chip, serialize_document};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{Point, Rect};

/// Electrical role of a net within a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Supply,
    Ground,
    Input,
    Output,
    Internal,
}

impl NetKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            NetKind::Supply => "supply",
            NetKind::Ground => "ground",
            NetKind::Input => "input",
            NetKind::Output => "output",
            NetKind::Internal => "internal",
        }
    }

    pub fn from_keyword(s: &str) -> Option<NetKind> {
        match s {
            "supply" => Some(NetKind::Supply),
            "ground" => Some(NetKind::Ground),
            "input" => Some(NetKind::Input),
            "output" => Some(NetKind::Output),
            "internal" => Some(NetKind::Internal),
            _ => None,
        }
    }
}

/// A named circuit node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub id: String,
    pub kind: NetKind,
}

impl Net {
    pub fn new(id: &str, kind: NetKind) -> Self {
        Net { id: id.to_string(), kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransistorKind {
    Nmos,
    Pmos,
}

/// A MOS transistor with explicit source/drain diffusion rectangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transistor {
    pub id: String,
    pub kind: TransistorKind,
    pub gate: String,
    pub source: String,
    pub drain: String,
    pub source_diff: Rect,
    pub drain_diff: Rect,
}

/// A standard cell: nets, transistors, the n-well region and the bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub nets: Vec<Net>,
    pub transistors: Vec<Transistor>,
    pub well: Rect,
    pub bbox: Rect,
}

impl Cell {
    pub fn net(&self, id: &str) -> Option<&Net> {
        self.nets.iter().find(|n| n.id == id)
    }

    /// Input nets in declaration order. Input-pattern digits map to these.
    pub fn input_nets(&self) -> Vec<&Net> {
        self.nets.iter().filter(|n| n.kind == NetKind::Input).collect()
    }

    pub fn output_nets(&self) -> Vec<&Net> {
        self.nets.iter().filter(|n| n.kind == NetKind::Output).collect()
    }

    pub fn supply_net(&self) -> Option<&Net> {
        self.nets.iter().find(|n| n.kind == NetKind::Supply)
    }

    pub fn ground_net(&self) -> Option<&Net> {
        self.nets.iter().find(|n| n.kind == NetKind::Ground)
    }
}

/// An ordered collection of cells, kept sorted by cell name so that
/// serialization and equality are canonical.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellLibrary {
    cells: Vec<Cell>,
}

impl CellLibrary {
    pub fn new() -> Self {
        CellLibrary { cells: Vec::new() }
    }

    pub fn from_cells(cells: Vec<Cell>) -> Result<Self, String> {
        let mut lib = CellLibrary::new();
        for c in cells {
            lib.push(c)?;
        }
        Ok(lib)
    }

    /// Insert a cell, keeping the collection sorted by name.
    pub fn push(&mut self, cell: Cell) -> Result<(), String> {
        if self.cell(&cell.name).is_some() {
            return Err(cell.name);
        }
        let pos = self.cells.partition_point(|c| c.name < cell.name);
        self.cells.insert(pos, cell);
        Ok(())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// One placed cell instance inside a chip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub cell: String,
    pub instance: String,
    pub origin: Point,
    /// Pin renaming, `(cell net id, global net id)`, in declaration order.
    pub pin_map: Vec<(String, String)>,
}

impl Placement {
    pub fn global_net(&self, pin: &str) -> Option<&str> {
        self.pin_map.iter().find(|(p, _)| p == pin).map(|(_, n)| n.as_str())
    }
}

/// A chip: placed cell instances plus constant-tied global nets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipDesign {
    pub name: String,
    pub placements: Vec<Placement>,
    /// Global nets held at a constant logic level.
    pub ties: Vec<(String, bool)>,
}

impl ChipDesign {
    pub fn placement(&self, instance: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.instance == instance)
    }

    pub fn tie_level(&self, net: &str) -> Option<bool> {
        self.ties.iter().find(|(n, _)| n == net).map(|(_, l)| *l)
    }

    /// Every global net referenced by a pin map or tie.
    pub fn global_nets(&self) -> BTreeSet<String> {
        let mut nets = BTreeSet::new();
        for p in &self.placements {
            for (_, g) in &p.pin_map {
                nets.insert(g.clone());
            }
        }
        for (n, _) in &self.ties {
            nets.insert(n.clone());
        }
        nets
    }

    /// Chip-level free inputs: global nets mapped onto cell input pins that are
    /// neither tied nor driven by any instance output, ordered by first
    /// appearance in the placement pin maps. Input-pattern digits map to these.
    pub fn free_inputs(&self, lib: &CellLibrary) -> Vec<String> {
        let mut driven = BTreeSet::new();
        for p in &self.placements {
            if let Some(cell) = lib.cell(&p.cell) {
                for (pin, global) in &p.pin_map {
                    if cell.net(pin).map(|n| n.kind) == Some(NetKind::Output) {
                        driven.insert(global.clone());
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        let mut free = Vec::new();
        for p in &self.placements {
            if let Some(cell) = lib.cell(&p.cell) {
                for (pin, global) in &p.pin_map {
                    if cell.net(pin).map(|n| n.kind) == Some(NetKind::Input)
                        && !driven.contains(global)
                        && self.tie_level(global).is_none()
                        && seen.insert(global.clone())
                    {
                        free.push(global.clone());
                    }
                }
            }
        }
        free
    }
}

/// A parsed netlist document: cell definitions followed by chip definitions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub library: CellLibrary,
    pub chips: Vec<ChipDesign>,
}

impl Document {
    pub fn chip(&self, name: &str) -> Option<&ChipDesign> {
        self.chips.iter().find(|c| c.name == name)
    }
}

/// Static logic levels assignable to cell inputs, one binary digit per input
/// net in declaration order. `"01"` means first input 0, second input 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct InputPattern(String);

impl InputPattern {
    pub fn new(digits: &str) -> Result<Self, PatternError> {
        if digits.is_empty() {
            return Err(PatternError::Empty);
        }
        if let Some(c) = digits.chars().find(|c| *c != '0' && *c != '1') {
            return Err(PatternError::BadDigit(c));
        }
        Ok(InputPattern(digits.to_string()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.chars().map(|c| c == '1')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// All 2^n patterns of width `n`, in ascending binary order.
    pub fn enumerate(n: usize) -> Vec<InputPattern> {
        assert!(n >= 1 && n <= 16, "pattern width out of range");
        (0..(1usize << n))
            .map(|v| {
                let digits: String =
                    (0..n).map(|i| if v >> (n - 1 - i) & 1 == 1 { '1' } else { '0' }).collect();
                InputPattern(digits)
            })
            .collect()
    }
}

impl fmt::Display for InputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for InputPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InputPattern::new(s)
    }
}

impl TryFrom<String> for InputPattern {
    type Error = PatternError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        InputPattern::new(&s)
    }
}

impl From<InputPattern> for String {
    fn from(p: InputPattern) -> String {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("input pattern must not be empty")]
    Empty,
    #[error("input pattern digit must be 0 or 1, got {0:?}")]
    BadDigit(char),
}

/// A broken structural invariant. Violations are data, not failures: a library
/// that parses can still be invalid, and `validate` reports every breach.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Cell (or chip) the violation was found in.
    pub cell: String,
    /// Offending element: net, transistor, instance or the cell itself.
    pub element: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} violates {:?}", self.cell, self.element, self.rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DuplicateId,
    SupplyCount,
    GroundCount,
    DanglingNetReference,
    NegativeGeometry,
    WellContainment,
    BboxContainment,
    WellArea,
    DanglingPin,
    UnknownCell,
    ChainCycle,
    PlacementOverlap,
}

fn check_rect(v: &mut Vec<Violation>, cell: &str, element: &str, r: &Rect) {
    if r.w < 0.0 || r.h < 0.0 {
        v.push(Violation {
            cell: cell.to_string(),
            element: element.to_string(),
            rule: Rule::NegativeGeometry,
        });
    }
}

/// Check every cell-level invariant of a library.
pub fn validate(lib: &CellLibrary) -> Vec<Violation> {
    let mut out = Vec::new();
    for cell in lib.cells() {
        validate_cell(cell, &mut out);
    }
    out
}

fn validate_cell(cell: &Cell, out: &mut Vec<Violation>) {
    let mut ids = BTreeSet::new();
    for net in &cell.nets {
        if !ids.insert(net.id.clone()) {
            out.push(Violation {
                cell: cell.name.clone(),
                element: net.id.clone(),
                rule: Rule::DuplicateId,
            });
        }
    }
    for t in &cell.transistors {
        if !ids.insert(t.id.clone()) {
            out.push(Violation {
                cell: cell.name.clone(),
                element: t.id.clone(),
                rule: Rule::DuplicateId,
            });
        }
    }

    let supplies = cell.nets.iter().filter(|n| n.kind == NetKind::Supply).count();
    if supplies != 1 {
        out.push(Violation {
            cell: cell.name.clone(),
            element: cell.name.clone(),
            rule: Rule::SupplyCount,
        });
    }
    let grounds = cell.nets.iter().filter(|n| n.kind == NetKind::Ground).count();
    if grounds != 1 {
        out.push(Violation {
            cell: cell.name.clone(),
            element: cell.name.clone(),
            rule: Rule::GroundCount,
        });
    }

    for t in &cell.transistors {
        for net in [&t.gate, &t.source, &t.drain] {
            if cell.net(net).is_none() {
                out.push(Violation {
                    cell: cell.name.clone(),
                    element: format!("{}:{}", t.id, net),
                    rule: Rule::DanglingNetReference,
                });
            }
        }
        check_rect(out, &cell.name, &t.id, &t.source_diff);
        check_rect(out, &cell.name, &t.id, &t.drain_diff);
        for diff in [&t.source_diff, &t.drain_diff] {
            let ok = match t.kind {
                TransistorKind::Nmos => cell.well.interior_disjoint(diff),
                TransistorKind::Pmos => cell.well.contains_rect(diff),
            };
            if !ok {
                out.push(Violation {
                    cell: cell.name.clone(),
                    element: t.id.clone(),
                    rule: Rule::WellContainment,
                });
            }
            if !cell.bbox.contains_rect(diff) {
                out.push(Violation {
                    cell: cell.name.clone(),
                    element: t.id.clone(),
                    rule: Rule::BboxContainment,
                });
            }
        }
    }

    if !(cell.well.area() > 0.0) {
        out.push(Violation {
            cell: cell.name.clone(),
            element: "well".to_string(),
            rule: Rule::WellArea,
        });
    }
    if !cell.bbox.contains_rect(&cell.well) {
        out.push(Violation {
            cell: cell.name.clone(),
            element: "well".to_string(),
            rule: Rule::BboxContainment,
        });
    }
}

/// Check chip-level invariants against the library the chip references.
pub fn validate_chip(chip: &ChipDesign, lib: &CellLibrary) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut instances = BTreeSet::new();
    for p in &chip.placements {
        if !instances.insert(p.instance.clone()) {
            out.push(Violation {
                cell: chip.name.clone(),
                element: p.instance.clone(),
                rule: Rule::DuplicateId,
            });
        }
        let Some(cell) = lib.cell(&p.cell) else {
            out.push(Violation {
                cell: chip.name.clone(),
                element: p.instance.clone(),
                rule: Rule::UnknownCell,
            });
            continue;
        };
        for (pin, _) in &p.pin_map {
            if cell.net(pin).is_none() {
                out.push(Violation {
                    cell: chip.name.clone(),
                    element: format!("{}:{}", p.instance, pin),
                    rule: Rule::DanglingPin,
                });
            }
        }
    }

    for (i, a) in chip.placements.iter().enumerate() {
        for b in chip.placements.iter().skip(i + 1) {
            let (Some(ca), Some(cb)) = (lib.cell(&a.cell), lib.cell(&b.cell)) else {
                continue;
            };
            let ra = ca.bbox.translate(a.origin.x, a.origin.y);
            let rb = cb.bbox.translate(b.origin.x, b.origin.y);
            if !ra.interior_disjoint(&rb) {
                out.push(Violation {
                    cell: chip.name.clone(),
                    element: format!("{}/{}", a.instance, b.instance),
                    rule: Rule::PlacementOverlap,
                });
            }
        }
    }

    if let Some(inst) = find_cycle(chip, lib) {
        out.push(Violation { cell: chip.name.clone(), element: inst, rule: Rule::ChainCycle });
    }
    out
}

/// Instance-level connectivity graph: an edge a -> b when an output pin of `a`
/// drives an input pin of `b`. Returns an instance on a cycle, if any.
fn find_cycle(chip: &ChipDesign, lib: &CellLibrary) -> Option<String> {
    let mut drivers: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in chip.placements.iter().enumerate() {
        let Some(cell) = lib.cell(&p.cell) else { continue };
        for (pin, global) in &p.pin_map {
            if cell.net(pin).map(|n| n.kind) == Some(NetKind::Output) {
                drivers.entry(global.as_str()).or_default().push(i);
            }
        }
    }
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); chip.placements.len()];
    for (i, p) in chip.placements.iter().enumerate() {
        let Some(cell) = lib.cell(&p.cell) else { continue };
        for (pin, global) in &p.pin_map {
            if cell.net(pin).map(|n| n.kind) == Some(NetKind::Input) {
                if let Some(ds) = drivers.get(global.as_str()) {
                    for &d in ds {
                        edges[d].push(i);
                    }
                }
            }
        }
    }

    // Iterative DFS with colouring.
    let n = chip.placements.len();
    let mut color = vec![0u8; n]; // 0 white, 1 grey, 2 black
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = 1;
        while let Some(&mut (node, ref mut edge)) = stack.last_mut() {
            if *edge < edges[node].len() {
                let next = edges[node][*edge];
                *edge += 1;
                match color[next] {
                    0 => {
                        color[next] = 1;
                        stack.push((next, 0));
                    }
                    1 => return Some(chip.placements[next].instance.clone()),
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_are_valid() {
        let lib = builtin_fixtures();
        assert_eq!(validate(&lib), Vec::new());
    }

    #[test]
    fn pmos_diffusion_outside_well_is_flagged() {
        let lib = builtin_fixtures();
        let mut cell = nand2().clone();
        let _ = lib;
        // Drag one PMOS diffusion below the well boundary.
        cell.transistors[0].source_diff = Rect::new(0.4, 0.5, 1.0, 0.9);
        let lib = CellLibrary::from_cells(vec![cell]).unwrap();
        let vs = validate(&lib);
        assert!(vs.iter().any(|v| v.rule == Rule::WellContainment), "{vs:?}");
    }

    #[test]
    fn two_supply_nets_are_flagged() {
        let mut cell = nand2().clone();
        cell.nets.push(Net::new("VDD2", NetKind::Supply));
        let lib = CellLibrary::from_cells(vec![cell]).unwrap();
        let vs = validate(&lib);
        assert!(vs.iter().any(|v| v.rule == Rule::SupplyCount), "{vs:?}");
    }

    #[test]
    fn pattern_enumeration_is_binary_ordered() {
        let ps = InputPattern::enumerate(2);
        let strs: Vec<&str> = ps.iter().map(|p| p.as_str()).collect();
        assert_eq!(strs, ["00", "01", "10", "11"]);
    }

    #[test]
    fn pattern_rejects_non_binary() {
        assert!(InputPattern::new("0x1").is_err());
        assert!(InputPattern::new("").is_err());
    }
}
