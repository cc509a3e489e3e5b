//! Serializer for the netlist format. Output is canonical: cells and chips
//! alphabetical by name, nets/transistors/placements in declaration order,
//! numbers in shortest round-trip decimal form. `parse(serialize(x))` is the
//! identity and `serialize` is a fixed point over parse/serialize cycles.

use super::{Cell, CellLibrary, ChipDesign, Document, TransistorKind};
use crate::geom::{Point, Rect};
use std::fmt::Write;

const HEADER: &str = "# obic netlist\n";

/// Shortest decimal form that parses back to the same f64. Rust's float
/// Display never emits exponents, which keeps the grammar happy.
fn num(v: f64) -> String {
    debug_assert!(v.is_finite(), "netlist numbers must be finite");
    format!("{v}")
}

fn rect(r: &Rect) -> String {
    format!("({},{},{},{})", num(r.x), num(r.y), num(r.w), num(r.h))
}

fn point(p: &Point) -> String {
    format!("({},{})", num(p.x), num(p.y))
}

fn write_cell(out: &mut String, cell: &Cell) {
    let _ = writeln!(out, "cell {}", cell.name);
    for net in &cell.nets {
        let _ = writeln!(out, "  net {} {}", net.id, net.kind.keyword());
    }
    for t in &cell.transistors {
        let kw = match t.kind {
            TransistorKind::Pmos => "pmos",
            TransistorKind::Nmos => "nmos",
        };
        let _ = writeln!(
            out,
            "  {kw} {} gate={} source={} drain={} sdiff={} ddiff={}",
            t.id,
            t.gate,
            t.source,
            t.drain,
            rect(&t.source_diff),
            rect(&t.drain_diff)
        );
    }
    let _ = writeln!(out, "  well {}", rect(&cell.well));
    let _ = writeln!(out, "  bbox {}", rect(&cell.bbox));
    let _ = writeln!(out, "end");
}

fn write_chip(out: &mut String, chip: &ChipDesign) {
    let _ = writeln!(out, "chip {}", chip.name);
    for p in &chip.placements {
        let pins: Vec<String> =
            p.pin_map.iter().map(|(pin, net)| format!("{pin}={net}")).collect();
        let _ = writeln!(
            out,
            "  use {} as {} at {} map {}",
            p.cell,
            p.instance,
            point(&p.origin),
            pins.join(" ")
        );
    }
    for (net, level) in &chip.ties {
        let _ = writeln!(out, "  tie {} {}", net, if *level { 1 } else { 0 });
    }
    let _ = writeln!(out, "end");
}

/// Serialize a library. An empty library yields a header-only document.
pub fn serialize_cell_library(lib: &CellLibrary) -> String {
    let mut out = String::from(HEADER);
    for cell in lib.cells() {
        out.push('\n');
        write_cell(&mut out, cell);
    }
    out
}

/// Serialize a single chip as a standalone document.
pub fn serialize_chip(chip: &ChipDesign) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    write_chip(&mut out, chip);
    out
}

/// Serialize cells followed by chips. Chips are ordered alphabetically.
pub fn serialize_document(doc: &Document) -> String {
    let mut out = serialize_cell_library(&doc.library);
    let mut chips: Vec<&ChipDesign> = doc.chips.iter().collect();
    chips.sort_by(|a, b| a.name.cmp(&b.name));
    for chip in chips {
        out.push('\n');
        write_chip(&mut out, chip);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{builtin_fixtures, parse_cell_library};

    #[test]
    fn empty_library_is_header_only() {
        let text = serialize_cell_library(&CellLibrary::new());
        assert_eq!(text, "# obic netlist\n");
    }

    #[test]
    fn builtin_library_contains_one_nand2_block() {
        let text = serialize_cell_library(&builtin_fixtures());
        assert_eq!(text.matches("cell NAND2X1").count(), 1);
    }

    #[test]
    fn serialize_is_a_fixed_point() {
        let lib = builtin_fixtures();
        let once = serialize_cell_library(&lib);
        let twice = serialize_cell_library(&parse_cell_library(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn round_trip_is_identity() {
        let lib = builtin_fixtures();
        let parsed = parse_cell_library(&serialize_cell_library(&lib)).unwrap();
        assert_eq!(parsed, lib);
    }
}
