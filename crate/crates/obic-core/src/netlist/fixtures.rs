//! Built-in combinational cells at a 250 nm scale: NAND2X1, NOR2X1, INVX1.
//!
//! The NAND2X1 bounding box matches the reference device footprint of 35 µm²;
//! diffusion and well rectangles are representative of the process generation
//! rather than extracted from a real layout, so tests should pin behaviour to
//! the bbox area and topology, not to individual rectangles.

use super::{Cell, CellLibrary, Net, NetKind, Transistor, TransistorKind};
use crate::geom::Rect;

fn pmos(id: &str, gate: &str, source: &str, drain: &str, sdiff: Rect, ddiff: Rect) -> Transistor {
    Transistor {
        id: id.to_string(),
        kind: TransistorKind::Pmos,
        gate: gate.to_string(),
        source: source.to_string(),
        drain: drain.to_string(),
        source_diff: sdiff,
        drain_diff: ddiff,
    }
}

fn nmos(id: &str, gate: &str, source: &str, drain: &str, sdiff: Rect, ddiff: Rect) -> Transistor {
    Transistor {
        id: id.to_string(),
        kind: TransistorKind::Nmos,
        gate: gate.to_string(),
        source: source.to_string(),
        drain: drain.to_string(),
        source_diff: sdiff,
        drain_diff: ddiff,
    }
}

/// Two-input NAND. Pull-up: two parallel PMOS from VDD to OUT. Pull-down:
/// NMOS stack OUT -> M -> GND with In1 gating the top device and In2 the
/// bottom one. The 7 x 5 µm bounding box gives the 35 µm² footprint.
pub fn nand2() -> Cell {
    Cell {
        name: "NAND2X1".to_string(),
        nets: vec![
            Net::new("VDD", NetKind::Supply),
            Net::new("GND", NetKind::Ground),
            Net::new("In1", NetKind::Input),
            Net::new("In2", NetKind::Input),
            Net::new("OUT", NetKind::Output),
            Net::new("M", NetKind::Internal),
        ],
        transistors: vec![
            pmos(
                "P1",
                "In1",
                "VDD",
                "OUT",
                Rect::new(0.4, 3.3, 1.0, 0.9),
                Rect::new(1.8, 3.3, 1.0, 0.9),
            ),
            pmos(
                "P2",
                "In2",
                "VDD",
                "OUT",
                Rect::new(3.2, 3.3, 1.0, 0.9),
                Rect::new(4.6, 3.3, 1.0, 0.9),
            ),
            nmos(
                "N1",
                "In1",
                "M",
                "OUT",
                Rect::new(1.8, 0.6, 1.0, 0.9),
                Rect::new(0.4, 0.6, 1.0, 0.9),
            ),
            nmos(
                "N2",
                "In2",
                "GND",
                "M",
                Rect::new(4.6, 0.6, 1.0, 0.9),
                Rect::new(3.2, 0.6, 1.0, 0.9),
            ),
        ],
        well: Rect::new(0.0, 2.5, 7.0, 2.5),
        bbox: Rect::new(0.0, 0.0, 7.0, 5.0),
    }
}

/// Two-input NOR: serial PMOS VDD -> X -> OUT, parallel NMOS OUT -> GND.
pub fn nor2() -> Cell {
    Cell {
        name: "NOR2X1".to_string(),
        nets: vec![
            Net::new("VDD", NetKind::Supply),
            Net::new("GND", NetKind::Ground),
            Net::new("In1", NetKind::Input),
            Net::new("In2", NetKind::Input),
            Net::new("OUT", NetKind::Output),
            Net::new("X", NetKind::Internal),
        ],
        transistors: vec![
            pmos(
                "P1",
                "In1",
                "VDD",
                "X",
                Rect::new(0.4, 3.3, 1.0, 0.9),
                Rect::new(1.8, 3.3, 1.0, 0.9),
            ),
            pmos(
                "P2",
                "In2",
                "X",
                "OUT",
                Rect::new(3.2, 3.3, 1.0, 0.9),
                Rect::new(4.6, 3.3, 1.0, 0.9),
            ),
            nmos(
                "N1",
                "In1",
                "GND",
                "OUT",
                Rect::new(1.8, 0.6, 1.0, 0.9),
                Rect::new(0.4, 0.6, 1.0, 0.9),
            ),
            nmos(
                "N2",
                "In2",
                "GND",
                "OUT",
                Rect::new(4.6, 0.6, 1.0, 0.9),
                Rect::new(3.2, 0.6, 1.0, 0.9),
            ),
        ],
        well: Rect::new(0.0, 2.5, 7.0, 2.5),
        bbox: Rect::new(0.0, 0.0, 7.0, 5.0),
    }
}

/// Single-input inverter.
pub fn inv() -> Cell {
    Cell {
        name: "INVX1".to_string(),
        nets: vec![
            Net::new("VDD", NetKind::Supply),
            Net::new("GND", NetKind::Ground),
            Net::new("In", NetKind::Input),
            Net::new("OUT", NetKind::Output),
        ],
        transistors: vec![
            pmos(
                "P1",
                "In",
                "VDD",
                "OUT",
                Rect::new(0.5, 3.3, 1.0, 0.9),
                Rect::new(2.0, 3.3, 1.0, 0.9),
            ),
            nmos(
                "N1",
                "In",
                "GND",
                "OUT",
                Rect::new(2.0, 0.6, 1.0, 0.9),
                Rect::new(0.5, 0.6, 1.0, 0.9),
            ),
        ],
        well: Rect::new(0.0, 2.5, 4.0, 2.5),
        bbox: Rect::new(0.0, 0.0, 4.0, 5.0),
    }
}

/// The built-in cell library: INVX1, NAND2X1, NOR2X1.
pub fn builtin_fixtures() -> CellLibrary {
    CellLibrary::from_cells(vec![inv(), nand2(), nor2()]).expect("fixture names are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nand2_bbox_area_is_35_um2() {
        assert_eq!(nand2().bbox.area(), 35.0);
    }

    #[test]
    fn fixtures_contain_nand2x1_with_internal_net_m() {
        let lib = builtin_fixtures();
        let nand = lib.cell("NAND2X1").expect("NAND2X1 present");
        let m = nand.net("M").expect("internal net M present");
        assert_eq!(m.kind, NetKind::Internal);
    }

    #[test]
    fn inv_has_one_pmos_and_one_nmos() {
        let cell = inv();
        let p = cell.transistors.iter().filter(|t| t.kind == TransistorKind::Pmos).count();
        let n = cell.transistors.iter().filter(|t| t.kind == TransistorKind::Nmos).count();
        assert_eq!((p, n), (1, 1));
    }

    #[test]
    fn fixture_wells_have_positive_area() {
        for cell in builtin_fixtures().cells() {
            assert!(cell.well.area() > 0.0, "{}", cell.name);
        }
    }
}
