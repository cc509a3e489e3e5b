//! Chain builder: rows of identical cells where each instance's output feeds
//! one free input of the next, mirroring line-of-cells test structures.

use super::{Cell, ChipDesign, NetKind, Placement};
use crate::geom::Point;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("chain length must be at least 1")]
    ZeroLength,
    #[error("no free input left after ties")]
    NoFreeInput,
    #[error("chained cell must have exactly one output")]
    NotSingleOutput,
    #[error("chained cell is missing a supply or ground net")]
    MissingRail,
    #[error("tie refers to unknown input {0:?}")]
    UnknownTieInput(String),
}

/// Build an `n`-cell chain of `cell`. `tie` fixes the named cell inputs to a
/// constant level on every instance; the first remaining free input carries
/// the chain. Instances are abutted left to right so bounding boxes never
/// overlap.
pub fn build_chain(
    cell: &Cell,
    n: usize,
    tie: &BTreeMap<String, bool>,
) -> Result<ChipDesign, ChainError> {
    if n == 0 {
        return Err(ChainError::ZeroLength);
    }
    let outputs = cell.output_nets();
    if outputs.len() != 1 {
        return Err(ChainError::NotSingleOutput);
    }
    if cell.supply_net().is_none() || cell.ground_net().is_none() {
        return Err(ChainError::MissingRail);
    }

    let inputs = cell.input_nets();
    for name in tie.keys() {
        if !inputs.iter().any(|i| i.id == *name) {
            return Err(ChainError::UnknownTieInput(name.clone()));
        }
    }
    let chain_pin = inputs
        .iter()
        .find(|i| !tie.contains_key(&i.id))
        .map(|i| i.id.clone())
        .ok_or(ChainError::NoFreeInput)?;

    let pitch = cell.bbox.w;
    let mut placements = Vec::with_capacity(n);
    for i in 0..n {
        let mut pin_map = Vec::new();
        for net in &cell.nets {
            let global = match net.kind {
                NetKind::Supply => "VDD_G".to_string(),
                NetKind::Ground => "GND_G".to_string(),
                NetKind::Input => {
                    if net.id == chain_pin {
                        chain_net(i)
                    } else {
                        format!("TIE_{}", net.id.to_uppercase())
                    }
                }
                NetKind::Output => chain_net(i + 1),
                NetKind::Internal => continue,
            };
            pin_map.push((net.id.clone(), global));
        }
        placements.push(Placement {
            cell: cell.name.clone(),
            instance: format!("u{i}"),
            origin: Point::new(i as f64 * pitch, 0.0),
            pin_map,
        });
    }

    let ties = tie
        .iter()
        .map(|(input, level)| (format!("TIE_{}", input.to_uppercase()), *level))
        .collect();

    Ok(ChipDesign { name: format!("{}_CHAIN{}", cell.name, n), placements, ties })
}

fn chain_net(i: usize) -> String {
    if i == 0 {
        "IN".to_string()
    } else {
        format!("N{i}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{builtin_fixtures, inv, nand2, validate_chip};

    fn tie_in2() -> BTreeMap<String, bool> {
        BTreeMap::from([("In2".to_string(), true)])
    }

    #[test]
    fn nand_chain_ties_in2_high_and_links_outputs() {
        let chip = build_chain(&nand2(), 4, &tie_in2()).unwrap();
        assert_eq!(chip.placements.len(), 4);
        assert_eq!(chip.tie_level("TIE_IN2"), Some(true));
        for i in 0..4 {
            let p = &chip.placements[i];
            assert_eq!(p.global_net("In2"), Some("TIE_IN2"));
            assert_eq!(p.global_net("OUT"), Some(chain_net(i + 1).as_str()));
            if i > 0 {
                assert_eq!(p.global_net("In1"), Some(chain_net(i).as_str()));
            }
        }
        assert_eq!(chip.placements[0].global_net("In1"), Some("IN"));
        assert_eq!(validate_chip(&chip, &builtin_fixtures()), Vec::new());
    }

    #[test]
    fn single_inverter_chain() {
        let chip = build_chain(&inv(), 1, &BTreeMap::new()).unwrap();
        assert_eq!(chip.placements.len(), 1);
        assert_eq!(chip.placements[0].global_net("In"), Some("IN"));
        assert_eq!(validate_chip(&chip, &builtin_fixtures()), Vec::new());
    }

    #[test]
    fn fully_tied_cell_has_no_free_input() {
        let tie = BTreeMap::from([("In1".to_string(), true), ("In2".to_string(), true)]);
        assert_eq!(build_chain(&nand2(), 2, &tie), Err(ChainError::NoFreeInput));
    }

    #[test]
    fn zero_length_chain_is_an_error() {
        assert_eq!(build_chain(&nand2(), 0, &tie_in2()), Err(ChainError::ZeroLength));
    }
}
