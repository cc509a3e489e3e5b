//! Experiment configuration: the scenario file format and design references.
//!
//! A scenario bundles everything a synthetic measurement needs: the design
//! under test, its static input pattern, the laser spot, the current-model
//! parameters, the noise model, the sampling schedule and the campaign seed.
//! Scenarios serialize as JSON with the exact key set documented in the
//! README; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::netlist::{
    build_chain, builtin_fixtures, parse_document, Cell, CellLibrary, ChipDesign, InputPattern,
    NetKind, ParseError, Placement,
};
use crate::geom::Point;
use crate::photo::{LaserSpot, ModelError, ObicParams};

/// Additive measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Half-range (uniform) or sigma (gaussian), in µA.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Uniform,
    Gaussian,
}

impl Default for NoiseModel {
    /// Uniform on [-0.1, +0.1] µA, the observed baseline band.
    fn default() -> Self {
        NoiseModel { kind: NoiseKind::Uniform, amplitude: 0.1 }
    }
}

fn default_n_samples() -> usize {
    25
}

fn default_jitter() -> [f64; 2] {
    [11.0, 12.0]
}

/// A complete synthetic-measurement configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Design reference, e.g. `builtin:nand2` or `file:chip.netlist#NAME`.
    pub design: String,
    pub pattern: InputPattern,
    pub spot: LaserSpot,
    pub params: ObicParams,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_jitter")]
    pub jitter_us: [f64; 2],
    pub seed: u64,
}

impl Scenario {
    pub fn check(&self) -> Result<(), ScenarioError> {
        self.spot.check()?;
        self.params.check()?;
        if self.n_samples < 1 {
            return Err(ScenarioError::Invalid("n_samples must be >= 1".into()));
        }
        if !(self.jitter_us[0] <= self.jitter_us[1]) {
            return Err(ScenarioError::Invalid("jitter min must be <= max".into()));
        }
        if self.jitter_us[0] <= 0.0 {
            return Err(ScenarioError::Invalid("jitter intervals must be positive".into()));
        }
        if self.noise.amplitude < 0.0 {
            return Err(ScenarioError::Invalid("noise amplitude must be >= 0".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Stable content digest used to tag traces with their provenance.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario config error: {0}")]
    Config(String),
    #[error("unknown design reference {0:?}")]
    UnknownDesign(String),
    #[error("cannot read design file {path:?}: {reason}")]
    DesignFile { path: String, reason: String },
    #[error(transparent)]
    Netlist(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Wrap a bare cell as a one-instance chip with all non-internal pins exposed
/// one-to-one, so cell-level patterns apply directly.
pub fn wrap_cell(cell: &Cell) -> ChipDesign {
    let pin_map = cell
        .nets
        .iter()
        .filter(|n| n.kind != NetKind::Internal)
        .map(|n| (n.id.clone(), n.id.clone()))
        .collect();
    ChipDesign {
        name: format!("{}_DUT", cell.name),
        placements: vec![Placement {
            cell: cell.name.clone(),
            instance: "u0".to_string(),
            origin: Point::new(0.0, 0.0),
            pin_map,
        }],
        ties: Vec::new(),
    }
}

/// Resolve a design reference to a library plus chip.
///
/// Supported forms:
/// - `builtin:nand2`, `builtin:nor2`, `builtin:inv` — a single fixture cell
///   with all of its inputs free;
/// - `builtin:nand2-chain4` — four chained NAND2X1 with In2 tied high;
/// - `file:PATH#CHIP` — chip `CHIP` from the netlist document at PATH. Cells
///   defined in the document extend (and shadow) the built-in fixtures.
pub fn resolve_design(design_ref: &str) -> Result<(CellLibrary, ChipDesign), ScenarioError> {
    if let Some(name) = design_ref.strip_prefix("builtin:") {
        let lib = builtin_fixtures();
        let chip = match name {
            "nand2" => wrap_cell(lib.cell("NAND2X1").unwrap()),
            "nor2" => wrap_cell(lib.cell("NOR2X1").unwrap()),
            "inv" => wrap_cell(lib.cell("INVX1").unwrap()),
            "nand2-chain4" => {
                let tie = std::collections::BTreeMap::from([("In2".to_string(), true)]);
                build_chain(lib.cell("NAND2X1").unwrap(), 4, &tie)
                    .expect("builtin chain is well-formed")
            }
            _ => return Err(ScenarioError::UnknownDesign(design_ref.to_string())),
        };
        return Ok((lib, chip));
    }

    if let Some(rest) = design_ref.strip_prefix("file:") {
        let (path, chip_name) = rest
            .split_once('#')
            .ok_or_else(|| ScenarioError::UnknownDesign(design_ref.to_string()))?;
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::DesignFile {
            path: path.to_string(),
            reason: e.to_string(),
        })?;
        let doc = parse_document(&text)?;
        let mut lib = builtin_fixtures();
        for cell in doc.library.cells() {
            // Document cells shadow fixtures of the same name.
            if lib.cell(&cell.name).is_some() {
                let mut cells: Vec<Cell> =
                    lib.cells().iter().filter(|c| c.name != cell.name).cloned().collect();
                cells.push(cell.clone());
                lib = CellLibrary::from_cells(cells).expect("names still unique");
            } else {
                lib.push(cell.clone()).expect("name is new");
            }
        }
        let chip = doc
            .chip(chip_name)
            .cloned()
            .ok_or_else(|| ScenarioError::UnknownDesign(design_ref.to_string()))?;
        return Ok((lib, chip));
    }

    Err(ScenarioError::UnknownDesign(design_ref.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photo::Kappa;

    pub(crate) fn sample_scenario() -> Scenario {
        Scenario {
            design: "builtin:nand2".to_string(),
            pattern: InputPattern::new("01").unwrap(),
            spot: LaserSpot::new(3.0, 1.05, 7.0),
            params: ObicParams {
                p_th: 6.5,
                p_k: 1.5,
                i_sat: 2000.0,
                kappa: Kappa { ndiff: 2.0, pdiff: 0.2, nwell: 1.0 },
            },
            noise: NoiseModel::default(),
            n_samples: 25,
            jitter_us: [11.0, 12.0],
            seed: 42,
        }
    }

    #[test]
    fn scenario_json_round_trips() {
        let s = sample_scenario();
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample_scenario().to_json()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(Scenario::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = sample_scenario();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seed = 43;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn builtin_designs_resolve() {
        for name in ["builtin:nand2", "builtin:nor2", "builtin:inv", "builtin:nand2-chain4"] {
            let (lib, chip) = resolve_design(name).unwrap();
            assert!(crate::netlist::validate_chip(&chip, &lib).is_empty());
        }
        assert!(resolve_design("builtin:xor9").is_err());
        assert!(resolve_design("nand2").is_err());
    }

    #[test]
    fn wrapped_cell_exposes_cell_inputs() {
        let lib = builtin_fixtures();
        let chip = wrap_cell(lib.cell("NAND2X1").unwrap());
        assert_eq!(chip.free_inputs(&lib), vec!["In1".to_string(), "In2".to_string()]);
    }
}
