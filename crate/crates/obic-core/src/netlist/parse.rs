//! Parser for the line-based netlist format.
//!
//! Grammar (UTF-8, LF newlines, `#` starts a comment that runs to end of line):
//!
//! ```text
//! cell <NAME>
//!   net <ID> <supply|ground|input|output|internal>
//!   pmos <ID> gate=<NET> source=<NET> drain=<NET> sdiff=(x,y,w,h) ddiff=(x,y,w,h)
//!   nmos <ID> gate=<NET> source=<NET> drain=<NET> sdiff=(x,y,w,h) ddiff=(x,y,w,h)
//!   well (x,y,w,h)
//!   bbox (x,y,w,h)
//! end
//! chip <NAME>
//!   use <CELL> as <INST> at (x,y) map <PIN>=<NET> ...
//!   tie <NET> <0|1>
//! end
//! ```
//!
//! Numbers are decimal with an optional sign and fraction; exponents are not
//! accepted. All lengths are µm.

use super::{
    Cell, CellLibrary, ChipDesign, Document, Net, NetKind, Placement, Transistor, TransistorKind,
};
use crate::geom::{Point, Rect};

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty netlist source")]
    EmptyInput,
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: reference to undeclared net {net:?}")]
    DanglingNetReference { line: usize, net: String },
}

impl ParseError {
    fn syntax(line: usize, reason: impl Into<String>) -> Self {
        ParseError::SyntaxError { line, reason: reason.into() }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::EmptyInput => None,
            ParseError::SyntaxError { line, .. }
            | ParseError::DuplicateId { line, .. }
            | ParseError::DanglingNetReference { line, .. } => Some(*line),
        }
    }
}

/// Parse a full document: any number of `cell` and `chip` blocks.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut doc = Document::default();
    let mut lines = text.lines().enumerate().peekable();

    while let Some((idx, raw)) = lines.next() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("cell") => {
                let name = expect_id(&mut toks, lineno, "cell name")?;
                expect_end_of_line(&mut toks, lineno)?;
                let cell = parse_cell_body(name, &mut lines)?;
                if doc.library.push(cell).is_err() {
                    return Err(ParseError::DuplicateId {
                        line: lineno,
                        id: id_of_duplicate(text, lineno),
                    });
                }
            }
            Some("chip") => {
                let name = expect_id(&mut toks, lineno, "chip name")?;
                expect_end_of_line(&mut toks, lineno)?;
                let chip = parse_chip_body(name, &mut lines)?;
                if doc.chips.iter().any(|c| c.name == chip.name) {
                    return Err(ParseError::DuplicateId { line: lineno, id: chip.name });
                }
                doc.chips.push(chip);
            }
            Some(other) => {
                return Err(ParseError::syntax(
                    lineno,
                    format!("expected 'cell' or 'chip', got {other:?}"),
                ))
            }
            None => unreachable!(),
        }
    }
    Ok(doc)
}

/// Parse a cell-library source. Chip blocks are not allowed here.
pub fn parse_cell_library(text: &str) -> Result<CellLibrary, ParseError> {
    let doc = parse_document(text)?;
    if !doc.chips.is_empty() {
        let line = text
            .lines()
            .position(|l| strip_comment(l).starts_with("chip"))
            .map(|i| i + 1)
            .unwrap_or(1);
        return Err(ParseError::syntax(line, "chip block not allowed in a cell library"));
    }
    Ok(doc.library)
}

fn id_of_duplicate(text: &str, lineno: usize) -> String {
    // Recover the duplicate name from the offending line for the error message.
    text.lines()
        .nth(lineno - 1)
        .and_then(|l| strip_comment(l).split_whitespace().nth(1).map(str::to_string))
        .unwrap_or_default()
}

type NumberedLines<'a> = std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>;

fn parse_cell_body(name: String, lines: &mut NumberedLines) -> Result<Cell, ParseError> {
    let mut nets: Vec<Net> = Vec::new();
    let mut transistors: Vec<(usize, Transistor)> = Vec::new();
    let mut well: Option<Rect> = None;
    let mut bbox: Option<Rect> = None;
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut last_line = 0usize;

    loop {
        let Some((idx, raw)) = lines.next() else {
            return Err(ParseError::syntax(last_line + 1, "unterminated cell block, expected 'end'"));
        };
        let lineno = idx + 1;
        last_line = lineno;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "net" => {
                let id = expect_id(&mut toks, lineno, "net id")?;
                let kind_tok = toks
                    .next()
                    .ok_or_else(|| ParseError::syntax(lineno, "missing net kind"))?;
                let kind = NetKind::from_keyword(kind_tok).ok_or_else(|| {
                    ParseError::syntax(lineno, format!("unknown net kind {kind_tok:?}"))
                })?;
                expect_end_of_line(&mut toks, lineno)?;
                if !ids.insert(id.clone()) {
                    return Err(ParseError::DuplicateId { line: lineno, id });
                }
                nets.push(Net { id, kind });
            }
            kw @ ("pmos" | "nmos") => {
                let kind =
                    if kw == "pmos" { TransistorKind::Pmos } else { TransistorKind::Nmos };
                let id = expect_id(&mut toks, lineno, "transistor id")?;
                let gate = expect_kv(&mut toks, lineno, "gate")?;
                let source = expect_kv(&mut toks, lineno, "source")?;
                let drain = expect_kv(&mut toks, lineno, "drain")?;
                let sdiff = parse_rect(&expect_kv(&mut toks, lineno, "sdiff")?, lineno)?;
                let ddiff = parse_rect(&expect_kv(&mut toks, lineno, "ddiff")?, lineno)?;
                expect_end_of_line(&mut toks, lineno)?;
                if !ids.insert(id.clone()) {
                    return Err(ParseError::DuplicateId { line: lineno, id });
                }
                transistors.push((
                    lineno,
                    Transistor { id, kind, gate, source, drain, source_diff: sdiff, drain_diff: ddiff },
                ));
            }
            "well" => {
                let tok = toks
                    .next()
                    .ok_or_else(|| ParseError::syntax(lineno, "missing well rectangle"))?;
                expect_end_of_line(&mut toks, lineno)?;
                if well.is_some() {
                    return Err(ParseError::syntax(lineno, "duplicate well line"));
                }
                well = Some(parse_rect(tok, lineno)?);
            }
            "bbox" => {
                let tok = toks
                    .next()
                    .ok_or_else(|| ParseError::syntax(lineno, "missing bbox rectangle"))?;
                expect_end_of_line(&mut toks, lineno)?;
                if bbox.is_some() {
                    return Err(ParseError::syntax(lineno, "duplicate bbox line"));
                }
                bbox = Some(parse_rect(tok, lineno)?);
            }
            "end" => {
                expect_end_of_line(&mut toks, lineno)?;
                let well = well
                    .ok_or_else(|| ParseError::syntax(lineno, "cell block missing well line"))?;
                let bbox = bbox
                    .ok_or_else(|| ParseError::syntax(lineno, "cell block missing bbox line"))?;
                // Net references resolve against the completed net list.
                let net_ids: BTreeSet<&str> = nets.iter().map(|n| n.id.as_str()).collect();
                for (tline, t) in &transistors {
                    for net in [&t.gate, &t.source, &t.drain] {
                        if !net_ids.contains(net.as_str()) {
                            return Err(ParseError::DanglingNetReference {
                                line: *tline,
                                net: net.clone(),
                            });
                        }
                    }
                }
                return Ok(Cell {
                    name,
                    nets,
                    transistors: transistors.into_iter().map(|(_, t)| t).collect(),
                    well,
                    bbox,
                });
            }
            other => {
                return Err(ParseError::syntax(
                    lineno,
                    format!("expected net/pmos/nmos/well/bbox/end, got {other:?}"),
                ))
            }
        }
    }
}

fn parse_chip_body(name: String, lines: &mut NumberedLines) -> Result<ChipDesign, ParseError> {
    let mut placements: Vec<Placement> = Vec::new();
    let mut ties: Vec<(String, bool)> = Vec::new();
    let mut instances: BTreeSet<String> = BTreeSet::new();
    let mut last_line = 0usize;

    loop {
        let Some((idx, raw)) = lines.next() else {
            return Err(ParseError::syntax(last_line + 1, "unterminated chip block, expected 'end'"));
        };
        let lineno = idx + 1;
        last_line = lineno;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "use" => {
                let cell = expect_id(&mut toks, lineno, "cell name")?;
                expect_keyword(&mut toks, lineno, "as")?;
                let instance = expect_id(&mut toks, lineno, "instance id")?;
                expect_keyword(&mut toks, lineno, "at")?;
                let origin_tok = toks
                    .next()
                    .ok_or_else(|| ParseError::syntax(lineno, "missing origin point"))?;
                let origin = parse_point(origin_tok, lineno)?;
                expect_keyword(&mut toks, lineno, "map")?;
                let mut pin_map = Vec::new();
                let mut seen_pins = BTreeSet::new();
                for tok in toks {
                    let (pin, net) = tok.split_once('=').ok_or_else(|| {
                        ParseError::syntax(lineno, format!("expected PIN=NET, got {tok:?}"))
                    })?;
                    check_id(pin, lineno, "pin name")?;
                    check_id(net, lineno, "net name")?;
                    if !seen_pins.insert(pin.to_string()) {
                        return Err(ParseError::DuplicateId { line: lineno, id: pin.to_string() });
                    }
                    pin_map.push((pin.to_string(), net.to_string()));
                }
                if pin_map.is_empty() {
                    return Err(ParseError::syntax(lineno, "use line has an empty pin map"));
                }
                if !instances.insert(instance.clone()) {
                    return Err(ParseError::DuplicateId { line: lineno, id: instance });
                }
                placements.push(Placement { cell, instance, origin, pin_map });
            }
            "tie" => {
                let net = expect_id(&mut toks, lineno, "net id")?;
                let level = match toks.next() {
                    Some("0") => false,
                    Some("1") => true,
                    other => {
                        return Err(ParseError::syntax(
                            lineno,
                            format!("tie level must be 0 or 1, got {other:?}"),
                        ))
                    }
                };
                expect_end_of_line(&mut toks, lineno)?;
                if ties.iter().any(|(n, _)| *n == net) {
                    return Err(ParseError::DuplicateId { line: lineno, id: net });
                }
                ties.push((net, level));
            }
            "end" => {
                expect_end_of_line(&mut toks, lineno)?;
                return Ok(ChipDesign { name, placements, ties });
            }
            other => {
                return Err(ParseError::syntax(
                    lineno,
                    format!("expected use/tie/end, got {other:?}"),
                ))
            }
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_id(s: &str, line: usize, what: &str) -> Result<(), ParseError> {
    if is_valid_id(s) {
        Ok(())
    } else {
        Err(ParseError::syntax(line, format!("invalid {what} {s:?}")))
    }
}

fn expect_id<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<String, ParseError> {
    let tok = toks.next().ok_or_else(|| ParseError::syntax(line, format!("missing {what}")))?;
    check_id(tok, line, what)?;
    Ok(tok.to_string())
}

fn expect_keyword<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    line: usize,
    kw: &str,
) -> Result<(), ParseError> {
    match toks.next() {
        Some(t) if t == kw => Ok(()),
        other => Err(ParseError::syntax(line, format!("expected {kw:?}, got {other:?}"))),
    }
}

fn expect_kv<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    line: usize,
    key: &str,
) -> Result<String, ParseError> {
    let tok = toks.next().ok_or_else(|| ParseError::syntax(line, format!("missing {key}=")))?;
    match tok.split_once('=') {
        Some((k, v)) if k == key && !v.is_empty() => Ok(v.to_string()),
        _ => Err(ParseError::syntax(line, format!("expected {key}=..., got {tok:?}"))),
    }
}

fn expect_end_of_line<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<(), ParseError> {
    match toks.next() {
        None => Ok(()),
        Some(t) => Err(ParseError::syntax(line, format!("unexpected trailing token {t:?}"))),
    }
}

/// Strict decimal: optional sign, digits, optional fractional part. No exponents.
fn parse_number(s: &str, line: usize) -> Result<f64, ParseError> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let ok = match body.split_once('.') {
        Some((int, frac)) => {
            !int.is_empty()
                && !frac.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()),
    };
    if !ok {
        return Err(ParseError::syntax(line, format!("invalid number {s:?}")));
    }
    s.parse::<f64>()
        .map_err(|_| ParseError::syntax(line, format!("invalid number {s:?}")))
}

fn parse_tuple(s: &str, line: usize, arity: usize) -> Result<Vec<f64>, ParseError> {
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| ParseError::syntax(line, format!("expected (..), got {s:?}")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != arity {
        return Err(ParseError::syntax(
            line,
            format!("expected {arity} comma-separated numbers in {s:?}"),
        ));
    }
    parts.iter().map(|p| parse_number(p, line)).collect()
}

fn parse_rect(s: &str, line: usize) -> Result<Rect, ParseError> {
    let v = parse_tuple(s, line, 4)?;
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

fn parse_point(s: &str, line: usize) -> Result<Point, ParseError> {
    let v = parse_tuple(s, line, 2)?;
    Ok(Point::new(v[0], v[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::builtin_fixtures;

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(parse_cell_library(""), Err(ParseError::EmptyInput));
        assert_eq!(parse_cell_library("  \n\t\n"), Err(ParseError::EmptyInput));
    }

    #[test]
    fn builtin_nand2_source_parses() {
        let text = super::super::write::serialize_cell_library(&builtin_fixtures());
        let lib = parse_cell_library(&text).unwrap();
        let nand = lib.cell("NAND2X1").unwrap();
        assert_eq!(nand.nets.len(), 6);
        assert_eq!(nand.transistors.len(), 4);
    }

    #[test]
    fn comment_only_document_is_an_empty_library() {
        let lib = parse_cell_library("# cell library\n").unwrap();
        assert!(lib.is_empty());
    }

    #[test]
    fn duplicate_net_id_reports_line() {
        let text = "cell A\n  net X input\n  net X input\n  well (0,0,1,1)\n  bbox (0,0,2,2)\nend\n";
        match parse_cell_library(text) {
            Err(ParseError::DuplicateId { line, id }) => {
                assert_eq!(line, 3);
                assert_eq!(id, "X");
            }
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn dangling_net_reference_reports_line() {
        let text = "cell A\n  net VDD supply\n  net GND ground\n  \
                    nmos N1 gate=VDD source=GND drain=NOPE sdiff=(0,0,1,1) ddiff=(0,0,1,1)\n  \
                    well (0,0,1,1)\n  bbox (0,0,2,2)\nend\n";
        match parse_cell_library(text) {
            Err(ParseError::DanglingNetReference { line, net }) => {
                assert_eq!(line, 4);
                assert_eq!(net, "NOPE");
            }
            other => panic!("expected DanglingNetReference, got {other:?}"),
        }
    }

    #[test]
    fn exponent_numbers_are_rejected() {
        let text = "cell A\n  net VDD supply\n  net GND ground\n  well (0,0,1e2,1)\n  bbox (0,0,2,2)\nend\n";
        match parse_cell_library(text) {
            Err(ParseError::SyntaxError { line: 4, .. }) => {}
            other => panic!("expected SyntaxError on line 4, got {other:?}"),
        }
    }

    #[test]
    fn chip_block_round_trips() {
        let text = "chip C\n  use NAND2X1 as u0 at (0,0) map In1=a In2=one OUT=b VDD=vdd GND=gnd\n  tie one 1\nend\n";
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.chips.len(), 1);
        let chip = &doc.chips[0];
        assert_eq!(chip.placements[0].pin_map.len(), 5);
        assert_eq!(chip.tie_level("one"), Some(true));
    }

    #[test]
    fn chip_in_library_source_is_rejected() {
        let text = "chip C\n  use X as u0 at (0,0) map A=b\nend\n";
        assert!(matches!(parse_cell_library(text), Err(ParseError::SyntaxError { line: 1, .. })));
    }
}
