// SPDX-License-Identifier: Apache-2.0

//! Technology database: layers, design rules, process constants, layer
//! connectivity and per-device parameter limits.
//!
//! The text format is line oriented:
//!
//! ```text
//! techfmt 1
//! name <identifier>
//! grid <dbu>
//! [layers]      <name> <gds layer> <gds datatype> <drawing|pin>
//! [rules]       <kind> <layer> [<layer>] <value>
//! [constants]   <name> <value>
//! [connect]     <layer> <layer>
//! [limits]      <device> <parameter> <min> <max>
//! ```
//!
//! `#` starts a comment. Rule kinds are `min_width`, `min_spacing`,
//! `min_enclosure` (outer, inner) and `min_extension` (extending, base).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Coord;

/// Source text of the bundled demonstration deck.
pub const DEMO_TECH: &str = include_str!("../fixtures/generichv.tech");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TechError {
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: rule references undeclared layer `{layer}`")]
    UnknownLayerInRule { line: usize, layer: String },
    #[error("rule {rule} is not a multiple of the {grid} dbu grid")]
    GridViolation { rule: String, grid: Coord },
    #[error("technology has no {kind} rule for {layers:?}")]
    MissingRule { kind: RuleKind, layers: Vec<String> },
    #[error("technology has no constant `{0}`")]
    MissingConstant(String),
    #[error("technology has no layer `{0}`")]
    MissingLayer(String),
    #[error("technology has no limits for device `{0}`")]
    UnknownDevice(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> TechError {
    TechError::ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerPurpose {
    Drawing,
    Pin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub gds_layer: i16,
    pub gds_datatype: i16,
    pub purpose: LayerPurpose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    MinWidth,
    MinSpacing,
    MinEnclosure,
    MinExtension,
}

impl RuleKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleKind::MinWidth => "min_width",
            RuleKind::MinSpacing => "min_spacing",
            RuleKind::MinEnclosure => "min_enclosure",
            RuleKind::MinExtension => "min_extension",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "min_width" => RuleKind::MinWidth,
            "min_spacing" => RuleKind::MinSpacing,
            "min_enclosure" => RuleKind::MinEnclosure,
            "min_extension" => RuleKind::MinExtension,
            _ => return None,
        })
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DesignRule {
    pub kind: RuleKind,
    pub layers: Vec<String>,
    pub value: Coord,
}

impl DesignRule {
    fn matches(&self, kind: RuleKind, layers: &[&str]) -> bool {
        if self.kind != kind || self.layers.len() != layers.len() {
            return false;
        }
        let direct = self.layers.iter().zip(layers).all(|(a, b)| a == b);
        // Spacing between two layers is symmetric.
        direct
            || (kind == RuleKind::MinSpacing
                && layers.len() == 2
                && self.layers[0] == layers[1]
                && self.layers[1] == layers[0])
    }
}

impl fmt::Display for DesignRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.kind, self.layers.join(" "), self.value)
    }
}

/// Inclusive `[min, max]` range for one device parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limit {
    pub min: Coord,
    pub max: Coord,
}

impl Limit {
    pub fn clamp(&self, v: Coord) -> Coord {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: Coord) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TechnologyData {
    pub name: String,
    pub grid: Coord,
    pub layers: Vec<Layer>,
    pub rules: Vec<DesignRule>,
    pub constants: BTreeMap<String, Coord>,
    pub connectivity: Vec<(String, String)>,
    pub device_limits: BTreeMap<String, BTreeMap<String, Limit>>,
}

#[derive(PartialEq, Eq)]
enum Section {
    Preamble,
    Layers,
    Rules,
    Constants,
    Connect,
    Limits,
}

fn parse_len(tok: &str, line: usize) -> Result<Coord, TechError> {
    tok.parse::<Coord>()
        .map_err(|_| parse_err(line, format!("expected integer, found `{tok}`")))
}

/// Parses and validates a technology source.
pub fn load_technology(source: &str) -> Result<TechnologyData, TechError> {
    let mut section = Section::Preamble;
    let mut seen_header = false;
    let mut name = None;
    let mut grid = None;
    let mut layers: Vec<Layer> = Vec::new();
    let mut rules: Vec<(usize, DesignRule)> = Vec::new();
    let mut constants = BTreeMap::new();
    let mut connect: Vec<(usize, String, String)> = Vec::new();
    let mut device_limits: BTreeMap<String, BTreeMap<String, Limit>> = BTreeMap::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if !seen_header {
            if toks != ["techfmt", "1"] {
                return Err(parse_err(line, "expected `techfmt 1` header"));
            }
            seen_header = true;
            continue;
        }
        if text.starts_with('[') {
            section = match text {
                "[layers]" => Section::Layers,
                "[rules]" => Section::Rules,
                "[constants]" => Section::Constants,
                "[connect]" => Section::Connect,
                "[limits]" => Section::Limits,
                other => return Err(parse_err(line, format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            Section::Preamble => match toks.as_slice() {
                ["name", n] => name = Some(n.to_string()),
                ["grid", g] => grid = Some(parse_len(g, line)?),
                _ => return Err(parse_err(line, format!("unexpected `{text}`"))),
            },
            Section::Layers => {
                let [lname, gl, gd, purpose] = toks.as_slice() else {
                    return Err(parse_err(line, "layer needs: name gds_layer gds_datatype purpose"));
                };
                let num = |t: &str| {
                    t.parse::<i16>()
                        .map_err(|_| parse_err(line, format!("bad GDS number `{t}`")))
                };
                let purpose = match *purpose {
                    "drawing" => LayerPurpose::Drawing,
                    "pin" => LayerPurpose::Pin,
                    p => return Err(parse_err(line, format!("unknown purpose `{p}`"))),
                };
                let layer = Layer {
                    name: lname.to_string(),
                    gds_layer: num(gl)?,
                    gds_datatype: num(gd)?,
                    purpose,
                };
                if layers.iter().any(|l| l.name == layer.name) {
                    return Err(parse_err(line, format!("duplicate layer `{lname}`")));
                }
                if layers
                    .iter()
                    .any(|l| (l.gds_layer, l.gds_datatype) == (layer.gds_layer, layer.gds_datatype))
                {
                    return Err(parse_err(line, "duplicate GDS layer/datatype pair"));
                }
                layers.push(layer);
            }
            Section::Rules => {
                let kind = RuleKind::from_keyword(toks[0])
                    .ok_or_else(|| parse_err(line, format!("unknown rule kind `{}`", toks[0])))?;
                let (names, value) = match (kind, toks.len()) {
                    (RuleKind::MinWidth, 3) => (&toks[1..2], toks[2]),
                    (RuleKind::MinSpacing, 3) => (&toks[1..2], toks[2]),
                    (_, 4) if kind != RuleKind::MinWidth => (&toks[1..3], toks[3]),
                    _ => return Err(parse_err(line, format!("wrong layer count for {kind}"))),
                };
                let value = parse_len(value, line)?;
                if value <= 0 {
                    return Err(parse_err(line, "rule value must be positive"));
                }
                rules.push((
                    line,
                    DesignRule {
                        kind,
                        layers: names.iter().map(|s| s.to_string()).collect(),
                        value,
                    },
                ));
            }
            Section::Constants => {
                let [cname, v] = toks.as_slice() else {
                    return Err(parse_err(line, "constant needs: name value"));
                };
                constants.insert(cname.to_string(), parse_len(v, line)?);
            }
            Section::Connect => {
                let [a, b] = toks.as_slice() else {
                    return Err(parse_err(line, "connect needs two layers"));
                };
                connect.push((line, a.to_string(), b.to_string()));
            }
            Section::Limits => {
                let [dev, param, lo, hi] = toks.as_slice() else {
                    return Err(parse_err(line, "limit needs: device parameter min max"));
                };
                let (min, max) = (parse_len(lo, line)?, parse_len(hi, line)?);
                if min > max {
                    return Err(parse_err(line, "limit min exceeds max"));
                }
                device_limits
                    .entry(dev.to_string())
                    .or_default()
                    .insert(param.to_string(), Limit { min, max });
            }
        }
    }

    if !seen_header {
        return Err(parse_err(1, "empty technology source"));
    }
    let name = name.ok_or_else(|| parse_err(1, "missing `name`"))?;
    let grid = grid.ok_or_else(|| parse_err(1, "missing `grid`"))?;
    if grid <= 0 {
        return Err(parse_err(1, "grid must be positive"));
    }
    let declared: BTreeSet<&str> = layers.iter().map(|l| l.name.as_str()).collect();
    for (line, rule) in &rules {
        if let Some(bad) = rule.layers.iter().find(|l| !declared.contains(l.as_str())) {
            return Err(TechError::UnknownLayerInRule {
                line: *line,
                layer: bad.clone(),
            });
        }
        if rule.value % grid != 0 {
            return Err(TechError::GridViolation {
                rule: rule.to_string(),
                grid,
            });
        }
    }
    for (line, a, b) in &connect {
        for l in [a, b] {
            if !declared.contains(l.as_str()) {
                return Err(TechError::UnknownLayerInRule {
                    line: *line,
                    layer: l.clone(),
                });
            }
        }
    }

    Ok(TechnologyData {
        name,
        grid,
        layers,
        rules: rules.into_iter().map(|(_, r)| r).collect(),
        constants,
        connectivity: connect.into_iter().map(|(_, a, b)| (a, b)).collect(),
        device_limits,
    })
}

impl TechnologyData {
    /// The bundled genericHV demonstration deck.
    pub fn demo() -> Self {
        load_technology(DEMO_TECH).expect("bundled demo deck is valid")
    }

    pub fn layer(&self, name: &str) -> Result<&Layer, TechError> {
        self.layers
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| TechError::MissingLayer(name.to_string()))
    }

    pub fn layer_by_gds(&self, gds_layer: i16, gds_datatype: i16) -> Option<&Layer> {
        self.layers
            .iter()
            .find(|l| l.gds_layer == gds_layer && l.gds_datatype == gds_datatype)
    }

    pub fn rule(&self, kind: RuleKind, layers: &[&str]) -> Result<Coord, TechError> {
        self.rules
            .iter()
            .find(|r| r.matches(kind, layers))
            .map(|r| r.value)
            .ok_or_else(|| TechError::MissingRule {
                kind,
                layers: layers.iter().map(|s| s.to_string()).collect(),
            })
    }

    pub fn constant(&self, name: &str) -> Result<Coord, TechError> {
        self.constants
            .get(name)
            .copied()
            .ok_or_else(|| TechError::MissingConstant(name.to_string()))
    }

    pub fn limits(&self, device: &str) -> Result<&BTreeMap<String, Limit>, TechError> {
        self.device_limits
            .get(device)
            .ok_or_else(|| TechError::UnknownDevice(device.to_string()))
    }

    /// True when shapes on the two layers conduct into each other where they touch.
    /// A layer that appears in any connect pair also conducts to itself.
    pub fn connects(&self, a: &str, b: &str) -> bool {
        if a == b {
            return self.connectivity.iter().any(|(x, y)| x == a || y == a);
        }
        self.connectivity
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Serializes back to the text format; `load_technology(to_text())` is a fixed point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "techfmt 1");
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "grid {}", self.grid);
        let _ = writeln!(out, "\n[layers]");
        for l in &self.layers {
            let purpose = match l.purpose {
                LayerPurpose::Drawing => "drawing",
                LayerPurpose::Pin => "pin",
            };
            let _ = writeln!(out, "{} {} {} {}", l.name, l.gds_layer, l.gds_datatype, purpose);
        }
        let _ = writeln!(out, "\n[rules]");
        for r in &self.rules {
            let _ = writeln!(out, "{r}");
        }
        let _ = writeln!(out, "\n[constants]");
        for (k, v) in &self.constants {
            let _ = writeln!(out, "{k} {v}");
        }
        let _ = writeln!(out, "\n[connect]");
        for (a, b) in &self.connectivity {
            let _ = writeln!(out, "{a} {b}");
        }
        let _ = writeln!(out, "\n[limits]");
        for (dev, params) in &self.device_limits {
            for (p, lim) in params {
                let _ = writeln!(out, "{dev} {p} {} {}", lim.min, lim.max);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_loads() {
        let t = TechnologyData::demo();
        assert_eq!(t.name, "genericHV");
        assert_eq!(t.grid, 5);
        assert_eq!(t.layers.len(), 11);
        assert_eq!(t.constant("p1_corn").unwrap(), 400);
        assert_eq!(t.rule(RuleKind::MinSpacing, &["cont"]).unwrap(), 200);
        assert_eq!(t.rule(RuleKind::MinSpacing, &["cont", "poly1"]).unwrap(), 150);
        assert_eq!(t.rule(RuleKind::MinEnclosure, &["diff", "cont"]).unwrap(), 100);
        assert!(t.rule(RuleKind::MinEnclosure, &["cont", "diff"]).is_err());
    }

    #[test]
    fn missing_keys() {
        let t = TechnologyData::demo();
        assert_eq!(
            t.constant("no_such"),
            Err(TechError::MissingConstant("no_such".into()))
        );
        assert!(matches!(
            t.rule(RuleKind::MinWidth, &["thickox"]),
            Err(TechError::MissingRule { .. })
        ));
        assert!(matches!(t.limits("bjt"), Err(TechError::UnknownDevice(_))));
    }

    #[test]
    fn round_trip_is_fixed_point() {
        let t = TechnologyData::demo();
        let again = load_technology(&t.to_text()).unwrap();
        assert_eq!(again, t);
        assert_eq!(again.to_text(), t.to_text());
    }

    #[test]
    fn rejects_bad_sources() {
        assert!(matches!(load_technology(""), Err(TechError::ParseError { .. })));
        assert!(matches!(
            load_technology("# only a comment\n"),
            Err(TechError::ParseError { .. })
        ));
        let unknown = "techfmt 1\nname t\ngrid 5\n[layers]\nmet1 1 0 drawing\n[rules]\nmin_spacing met1 metal9 100\n";
        assert!(matches!(
            load_technology(unknown),
            Err(TechError::UnknownLayerInRule { line: 7, ref layer }) if layer == "metal9"
        ));
        let off_grid = "techfmt 1\nname t\ngrid 5\n[layers]\nmet1 1 0 drawing\n[rules]\nmin_width met1 123\n";
        assert!(matches!(load_technology(off_grid), Err(TechError::GridViolation { .. })));
        let bad_header = "techfmt 2\n";
        assert!(matches!(load_technology(bad_header), Err(TechError::ParseError { line: 1, .. })));
        let dup = "techfmt 1\nname t\ngrid 5\n[layers]\na 1 0 drawing\nb 1 0 drawing\n";
        assert!(matches!(load_technology(dup), Err(TechError::ParseError { line: 6, .. })));
    }

    #[test]
    fn connectivity_is_symmetric_and_reflexive_for_conductors() {
        let t = TechnologyData::demo();
        assert!(t.connects("met1", "cont"));
        assert!(t.connects("cont", "met1"));
        assert!(t.connects("met1", "met1"));
        assert!(!t.connects("met1", "poly1"));
        assert!(!t.connects("nwell", "nwell"));
    }
}
