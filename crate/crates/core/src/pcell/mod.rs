// SPDX-License-Identifier: Apache-2.0

//! Device generators.
//!
//! Every device is described by a [`GeneratorSpec`]: a base family (MOS,
//! resistor, capacitor), a voltage class and the ordered list of
//! construction steps. Devices of one family share the step
//! implementations and only add the steps their voltage class needs, so the
//! 20 V annular PMOS reuses the gate, diffusion, contact and implant steps of
//! the family and appends drain wells, a bulk ring and the thick-oxide
//! definition layer.

mod common;
mod mos;
mod passive;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{snap, snap_down, snap_up, Coord, GeometryError, Rect, Shape};
use crate::interact::{AbutStyle, AbutmentSpec, StretchHandle};
use crate::techdb::{TechError, TechnologyData};

pub use common::{contact_array, contact_array_with_margins, guard_ring, well_stack};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcellError {
    #[error(transparent)]
    Tech(#[from] TechError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("w={w}, fingers={fingers} and wtot={wtot} are all pinned but inconsistent")]
    ContradictoryParams { w: Coord, fingers: u32, wtot: Coord },
    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),
    #[error("{param}={value} outside [{min}, {max}]")]
    LimitViolation {
        param: String,
        value: Coord,
        min: Coord,
        max: Coord,
    },
}

/// Base device family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceFamily {
    Mos,
    Resistor,
    Capacitor,
}

/// Ordered construction step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionStep {
    Gate,
    Diffusion,
    Contacts,
    DrainWells,
    BodyWell,
    Implant,
    BulkRing,
    BulkTap,
    OxideDefinition,
    GuardRing,
    ResistorBody,
    Terminals,
    Plates,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSpec {
    pub device: &'static str,
    pub family: DeviceFamily,
    /// Voltage class; selects the gate-oxide constant (`gox_<class>`).
    pub voltage_class: &'static str,
    pub steps: Vec<ConstructionStep>,
}

const MOS_BASE_STEPS: [ConstructionStep; 4] = [
    ConstructionStep::Gate,
    ConstructionStep::Diffusion,
    ConstructionStep::Contacts,
    ConstructionStep::Implant,
];

/// Known devices, in registry order.
pub const DEVICES: [&str; 4] = ["pmos20t", "nmos5", "respoly", "capmim"];

pub fn generator_spec(device: &str) -> Option<GeneratorSpec> {
    use ConstructionStep::*;
    Some(match device {
        "nmos5" => GeneratorSpec {
            device: "nmos5",
            family: DeviceFamily::Mos,
            voltage_class: "5v",
            steps: MOS_BASE_STEPS.iter().copied().chain([BulkTap, GuardRing]).collect(),
        },
        "pmos20t" => {
            // Drain wells and the n-well body slot in before the implant step.
            let mut steps: Vec<_> = MOS_BASE_STEPS[..3].to_vec();
            steps.extend([DrainWells, BodyWell]);
            steps.extend(&MOS_BASE_STEPS[3..]);
            steps.extend([BulkRing, OxideDefinition, GuardRing]);
            GeneratorSpec {
                device: "pmos20t",
                family: DeviceFamily::Mos,
                voltage_class: "20v",
                steps,
            }
        }
        "respoly" => GeneratorSpec {
            device: "respoly",
            family: DeviceFamily::Resistor,
            voltage_class: "5v",
            steps: vec![ResistorBody, Terminals],
        },
        "capmim" => GeneratorSpec {
            device: "capmim",
            family: DeviceFamily::Capacitor,
            voltage_class: "5v",
            steps: vec![Plates, Terminals],
        },
        _ => return None,
    })
}

/// Guard ring style; `None` means no guard ring. Styles are resolved through
/// the `guard_<style>_space` and `guard_<style>_width` technology constants.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GuardRing(pub Option<String>);

impl GuardRing {
    pub fn none() -> Self {
        Self(None)
    }

    pub fn style(s: &str) -> Self {
        if s.eq_ignore_ascii_case("none") || s.is_empty() {
            Self(None)
        } else {
            Self(Some(s.to_ascii_lowercase()))
        }
    }

    pub fn is_none(&self) -> bool {
        self.0.is_none()
    }
}

/// Which width parameter drives the other during evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthDriver {
    /// `wtot` follows from `fingers * w`.
    #[default]
    FingerWidth,
    /// `w` follows from `wtot / fingers`.
    TotalWidth,
    /// All three are pinned and must agree.
    Pinned,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeviceParams {
    pub device: String,
    /// Channel or plate length.
    pub l: Coord,
    /// Finger (or plate/strip) width.
    pub w: Coord,
    /// Total width, `fingers * w`.
    pub wtot: Coord,
    pub fingers: u32,
    pub multiplier: u32,
    #[serde(default)]
    pub guard_ring: GuardRing,
    #[serde(default)]
    pub bends: u32,
    #[serde(default)]
    pub driver: WidthDriver,
}

impl DeviceParams {
    /// Default parameters for a known device.
    pub fn defaults(device: &str) -> Option<Self> {
        let (l, w, fingers) = match device {
            "pmos20t" => (2000, 5000, 1),
            "nmos5" => (500, 2000, 1),
            "respoly" => (20000, 1000, 0),
            "capmim" => (10000, 10000, 0),
            _ => return None,
        };
        Some(Self {
            device: device.to_string(),
            l,
            w,
            wtot: w * fingers.max(1) as Coord,
            fingers: fingers.max(1),
            multiplier: 1,
            guard_ring: GuardRing::none(),
            bends: if device == "respoly" { 4 } else { 0 },
            driver: WidthDriver::FingerWidth,
        })
    }

    /// Value of a named length parameter.
    pub fn length(&self, name: &str) -> Option<Coord> {
        Some(match name {
            "l" => self.l,
            "w" => self.w,
            "wtot" => self.wtot,
            _ => return None,
        })
    }

    pub fn set_length(&mut self, name: &str, value: Coord) -> bool {
        match name {
            "l" => self.l = value,
            "w" => self.w = value,
            "wtot" => self.wtot = value,
            _ => return false,
        }
        true
    }
}

fn clamp_snap(value: Coord, limit: Option<&crate::techdb::Limit>, grid: Coord) -> Coord {
    match limit {
        Some(lim) => lim.clamp(snap(lim.clamp(value), grid)),
        None => snap(value, grid),
    }
}

fn clamp_count(value: u32, limit: Option<&crate::techdb::Limit>) -> u32 {
    match limit {
        Some(lim) => lim.clamp(value as Coord) as u32,
        None => value,
    }
}

/// Clamps every parameter into its technology limits, snaps lengths to the
/// grid and recomputes the derived width.
pub fn evaluate_params(raw: &DeviceParams, tech: &TechnologyData) -> Result<DeviceParams, PcellError> {
    let spec = generator_spec(&raw.device).ok_or_else(|| PcellError::UnknownDevice(raw.device.clone()))?;
    let limits = tech.limits(&raw.device).map_err(|_| PcellError::UnknownDevice(raw.device.clone()))?;
    if raw.fingers == 0 {
        return Err(PcellError::InvalidParam("fingers must be at least 1".into()));
    }
    if raw.multiplier == 0 {
        return Err(PcellError::InvalidParam("multiplier must be at least 1".into()));
    }
    if raw.l <= 0 || raw.w <= 0 || raw.wtot <= 0 {
        return Err(PcellError::InvalidParam("lengths must be positive".into()));
    }
    let grid = tech.grid;
    let mut p = raw.clone();
    p.l = clamp_snap(raw.l, limits.get("l"), grid);
    p.multiplier = clamp_count(raw.multiplier, limits.get("multiplier"));
    if spec.family != DeviceFamily::Mos {
        p.w = clamp_snap(raw.w, limits.get("w"), grid);
        p.fingers = 1;
        p.wtot = p.w;
        p.bends = clamp_count(raw.bends, limits.get("bends"));
        p.guard_ring = GuardRing::none();
        p.multiplier = 1;
        return Ok(p);
    }
    p.bends = 0;
    p.fingers = clamp_count(raw.fingers, limits.get("fingers"));
    let f = p.fingers as Coord;
    let w_lim = limits.get("w").copied();
    let wtot_lim = limits.get("wtot").copied();
    let fit_w = |mut w: Coord| {
        // Keep fingers * w inside the total-width limits by whole grid steps.
        if let Some(lim) = wtot_lim {
            if f * w > lim.max {
                w = snap_down(lim.max / f, grid);
            }
            if f * w < lim.min {
                w = snap_up((lim.min + f - 1) / f, grid);
            }
        }
        if let Some(lim) = w_lim {
            w = lim.clamp(w);
        }
        w
    };
    match raw.driver {
        WidthDriver::FingerWidth => {
            p.w = fit_w(clamp_snap(raw.w, w_lim.as_ref(), grid));
        }
        WidthDriver::TotalWidth => {
            let wtot = clamp_snap(raw.wtot, wtot_lim.as_ref(), grid);
            p.w = fit_w(clamp_snap(snap(wtot / f, grid).max(grid), w_lim.as_ref(), grid));
        }
        WidthDriver::Pinned => {
            if raw.wtot != f * raw.w || raw.fingers != p.fingers {
                return Err(PcellError::ContradictoryParams {
                    w: raw.w,
                    fingers: raw.fingers,
                    wtot: raw.wtot,
                });
            }
            p.w = fit_w(clamp_snap(raw.w, w_lim.as_ref(), grid));
        }
    }
    p.wtot = f * p.w;
    Ok(p)
}

/// Kind of connection a pin expects from routing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    WeakPoly,
    StrongMetal,
}

/// Abutment variant applied to one edge of a generated cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeVariant {
    pub style: AbutStyle,
    /// Whether this side keeps its contact column at the joint.
    pub keep_contacts: bool,
}

impl EdgeVariant {
    /// Half-width diffusion at the joint; the partner supplies the other half.
    pub fn half_diffusion(&self) -> bool {
        !self.keep_contacts && matches!(self.style, AbutStyle::DiffHalf | AbutStyle::DiffAbut)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeVariants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub west: Option<EdgeVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub east: Option<EdgeVariant>,
}

impl EdgeVariants {
    pub fn is_plain(&self) -> bool {
        self.west.is_none() && self.east.is_none()
    }
}

/// A generated cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLayout {
    pub name: String,
    pub params: DeviceParams,
    pub shapes: Vec<Shape>,
    /// Pin name to indices into `shapes`.
    pub pins: BTreeMap<String, Vec<usize>>,
    pub connection_kind: BTreeMap<String, ConnectionKind>,
    pub handles: Vec<StretchHandle>,
    pub abut_specs: Vec<AbutmentSpec>,
    /// Named shape groups: `core<k>`, `links`, `bulk_ring`, `guard_ring` and
    /// `body` (device bodies that do not conduct between terminals).
    pub groups: BTreeMap<String, Vec<usize>>,
    pub steps: Vec<ConstructionStep>,
    #[serde(default)]
    pub edges: EdgeVariants,
    pub properties: BTreeMap<String, Coord>,
}

impl CellLayout {
    pub fn bbox(&self) -> Rect {
        bbox_of(self.shapes.iter())
    }

    pub fn group(&self, name: &str) -> &[usize] {
        self.groups.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pin_shapes(&self, pin: &str) -> impl Iterator<Item = &Shape> {
        self.pins
            .get(pin)
            .into_iter()
            .flatten()
            .map(move |&i| &self.shapes[i])
    }

    pub fn shapes_on<'a>(&'a self, layer: &'a str) -> impl Iterator<Item = &'a Shape> + 'a {
        self.shapes.iter().filter(move |s| s.layer == layer)
    }

    pub fn is_body(&self, idx: usize) -> bool {
        self.group("body").contains(&idx)
    }

    /// Number of device cores (multiplier copies).
    pub fn core_count(&self) -> usize {
        self.groups.keys().filter(|k| k.starts_with("core")).count()
    }

    pub fn family(&self) -> DeviceFamily {
        generator_spec(&self.params.device)
            .map(|s| s.family)
            .unwrap_or(DeviceFamily::Mos)
    }
}

pub(crate) fn bbox_of<'a>(shapes: impl Iterator<Item = &'a Shape>) -> Rect {
    shapes
        .map(|s| s.bbox())
        .reduce(|a, b| a.union(&b))
        .unwrap_or(Rect::new(0, 0, 0, 0))
}

/// Generates a cell from evaluated parameters.
pub fn generate(params: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    generate_with_edges(params, &EdgeVariants::default(), tech)
}

/// Generates a cell with abutment edge variants applied.
pub fn generate_with_edges(
    params: &DeviceParams,
    edges: &EdgeVariants,
    tech: &TechnologyData,
) -> Result<CellLayout, PcellError> {
    let spec = generator_spec(&params.device).ok_or_else(|| PcellError::UnknownDevice(params.device.clone()))?;
    let mut cell = match params.device.as_str() {
        "pmos20t" => mos::annular(&spec, params, tech)?,
        "nmos5" => mos::linear(&spec, params, edges, tech)?,
        "respoly" => passive::resistor(&spec, params, tech)?,
        "capmim" => passive::capacitor(&spec, params, tech)?,
        other => return Err(PcellError::UnknownDevice(other.to_string())),
    };
    cell.edges = *edges;
    cell.name = cell_name(params, edges);
    Ok(cell)
}

pub fn generate_resistor(params: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    match generator_spec(&params.device) {
        Some(spec) if spec.family == DeviceFamily::Resistor => generate(params, tech),
        _ => Err(PcellError::UnknownDevice(params.device.clone())),
    }
}

pub fn generate_capacitor(params: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    match generator_spec(&params.device) {
        Some(spec) if spec.family == DeviceFamily::Capacitor => generate(params, tech),
        _ => Err(PcellError::UnknownDevice(params.device.clone())),
    }
}

/// Deterministic GDS-safe cell name: device plus a parameter digest.
pub fn cell_name(params: &DeviceParams, edges: &EdgeVariants) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&(params, edges)).expect("params serialize"));
    let digest = h.finalize();
    format!("{}_{}", params.device.to_ascii_uppercase(), hex::encode_upper(&digest[..4]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tech() -> TechnologyData {
        TechnologyData::demo()
    }

    #[test]
    fn clamps_length_to_minimum() {
        let mut p = DeviceParams::defaults("pmos20t").unwrap();
        p.l = 100;
        assert_eq!(evaluate_params(&p, &tech()).unwrap().l, 1000);
    }

    #[test]
    fn wtot_is_product() {
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.fingers = 4;
        p.w = 2000;
        assert_eq!(evaluate_params(&p, &tech()).unwrap().wtot, 8000);
    }

    #[test]
    fn snaps_to_grid() {
        let mut p = DeviceParams::defaults("pmos20t").unwrap();
        p.w = 1003;
        assert_eq!(evaluate_params(&p, &tech()).unwrap().w, 1005);
    }

    #[test]
    fn total_width_drives_finger_width() {
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.fingers = 4;
        p.wtot = 5000;
        p.driver = WidthDriver::TotalWidth;
        let e = evaluate_params(&p, &tech()).unwrap();
        assert_eq!((e.w, e.wtot), (1250, 5000));
    }

    #[test]
    fn rejects_bad_params() {
        let t = tech();
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.device = "bjt".into();
        assert_eq!(evaluate_params(&p, &t), Err(PcellError::UnknownDevice("bjt".into())));
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.fingers = 0;
        assert!(matches!(evaluate_params(&p, &t), Err(PcellError::InvalidParam(_))));
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.driver = WidthDriver::Pinned;
        p.fingers = 2;
        p.w = 1000;
        p.wtot = 3000;
        assert!(matches!(evaluate_params(&p, &t), Err(PcellError::ContradictoryParams { .. })));
        p.wtot = 2000;
        assert_eq!(evaluate_params(&p, &t).unwrap().wtot, 2000);
    }

    #[test]
    fn total_width_stays_inside_limits() {
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.fingers = 3;
        p.wtot = 10_000_000;
        p.driver = WidthDriver::TotalWidth;
        let e = evaluate_params(&p, &tech()).unwrap();
        assert!(e.wtot <= 10_000_000);
        assert_eq!(e.wtot, 3 * e.w);
    }

    #[test]
    fn pmos20t_extends_the_base_steps() {
        let base = generator_spec("nmos5").unwrap().steps;
        let hv = generator_spec("pmos20t").unwrap().steps;
        for s in &MOS_BASE_STEPS {
            assert!(base.contains(s) && hv.contains(s));
        }
        let pos = |s| hv.iter().position(|x| *x == s).unwrap();
        assert!(pos(ConstructionStep::Gate) < pos(ConstructionStep::Contacts));
        assert!(pos(ConstructionStep::DrainWells) < pos(ConstructionStep::BodyWell));
        assert!(pos(ConstructionStep::BodyWell) < pos(ConstructionStep::Implant));
        assert!(pos(ConstructionStep::BulkRing) < pos(ConstructionStep::OxideDefinition));
    }

    #[test]
    fn names_are_short_and_stable() {
        let p = DeviceParams::defaults("pmos20t").unwrap();
        let a = cell_name(&p, &EdgeVariants::default());
        assert_eq!(a, cell_name(&p, &EdgeVariants::default()));
        assert!(a.len() <= 32);
        let mut q = p.clone();
        q.l += 5;
        assert_ne!(a, cell_name(&q, &EdgeVariants::default()));
    }
}
