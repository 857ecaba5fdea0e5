// SPDX-License-Identifier: Apache-2.0

//! Interactive editing: stretch handles and auto-abutment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{apply_transform, snap, to_um, um, Coord, Point, Rect, Transform};
use crate::pcell::{
    evaluate_params, generate_with_edges, CellLayout, DeviceFamily, DeviceParams, EdgeVariant, EdgeVariants,
    PcellError, WidthDriver,
};
use crate::techdb::{Limit, TechnologyData};
use crate::verify::Netlist;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractError {
    #[error(transparent)]
    Pcell(#[from] PcellError),
    #[error("cell has no handle `{0}`")]
    NoHandle(String),
    #[error("instances cannot be abutted: {0}")]
    IncompatibleCase(String),
    #[error("instances `{0}` and `{1}` are not abutted")]
    NotAbutted(String, String),
    #[error("{param} would become {value}, outside [{min}, {max}]")]
    LimitViolation {
        param: String,
        value: Coord,
        min: Coord,
        max: Coord,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HandlePosition {
    CenterLeft,
    CenterRight,
    TopCenter,
    BottomCenter,
}

impl HandlePosition {
    /// Sign that turns a drag along the handle axis into growth.
    fn outward(self) -> Coord {
        match self {
            HandlePosition::CenterLeft | HandlePosition::BottomCenter => -1,
            HandlePosition::CenterRight | HandlePosition::TopCenter => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StretchAxis {
    EastWest,
    NorthSouth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StretchType {
    Relative,
    Absolute,
}

/// Handle bound to a shape; dragging it updates `parameter`. Bounds and
/// snap resolution are in micrometres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchHandle {
    pub name: String,
    pub shape_ref: usize,
    pub position: HandlePosition,
    pub direction: StretchAxis,
    pub stretch_type: StretchType,
    pub parameter: String,
    pub min_val: f64,
    pub max_val: f64,
    pub snap_res: f64,
}

impl Eq for StretchHandle {}

/// Left and right total-width handles on a transistor gate.
pub fn mos_width_handles(shape_ref: usize, wtot: Option<Limit>) -> Vec<StretchHandle> {
    let (min_val, max_val) = wtot.map_or((0.4, 10000.0), |l| (to_um(l.min), to_um(l.max)));
    [("width_handle_left", HandlePosition::CenterLeft), ("width_handle_right", HandlePosition::CenterRight)]
        .into_iter()
        .map(|(name, position)| StretchHandle {
            name: name.to_string(),
            shape_ref,
            position,
            direction: StretchAxis::EastWest,
            stretch_type: StretchType::Relative,
            parameter: "wtot".to_string(),
            min_val,
            max_val,
            snap_res: 0.05,
        })
        .collect()
}

fn handle<'a>(cell: &'a CellLayout, name: &str) -> Result<&'a StretchHandle, InteractError> {
    cell.handles
        .iter()
        .find(|h| h.name == name)
        .ok_or_else(|| InteractError::NoHandle(name.to_string()))
}

/// New parameter value for a drag of `drag` (dbu) on `handle`, snapped and
/// clamped to the handle bounds.
pub fn stretched_value(cell: &CellLayout, handle: &StretchHandle, drag: Point) -> Coord {
    let delta = match handle.direction {
        StretchAxis::EastWest => drag.x,
        StretchAxis::NorthSouth => drag.y,
    } * handle.position.outward();
    let raw = match handle.stretch_type {
        StretchType::Relative => cell.params.length(&handle.parameter).unwrap_or(0) + delta,
        StretchType::Absolute => {
            let bb = cell.shapes[handle.shape_ref].bbox();
            let extent = match handle.direction {
                StretchAxis::EastWest => bb.width(),
                StretchAxis::NorthSouth => bb.height(),
            };
            extent + delta
        }
    };
    let res = um(handle.snap_res).max(1);
    snap(raw, res).clamp(um(handle.min_val), um(handle.max_val))
}

/// Applies a handle drag and regenerates the cell.
pub fn apply_stretch(
    cell: &CellLayout,
    handle_name: &str,
    drag: Point,
    tech: &TechnologyData,
) -> Result<CellLayout, InteractError> {
    let h = handle(cell, handle_name)?;
    let value = stretched_value(cell, h, drag);
    let params = if cell.family() == DeviceFamily::Capacitor && h.parameter == "w" {
        stretch_capacitor(&cell.params, value, tech)?
    } else {
        let mut p = cell.params.clone();
        p.set_length(&h.parameter, value);
        p.driver = match h.parameter.as_str() {
            "wtot" => WidthDriver::TotalWidth,
            _ => WidthDriver::FingerWidth,
        };
        evaluate_params(&p, tech)?
    };
    Ok(generate_with_edges(&params, &cell.edges, tech)?)
}

/// Changes a capacitor's width while keeping its plate area: the length is
/// recomputed as `w*l/new_w` rounded to the grid.
pub fn stretch_capacitor(params: &DeviceParams, new_w: Coord, tech: &TechnologyData) -> Result<DeviceParams, InteractError> {
    let limits = tech.limits(&params.device).map_err(PcellError::from)?;
    let check = |name: &str, value: Coord| match limits.get(name) {
        Some(lim) if !lim.contains(value) => Err(InteractError::LimitViolation {
            param: name.to_string(),
            value,
            min: lim.min,
            max: lim.max,
        }),
        _ => Ok(()),
    };
    let w = snap(new_w, tech.grid);
    check("w", w)?;
    let area = params.w as i128 * params.l as i128;
    let l = (area as f64 / w as f64 / tech.grid as f64).round() as Coord * tech.grid;
    check("l", l)?;
    let mut p = params.clone();
    p.w = w;
    p.l = l;
    p.wtot = w;
    Ok(p)
}

/// Changes the finger count while keeping the total width.
pub fn stretch_transistor_fingers(
    params: &DeviceParams,
    fingers: u32,
    tech: &TechnologyData,
) -> Result<DeviceParams, InteractError> {
    let mut p = params.clone();
    p.fingers = fingers;
    p.driver = WidthDriver::TotalWidth;
    Ok(evaluate_params(&p, tech)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AbutDirection {
    North,
    South,
    East,
    West,
}

impl AbutDirection {
    pub fn vector(self) -> Point {
        match self {
            AbutDirection::North => Point::new(0, 1),
            AbutDirection::South => Point::new(0, -1),
            AbutDirection::East => Point::new(1, 0),
            AbutDirection::West => Point::new(-1, 0),
        }
    }

    fn from_vector(v: Point) -> Self {
        match (v.x.signum(), v.y.signum()) {
            (1, _) => AbutDirection::East,
            (-1, _) => AbutDirection::West,
            (_, 1) => AbutDirection::North,
            _ => AbutDirection::South,
        }
    }
}

/// How a cell shapes its diffusion at an abutted edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AbutStyle {
    DiffHalf,
    DiffAbut,
    DiffEdgeAbut,
    ContactEdgeAbut2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeRelation {
    Equal,
    Bigger,
    Smaller,
}

/// Spacing and left/right styles for one abutment case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseStyles {
    pub spacing: Coord,
    pub left: AbutStyle,
    pub right: AbutStyle,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbutCases {
    pub two_pin_equal: CaseStyles,
    pub two_pin_bigger: CaseStyles,
    pub two_pin_smaller: CaseStyles,
    pub three_pin_equal: CaseStyles,
    pub three_pin_bigger: CaseStyles,
    pub three_pin_smaller: CaseStyles,
}

impl AbutCases {
    pub fn mos_default() -> Self {
        use AbutStyle::*;
        let c = |left, right| CaseStyles { spacing: 0, left, right };
        Self {
            two_pin_equal: c(DiffHalf, DiffHalf),
            two_pin_bigger: c(DiffEdgeAbut, DiffEdgeAbut),
            two_pin_smaller: c(DiffEdgeAbut, DiffEdgeAbut),
            three_pin_equal: c(DiffAbut, ContactEdgeAbut2),
            three_pin_bigger: c(ContactEdgeAbut2, ContactEdgeAbut2),
            three_pin_smaller: c(DiffEdgeAbut, DiffEdgeAbut),
        }
    }

    pub fn get(&self, degree: PinDegree, size: SizeRelation) -> CaseStyles {
        match (degree, size) {
            (PinDegree::Two, SizeRelation::Equal) => self.two_pin_equal,
            (PinDegree::Two, SizeRelation::Bigger) => self.two_pin_bigger,
            (PinDegree::Two, SizeRelation::Smaller) => self.two_pin_smaller,
            (PinDegree::Three, SizeRelation::Equal) => self.three_pin_equal,
            (PinDegree::Three, SizeRelation::Bigger) => self.three_pin_bigger,
            (PinDegree::Three, SizeRelation::Smaller) => self.three_pin_smaller,
        }
    }
}

/// Abutment capability of one edge shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbutmentSpec {
    pub shape_ref: usize,
    pub pin: String,
    pub pin_size: Coord,
    pub directions: Vec<AbutDirection>,
    pub abut_class: String,
    pub cases: AbutCases,
    /// Gaps larger than this (dbu) never abut.
    pub no_abut_spacing: Coord,
}

/// Two-pin: the shared net connects only the two abutting pins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinDegree {
    Two,
    Three,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum AbutCase {
    NoAbut,
    Abut { degree: PinDegree, size: SizeRelation },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbutRecord {
    pub partner: String,
    /// Edge of this cell that is abutted.
    pub edge: AbutDirection,
    pub original_transform: Transform,
}

/// Cell placed in a design.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedInstance {
    pub id: String,
    pub cell: CellLayout,
    pub transform: Transform,
    /// Pin name to design net.
    pub pin_nets: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abutment: Option<AbutRecord>,
}

impl PlacedInstance {
    pub fn new(id: impl Into<String>, cell: CellLayout, transform: Transform) -> Self {
        Self {
            id: id.into(),
            cell,
            transform,
            pin_nets: BTreeMap::new(),
            abutment: None,
        }
    }

    pub fn with_nets<I, K, V>(mut self, nets: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        self.pin_nets = nets.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        self
    }

    pub fn bbox(&self) -> Rect {
        self.transform.apply_rect(&self.cell.bbox())
    }

    fn world_rect(&self, shape: usize) -> Rect {
        apply_transform(&self.cell.shapes[shape], &self.transform).bbox()
    }
}

/// Outcome of checking two instances for abutment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbutDetection {
    pub case: AbutCase,
    /// Indices into each cell's `abut_specs`, when a facing pair exists.
    pub specs: Option<(usize, usize)>,
    pub gap: Coord,
    /// World direction from `a` towards `b`.
    pub direction: Option<AbutDirection>,
}

impl AbutDetection {
    fn none() -> Self {
        Self {
            case: AbutCase::NoAbut,
            specs: None,
            gap: Coord::MAX,
            direction: None,
        }
    }
}

fn world_direction(d: AbutDirection, t: &Transform) -> AbutDirection {
    AbutDirection::from_vector(t.apply_vector(d.vector()))
}

/// Gap between facing edge shapes, or `None` if they do not face each other.
fn facing_gap(ra: &Rect, rb: &Rect, dir: AbutDirection) -> Option<Coord> {
    let (lo_a, hi_a, lo_b, hi_b, cross) = match dir {
        AbutDirection::East | AbutDirection::West => (ra.lo.x, ra.hi.x, rb.lo.x, rb.hi.x, (ra.lo.y.max(rb.lo.y), ra.hi.y.min(rb.hi.y))),
        _ => (ra.lo.y, ra.hi.y, rb.lo.y, rb.hi.y, (ra.lo.x.max(rb.lo.x), ra.hi.x.min(rb.hi.x))),
    };
    if cross.1 <= cross.0 {
        return None;
    }
    let forward = matches!(dir, AbutDirection::East | AbutDirection::North);
    let (ca, cb) = (lo_a + hi_a, lo_b + hi_b);
    if forward {
        (cb >= ca).then(|| (lo_b - hi_a).max(0))
    } else {
        (cb <= ca).then(|| (lo_a - hi_b).max(0))
    }
}

fn pin_degree(net: &str, a: &PlacedInstance, b: &PlacedInstance, netlist: Option<&Netlist>) -> PinDegree {
    let count = match netlist {
        Some(n) => n.pin_incidences(net),
        None => [a, b]
            .iter()
            .flat_map(|i| i.pin_nets.values())
            .filter(|n| n.as_str() == net)
            .count(),
    };
    if count <= 2 {
        PinDegree::Two
    } else {
        PinDegree::Three
    }
}

/// Classifies the abutment between `a` and `b`. Pin incidences for the
/// two-pin versus three-pin decision come from `netlist` when given,
/// otherwise from the two instances alone.
pub fn detect_abutment(a: &PlacedInstance, b: &PlacedInstance, netlist: Option<&Netlist>) -> AbutDetection {
    let mut best = AbutDetection::none();
    for (ia, sa) in a.cell.abut_specs.iter().enumerate() {
        for (ib, sb) in b.cell.abut_specs.iter().enumerate() {
            if sa.abut_class != sb.abut_class {
                continue;
            }
            for &da in &sa.directions {
                let wa = world_direction(da, &a.transform);
                let facing = sb
                    .directions
                    .iter()
                    .any(|&db| world_direction(db, &b.transform).vector() == Point::new(-wa.vector().x, -wa.vector().y));
                if !facing {
                    continue;
                }
                let Some(gap) = facing_gap(&a.world_rect(sa.shape_ref), &b.world_rect(sb.shape_ref), wa) else {
                    continue;
                };
                if gap >= best.gap {
                    continue;
                }
                let na = a.pin_nets.get(&sa.pin);
                let shares_net = na.is_some() && na == b.pin_nets.get(&sb.pin);
                let case = if gap > sa.no_abut_spacing.max(sb.no_abut_spacing) || !shares_net {
                    AbutCase::NoAbut
                } else {
                    let size = match sa.pin_size.cmp(&sb.pin_size) {
                        std::cmp::Ordering::Equal => SizeRelation::Equal,
                        std::cmp::Ordering::Greater => SizeRelation::Bigger,
                        std::cmp::Ordering::Less => SizeRelation::Smaller,
                    };
                    AbutCase::Abut {
                        degree: pin_degree(na.expect("shared net"), a, b, netlist),
                        size,
                    }
                };
                best = AbutDetection {
                    case,
                    specs: Some((ia, ib)),
                    gap,
                    direction: Some(wa),
                };
            }
        }
    }
    best
}

fn set_edge(edges: &mut EdgeVariants, local: AbutDirection, v: EdgeVariant) -> Result<(), InteractError> {
    match local {
        AbutDirection::West => edges.west = Some(v),
        AbutDirection::East => edges.east = Some(v),
        other => return Err(InteractError::IncompatibleCase(format!("unsupported abutment edge {other:?}"))),
    }
    Ok(())
}

/// Abuts `b` onto `a`: moves `b` so the shared columns coincide and
/// regenerates both cells with the edge variants of the detected case.
pub fn apply_abutment(
    a: &mut PlacedInstance,
    b: &mut PlacedInstance,
    netlist: Option<&Netlist>,
    tech: &TechnologyData,
) -> Result<AbutDetection, InteractError> {
    if a.abutment.is_some() || b.abutment.is_some() {
        return Err(InteractError::IncompatibleCase("instance is already abutted".into()));
    }
    let det = detect_abutment(a, b, netlist);
    let (AbutCase::Abut { degree, size }, Some((ia, ib)), Some(dir)) = (det.case, det.specs, det.direction) else {
        return Err(InteractError::IncompatibleCase(format!(
            "no abutment between `{}` and `{}`",
            a.id, b.id
        )));
    };
    let sa = a.cell.abut_specs[ia].clone();
    let sb = b.cell.abut_specs[ib].clone();
    let local_a = *sa.directions.iter().find(|&&d| world_direction(d, &a.transform) == dir).expect("facing direction");
    let local_b = *sb
        .directions
        .iter()
        .find(|&&d| world_direction(d, &b.transform).vector() == Point::new(-dir.vector().x, -dir.vector().y))
        .expect("facing direction");

    // The left (or lower) instance is the one facing east (or north).
    let a_is_left = matches!(dir, AbutDirection::East | AbutDirection::North);
    let (left_spec, left_size, right_size) = if a_is_left { (&sa, sa.pin_size, sb.pin_size) } else { (&sb, sb.pin_size, sa.pin_size) };
    let left_rel = if a_is_left {
        size
    } else {
        match left_size.cmp(&right_size) {
            std::cmp::Ordering::Equal => SizeRelation::Equal,
            std::cmp::Ordering::Greater => SizeRelation::Bigger,
            std::cmp::Ordering::Less => SizeRelation::Smaller,
        }
    };
    let styles = left_spec.cases.get(degree, left_rel);
    let (keep_left, keep_right) = match degree {
        PinDegree::Two => (false, false),
        PinDegree::Three if styles.left == AbutStyle::ContactEdgeAbut2 => (true, false),
        PinDegree::Three if styles.right == AbutStyle::ContactEdgeAbut2 => (false, true),
        PinDegree::Three => (true, false),
    };
    let left_v = EdgeVariant { style: styles.left, keep_contacts: keep_left };
    let right_v = EdgeVariant { style: styles.right, keep_contacts: keep_right };
    let (va, vb) = if a_is_left { (left_v, right_v) } else { (right_v, left_v) };

    // Align the full edge columns before they are reshaped.
    let ra = a.world_rect(sa.shape_ref);
    let rb = b.world_rect(sb.shape_ref);
    let shift = match dir {
        AbutDirection::East | AbutDirection::West => Point::new(ra.lo.x - rb.lo.x, 0),
        _ => Point::new(0, ra.lo.y - rb.lo.y),
    };

    let mut ea = a.cell.edges;
    set_edge(&mut ea, local_a, va)?;
    let mut eb = b.cell.edges;
    set_edge(&mut eb, local_b, vb)?;
    let cell_a = generate_with_edges(&a.cell.params, &ea, tech)?;
    let cell_b = generate_with_edges(&b.cell.params, &eb, tech)?;

    a.abutment = Some(AbutRecord {
        partner: b.id.clone(),
        edge: local_a,
        original_transform: a.transform,
    });
    b.abutment = Some(AbutRecord {
        partner: a.id.clone(),
        edge: local_b,
        original_transform: b.transform,
    });
    a.cell = cell_a;
    b.cell = cell_b;
    b.transform.translation = Point::new(b.transform.translation.x + shift.x, b.transform.translation.y + shift.y);
    Ok(det)
}

/// Restores both instances to their structure and placement before
/// abutment.
pub fn undo_abutment(a: &mut PlacedInstance, b: &mut PlacedInstance, tech: &TechnologyData) -> Result<(), InteractError> {
    let paired = |x: &PlacedInstance, y: &PlacedInstance| x.abutment.as_ref().is_some_and(|r| r.partner == y.id);
    if !paired(a, b) || !paired(b, a) {
        return Err(InteractError::NotAbutted(a.id.clone(), b.id.clone()));
    }
    for inst in [a, b] {
        let rec = inst.abutment.take().expect("paired");
        inst.cell = generate_with_edges(&inst.cell.params, &EdgeVariants::default(), tech)?;
        inst.transform = rec.original_transform;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcell::generate;

    fn cap(w: Coord, l: Coord) -> DeviceParams {
        let mut p = DeviceParams::defaults("capmim").unwrap();
        p.w = w;
        p.l = l;
        p.wtot = w;
        p
    }

    #[test]
    fn capacitor_stretch_conserves_area() {
        let t = TechnologyData::demo();
        let p = stretch_capacitor(&cap(10_000, 20_000), 40_000, &t).unwrap();
        assert_eq!((p.w, p.l), (40_000, 5_000));
        assert!(matches!(
            stretch_capacitor(&cap(10_000, 20_000), 400_000, &t),
            Err(InteractError::LimitViolation { .. })
        ));
    }

    #[test]
    fn relative_stretch_adds_outward_drag() {
        let t = TechnologyData::demo();
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.w = 2000;
        p.wtot = 2000;
        let cell = generate(&evaluate_params(&p, &t).unwrap(), &t).unwrap();
        let left = apply_stretch(&cell, "width_handle_left", Point::new(-1000, 0), &t).unwrap();
        assert_eq!(left.params.wtot, 3000);
        let right = apply_stretch(&cell, "width_handle_right", Point::new(-1000, 0), &t).unwrap();
        assert_eq!(right.params.wtot, 1000);
        assert!(matches!(
            apply_stretch(&cell, "nope", Point::new(0, 0), &t),
            Err(InteractError::NoHandle(_))
        ));
    }

    #[test]
    fn stretch_clamps_to_handle_bounds() {
        let t = TechnologyData::demo();
        let cell = generate(&DeviceParams::defaults("nmos5").unwrap(), &t).unwrap();
        let s = apply_stretch(&cell, "width_handle_right", Point::new(-1_000_000, 0), &t).unwrap();
        assert_eq!(s.params.wtot, 400);
    }

    #[test]
    fn finger_change_keeps_total_width() {
        let t = TechnologyData::demo();
        let mut p = DeviceParams::defaults("nmos5").unwrap();
        p.w = 6000;
        p.wtot = 6000;
        let q = stretch_transistor_fingers(&p, 3, &t).unwrap();
        assert_eq!((q.fingers, q.w, q.wtot), (3, 2000, 6000));
    }

    #[test]
    fn facing_gap_cases() {
        let a = Rect::new(0, 0, 600, 1000);
        let b = Rect::new(1000, 0, 1600, 1000);
        assert_eq!(facing_gap(&a, &b, AbutDirection::East), Some(400));
        assert_eq!(facing_gap(&a, &b, AbutDirection::West), None);
        assert_eq!(facing_gap(&b, &a, AbutDirection::West), Some(400));
        assert_eq!(facing_gap(&a, &Rect::new(300, 0, 900, 10), AbutDirection::East), Some(0));
        assert_eq!(facing_gap(&a, &Rect::new(1000, 2000, 1600, 3000), AbutDirection::East), None);
    }
}
