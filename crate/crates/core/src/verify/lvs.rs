// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Coord};
use crate::interact::PlacedInstance;
use crate::pcell::{generator_spec, DeviceFamily, DeviceParams};
use crate::techdb::TechnologyData;

use super::{Design, ShapeIndex, UnionFind, VerifyError};

const PARAM_RTOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceInstance {
    pub name: String,
    pub kind: String,
    /// Pin name to net.
    pub pins: BTreeMap<String, String>,
    /// SI values (metres, counts).
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub devices: Vec<DeviceInstance>,
    pub nets: Vec<String>,
}

/// Terminal order used in schematic lines.
pub fn pin_order(family: DeviceFamily) -> &'static [&'static str] {
    match family {
        DeviceFamily::Mos => &["G", "S", "D", "B"],
        DeviceFamily::Resistor | DeviceFamily::Capacitor => &["PLUS", "MINUS"],
    }
}

fn dbu_to_m(v: Coord) -> f64 {
    v as f64 * 1e-9
}

/// Netlist parameters of a device: `l`, `w` (total width for transistors),
/// `nf` and `m`.
pub fn device_params(p: &DeviceParams) -> BTreeMap<String, f64> {
    let family = generator_spec(&p.device).map_or(DeviceFamily::Mos, |s| s.family);
    let mut out = BTreeMap::from([("l".to_string(), dbu_to_m(p.l))]);
    match family {
        DeviceFamily::Mos => {
            out.insert("w".into(), dbu_to_m(p.wtot));
            out.insert("nf".into(), p.fingers as f64);
            out.insert("m".into(), p.multiplier as f64);
        }
        DeviceFamily::Resistor | DeviceFamily::Capacitor => {
            out.insert("w".into(), dbu_to_m(p.w));
        }
    }
    out
}

impl Netlist {
    /// Number of device terminals on `net`.
    pub fn pin_incidences(&self, net: &str) -> usize {
        self.devices
            .iter()
            .flat_map(|d| d.pins.values())
            .filter(|n| n.as_str() == net)
            .count()
    }

    pub fn device(&self, name: &str) -> Option<&DeviceInstance> {
        self.devices.iter().find(|d| d.name == name)
    }

    /// Netlist declared by the instances' pin-to-net assignments.
    pub fn from_instances(instances: &[PlacedInstance]) -> Self {
        let devices: Vec<DeviceInstance> = instances
            .iter()
            .map(|inst| DeviceInstance {
                name: inst.id.clone(),
                kind: inst.cell.params.device.clone(),
                pins: inst.pin_nets.clone(),
                params: device_params(&inst.cell.params),
            })
            .collect();
        let nets: BTreeSet<String> = devices.iter().flat_map(|d| d.pins.values().cloned()).collect();
        Self {
            devices,
            nets: nets.into_iter().collect(),
        }
    }

    /// Schematic text accepted by [`parse_schematic`].
    pub fn to_spice(&self) -> String {
        let mut out = String::new();
        for d in &self.devices {
            let family = generator_spec(&d.kind).map_or(DeviceFamily::Mos, |s| s.family);
            out.push_str(&d.name);
            out.push(' ');
            out.push_str(&d.kind);
            for pin in pin_order(family) {
                out.push(' ');
                out.push_str(d.pins.get(*pin).map_or("?", String::as_str));
            }
            for (k, v) in &d.params {
                out.push_str(&format!(" {k}={v:e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Connected conducting region of a design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub net: String,
    /// Design nets named by shapes in this component.
    pub labels: BTreeSet<String>,
    /// Indices into the flattened design.
    pub shapes: Vec<usize>,
    pub centroid: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub netlist: Netlist,
    pub components: Vec<Component>,
}

/// Groups conducting shapes into connected components.
pub fn extract_components(design: &Design, tech: &TechnologyData) -> Extraction {
    let flat = design.flatten();
    let conducting: Vec<usize> = (0..flat.len())
        .filter(|&i| !flat[i].body && tech.connects(&flat[i].shape.layer, &flat[i].shape.layer))
        .collect();
    let pos: HashMap<usize, usize> = conducting.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let bboxes: Vec<_> = flat.iter().map(|f| f.shape.bbox()).collect();
    let index = ShapeIndex::new(conducting.iter().map(|&i| (i, bboxes[i])));
    let mut uf = UnionFind::new(conducting.len());
    for (k, &i) in conducting.iter().enumerate() {
        for j in index.near(&bboxes[i], 0) {
            if j <= i || !tech.connects(&flat[i].shape.layer, &flat[j].shape.layer) {
                continue;
            }
            if distance(&flat[i].shape, &flat[j].shape) == 0.0 {
                uf.union(k, pos[&j]);
            }
        }
    }

    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &i) in conducting.iter().enumerate() {
        by_root.entry(uf.find(k)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let mut used: HashMap<String, usize> = HashMap::new();
    let mut shape_component = vec![None; flat.len()];
    let mut components = Vec::with_capacity(groups.len());
    for (c, shapes) in groups.into_iter().enumerate() {
        let labels: BTreeSet<String> = shapes.iter().filter_map(|&i| flat[i].net.clone()).collect();
        let net = match labels.iter().next() {
            Some(l) => {
                let n = used.entry(l.clone()).or_insert(0);
                *n += 1;
                if *n == 1 {
                    l.clone()
                } else {
                    format!("{l}#{n}")
                }
            }
            None => format!("n{c}"),
        };
        let (mut sx, mut sy) = (0.0, 0.0);
        for &i in &shapes {
            let ctr = bboxes[i];
            sx += (ctr.lo.x + ctr.hi.x) as f64 / 2.0;
            sy += (ctr.lo.y + ctr.hi.y) as f64 / 2.0;
            shape_component[i] = Some(c);
        }
        let n = shapes.len() as f64;
        components.push(Component {
            net,
            labels,
            shapes,
            centroid: (sx / n, sy / n),
        });
    }

    // Flat indices of each instance start at the running shape count.
    let mut offset = 0;
    let mut devices = Vec::new();
    let mut nets = BTreeSet::new();
    for inst in &design.instances {
        let mut pins = BTreeMap::new();
        for (pin, idx) in &inst.cell.pins {
            let comp = idx.iter().find_map(|&i| shape_component[offset + i]);
            if let Some(c) = comp {
                let net = components[c].net.clone();
                nets.insert(net.clone());
                pins.insert(pin.clone(), net);
            }
        }
        devices.push(DeviceInstance {
            name: inst.id.clone(),
            kind: inst.cell.params.device.clone(),
            pins,
            params: device_params(&inst.cell.params),
        });
        offset += inst.cell.shapes.len();
    }
    Extraction {
        netlist: Netlist {
            devices,
            nets: nets.into_iter().collect(),
        },
        components,
    }
}

pub fn extract_netlist(design: &Design, tech: &TechnologyData) -> Netlist {
    extract_components(design, tech).netlist
}

fn parse_si(token: &str) -> Option<f64> {
    let t = token.to_ascii_lowercase();
    let split = t
        .char_indices()
        .find(|&(i, c)| c.is_ascii_alphabetic() && !(c == 'e' && t[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+')))
        .map_or(t.len(), |(i, _)| i);
    let (num, suffix) = t.split_at(split);
    let scale = match suffix {
        "" => 1.0,
        "f" => 1e-15,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" => 1e-6,
        "m" => 1e-3,
        "k" => 1e3,
        "meg" => 1e6,
        "g" => 1e9,
        "t" => 1e12,
        _ => return None,
    };
    num.parse::<f64>().ok().map(|v| v * scale)
}

/// Parses a schematic: one device per line, `name kind net... key=value...`
/// with SI suffixes. `*` starts a comment line, lines starting with `.` are
/// ignored.
pub fn parse_schematic(text: &str) -> Result<Netlist, VerifyError> {
    let mut devices: Vec<DeviceInstance> = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |message: String| VerifyError::ParseError { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') || line.starts_with('.') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let name = tokens.next().expect("non-empty line");
        let kind = tokens.next().ok_or_else(|| err(format!("device `{name}` has no kind")))?;
        let family = generator_spec(kind)
            .map(|s| s.family)
            .ok_or_else(|| err(format!("unknown device kind `{kind}`")))?;
        if !seen.insert(name.to_string()) {
            return Err(err(format!("duplicate device `{name}`")));
        }
        let order = pin_order(family);
        let mut nets = Vec::new();
        let mut params = BTreeMap::new();
        for tok in tokens {
            match tok.split_once('=') {
                Some((k, v)) => {
                    let value = parse_si(v).ok_or_else(|| err(format!("bad value `{v}`")))?;
                    params.insert(k.to_ascii_lowercase(), value);
                }
                None if params.is_empty() => nets.push(tok.to_string()),
                None => return Err(err(format!("net `{tok}` after parameters"))),
            }
        }
        if nets.len() != order.len() {
            return Err(err(format!("`{name}` needs {} nets, got {}", order.len(), nets.len())));
        }
        devices.push(DeviceInstance {
            name: name.to_string(),
            kind: kind.to_string(),
            pins: order.iter().map(|p| p.to_string()).zip(nets).collect(),
            params,
        });
    }
    let nets: BTreeSet<String> = devices.iter().flat_map(|d| d.pins.values().cloned()).collect();
    Ok(Netlist {
        devices,
        nets: nets.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceMismatch {
    pub name: String,
    pub layout_kind: Option<String>,
    pub schematic_kind: Option<String>,
}

/// A layout net that joins several schematic nets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShort {
    pub layout_net: String,
    pub schematic_nets: Vec<String>,
}

/// A schematic net split over several layout nets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentedNode {
    pub schematic_net: String,
    pub layout_nets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamMismatch {
    pub layout_device: String,
    pub schematic_device: String,
    pub param: String,
    pub layout: f64,
    pub schematic: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LvsReport {
    pub clean: bool,
    /// Layout and schematic have the same connectivity up to renaming.
    pub isomorphic: bool,
    /// Layout device to schematic device, when isomorphic.
    pub device_map: BTreeMap<String, String>,
    pub net_map: BTreeMap<String, String>,
    pub device_mismatches: Vec<DeviceMismatch>,
    pub net_shorts: Vec<NetShort>,
    pub fragmented_nodes: Vec<FragmentedNode>,
    pub param_mismatches: Vec<ParamMismatch>,
}

impl LvsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for LvsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LVS {}", if self.clean { "CLEAN" } else { "MISMATCH" })?;
        writeln!(f, "isomorphic: {}", self.isomorphic)?;
        for d in &self.device_mismatches {
            writeln!(
                f,
                "device {}: layout {} schematic {}",
                d.name,
                d.layout_kind.as_deref().unwrap_or("-"),
                d.schematic_kind.as_deref().unwrap_or("-")
            )?;
        }
        for s in &self.net_shorts {
            writeln!(f, "short: layout net {} joins {}", s.layout_net, s.schematic_nets.join(", "))?;
        }
        for n in &self.fragmented_nodes {
            writeln!(f, "open: schematic net {} split into {}", n.schematic_net, n.layout_nets.join(", "))?;
        }
        for p in &self.param_mismatches {
            writeln!(
                f,
                "param {} {}/{}: layout {:e} schematic {:e}",
                p.param, p.layout_device, p.schematic_device, p.layout, p.schematic
            )?;
        }
        Ok(())
    }
}

fn params_agree(a: &DeviceInstance, b: &DeviceInstance) -> Vec<(String, f64, f64)> {
    a.params
        .iter()
        .filter_map(|(k, &va)| {
            let vb = *b.params.get(k)?;
            let tol = PARAM_RTOL * va.abs().max(vb.abs());
            ((va - vb).abs() > tol).then(|| (k.clone(), va, vb))
        })
        .collect()
}

fn pin_class(kind: &str, pin: &str) -> String {
    match (generator_spec(kind).map(|s| s.family), pin) {
        (Some(DeviceFamily::Mos), "S" | "D") => "SD".into(),
        (Some(DeviceFamily::Resistor), _) => "T".into(),
        _ => pin.to_string(),
    }
}

/// Device/net incidence graph. Devices come first, then nets.
struct Graph<'a> {
    netlist: &'a Netlist,
    nets: Vec<String>,
    adj: Vec<Vec<(String, usize)>>,
    init: Vec<String>,
}

impl<'a> Graph<'a> {
    fn new(netlist: &'a Netlist) -> Self {
        let nd = netlist.devices.len();
        let nets: Vec<String> = netlist
            .devices
            .iter()
            .flat_map(|d| d.pins.values().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let net_idx: HashMap<&str, usize> = nets.iter().enumerate().map(|(i, n)| (n.as_str(), nd + i)).collect();
        let mut adj = vec![Vec::new(); nd + nets.len()];
        let mut init = Vec::with_capacity(nd + nets.len());
        for (i, d) in netlist.devices.iter().enumerate() {
            init.push(format!("dev:{}", d.kind));
            for (pin, net) in &d.pins {
                let class = pin_class(&d.kind, pin);
                let j = net_idx[net.as_str()];
                adj[i].push((class.clone(), j));
                adj[j].push((class, i));
            }
        }
        init.extend(std::iter::repeat_n("net".to_string(), nets.len()));
        Self { netlist, nets, adj, init }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }
}

/// Refines both colorings jointly until the partition is stable.
fn refine(ga: &Graph, gb: &Graph, ca: &mut Vec<usize>, cb: &mut Vec<usize>) {
    let mut classes = count_classes(ca, cb);
    loop {
        let sa: Vec<_> = (0..ga.len()).map(|v| sig(ga, ca, v)).collect();
        let sb: Vec<_> = (0..gb.len()).map(|v| sig(gb, cb, v)).collect();
        let mut all: Vec<_> = sa.iter().chain(sb.iter()).cloned().collect();
        all.sort();
        all.dedup();
        let id = |s: &(usize, Vec<(&str, usize)>)| all.binary_search(s).expect("signature present");
        *ca = sa.iter().map(id).collect();
        *cb = sb.iter().map(id).collect();
        let now = count_classes(ca, cb);
        if now == classes {
            return;
        }
        classes = now;
    }
}

fn sig<'g>(g: &'g Graph, c: &[usize], v: usize) -> (usize, Vec<(&'g str, usize)>) {
    let mut n: Vec<(&str, usize)> = g.adj[v].iter().map(|(l, u)| (l.as_str(), c[*u])).collect();
    n.sort_unstable();
    (c[v], n)
}

fn count_classes(ca: &[usize], cb: &[usize]) -> usize {
    ca.iter().chain(cb).collect::<BTreeSet<_>>().len()
}

fn histogram(c: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &x in c {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

struct Search<'a> {
    ga: &'a Graph<'a>,
    gb: &'a Graph<'a>,
    require_params: bool,
    budget: usize,
}

impl Search<'_> {
    fn run(&mut self, mut ca: Vec<usize>, mut cb: Vec<usize>) -> Option<Vec<usize>> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        refine(self.ga, self.gb, &mut ca, &mut cb);
        let (ha, hb) = (histogram(&ca), histogram(&cb));
        if ha != hb {
            return None;
        }
        let Some((&color, _)) = ha.iter().filter(|(_, &n)| n > 1).min_by_key(|(_, &n)| n) else {
            let pos_b: HashMap<usize, usize> = cb.iter().enumerate().map(|(v, &c)| (c, v)).collect();
            let map: Vec<usize> = ca.iter().map(|c| pos_b[c]).collect();
            return self.accept(&map).then_some(map);
        };
        let a = ca.iter().position(|&c| c == color).expect("class member");
        let fresh = ha.keys().last().expect("non-empty") + 1;
        for b in (0..cb.len()).filter(|&v| cb[v] == color) {
            let (mut na, mut nb) = (ca.clone(), cb.clone());
            na[a] = fresh;
            nb[b] = fresh;
            if let Some(m) = self.run(na, nb) {
                return Some(m);
            }
        }
        None
    }

    fn accept(&self, map: &[usize]) -> bool {
        for v in 0..self.ga.len() {
            let mut ea: Vec<(&str, usize)> = self.ga.adj[v].iter().map(|(l, u)| (l.as_str(), map[*u])).collect();
            let mut eb: Vec<(&str, usize)> = self.gb.adj[map[v]].iter().map(|(l, u)| (l.as_str(), *u)).collect();
            ea.sort_unstable();
            eb.sort_unstable();
            if ea != eb {
                return false;
            }
        }
        if self.require_params {
            let nd = self.ga.netlist.devices.len();
            for (v, dev) in self.ga.netlist.devices.iter().enumerate() {
                if map[v] >= nd || !params_agree(dev, &self.gb.netlist.devices[map[v]]).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

fn isomorphism(ga: &Graph, gb: &Graph, require_params: bool) -> Option<Vec<usize>> {
    if ga.len() != gb.len() || ga.netlist.devices.len() != gb.netlist.devices.len() {
        return None;
    }
    let mut keys: Vec<&String> = ga.init.iter().chain(&gb.init).collect();
    keys.sort();
    keys.dedup();
    let id = |s: &String| keys.binary_search(&s).expect("key present");
    let ca = ga.init.iter().map(id).collect();
    let cb = gb.init.iter().map(id).collect();
    Search {
        ga,
        gb,
        require_params,
        budget: 200_000,
    }
    .run(ca, cb)
}

/// Compares an extracted layout netlist against a schematic.
///
/// Connectivity is compared up to renaming of devices and nets. When the
/// two do not match, devices and nets are paired by name to report
/// mismatching devices, shorts and opens.
pub fn compare_netlists(layout: &Netlist, schematic: &Netlist) -> LvsReport {
    let ga = Graph::new(layout);
    let gb = Graph::new(schematic);
    let nd = layout.devices.len();
    let exact = isomorphism(&ga, &gb, true);
    let mapping = exact.clone().or_else(|| isomorphism(&ga, &gb, false));
    let mut report = LvsReport {
        isomorphic: mapping.is_some(),
        ..Default::default()
    };
    if let Some(map) = &mapping {
        for (a, &m) in layout.devices.iter().zip(map.iter()) {
            let b = &schematic.devices[m];
            report.device_map.insert(a.name.clone(), b.name.clone());
            for (param, la, sb) in params_agree(a, b) {
                report.param_mismatches.push(ParamMismatch {
                    layout_device: a.name.clone(),
                    schematic_device: b.name.clone(),
                    param,
                    layout: la,
                    schematic: sb,
                });
            }
        }
        for (i, net) in ga.nets.iter().enumerate() {
            report.net_map.insert(net.clone(), gb.nets[map[nd + i] - schematic.devices.len()].clone());
        }
        report.clean = exact.is_some();
        return report;
    }
    name_based(layout, schematic, &mut report);
    report
}

fn name_based(layout: &Netlist, schematic: &Netlist, report: &mut LvsReport) {
    let mut l2s: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut s2l: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for sd in &schematic.devices {
        let Some(ld) = layout.device(&sd.name) else {
            report.device_mismatches.push(DeviceMismatch {
                name: sd.name.clone(),
                layout_kind: None,
                schematic_kind: Some(sd.kind.clone()),
            });
            continue;
        };
        if ld.kind != sd.kind {
            report.device_mismatches.push(DeviceMismatch {
                name: sd.name.clone(),
                layout_kind: Some(ld.kind.clone()),
                schematic_kind: Some(sd.kind.clone()),
            });
            continue;
        }
        for (param, la, sb) in params_agree(ld, sd) {
            report.param_mismatches.push(ParamMismatch {
                layout_device: ld.name.clone(),
                schematic_device: sd.name.clone(),
                param,
                layout: la,
                schematic: sb,
            });
        }
        // Source and drain are interchangeable; pick the better pairing.
        let direct = |p: &str| p.to_string();
        let swapped = |p: &str| match p {
            "S" => "D".to_string(),
            "D" => "S".to_string(),
            other => other.to_string(),
        };
        let score = |f: &dyn Fn(&str) -> String| {
            sd.pins
                .iter()
                .filter(|(p, n)| ld.pins.get(&f(p)) == Some(n))
                .count()
        };
        let mos = generator_spec(&sd.kind).is_some_and(|s| s.family == DeviceFamily::Mos);
        let use_swap = mos && score(&swapped) > score(&direct);
        for (pin, snet) in &sd.pins {
            let lpin = if use_swap { swapped(pin) } else { direct(pin) };
            if let Some(lnet) = ld.pins.get(&lpin) {
                l2s.entry(lnet.clone()).or_default().insert(snet.clone());
                s2l.entry(snet.clone()).or_default().insert(lnet.clone());
            }
        }
    }
    for ld in &layout.devices {
        if schematic.device(&ld.name).is_none() {
            report.device_mismatches.push(DeviceMismatch {
                name: ld.name.clone(),
                layout_kind: Some(ld.kind.clone()),
                schematic_kind: None,
            });
        }
    }
    for (lnet, snets) in l2s {
        if snets.len() > 1 {
            report.net_shorts.push(NetShort {
                layout_net: lnet,
                schematic_nets: snets.into_iter().collect(),
            });
        }
    }
    for (snet, lnets) in s2l {
        if lnets.len() > 1 {
            report.fragmented_nodes.push(FragmentedNode {
                schematic_net: snet,
                layout_nets: lnets.into_iter().collect(),
            });
        }
    }
    report.device_mismatches.sort_by(|a, b| a.name.cmp(&b.name));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_suffixes() {
        assert_eq!(parse_si("2u"), Some(2e-6));
        assert_eq!(parse_si("1.5k"), Some(1500.0));
        assert_eq!(parse_si("3meg"), Some(3e6));
        assert_eq!(parse_si("1e-6"), Some(1e-6));
        assert_eq!(parse_si("4"), Some(4.0));
        assert_eq!(parse_si("2x"), None);
    }

    #[test]
    fn parse_and_errors() {
        let n = parse_schematic("* amp\nM1 nmos5 g s d b l=0.5u w=2u nf=1 m=1\nR1 respoly a b l=20u w=1u\n.end\n").unwrap();
        assert_eq!(n.devices.len(), 2);
        assert_eq!(n.devices[0].pins["D"], "d");
        assert_eq!(n.nets, vec!["a", "b", "d", "g", "s"]);
        let dup = parse_schematic("M1 nmos5 g s d b\nM1 nmos5 g s d b\n");
        assert_eq!(
            dup,
            Err(VerifyError::ParseError {
                line: 2,
                message: "duplicate device `M1`".into()
            })
        );
        assert!(parse_schematic("M1 nmos5 g s d\n").is_err());
        assert!(parse_schematic("Q1 npn c b e\n").is_err());
    }

    #[test]
    fn renamed_netlists_are_isomorphic() {
        let a = parse_schematic("M1 nmos5 g x y b w=1u\nM2 nmos5 g y z b w=2u\n").unwrap();
        let b = parse_schematic("MB nmos5 G Q P B w=2u\nMA nmos5 G R Q B w=1u\n").unwrap();
        let r = compare_netlists(&a, &b);
        assert!(r.clean, "{r}");
        assert_eq!(r.device_map["M1"], "MA");
        assert_eq!(r.net_map["y"], "Q");
    }

    #[test]
    fn source_drain_swap_is_clean() {
        let a = parse_schematic("M1 nmos5 g s d b\n").unwrap();
        let b = parse_schematic("M1 nmos5 g d s b\n").unwrap();
        assert!(compare_netlists(&a, &b).clean);
    }

    #[test]
    fn reports_shorts_opens_and_params() {
        let sch = parse_schematic("M1 nmos5 g a x b w=1u\nM2 nmos5 g x c b w=1u\n").unwrap();
        let short = parse_schematic("M1 nmos5 g a x b w=1u\nM2 nmos5 g x a b w=1u\n").unwrap();
        let r = compare_netlists(&short, &sch);
        assert!(!r.clean && !r.isomorphic);
        assert_eq!(r.net_shorts.len(), 1);
        let open = parse_schematic("M1 nmos5 g a x b w=1u\nM2 nmos5 g x2 c b w=1u\n").unwrap();
        let r = compare_netlists(&open, &sch);
        assert_eq!(r.fragmented_nodes[0].schematic_net, "x");
        let wide = parse_schematic("M1 nmos5 g a x b w=1u\nM2 nmos5 g x c b w=3u\n").unwrap();
        let r = compare_netlists(&wide, &sch);
        assert!(r.isomorphic && !r.clean);
        assert_eq!(r.param_mismatches.len(), 1);
    }

    #[test]
    fn spice_round_trip() {
        let n = parse_schematic("M1 pmos20t g s d b l=2u w=5u nf=1 m=1\nC1 capmim p m l=10u w=10u\n").unwrap();
        assert_eq!(parse_schematic(&n.to_spice()).unwrap(), n);
    }
}
