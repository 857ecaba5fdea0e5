// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use hvcell::interact::PlacedInstance;
use hvcell::pcell::{evaluate_params, CellLayout, DeviceParams};
use hvcell::{generate, Coord, Design, TechnologyData, Transform};

/// Default cell of `device` with `fingers` gate fingers.
pub fn cell(device: &str, fingers: u32, tech: &TechnologyData) -> CellLayout {
    let mut p = DeviceParams::defaults(device).expect("known device");
    p.fingers = fingers;
    p.wtot = p.w * fingers as Coord;
    generate(&evaluate_params(&p, tech).expect("valid parameters"), tech).expect("feasible cell")
}

/// `n` unrouted copies of a two-finger nmos in a row, each on its own nets.
pub fn row(n: usize, tech: &TechnologyData) -> Design {
    let c = cell("nmos5", 2, tech);
    let pitch = c.bbox().width() + 2_000;
    let instances = (0..n)
        .map(|k| {
            let id = format!("M{k}");
            let nets = ["G", "S", "D", "B"].map(|p| (p, format!("{p}{k}")));
            PlacedInstance::new(id, c.clone(), Transform::translate(k as Coord * pitch, 0)).with_nets(nets)
        })
        .collect();
    Design { instances, wires: vec![] }
}
