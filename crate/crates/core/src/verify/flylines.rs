// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::techdb::TechnologyData;

use super::lvs::extract_components;
use super::Design;

/// Straight connection hint between two unconnected pieces of a net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flyline {
    pub net: String,
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Prim's minimum spanning tree over points; returns index pairs.
pub fn minimum_spanning_tree(points: &[(f64, f64)]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let d = |a: usize, b: usize| (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    in_tree[0] = true;
    for (v, b) in best.iter_mut().enumerate().skip(1) {
        *b = (d(0, v), 0);
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .expect("vertex left");
        in_tree[v] = true;
        edges.push((best[v].1, v));
        for u in 0..n {
            if !in_tree[u] {
                let du = d(v, u);
                if du < best[u].0 {
                    best[u] = (du, v);
                }
            }
        }
    }
    edges
}

/// Flylines joining the disconnected fragments of every named net.
pub fn compute_flylines(design: &Design, tech: &TechnologyData) -> Vec<Flyline> {
    let ex = extract_components(design, tech);
    let mut fragments: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for c in &ex.components {
        for label in &c.labels {
            fragments.entry(label.as_str()).or_default().push(c.centroid);
        }
    }
    let mut out = Vec::new();
    for (net, pts) in fragments {
        for (a, b) in minimum_spanning_tree(&pts) {
            out.push(Flyline {
                net: net.to_string(),
                from: pts[a],
                to: pts[b],
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_on_a_line() {
        let pts = [(0.0, 0.0), (10.0, 0.0), (3.0, 0.0)];
        let mut e = minimum_spanning_tree(&pts);
        e.sort();
        assert_eq!(e, vec![(0, 2), (2, 1)]);
        assert!(minimum_spanning_tree(&pts[..1]).is_empty());
    }
}
