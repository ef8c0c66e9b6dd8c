//! The cave skeleton: a tree of nodes grown on circles around their parents,
//! optionally stacked into several layers joined by slope-bounded shafts.

mod generate;
mod layers;
mod manifest;

use std::collections::{BTreeSet, VecDeque};

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{angular_distribution, apply_elevation, expand_node, generate_graph};
pub use layers::connect_layers;
pub use manifest::{graph_to_json, json_to_graph, GraphManifest, GRAPH_MANIFEST_VERSION};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub edges: BTreeSet<NodeId>,
    pub coordinates: DVec3,
    pub radius: f64,
    pub active: bool,
    pub layer: u32,
    /// Intermediate node of an inter-layer connection.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub connector: bool,
}

impl Node {
    pub fn planar(&self) -> DVec2 {
        self.coordinates.truncate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub layers: u32,
    pub seed: u64,
}

/// How spawn probability is spread around a node's circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// Wrapped Gaussian around the direction continuing away from the parent.
    Gaussian { sigma_deg: f64 },
    /// Periodic noise seeded per node.
    Perlin { frequency: f64 },
    /// `(1 - blend) * gaussian + blend * perlin`.
    Hybrid {
        sigma_deg: f64,
        frequency: f64,
        blend: f64,
    },
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution::Hybrid {
            sigma_deg: 40.0,
            frequency: 3.0,
            blend: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub node_count_target: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub children_min: u32,
    pub children_max: u32,
    pub branch_death_prob: f64,
    pub forbidden_half_angle_deg: f64,
    pub distribution: Distribution,
    pub layers: u32,
    pub layer_spacing: f64,
    pub max_interconnect_angle_deg: f64,
    pub interconnect_per_layer: u32,
    pub elevation_amplitude: f64,
    pub elevation_frequency: f64,
    pub seed: u64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            node_count_target: 50,
            radius_min: 4.0,
            radius_max: 12.0,
            children_min: 1,
            children_max: 3,
            branch_death_prob: 0.15,
            forbidden_half_angle_deg: 60.0,
            distribution: Distribution::default(),
            layers: 1,
            layer_spacing: 15.0,
            max_interconnect_angle_deg: 35.0,
            interconnect_per_layer: 2,
            elevation_amplitude: 1.5,
            elevation_frequency: 0.02,
            seed: 0,
        }
    }
}

impl GraphConfig {
    /// Checks every range constraint; errors are keyed under `graph.`.
    pub fn validate(&self) -> Result<()> {
        let err = |k: &str, c: &str| Err(Error::config(format!("graph.{k}"), c));
        if self.node_count_target < 1 {
            return err("node_count_target", "must be >= 1");
        }
        if !(self.radius_min.is_finite() && self.radius_min > 0.0) {
            return err("radius_min", "must be finite and > 0");
        }
        if !self.radius_max.is_finite() {
            return err("radius_max", "must be finite");
        }
        if self.radius_min > self.radius_max {
            return Err(Error::config(
                "graph.radius_min, graph.radius_max",
                format!(
                    "radius_min ({}) must be <= radius_max ({})",
                    self.radius_min, self.radius_max
                ),
            ));
        }
        if self.children_min > self.children_max {
            return Err(Error::config(
                "graph.children_min, graph.children_max",
                "children_min must be <= children_max",
            ));
        }
        if self.children_max == 0 && self.node_count_target > self.layers as usize {
            return err("children_max", "must be >= 1 to grow past the layer roots");
        }
        if !(0.0..=1.0).contains(&self.branch_death_prob) {
            return err("branch_death_prob", "must lie in [0, 1]");
        }
        if !(self.forbidden_half_angle_deg > 0.0 && self.forbidden_half_angle_deg < 180.0) {
            return err("forbidden_half_angle_deg", "must lie in (0, 180)");
        }
        match self.distribution {
            Distribution::Gaussian { sigma_deg } => check_sigma(sigma_deg)?,
            Distribution::Perlin { frequency } => check_frequency(frequency)?,
            Distribution::Hybrid {
                sigma_deg,
                frequency,
                blend,
            } => {
                check_sigma(sigma_deg)?;
                check_frequency(frequency)?;
                if !(0.0..=1.0).contains(&blend) {
                    return err("distribution.blend", "must lie in [0, 1]");
                }
            }
        }
        if self.layers < 1 {
            return err("layers", "must be >= 1");
        }
        if self.node_count_target < self.layers as usize {
            return Err(Error::config(
                "graph.node_count_target, graph.layers",
                "need at least one node per layer",
            ));
        }
        if !(self.elevation_amplitude.is_finite() && self.elevation_amplitude >= 0.0) {
            return err("elevation_amplitude", "must be finite and >= 0");
        }
        if !(self.elevation_frequency.is_finite() && self.elevation_frequency > 0.0) {
            return err("elevation_frequency", "must be finite and > 0");
        }
        if !(self.layer_spacing.is_finite() && self.layer_spacing > 0.0) {
            return err("layer_spacing", "must be finite and > 0");
        }
        if self.layers > 1 {
            if !(self.max_interconnect_angle_deg > 0.0 && self.max_interconnect_angle_deg <= 90.0) {
                return err("max_interconnect_angle_deg", "must lie in (0, 90]");
            }
            if self.interconnect_per_layer < 1 {
                return err("interconnect_per_layer", "must be >= 1");
            }
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::config("graph.distribution.sigma_deg", "must be finite and > 0"))
    }
}

fn check_frequency(f: f64) -> Result<()> {
    if f.is_finite() && f > 0.0 {
        Ok(())
    } else {
        Err(Error::config("graph.distribution.frequency", "must be finite and > 0"))
    }
}

impl Graph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Undirected edges as `(low, high)` pairs in ascending order.
    pub fn edge_list(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for n in &self.nodes {
            for &e in n.edges.range(n.id + 1..) {
                out.push((n.id, e));
            }
        }
        out
    }

    pub(crate) fn link(&mut self, a: NodeId, b: NodeId) {
        self.nodes[a].edges.insert(b);
        self.nodes[b].edges.insert(a);
    }

    /// Number of connected components over `edges`.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut components = 0;
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for &e in &self.nodes[n].edges {
                    if !seen[e] {
                        seen[e] = true;
                        queue.push_back(e);
                    }
                }
            }
        }
        components
    }

    /// Axis-aligned bounds of node centres.
    pub fn bounds(&self) -> (DVec3, DVec3) {
        self.nodes.iter().fold(
            (DVec3::splat(f64::INFINITY), DVec3::splat(f64::NEG_INFINITY)),
            |(lo, hi), n| (lo.min(n.coordinates), hi.max(n.coordinates)),
        )
    }

    pub fn max_radius(&self) -> f64 {
        self.nodes.iter().map(|n| n.radius).fold(0.0, f64::max)
    }

    /// Checks structural invariants: dense ids, symmetric edges without
    /// self-loops, parent links that are edges and acyclic, a single origin
    /// at (0,0,0) as node 0, and one connected component.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Validation("graph has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Validation(format!(
                    "nodes[{i}] has id {}; ids must equal their position",
                    node.id
                )));
            }
            if !node.coordinates.is_finite() {
                return Err(Error::Validation(format!("node {i} has non-finite coordinates")));
            }
            if !(node.radius.is_finite() && node.radius > 0.0) {
                return Err(Error::Validation(format!("node {i} radius must be > 0")));
            }
            for &e in &node.edges {
                if e == i {
                    return Err(Error::Validation(format!("node {i} has a self-edge")));
                }
                if e >= n {
                    return Err(Error::Validation(format!("node {i} has edge to unknown node {e}")));
                }
                if !self.nodes[e].edges.contains(&i) {
                    return Err(Error::Validation(format!(
                        "asymmetric edge: {e} in edges({i}) but {i} not in edges({e})"
                    )));
                }
            }
            match node.parent {
                Some(p) if p >= n => {
                    return Err(Error::Validation(format!("node {i} has dangling parent {p}")));
                }
                Some(p) if !node.edges.contains(&p) => {
                    return Err(Error::Validation(format!(
                        "node {i} parent {p} is not among its edges"
                    )));
                }
                Some(_) => {}
                None if i == 0 => {}
                None if node.layer == 0 => {
                    return Err(Error::Validation(format!(
                        "node {i} has no parent but only node 0 may be the origin"
                    )));
                }
                None => {}
            }
        }
        let origin = &self.nodes[0];
        if origin.parent.is_some() || origin.coordinates != DVec3::ZERO {
            return Err(Error::Validation(
                "node 0 must be the origin: no parent, coordinates (0,0,0)".into(),
            ));
        }
        // Parent chains must terminate at a root.
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = Some(start);
            while let Some(c) = cur {
                match state[c] {
                    2 => break,
                    1 => {
                        return Err(Error::Validation(format!(
                            "parent links form a cycle through node {c}"
                        )))
                    }
                    _ => {
                        state[c] = 1;
                        chain.push(c);
                        cur = self.nodes[c].parent;
                    }
                }
            }
            for c in chain {
                state[c] = 2;
            }
        }
        if self.component_count() != 1 {
            return Err(Error::Validation("graph is not connected".into()));
        }
        Ok(())
    }
}

/// Slope of a segment in degrees above the horizontal.
pub fn slope_deg(a: DVec3, b: DVec3) -> f64 {
    let run = a.truncate().distance(b.truncate());
    (b.z - a.z).abs().atan2(run).to_degrees()
}
