use std::collections::BTreeSet;

use glam::{DVec2, DVec3};
use rand::Rng;

use super::{slope_deg, Graph, GraphConfig, Node, NodeId};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Joins every pair of adjacent layers with `interconnect_per_layer` shafts.
///
/// Each shaft starts at a random node of the upper layer and ends at the
/// horizontally nearest lower-layer node it can reach in a straight line
/// without exceeding `max_interconnect_angle_deg`. When no such node exists
/// the shaft descends to the horizontally nearest node along a two-leg ramp
/// whose legs slope at exactly the maximum angle. Intermediate nodes are
/// inactive connectors with radii interpolated between the endpoints.
pub fn connect_layers(mut graph: Graph, config: &GraphConfig, rng: &mut StreamRng) -> Result<Graph> {
    if config.layers < 2 || graph.layers < 2 {
        return Err(Error::Contract("connecting layers needs at least two layers".into()));
    }
    let max_angle = config.max_interconnect_angle_deg;
    for upper in 0..graph.layers - 1 {
        let upper_nodes = layer_members(&graph, upper);
        let lower_nodes = layer_members(&graph, upper + 1);
        if upper_nodes.is_empty() || lower_nodes.is_empty() {
            return Err(Error::Contract(format!(
                "layers {upper} and {} must both have nodes",
                upper + 1
            )));
        }
        for _ in 0..config.interconnect_per_layer {
            let from = upper_nodes[rng.random_range(0..upper_nodes.len())];
            let a = graph.nodes[from].coordinates;
            let run = |id: &NodeId| a.truncate().distance(graph.nodes[*id].planar());
            let nearest = |ids: &mut dyn Iterator<Item = NodeId>| {
                ids.min_by(|x, y| run(x).total_cmp(&run(y)).then(x.cmp(y)))
            };
            let admissible = nearest(
                &mut lower_nodes
                    .iter()
                    .copied()
                    .filter(|id| slope_deg(a, graph.nodes[*id].coordinates) <= max_angle),
            );
            let path = match admissible {
                Some(to) => {
                    let b = graph.nodes[to].coordinates;
                    let steps = (config.layer_spacing / config.radius_max).ceil().max(1.0) as usize + 1;
                    (to, (1..steps).map(|k| a.lerp(b, k as f64 / steps as f64)).collect::<Vec<_>>())
                }
                None => {
                    let to = nearest(&mut lower_nodes.iter().copied()).expect("lower layer is non-empty");
                    let b = graph.nodes[to].coordinates;
                    (to, ramp(a, b, max_angle, config.radius_max, rng))
                }
            };
            insert_chain(&mut graph, from, path.0, &path.1, upper);
        }
    }
    Ok(graph)
}

fn layer_members(graph: &Graph, layer: u32) -> Vec<NodeId> {
    graph
        .nodes
        .iter()
        .filter(|n| n.layer == layer && !n.connector)
        .map(|n| n.id)
        .collect()
}

/// Interior points of a two-leg descent from `a` to `b` whose legs both slope
/// at `max_angle_deg`. The turning point lies on the perpendicular bisector of
/// the planar segment, on a random side.
fn ramp(a: DVec3, b: DVec3, max_angle_deg: f64, max_step: f64, rng: &mut StreamRng) -> Vec<DVec3> {
    let drop = a.z - b.z;
    let grade = max_angle_deg.to_radians().tan();
    let path_len = drop.abs() / grade;
    let (pa, pb) = (a.truncate(), b.truncate());
    let d = pa.distance(pb);
    let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let perp = match (pb - pa).try_normalize() {
        Some(dir) => dir.perp() * side,
        None => {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            DVec2::new(t.cos(), t.sin())
        }
    };
    let half = 0.5 * path_len;
    let offset = (half * half - 0.25 * d * d).max(0.0).sqrt();
    let turn_planar = (pa + pb) * 0.5 + perp * offset;
    let turn = DVec3::new(turn_planar.x, turn_planar.y, a.z - 0.5 * drop);

    let mut points = Vec::new();
    for (start, end) in [(a, turn), (turn, b)] {
        let leg = start.truncate().distance(end.truncate());
        let steps = (leg / max_step).ceil().max(1.0) as usize;
        for k in 1..=steps {
            points.push(start.lerp(end, k as f64 / steps as f64));
        }
    }
    points.pop(); // the final point is `b` itself
    points
}

fn insert_chain(graph: &mut Graph, from: NodeId, to: NodeId, points: &[DVec3], layer: u32) {
    let (a, b) = (graph.nodes[from].coordinates, graph.nodes[to].coordinates);
    let (ra, rb) = (graph.nodes[from].radius, graph.nodes[to].radius);
    // Radii follow cumulative path length.
    let mut cumulative = Vec::with_capacity(points.len());
    let mut total = 0.0;
    let mut prev = a;
    for p in points {
        total += prev.distance(*p);
        cumulative.push(total);
        prev = *p;
    }
    total += prev.distance(b);

    let mut last = from;
    for (p, s) in points.iter().zip(cumulative) {
        let t = if total > 0.0 { s / total } else { 0.5 };
        let id = graph.nodes.len();
        graph.nodes.push(Node {
            id,
            parent: Some(last),
            edges: BTreeSet::new(),
            coordinates: *p,
            radius: ra + (rb - ra) * t,
            active: false,
            layer,
            connector: true,
        });
        graph.link(last, id);
        last = id;
    }
    graph.link(last, to);
}
