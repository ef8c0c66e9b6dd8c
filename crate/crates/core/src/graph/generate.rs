use std::collections::{BTreeSet, VecDeque};

use glam::{DVec2, DVec3};
use rand::Rng;

use super::{connect_layers, Distribution, Graph, GraphConfig, Node, NodeId};
use crate::error::{Error, Result};
use crate::noise::{
    gaussian_weights, hybrid_weights, perlin_weights, sample_section, AngularWeights, Fractal,
    NoiseParams,
};
use crate::rng::{self, StreamRng};

/// Grows the skeleton described by `config`.
///
/// Each layer grows breadth-first from its root until it holds its share of
/// `node_count_target`; elevation is applied next and, for several layers,
/// adjacent layers are joined last.
pub fn generate_graph(config: &GraphConfig) -> Result<Graph> {
    config.validate()?;
    let mut graph = Graph {
        nodes: Vec::with_capacity(config.node_count_target + 8),
        layers: config.layers,
        seed: config.seed,
    };
    let layers = config.layers as usize;
    for layer in 0..config.layers {
        let share = config.node_count_target / layers
            + usize::from((layer as usize) < config.node_count_target % layers);
        grow_layer(&mut graph, config, layer, share)?;
    }
    let graph = apply_elevation(graph, config)?;
    if config.layers > 1 {
        let mut rng = rng::stream(config.seed, "graph-connect", 0);
        connect_layers(graph, config, &mut rng)
    } else {
        Ok(graph)
    }
}

fn grow_layer(graph: &mut Graph, config: &GraphConfig, layer: u32, share: usize) -> Result<()> {
    let mut rng = rng::stream(config.seed, "graph-layer", layer as u64);
    let root = graph.nodes.len();
    let z = -(layer as f64) * config.layer_spacing;
    let radius = rng.random_range(config.radius_min..=config.radius_max);
    graph.nodes.push(Node {
        id: root,
        parent: None,
        edges: BTreeSet::new(),
        coordinates: DVec3::new(0.0, 0.0, z),
        radius,
        active: true,
        layer,
        connector: false,
    });

    let mut count = 1;
    let mut frontier = VecDeque::from([root]);
    while count < share {
        let Some(id) = frontier.pop_front() else {
            // Every branch died: revive a uniformly chosen node of this layer.
            let revived = rng.random_range(root..graph.nodes.len());
            graph.nodes[revived].active = true;
            frontier.push_back(revived);
            continue;
        };
        if !graph.nodes[id].active {
            continue;
        }
        let children = expand_node(graph, id, config, &mut rng)?;
        count += children.len();
        frontier.extend(children.into_iter().filter(|c| graph.nodes[*c].active));
    }
    Ok(())
}

/// Unit vector in the layer plane from `node` towards its parent.
fn back_direction(graph: &Graph, node: &Node) -> Option<DVec2> {
    let parent = graph.nodes.get(node.parent?)?;
    (parent.planar() - node.planar()).try_normalize()
}

/// Spawns the children of an active node on circles around it.
pub fn expand_node(
    graph: &mut Graph,
    node_id: NodeId,
    config: &GraphConfig,
    rng: &mut StreamRng,
) -> Result<Vec<NodeId>> {
    let node = graph
        .nodes
        .get(node_id)
        .ok_or_else(|| Error::Contract(format!("node {node_id} does not exist")))?;
    if !node.active {
        return Err(Error::Contract(format!("node {node_id} is inactive")));
    }
    let k = rng.random_range(config.children_min..=config.children_max);
    let mut created = Vec::with_capacity(k as usize);
    if k > 0 {
        let weights = angular_distribution(node, back_direction(graph, node), config)?;
        let (centre, layer) = (node.coordinates, node.layer);
        for _ in 0..k {
            let step = rng.random_range(config.radius_min..=config.radius_max);
            let theta = (sample_section(&weights, rng)? as f64).to_radians();
            let alive = rng.random::<f64>() >= config.branch_death_prob;
            let id = graph.nodes.len();
            graph.nodes.push(Node {
                id,
                parent: Some(node_id),
                edges: BTreeSet::new(),
                coordinates: centre + DVec3::new(step * theta.cos(), step * theta.sin(), 0.0),
                radius: step,
                active: alive,
                layer,
                connector: false,
            });
            graph.link(node_id, id);
            created.push(id);
        }
    }
    graph.nodes[node_id].active = false;
    Ok(created)
}

/// Spawn weights around `node` with the sector facing its parent zeroed.
///
/// `parent_direction` points from the node towards its parent; roots pass
/// `None` and keep every section. The Gaussian component is centred on the
/// continuation away from the parent (for roots, a heading derived from the
/// seed and layer).
pub fn angular_distribution(
    node: &Node,
    parent_direction: Option<DVec2>,
    config: &GraphConfig,
) -> Result<AngularWeights> {
    let heading = match parent_direction {
        Some(back) => (-back.y).atan2(-back.x).to_degrees(),
        None => (rng::subseed(config.seed, "root-heading", node.layer as u64) % 360) as f64,
    };
    let noise_seed = rng::subseed(config.seed, "angular", node.id as u64);
    let base = match config.distribution {
        Distribution::Gaussian { sigma_deg } => gaussian_weights(heading, sigma_deg)?,
        Distribution::Perlin { frequency } => perlin_weights(noise_seed, frequency)?,
        Distribution::Hybrid {
            sigma_deg,
            frequency,
            blend,
        } => hybrid_weights(
            &gaussian_weights(heading, sigma_deg)?,
            &perlin_weights(noise_seed, frequency)?,
            blend,
        )?,
    };
    match parent_direction {
        Some(back) => {
            if config.forbidden_half_angle_deg >= 180.0 {
                return Err(Error::DegenerateDistribution(
                    "forbidden sector covers the whole circle".into(),
                ));
            }
            base.forbid_sector(back.y.atan2(back.x).to_degrees(), config.forbidden_half_angle_deg)
        }
        None => Ok(base),
    }
}

/// Noise field driving the local elevation of `layer`.
fn elevation_field(config: &GraphConfig, layer: u32) -> Result<Fractal> {
    Fractal::new(NoiseParams {
        seed: rng::subseed(config.seed, "elevation", layer as u64),
        frequency: config.elevation_frequency,
        octaves: 2,
        lacunarity: 2.0,
        gain: 0.5,
    })
}

/// Lifts or lowers each node by planar noise times `elevation_amplitude`.
///
/// Connector nodes are left alone. With several layers the displacement is
/// clamped below half the layer spacing so layers keep their order.
pub fn apply_elevation(mut graph: Graph, config: &GraphConfig) -> Result<Graph> {
    if config.elevation_amplitude == 0.0 {
        return Ok(graph);
    }
    let limit = if graph.layers > 1 {
        0.5 * config.layer_spacing * (1.0 - 1e-6)
    } else {
        f64::INFINITY
    };
    let fields = (0..graph.layers)
        .map(|l| elevation_field(config, l))
        .collect::<Result<Vec<_>>>()?;
    for node in graph.nodes.iter_mut().filter(|n| !n.connector) {
        let Some(field) = fields.get(node.layer as usize) else {
            return Err(Error::Contract(format!(
                "node {} has layer {} but the graph has {} layers",
                node.id, node.layer, graph.layers
            )));
        };
        let p = DVec3::new(node.coordinates.x, node.coordinates.y, 0.0);
        let dz = (field.perlin(p) * config.elevation_amplitude).clamp(-limit, limit);
        node.coordinates.z += dz;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::slope_deg;

    fn cfg(seed: u64, target: usize) -> GraphConfig {
        GraphConfig {
            seed,
            node_count_target: target,
            ..Default::default()
        }
    }

    #[test]
    fn single_node_graph() {
        let g = generate_graph(&cfg(1, 1)).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.nodes[0].coordinates, DVec3::ZERO);
        assert!(g.nodes[0].edges.is_empty());
        assert!(g.nodes[0].parent.is_none());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_graph(&cfg(7, 60)).unwrap();
        let b = generate_graph(&cfg(7, 60)).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert_eq!(x.coordinates.to_array().map(f64::to_bits), y.coordinates.to_array().map(f64::to_bits));
        }
        assert_ne!(a, generate_graph(&cfg(8, 60)).unwrap());
    }

    #[test]
    fn node_count_bounds() {
        for seed in 0..30 {
            let c = cfg(seed, 40);
            let g = generate_graph(&c).unwrap();
            assert!(g.len() >= 40 && g.len() <= 40 + c.children_max as usize - 1, "{}", g.len());
            g.validate().unwrap();
        }
    }

    #[test]
    fn regrows_when_every_branch_dies() {
        let c = GraphConfig {
            branch_death_prob: 1.0,
            ..cfg(3, 30)
        };
        let g = generate_graph(&c).unwrap();
        assert!(g.len() >= 30);
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn expansion_without_children() {
        let c = GraphConfig {
            children_min: 0,
            children_max: 0,
            ..cfg(1, 1)
        };
        let mut g = generate_graph(&c).unwrap();
        g.nodes[0].active = true;
        let mut rng = rng::stream(1, "t", 0);
        assert!(expand_node(&mut g, 0, &c, &mut rng).unwrap().is_empty());
        assert!(!g.nodes[0].active);
        assert!(matches!(expand_node(&mut g, 0, &c, &mut rng), Err(Error::Contract(_))));
    }

    #[test]
    fn children_sit_on_their_circle() {
        let c = cfg(11, 200);
        let g = generate_graph(&GraphConfig { elevation_amplitude: 0.0, ..c }).unwrap();
        for n in &g.nodes[1..] {
            let p = g.node(n.parent.unwrap());
            assert!((n.planar().distance(p.planar()) - n.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn origin_keeps_all_sections() {
        let c = GraphConfig::default();
        let g = generate_graph(&cfg(2, 1)).unwrap();
        let w = angular_distribution(&g.nodes[0], None, &c).unwrap();
        assert!(w.as_slice().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn sector_facing_parent_is_zero() {
        let c = GraphConfig {
            forbidden_half_angle_deg: 60.0,
            ..Default::default()
        };
        let node = Node {
            id: 5,
            parent: Some(0),
            edges: BTreeSet::new(),
            coordinates: DVec3::new(10.0, 0.0, 0.0),
            radius: 5.0,
            active: true,
            layer: 0,
            connector: false,
        };
        let w = angular_distribution(&node, Some(DVec2::new(-1.0, 0.0)), &c).unwrap();
        for i in 120..=240 {
            assert_eq!(w.get(i), 0.0);
        }
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn elevation_identity_and_bounds() {
        let flat = GraphConfig {
            elevation_amplitude: 0.0,
            ..cfg(5, 80)
        };
        let g = generate_graph(&flat).unwrap();
        assert_eq!(apply_elevation(g.clone(), &flat).unwrap(), g);
        assert!(g.nodes.iter().all(|n| n.coordinates.z == 0.0));

        let bumpy = GraphConfig {
            elevation_amplitude: 3.0,
            ..flat.clone()
        };
        let lifted = apply_elevation(g.clone(), &bumpy).unwrap();
        assert!(lifted.nodes.iter().all(|n| n.coordinates.z.abs() <= 3.0));
        assert!(lifted.nodes.iter().any(|n| n.coordinates.z != 0.0));
        assert_eq!(lifted.nodes[0].coordinates, DVec3::ZERO);
        assert_eq!(lifted, apply_elevation(g, &bumpy).unwrap());
    }

    #[test]
    fn multi_layer_graph_is_connected_and_slope_bounded() {
        for seed in 0..10 {
            let c = GraphConfig {
                layers: 3,
                ..cfg(seed, 90)
            };
            let g = generate_graph(&c).unwrap();
            g.validate().unwrap();
            for (a, b) in g.edge_list() {
                let (na, nb) = (g.node(a), g.node(b));
                if na.connector || nb.connector {
                    assert!(slope_deg(na.coordinates, nb.coordinates) <= c.max_interconnect_angle_deg + 1e-9);
                }
            }
        }
    }
}
