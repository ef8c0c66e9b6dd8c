use serde::{Deserialize, Serialize};

use super::{Graph, GraphConfig, Node};
use crate::error::{Error, Result};

pub const GRAPH_MANIFEST_VERSION: u32 = 1;

/// The shareable graph document: configuration plus every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphManifest {
    pub version: u32,
    pub config: GraphConfig,
    pub nodes: Vec<Node>,
}

pub fn graph_to_json(graph: &Graph, config: &GraphConfig) -> serde_json::Value {
    let doc = GraphManifest {
        version: GRAPH_MANIFEST_VERSION,
        config: config.clone(),
        nodes: graph.nodes.clone(),
    };
    serde_json::to_value(doc).expect("graph manifest serializes")
}

/// Parses and validates a graph document.
pub fn json_to_graph(document: &serde_json::Value) -> Result<(Graph, GraphConfig)> {
    let doc: GraphManifest = serde_path_to_error::deserialize(document).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if doc.version != GRAPH_MANIFEST_VERSION {
        return Err(Error::Parse {
            path: "version".into(),
            message: format!(
                "unsupported graph manifest version {} (expected {GRAPH_MANIFEST_VERSION})",
                doc.version
            ),
        });
    }
    doc.config.validate()?;
    let graph = Graph {
        nodes: doc.nodes,
        layers: doc.config.layers,
        seed: doc.config.seed,
    };
    graph.validate()?;
    for n in &graph.nodes {
        if n.layer >= graph.layers {
            return Err(Error::Validation(format!(
                "node {} is on layer {} but the config has {} layers",
                n.id, n.layer, graph.layers
            )));
        }
        if n.radius < doc.config.radius_min || n.radius > doc.config.radius_max {
            return Err(Error::Validation(format!(
                "node {} radius {} outside [{}, {}]",
                n.id, n.radius, doc.config.radius_min, doc.config.radius_max
            )));
        }
    }
    Ok((graph, doc.config))
}
