//! Graph files: `{"nodes": [{"id": "x", "e": 0, "t1": "y", "t2": "x"}, ...]}`.
//! Ids may be strings or integers; leaves use `null` successors.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Colouring, Node, PointGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Number(u64),
    Text(String),
}

impl NodeId {
    fn key(&self) -> String {
        match self {
            NodeId::Number(n) => n.to_string(),
            NodeId::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub e: u8,
    #[serde(default)]
    pub t1: Option<NodeId>,
    #[serde(default)]
    pub t2: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<PointGraph> {
        let index: HashMap<String, usize> =
            self.nodes.iter().enumerate().map(|(k, n)| (n.id.key(), k)).collect();
        let resolve = |id: &Option<NodeId>| -> Result<Option<usize>> {
            match id {
                None => Ok(None),
                Some(id) => index
                    .get(&id.key())
                    .copied()
                    .map(Some)
                    .ok_or_else(|| Error::InvalidGraph(format!("unknown successor id {:?}", id.key()))),
            }
        };
        let nodes = self
            .nodes
            .iter()
            .map(|n| Ok(Node { id: n.id.key(), e: n.e, t1: resolve(&n.t1)?, t2: resolve(&n.t2)? }))
            .collect::<Result<Vec<_>>>()?;
        PointGraph::new(nodes)
    }
}

impl From<&PointGraph> for GraphFile {
    fn from(g: &PointGraph) -> Self {
        let id = |v: Option<usize>| v.map(|v| NodeId::Text(g.id(v).to_string()));
        GraphFile {
            nodes: g
                .nodes()
                .iter()
                .map(|n| NodeRecord { id: NodeId::Text(n.id.clone()), e: n.e, t1: id(n.t1), t2: id(n.t2) })
                .collect(),
        }
    }
}

impl PointGraph {
    pub fn from_json(text: &str) -> Result<PointGraph> {
        serde_json::from_str::<GraphFile>(text)?.to_graph()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphFile::from(self))?)
    }

    /// The coloured part of `c` as an id-to-colour map.
    pub fn colour_map(&self, c: &Colouring) -> BTreeMap<String, u8> {
        (0..self.len()).filter_map(|v| c.get(v).map(|k| (self.id(v).to_string(), k))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_string_and_integer_ids() {
        let g = PointGraph::from_json(
            r#"{"nodes":[{"id":"x","e":0,"t1":"y","t2":"x"},{"id":"y","e":1,"t1":"x","t2":"x"}]}"#,
        )
        .unwrap();
        assert_eq!(g.successors(0), Some((1, 0)));
        let g = PointGraph::from_json(r#"{"nodes":[{"id":0,"e":1,"t1":1,"t2":1},{"id":1,"e":0,"t1":null,"t2":null}]}"#)
            .unwrap();
        assert_eq!(g.id(1), "1");
        assert!(!g.is_interior(1));
        let again = PointGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn unknown_successor_rejected() {
        let err = PointGraph::from_json(r#"{"nodes":[{"id":"a","e":0,"t1":"b","t2":"a"}]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }
}
