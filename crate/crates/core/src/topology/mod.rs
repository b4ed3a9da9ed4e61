//! Substrate network model.
//!
//! A [`SubstrateNetwork`] is an undirected multigraph: parallel links between
//! the same two nodes are allowed and are told apart by their identifier.
//! Nodes and links are addressed internally by dense indices ([`NodeId`],
//! [`LinkId`]) in insertion order; the string identifiers only appear at the
//! file boundary.

mod generate;
mod paths;
mod residual;

use std::collections::HashMap;
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{b4_topology, generate_random_topology};
pub use paths::k_least_cost_paths;
pub use residual::ResidualState;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate link `{0}`")]
    DuplicateLink(String),
    #[error("link `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("link `{link}` has invalid {field} {value}")]
    InvalidLinkValue {
        link: String,
        field: &'static str,
        value: f64,
    },
    #[error("insufficient capacity on link `{link}`: requested {requested}, available {available}")]
    InsufficientCapacity {
        link: String,
        requested: f64,
        available: f64,
    },
    #[error("release on link `{link}` would exceed its capacity")]
    OverRelease { link: String },
    #[error("allocation has {got} entries but the network has {expected} links")]
    AllocationLength { got: usize, expected: usize },
    #[error("invalid allocation on link `{link}`: {value}")]
    InvalidAllocation { link: String, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed topology file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub position: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub u: NodeId,
    pub v: NodeId,
    /// Bandwidth in traffic units.
    pub bandwidth: f64,
    /// Cost per traffic unit allocated on this link.
    pub price: f64,
}

impl Link {
    /// The endpoint opposite to `node`.
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SubstrateNetwork {
    nodes: Vec<Node>,
    links: Vec<Link>,
    node_index: HashMap<String, NodeId>,
    link_index: HashMap<String, LinkId>,
    adjacency: Vec<Vec<(LinkId, NodeId)>>,
}

impl PartialEq for SubstrateNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.links == other.links
    }
}

impl SubstrateNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        name: impl Into<String>,
        position: Option<(f64, f64)>,
    ) -> Result<NodeId, TopologyError> {
        let name = name.into();
        if self.node_index.contains_key(&name) {
            return Err(TopologyError::DuplicateNode(name));
        }
        let id = NodeId(self.nodes.len());
        self.node_index.insert(name.clone(), id);
        self.nodes.push(Node { name, position });
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn add_link(
        &mut self,
        name: impl Into<String>,
        u: NodeId,
        v: NodeId,
        bandwidth: f64,
        price: f64,
    ) -> Result<LinkId, TopologyError> {
        let name = name.into();
        if self.link_index.contains_key(&name) {
            return Err(TopologyError::DuplicateLink(name));
        }
        for end in [u, v] {
            if end.0 >= self.nodes.len() {
                return Err(TopologyError::UnknownNode(format!("#{}", end.0)));
            }
        }
        if u == v {
            return Err(TopologyError::SelfLoop(name));
        }
        for (field, value) in [("bandwidth", bandwidth), ("price", price)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TopologyError::InvalidLinkValue {
                    link: name,
                    field,
                    value,
                });
            }
        }
        let id = LinkId(self.links.len());
        self.link_index.insert(name.clone(), id);
        self.links.push(Link {
            name,
            u,
            v,
            bandwidth,
            price,
        });
        self.adjacency[u.0].push((id, v));
        self.adjacency[v.0].push((id, u));
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn node_id(&self, name: &str) -> Result<NodeId, TopologyError> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| TopologyError::UnknownNode(name.to_string()))
    }

    pub fn link_id(&self, name: &str) -> Result<LinkId, TopologyError> {
        self.link_index
            .get(name)
            .copied()
            .ok_or_else(|| TopologyError::UnknownLink(name.to_string()))
    }

    /// Links incident to `node`, paired with the neighbour across each.
    pub fn incident(&self, node: NodeId) -> &[(LinkId, NodeId)] {
        &self.adjacency[node.0]
    }

    pub fn prices(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.price).collect()
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.bandwidth).collect()
    }

    /// Copy of this network with every link bandwidth set to `bandwidth`.
    pub fn with_uniform_bandwidth(&self, bandwidth: f64) -> Result<Self, TopologyError> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(TopologyError::InvalidArgument(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut sn = self.clone();
        for link in &mut sn.links {
            link.bandwidth = bandwidth;
        }
        Ok(sn)
    }

    /// Whether `a` and `b` are joined by some path.
    pub fn connected(&self, a: NodeId, b: NodeId) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![a];
        seen[a.0] = true;
        while let Some(u) = stack.pop() {
            if u == b {
                return true;
            }
            for &(_, v) in &self.adjacency[u.0] {
                if !seen[v.0] {
                    seen[v.0] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    pub fn to_file(&self) -> TopologyFile {
        TopologyFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.name.clone(),
                    x: n.position.map(|p| p.0),
                    y: n.position.map(|p| p.1),
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkRecord {
                    id: l.name.clone(),
                    u: self.nodes[l.u.0].name.clone(),
                    v: self.nodes[l.v.0].name.clone(),
                    bandwidth: l.bandwidth,
                    price: l.price,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &TopologyFile) -> Result<Self, TopologyError> {
        let mut sn = SubstrateNetwork::new();
        for n in &file.nodes {
            let position = match (n.x, n.y) {
                (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Some((x, y)),
                (None, None) => None,
                _ => {
                    return Err(TopologyError::InvalidArgument(format!(
                        "node `{}` has an incomplete or non-finite position",
                        n.id
                    )))
                }
            };
            sn.add_node(n.id.clone(), position)?;
        }
        for l in &file.links {
            let u = sn.node_id(&l.u)?;
            let v = sn.node_id(&l.v)?;
            sn.add_link(l.id.clone(), u, v, l.bandwidth, l.price)?;
        }
        Ok(sn)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let file: TopologyFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, TopologyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<(), TopologyError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// On-disk topology layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub id: String,
    pub u: String,
    pub v: String,
    pub bandwidth: f64,
    pub price: f64,
}

/// A simple path through the substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    /// Sum of link prices, accumulated from the source end.
    pub price: f64,
}

impl Path {
    pub fn from_links(
        sn: &SubstrateNetwork,
        source: NodeId,
        links: Vec<LinkId>,
    ) -> Result<Self, TopologyError> {
        let mut nodes = vec![source];
        let mut price = 0.0;
        for &l in &links {
            let link = sn.link(l);
            let here = *nodes.last().unwrap();
            if link.u != here && link.v != here {
                return Err(TopologyError::InvalidArgument(format!(
                    "link `{}` does not touch node `{}`",
                    link.name,
                    sn.node(here).name
                )));
            }
            nodes.push(link.other(here));
            price += link.price;
        }
        Ok(Path {
            nodes,
            links,
            price,
        })
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.nodes.iter().all(|n| seen.insert(*n))
    }

    pub fn display<'a>(&'a self, sn: &'a SubstrateNetwork) -> impl fmt::Display + 'a {
        struct Show<'a>(&'a Path, &'a SubstrateNetwork);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let names: Vec<&str> = self
                    .0
                    .nodes
                    .iter()
                    .map(|n| self.1.node(*n).name.as_str())
                    .collect();
                write!(f, "{} ({})", names.join("-"), self.0.price)
            }
        }
        Show(self, sn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SubstrateNetwork {
        let mut sn = SubstrateNetwork::new();
        let a = sn.add_node("A", Some((0.0, 0.0))).unwrap();
        let b = sn.add_node("B", Some((1.0, 0.0))).unwrap();
        let c = sn.add_node("C", None).unwrap();
        sn.add_link("ab", a, b, 10.0, 1.0).unwrap();
        sn.add_link("bc", b, c, 10.0, 2.0).unwrap();
        sn.add_link("ab2", a, b, 5.0, 3.0).unwrap();
        sn
    }

    #[test]
    fn json_round_trip() {
        let sn = triangle();
        let back = SubstrateNetwork::from_json(&sn.to_json()).unwrap();
        assert_eq!(sn, back);
        assert_eq!(back.incident(NodeId(0)).len(), 2);
    }

    #[test]
    fn loader_rejects_bad_files() {
        let dup_node = r#"{"nodes":[{"id":"a"},{"id":"a"}],"links":[]}"#;
        assert!(matches!(
            SubstrateNetwork::from_json(dup_node),
            Err(TopologyError::DuplicateNode(_))
        ));
        let dup_link = r#"{"nodes":[{"id":"a"},{"id":"b"}],"links":[
            {"id":"l","u":"a","v":"b","bandwidth":1,"price":1},
            {"id":"l","u":"b","v":"a","bandwidth":1,"price":1}]}"#;
        assert!(matches!(
            SubstrateNetwork::from_json(dup_link),
            Err(TopologyError::DuplicateLink(_))
        ));
        let self_loop = r#"{"nodes":[{"id":"a"}],"links":[
            {"id":"l","u":"a","v":"a","bandwidth":1,"price":1}]}"#;
        assert!(matches!(
            SubstrateNetwork::from_json(self_loop),
            Err(TopologyError::SelfLoop(_))
        ));
        let zero_price = r#"{"nodes":[{"id":"a"},{"id":"b"}],"links":[
            {"id":"l","u":"a","v":"b","bandwidth":1,"price":0}]}"#;
        assert!(matches!(
            SubstrateNetwork::from_json(zero_price),
            Err(TopologyError::InvalidLinkValue { field: "price", .. })
        ));
        let unknown = r#"{"nodes":[{"id":"a"}],"links":[
            {"id":"l","u":"a","v":"z","bandwidth":1,"price":1}]}"#;
        assert!(matches!(
            SubstrateNetwork::from_json(unknown),
            Err(TopologyError::UnknownNode(_))
        ));
        assert!(matches!(
            SubstrateNetwork::from_json("{"),
            Err(TopologyError::Format(_))
        ));
    }

    #[test]
    fn path_from_links_tracks_price() {
        let sn = triangle();
        let p = Path::from_links(&sn, NodeId(0), vec![LinkId(2), LinkId(1)]).unwrap();
        assert_eq!(p.nodes, vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(p.price, 5.0);
        assert!(p.is_simple());
        assert!(Path::from_links(&sn, NodeId(2), vec![LinkId(0)]).is_err());
    }

    #[test]
    fn uniform_bandwidth_copy() {
        let sn = triangle().with_uniform_bandwidth(7.0).unwrap();
        assert!(sn.links().iter().all(|l| l.bandwidth == 7.0));
        assert!(triangle().with_uniform_bandwidth(0.0).is_err());
    }
}
