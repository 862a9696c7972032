//! Entangled quantum network: repeater nodes joined by leveled entangled links.
//!
//! Nodes are stored sorted by [`NodeId`], so the dense [`NodeIdx`] order is
//! the identifier order. Every deterministic tie-break in the crate relies on
//! that.

mod format;
mod generate;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub use format::{parse_network, write_network};
pub use generate::{generate_network, GenerationSpec};

/// Default entanglement utility assigned to a link before any traversal.
pub const DEFAULT_UTILITY: f64 = 1.0;

/// Opaque, totally ordered node identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Dense index of a node inside one [`QuantumNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIdx(pub usize);

/// Dense index of a link inside one [`QuantumNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNode {
    pub id: NodeId,
    /// Observation rate: mean entangled states arriving per second.
    pub observation_rate: f64,
    /// Decay rate of the entanglement gradient held at this node.
    pub decay_rate: f64,
}

impl QuantumNode {
    pub fn new(id: impl Into<NodeId>, observation_rate: f64, decay_rate: f64) -> Self {
        QuantumNode {
            id: id.into(),
            observation_rate,
            decay_rate,
        }
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// An undirected entangled link of a given level.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledLink {
    pub u: NodeIdx,
    pub v: NodeIdx,
    /// Link level `l`; the link spans `2^(l-1)` hops.
    pub level: u32,
    /// Entangled states per second delivered at fidelity `fidelity`.
    pub throughput: f64,
    pub fidelity: f64,
    /// Initial entanglement utility.
    pub utility: f64,
}

impl EntangledLink {
    /// The endpoint opposite `node`, or `None` if the link is not incident to it.
    pub fn other(&self, node: NodeIdx) -> Option<NodeIdx> {
        if self.u == node {
            Some(self.v)
        } else if self.v == node {
            Some(self.u)
        } else {
            None
        }
    }

    pub fn is_incident(&self, node: NodeIdx) -> bool {
        self.u == node || self.v == node
    }
}

/// Link description in terms of node identifiers, used to build networks.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub u: NodeId,
    pub v: NodeId,
    pub level: u32,
    pub throughput: f64,
    pub fidelity: f64,
}

/// Number of repeater hops spanned by a link of the given level.
pub fn hop_distance(level: u32) -> Result<u64> {
    if level < 1 {
        return Err(Error::domain("link level must be at least 1"));
    }
    1u64.checked_shl(level - 1)
        .ok_or_else(|| Error::domain(format!("link level {level} overflows the hop distance")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNetwork {
    nodes: Vec<QuantumNode>,
    links: Vec<EntangledLink>,
    /// Incident links per node, sorted by (neighbor, level, link id).
    adjacency: Vec<Vec<LinkId>>,
    index: HashMap<NodeId, NodeIdx>,
}

impl QuantumNetwork {
    /// Builds a network, validating every node and link.
    ///
    /// Nodes are reordered by identifier. Links keep their relative order.
    pub fn new(mut nodes: Vec<QuantumNode>, links: Vec<LinkSpec>) -> Result<Self> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::config(format!("duplicate node `{}`", pair[0].id)));
            }
        }
        for node in &nodes {
            if !(node.observation_rate >= 0.0) || !node.observation_rate.is_finite() {
                return Err(Error::domain(format!(
                    "node `{}`: observation rate must be finite and >= 0, got {}",
                    node.id, node.observation_rate
                )));
            }
            if !(node.decay_rate >= 0.0) || !node.decay_rate.is_finite() {
                return Err(Error::domain(format!(
                    "node `{}`: decay rate must be finite and >= 0, got {}",
                    node.id, node.decay_rate
                )));
            }
        }
        let index: HashMap<NodeId, NodeIdx> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), NodeIdx(i)))
            .collect();

        let mut built = Vec::with_capacity(links.len());
        for spec in links {
            let lookup = |id: &NodeId| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::config(format!("link endpoint `{id}` is not a node")))
            };
            let (u, v) = (lookup(&spec.u)?, lookup(&spec.v)?);
            if u == v {
                return Err(Error::config(format!("self-loop on `{}`", spec.u)));
            }
            if spec.level < 1 {
                return Err(Error::domain(format!(
                    "link {}-{}: level must be >= 1",
                    spec.u, spec.v
                )));
            }
            if !(spec.throughput >= 0.0) || !spec.throughput.is_finite() {
                return Err(Error::domain(format!(
                    "link {}-{}: throughput must be finite and >= 0, got {}",
                    spec.u, spec.v, spec.throughput
                )));
            }
            if !(0.0..=1.0).contains(&spec.fidelity) {
                return Err(Error::domain(format!(
                    "link {}-{}: fidelity must lie in [0, 1], got {}",
                    spec.u, spec.v, spec.fidelity
                )));
            }
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            if built
                .iter()
                .any(|l: &EntangledLink| l.u == u && l.v == v && l.level == spec.level)
            {
                return Err(Error::config(format!(
                    "duplicate level-{} link between `{}` and `{}`",
                    spec.level, spec.u, spec.v
                )));
            }
            built.push(EntangledLink {
                u,
                v,
                level: spec.level,
                throughput: spec.throughput,
                fidelity: spec.fidelity,
                utility: DEFAULT_UTILITY,
            });
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, link) in built.iter().enumerate() {
            adjacency[link.u.0].push(LinkId(i));
            adjacency[link.v.0].push(LinkId(i));
        }
        for (n, adj) in adjacency.iter_mut().enumerate() {
            adj.sort_by_key(|&l| {
                let link = &built[l.0];
                (link.other(NodeIdx(n)), link.level, l)
            });
        }

        Ok(QuantumNetwork {
            nodes,
            links: built,
            adjacency,
            index,
        })
    }

    /// Sets the initial utility of every link.
    pub fn with_utility(mut self, utility: f64) -> Result<Self> {
        if !(utility >= 0.0) || !utility.is_finite() {
            return Err(Error::domain(format!(
                "utility must be finite and >= 0, got {utility}"
            )));
        }
        for link in &mut self.links {
            link.utility = utility;
        }
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[QuantumNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[EntangledLink] {
        &self.links
    }

    pub fn node(&self, idx: NodeIdx) -> &QuantumNode {
        &self.nodes[idx.0]
    }

    pub fn link(&self, id: LinkId) -> &EntangledLink {
        &self.links[id.0]
    }

    pub fn index_of(&self, id: &NodeId) -> Option<NodeIdx> {
        self.index.get(id).copied()
    }

    pub fn id_of(&self, idx: NodeIdx) -> &NodeId {
        &self.nodes[idx.0].id
    }

    /// Incident links of `node` in deterministic order.
    pub fn incident(&self, node: NodeIdx) -> &[LinkId] {
        &self.adjacency[node.0]
    }

    /// Neighbor reached from `node` over `link`.
    pub fn neighbor(&self, node: NodeIdx, link: LinkId) -> NodeIdx {
        self.links[link.0]
            .other(node)
            .expect("adjacency only lists incident links")
    }

    /// Mean throughput over all direct links of `node`.
    pub fn mean_neighbor_throughput(&self, node: NodeIdx) -> Result<f64> {
        let incident = self.incident(node);
        if incident.is_empty() {
            return Err(Error::domain(format!(
                "node `{}` has no direct links",
                self.id_of(node)
            )));
        }
        let total: f64 = incident.iter().map(|&l| self.links[l.0].throughput).sum();
        Ok(total / incident.len() as f64)
    }

    /// Throughput deviation `|mean_neighbor_throughput(node) - B_F(link)|`.
    pub fn throughput_deviation(&self, node: NodeIdx, link: LinkId) -> Result<f64> {
        let l = self
            .links
            .get(link.0)
            .ok_or_else(|| Error::domain(format!("unknown link {}", link.0)))?;
        if !l.is_incident(node) {
            return Err(Error::domain(format!(
                "link {} is not incident to `{}`",
                link.0,
                self.id_of(node)
            )));
        }
        Ok((self.mean_neighbor_throughput(node)? - l.throughput).abs())
    }

    /// Whether every node is reachable from the first one.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeIdx(0)];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &l in self.incident(n) {
                let m = self.neighbor(n, l);
                if !seen[m.0] {
                    seen[m.0] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A simple path through the network, as nodes plus the links joining them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntangledPath {
    pub nodes: Vec<NodeIdx>,
    pub links: Vec<LinkId>,
}

impl EntangledPath {
    /// Checks that consecutive nodes share the given link and no node repeats.
    pub fn new(net: &QuantumNetwork, nodes: Vec<NodeIdx>, links: Vec<LinkId>) -> Result<Self> {
        if nodes.is_empty() || links.len() + 1 != nodes.len() {
            return Err(Error::domain("a path needs one more node than links"));
        }
        for (i, &l) in links.iter().enumerate() {
            let link = net
                .links()
                .get(l.0)
                .ok_or_else(|| Error::domain(format!("unknown link {}", l.0)))?;
            if link.other(nodes[i]) != Some(nodes[i + 1]) {
                return Err(Error::domain(format!(
                    "link {} does not join `{}` and `{}`",
                    l.0,
                    net.id_of(nodes[i]),
                    net.id_of(nodes[i + 1])
                )));
            }
        }
        let mut sorted = nodes.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("path revisits a node"));
        }
        Ok(EntangledPath { nodes, links })
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// Bottleneck throughput: the minimum link throughput along the path.
    pub fn bottleneck_throughput(&self, net: &QuantumNetwork) -> f64 {
        self.links
            .iter()
            .map(|&l| net.link(l).throughput)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn node_ids<'a>(&self, net: &'a QuantumNetwork) -> Vec<&'a NodeId> {
        self.nodes.iter().map(|&n| net.id_of(n)).collect()
    }
}
