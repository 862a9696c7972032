use std::collections::BTreeSet;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::network::{EntangledPath, LinkId, NodeId, NodeIdx, QuantumNetwork};
use crate::router::{run_routing, score_paths, RoutingParams};

/// Edge weight of the classical shortest-path baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineWeight {
    #[default]
    Hop,
    /// `1/B_F`; zero-throughput links are unusable.
    InverseThroughput,
}

impl FromStr for BaselineWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hop" => Ok(BaselineWeight::Hop),
            "inverse-throughput" => Ok(BaselineWeight::InverseThroughput),
            other => Err(Error::config(format!(
                "unknown baseline weight `{other}` (expected hop or inverse-throughput)"
            ))),
        }
    }
}

fn resolve(net: &QuantumNetwork, id: &NodeId) -> Result<NodeIdx> {
    net.index_of(id)
        .ok_or_else(|| Error::config(format!("unknown node `{id}`")))
}

/// Dijkstra's algorithm. Among equally short candidates the node with the
/// smaller id is settled first, and a predecessor is only replaced by a
/// strictly shorter route, so ties resolve by node-id order.
pub fn baseline_shortest_path(
    net: &QuantumNetwork,
    source: &NodeId,
    target: &NodeId,
    weight: BaselineWeight,
) -> Result<Option<EntangledPath>> {
    let (s, t) = (resolve(net, source)?, resolve(net, target)?);
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(NodeIdx, LinkId)>> = vec![None; n];
    let mut done = vec![false; n];
    dist[s.0] = 0.0;
    loop {
        let next = (0..n)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let Some(u) = next else { break };
        done[u] = true;
        if u == t.0 {
            break;
        }
        for &l in net.incident(NodeIdx(u)) {
            let v = net.neighbor(NodeIdx(u), l);
            let w = match weight {
                BaselineWeight::Hop => 1.0,
                BaselineWeight::InverseThroughput => 1.0 / net.link(l).throughput,
            };
            let d = dist[u] + w;
            if !done[v.0] && d < dist[v.0] {
                dist[v.0] = d;
                prev[v.0] = Some((NodeIdx(u), l));
            }
        }
    }
    if !dist[t.0].is_finite() {
        return Ok(None);
    }
    let (mut nodes, mut links) = (vec![t], Vec::new());
    let mut at = t;
    while let Some((p, l)) = prev[at.0] {
        nodes.push(p);
        links.push(l);
        at = p;
    }
    nodes.reverse();
    links.reverse();
    EntangledPath::new(net, nodes, links).map(Some)
}

/// Router versus baseline on one source/destination pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    pub gradient_path: Option<EntangledPath>,
    pub baseline_path: Option<EntangledPath>,
    /// Jaccard overlap of the two paths' link sets, when both exist.
    pub overlap: Option<f64>,
    /// Endpoint path gradients, scored together over the router's completed
    /// paths plus the baseline path.
    pub gradient_score: Option<f64>,
    pub baseline_score: Option<f64>,
    pub total_visits: usize,
    pub visit_budget: usize,
}

pub fn compare_routes(
    net: &QuantumNetwork,
    source: &NodeId,
    target: &NodeId,
    params: &RoutingParams,
    seed: u64,
    weight: BaselineWeight,
) -> Result<RouteComparison> {
    let routed = run_routing(net, source, target, params, seed)?;
    let baseline = baseline_shortest_path(net, source, target, weight)?;
    let gradient = routed.winning_path().cloned();

    let overlap = match (&gradient, &baseline) {
        (Some(a), Some(b)) => {
            let a: BTreeSet<LinkId> = a.links.iter().copied().collect();
            let b: BTreeSet<LinkId> = b.links.iter().copied().collect();
            Some(a.intersection(&b).count() as f64 / a.union(&b).count() as f64)
        }
        _ => None,
    };

    let mut pool: Vec<EntangledPath> = routed.paths.iter().map(|p| p.path.clone()).collect();
    if let Some(b) = &baseline {
        if !pool.contains(b) {
            pool.push(b.clone());
            pool.sort();
        }
    }
    let (mut gradient_score, mut baseline_score) = (None, None);
    if !pool.is_empty() {
        let scores = score_paths(net, source, target, &pool, params)?;
        let score_of = |p: &EntangledPath| {
            pool.iter()
                .position(|q| q == p)
                .map(|i| scores[i].gradient_source)
        };
        gradient_score = gradient.as_ref().and_then(score_of);
        baseline_score = baseline.as_ref().and_then(score_of);
    }

    Ok(RouteComparison {
        gradient_path: gradient,
        baseline_path: baseline,
        overlap,
        gradient_score,
        baseline_score,
        total_visits: routed.total_visits,
        visit_budget: routed.visit_budget,
    })
}
