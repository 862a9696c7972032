//! Independent reference computations for the integration tests. Nothing
//! here calls into the library's scoring code; formulas are re-derived from
//! the raw network data.

#![allow(dead_code)]

use egret_core::network::{LinkId, NodeIdx, QuantumNetwork};

/// A simple path as raw index sequences.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawPath {
    pub nodes: Vec<usize>,
    pub links: Vec<usize>,
}

/// Every simple path from `from` to `to`, sorted by node then link sequence.
pub fn all_simple_paths(net: &QuantumNetwork, from: usize, to: usize) -> Vec<RawPath> {
    let links = net.links();
    let mut out = Vec::new();
    let mut stack = vec![(vec![from], Vec::<usize>::new())];
    while let Some((nodes, used)) = stack.pop() {
        let here = *nodes.last().unwrap();
        if here == to {
            out.push(RawPath { nodes, links: used });
            continue;
        }
        for (id, l) in links.iter().enumerate() {
            let next = if l.u.0 == here {
                l.v.0
            } else if l.v.0 == here {
                l.u.0
            } else {
                continue;
            };
            if nodes.contains(&next) {
                continue;
            }
            let mut n2 = nodes.clone();
            n2.push(next);
            let mut u2 = used.clone();
            u2.push(id);
            stack.push((n2, u2));
        }
    }
    out.sort();
    out
}

/// `|mean incident throughput − B_F(link)|` at `node`, from the link list.
pub fn deviation(net: &QuantumNetwork, node: usize, link: usize) -> f64 {
    let incident: Vec<f64> = net
        .links()
        .iter()
        .filter(|l| l.u.0 == node || l.v.0 == node)
        .map(|l| l.throughput)
        .collect();
    let mean = incident.iter().sum::<f64>() / incident.len() as f64;
    (mean - net.links()[link].throughput).abs()
}

pub struct OracleParams {
    pub tau: f64,
    pub initial_gradient: f64,
    pub threshold: f64,
    pub exponent: f64,
    pub iterations: usize,
}

/// Endpoint path gradients at the source for every path, after `iterations`
/// joint rounds of the two-endpoint recursion.
pub fn endpoint_scores(net: &QuantumNetwork, paths: &[RawPath], p: &OracleParams) -> Vec<f64> {
    let src = *paths[0].nodes.first().unwrap();
    let dst = *paths[0].nodes.last().unwrap();
    let (ka, kb) = (net.nodes()[src].observation_rate, net.nodes()[dst].observation_rate);
    let (ta, tb) = (net.nodes()[src].decay_rate, net.nodes()[dst].decay_rate);
    let kab = ka + kb;

    let mut mu_a = Vec::new();
    let mut mu_b = Vec::new();
    for path in paths {
        let lam: Vec<f64> = path
            .links
            .iter()
            .map(|&l| {
                let link = &net.links()[l];
                link.utility / (1.0 + link.throughput * link.utility)
            })
            .collect();
        let hops = path.links.len();
        let fwd: f64 = (0..hops)
            .map(|h| p.initial_gradient * (-p.tau * deviation(net, path.nodes[h + 1], path.links[h])).exp() + lam[h])
            .sum();
        let bwd: f64 = (0..hops)
            .map(|h| p.initial_gradient * (-p.tau * deviation(net, path.nodes[h], path.links[h])).exp() + lam[h])
            .sum();
        mu_b.push(fwd / hops as f64);
        mu_a.push(bwd / hops as f64);
    }

    let usage = |g: &[f64]| -> Vec<f64> {
        let w: Vec<f64> = g.iter().map(|x| (x + p.threshold).powf(p.exponent)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    };
    let m = paths.len();
    let mut ga = vec![p.initial_gradient; m];
    let mut gb = vec![p.initial_gradient; m];
    for _ in 0..p.iterations {
        let (pa, pb) = (usage(&ga), usage(&gb));
        let na: Vec<f64> = (0..m)
            .map(|i| kab / (kab + ta) * ga[i] + kb / kab * pb[i] * mu_a[i])
            .collect();
        let nb: Vec<f64> = (0..m)
            .map(|i| kab / (kab + tb) * gb[i] + ka / kab * pa[i] * mu_b[i])
            .collect();
        ga = na;
        gb = nb;
    }
    ga
}

/// Index of the first maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..xs.len() {
        if xs[i] > xs[best] {
            best = i;
        }
    }
    best
}

pub fn to_raw(nodes: &[NodeIdx], links: &[LinkId]) -> RawPath {
    RawPath {
        nodes: nodes.iter().map(|n| n.0).collect(),
        links: links.iter().map(|l| l.0).collect(),
    }
}
