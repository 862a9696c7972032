use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinkSpec, NodeId, QuantumNetwork, QuantumNode, DEFAULT_UTILITY};
use crate::error::{Error, Result};

/// Parameters of the synthetic network generator.
///
/// Ranges are closed `(low, high)` intervals sampled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSpec {
    pub nodes: usize,
    pub links: usize,
    pub observation_rate: (f64, f64),
    pub decay_rate: (f64, f64),
    pub throughput: (f64, f64),
    pub fidelity: (f64, f64),
    /// `(level, weight)` pairs; levels are drawn with probability proportional to weight.
    pub levels: Vec<(u32, f64)>,
    pub initial_utility: f64,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        GenerationSpec {
            nodes: 8,
            links: 12,
            observation_rate: (1.0, 10.0),
            decay_rate: (0.5, 2.0),
            throughput: (1.0, 100.0),
            fidelity: (0.8, 1.0),
            levels: vec![(1, 1.0)],
            initial_utility: DEFAULT_UTILITY,
        }
    }
}

impl GenerationSpec {
    pub fn new(nodes: usize, links: usize) -> Self {
        GenerationSpec {
            nodes,
            links,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::config("a generated network needs at least 2 nodes"));
        }
        let pairs = self.nodes * (self.nodes - 1) / 2;
        if self.links < self.nodes - 1 {
            return Err(Error::config(format!(
                "{} links cannot connect {} nodes",
                self.links, self.nodes
            )));
        }
        if self.links > pairs {
            return Err(Error::config(format!(
                "{} links exceed the {} available node pairs",
                self.links, pairs
            )));
        }
        let check = |name: &str, (lo, hi): (f64, f64), min: f64, max: f64| {
            if !(lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi && hi <= max) {
                return Err(Error::config(format!("invalid {name} range [{lo}, {hi}]")));
            }
            Ok(())
        };
        check("observation rate", self.observation_rate, 0.0, f64::MAX)?;
        check("decay rate", self.decay_rate, 0.0, f64::MAX)?;
        check("throughput", self.throughput, 0.0, f64::MAX)?;
        check("fidelity", self.fidelity, 0.0, 1.0)?;
        if self.levels.is_empty()
            || self.levels.iter().any(|&(l, w)| l < 1 || !(w >= 0.0) || !w.is_finite())
            || self.levels.iter().all(|&(_, w)| w == 0.0)
        {
            return Err(Error::config("level distribution needs levels >= 1 and positive total weight"));
        }
        if !(self.initial_utility >= 0.0) || !self.initial_utility.is_finite() {
            return Err(Error::config("initial utility must be finite and >= 0"));
        }
        Ok(())
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Decodes a Prüfer sequence into the edges of a labeled tree on `n` nodes.
fn prufer_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = *leaves.iter().next().expect("a tree always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    edges
}

/// Generates a connected network: a uniformly random spanning tree plus
/// uniformly sampled extra links. Pure in `(spec, seed)`.
pub fn generate_network(spec: &GenerationSpec, seed: u64) -> Result<QuantumNetwork> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes;
    let width = (n - 1).to_string().len();
    let ids: Vec<NodeId> = (0..n).map(|i| NodeId::new(format!("n{i:0width$}"))).collect();

    let nodes: Vec<QuantumNode> = ids
        .iter()
        .map(|id| QuantumNode {
            id: id.clone(),
            observation_rate: sample(&mut rng, spec.observation_rate),
            decay_rate: sample(&mut rng, spec.decay_rate),
        })
        .collect();

    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let mut pairs: Vec<(usize, usize)> = prufer_tree(&seq, n)
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();

    let used: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    let mut spare: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|p| !used.contains(p))
        .collect();
    spare.shuffle(&mut rng);
    pairs.extend(spare.into_iter().take(spec.links - (n - 1)));

    let level_dist = WeightedIndex::new(spec.levels.iter().map(|&(_, w)| w))
        .map_err(|e| Error::config(format!("level distribution: {e}")))?;
    let links = pairs
        .into_iter()
        .map(|(a, b)| LinkSpec {
            u: ids[a].clone(),
            v: ids[b].clone(),
            level: spec.levels[level_dist.sample(&mut rng)].0,
            throughput: sample(&mut rng, spec.throughput),
            fidelity: sample(&mut rng, spec.fidelity),
        })
        .collect();

    QuantumNetwork::new(nodes, links)?.with_utility(spec.initial_utility)
}
