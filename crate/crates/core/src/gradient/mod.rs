//! Link-level entanglement utility and gradient dynamics.
//!
//! Utilities shrink on every traversal (`λ' = λ / (1 + B_F λ)`), and each node
//! keeps a [`GradientTable`] of per-link gradients that are reinforced by the
//! traversed link's utility and otherwise decay as `e^{-τ ΔB_F}`.

mod kernel;
mod selection;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::{LinkId, NodeIdx, QuantumNetwork};

pub use kernel::{kernel_estimate, UtilityKernel};
pub use selection::{
    link_selection_probability, normalized_selection_distribution, source_selection_probability,
    Distribution, SelectionParams,
};

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "{name} must be finite and >= 0, got {x}"
        )));
    }
    Ok(())
}

/// Utility of a link after one traversal: `λ / (1 + B_F λ)`.
pub fn update_utility(utility: f64, throughput: f64) -> Result<f64> {
    check_non_negative("utility", utility)?;
    check_non_negative("throughput", throughput)?;
    Ok(utility / (1.0 + throughput * utility))
}

/// Correlation of the utility process at lag `lag`: `e^{-τ|ΔT|}`.
pub fn correlation(tau: f64, lag: f64) -> Result<f64> {
    check_non_negative("decay rate", tau)?;
    if lag.is_nan() {
        return Err(Error::domain("lag is NaN"));
    }
    Ok((-tau * lag.abs()).exp())
}

/// Which endpoint a gradient entry points back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `G^y_{A,x}`: learned from traffic that came from the source.
    TowardSource,
    /// `G^y_{z,B}`: learned from traffic that came from the destination.
    TowardDestination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GradientKey {
    pub anchor: NodeIdx,
    pub link: LinkId,
    pub direction: Direction,
}

/// Per-node gradients, one entry per (anchor, incident link, direction).
///
/// Entries are keyed by incident link rather than neighbor node so that
/// parallel links of different levels keep separate gradients. Entries that
/// were never written read as the table's initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTable {
    owner: NodeIdx,
    incident: Vec<LinkId>,
    initial: f64,
    entries: BTreeMap<GradientKey, f64>,
}

impl GradientTable {
    pub fn new(owner: NodeIdx, incident: &[LinkId], initial: f64) -> Result<Self> {
        check_non_negative("initial gradient", initial)?;
        Ok(GradientTable {
            owner,
            incident: incident.to_vec(),
            initial,
            entries: BTreeMap::new(),
        })
    }

    pub fn for_node(net: &QuantumNetwork, owner: NodeIdx, initial: f64) -> Result<Self> {
        Self::new(owner, net.incident(owner), initial)
    }

    pub fn owner(&self) -> NodeIdx {
        self.owner
    }

    pub fn incident(&self) -> &[LinkId] {
        &self.incident
    }

    fn check_incident(&self, link: LinkId) -> Result<()> {
        if self.incident.contains(&link) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "link {} is not incident to node {}",
                link.0, self.owner.0
            )))
        }
    }

    /// Current gradient, or `None` if `link` is not incident to the owner.
    pub fn get(&self, anchor: NodeIdx, link: LinkId, direction: Direction) -> Option<f64> {
        if !self.incident.contains(&link) {
            return None;
        }
        let key = GradientKey {
            anchor,
            link,
            direction,
        };
        Some(self.entries.get(&key).copied().unwrap_or(self.initial))
    }

    pub fn set(&mut self, anchor: NodeIdx, link: LinkId, direction: Direction, value: f64) -> Result<()> {
        self.check_incident(link)?;
        check_non_negative("gradient", value)?;
        self.entries.insert(
            GradientKey {
                anchor,
                link,
                direction,
            },
            value,
        );
        Ok(())
    }

    /// All `(anchor, direction)` gradients in incident-link order.
    pub fn values(&self, anchor: NodeIdx, direction: Direction) -> Vec<(LinkId, f64)> {
        self.incident
            .iter()
            .map(|&l| (l, self.get(anchor, l, direction).expect("incident")))
            .collect()
    }

    /// Reinforces the entry for `arrived_via` and decays every other entry of
    /// the same anchor and direction.
    ///
    /// The reinforced entry becomes `G e^{-τ ΔB_F} + λ'`; the others become
    /// `G e^{-τ ΔB_F}`, each with its own link's deviation. Returns the
    /// reinforced value.
    pub fn update_gradients(
        &mut self,
        anchor: NodeIdx,
        direction: Direction,
        arrived_via: LinkId,
        tau: f64,
        deviations: &BTreeMap<LinkId, f64>,
        updated_utility: f64,
    ) -> Result<f64> {
        self.check_incident(arrived_via)?;
        check_non_negative("decay rate", tau)?;
        check_non_negative("utility", updated_utility)?;
        let mut reinforced = 0.0;
        for i in 0..self.incident.len() {
            let link = self.incident[i];
            let deviation = *deviations.get(&link).ok_or_else(|| {
                Error::domain(format!("missing throughput deviation for link {}", link.0))
            })?;
            check_non_negative("throughput deviation", deviation)?;
            let current = self.get(anchor, link, direction).expect("incident");
            let mut next = current * (-tau * deviation).exp();
            if link == arrived_via {
                next += updated_utility;
                reinforced = next;
            }
            self.entries.insert(
                GradientKey {
                    anchor,
                    link,
                    direction,
                },
                next,
            );
        }
        Ok(reinforced)
    }
}

/// Throughput deviation of every incident link at `node`.
pub fn node_deviations(net: &QuantumNetwork, node: NodeIdx) -> Result<BTreeMap<LinkId, f64>> {
    net.incident(node)
        .iter()
        .map(|&l| Ok((l, net.throughput_deviation(node, l)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{LinkSpec, QuantumNode};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn utility_examples() {
        assert_eq!(update_utility(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(update_utility(0.0, 123.0).unwrap(), 0.0);
        assert!(close(update_utility(0.5, 4.0).unwrap(), 1.0 / 6.0, 1e-15));
        assert!(update_utility(-1.0, 1.0).is_err());
        assert!(update_utility(1.0, -1.0).is_err());
    }

    #[test]
    fn utility_matches_reciprocal_form() {
        // (1/λ + B)^{-1}
        for &(l, b) in &[(1.0, 1.0), (0.3, 7.0), (2.5, 0.01)] {
            let direct: f64 = 1.0 / (1.0 / l + b);
            assert!(close(update_utility(l, b).unwrap(), direct, 1e-15));
        }
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation(3.0, 0.0).unwrap(), 1.0);
        assert!(close(correlation(1.0, 1.0).unwrap(), 0.367879441171, 1e-12));
        assert_eq!(correlation(1.0, -1.0).unwrap(), correlation(1.0, 1.0).unwrap());
        assert!(correlation(-1.0, 1.0).is_err());
    }

    fn pair_table() -> (GradientTable, BTreeMap<LinkId, f64>) {
        let table = GradientTable::new(NodeIdx(0), &[LinkId(0), LinkId(1)], 0.0).unwrap();
        let devs = [(LinkId(0), 0.0), (LinkId(1), 0.0)].into_iter().collect();
        (table, devs)
    }

    #[test]
    fn reinforce_without_decay() {
        let (mut t, devs) = pair_table();
        let a = NodeIdx(9);
        t.set(a, LinkId(0), Direction::TowardSource, 1.0).unwrap();
        let g = t
            .update_gradients(a, Direction::TowardSource, LinkId(0), 0.0, &devs, 0.5)
            .unwrap();
        assert_eq!(g, 1.5);
    }

    #[test]
    fn other_neighbor_decays() {
        let (mut t, mut devs) = pair_table();
        let a = NodeIdx(9);
        t.set(a, LinkId(1), Direction::TowardSource, 2.0).unwrap();
        devs.insert(LinkId(1), std::f64::consts::LN_2);
        t.update_gradients(a, Direction::TowardSource, LinkId(0), 1.0, &devs, 0.3)
            .unwrap();
        let g = t.get(a, LinkId(1), Direction::TowardSource).unwrap();
        assert!(close(g, 1.0, 1e-15));
    }

    #[test]
    fn heavy_decay_leaves_only_utility() {
        let (mut t, mut devs) = pair_table();
        let a = NodeIdx(9);
        t.set(a, LinkId(0), Direction::TowardSource, 1.0).unwrap();
        devs.insert(LinkId(0), 50.0);
        let g = t
            .update_gradients(a, Direction::TowardSource, LinkId(0), 1.0, &devs, 0.3)
            .unwrap();
        assert!(close(g, 0.3, 1e-20));
    }

    #[test]
    fn directions_and_anchors_are_independent() {
        let (mut t, devs) = pair_table();
        t.update_gradients(NodeIdx(5), Direction::TowardSource, LinkId(0), 0.0, &devs, 1.0)
            .unwrap();
        assert_eq!(t.get(NodeIdx(5), LinkId(0), Direction::TowardDestination), Some(0.0));
        assert_eq!(t.get(NodeIdx(6), LinkId(0), Direction::TowardSource), Some(0.0));
        assert_eq!(t.get(NodeIdx(5), LinkId(0), Direction::TowardSource), Some(1.0));
    }

    #[test]
    fn unknown_neighbor_rejected() {
        let (mut t, devs) = pair_table();
        assert!(t
            .update_gradients(NodeIdx(0), Direction::TowardSource, LinkId(7), 0.0, &devs, 1.0)
            .is_err());
        assert!(t.set(NodeIdx(0), LinkId(7), Direction::TowardSource, 1.0).is_err());
        assert_eq!(t.get(NodeIdx(0), LinkId(7), Direction::TowardSource), None);
    }

    #[test]
    fn deviations_from_network() {
        let net = QuantumNetwork::new(
            vec![
                QuantumNode::new("a", 1.0, 1.0),
                QuantumNode::new("b", 1.0, 1.0),
                QuantumNode::new("c", 1.0, 1.0),
            ],
            vec![
                LinkSpec { u: "a".into(), v: "b".into(), level: 1, throughput: 2.0, fidelity: 1.0 },
                LinkSpec { u: "a".into(), v: "c".into(), level: 1, throughput: 6.0, fidelity: 1.0 },
            ],
        )
        .unwrap();
        let devs = node_deviations(&net, NodeIdx(0)).unwrap();
        assert_eq!(devs.values().copied().collect::<Vec<_>>(), vec![2.0, 2.0]);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn utility_shrinks_and_is_monotone(l in 1e-6f64..1e3, b in 1e-6f64..1e3, db in 1e-3f64..10.0) {
            let u = update_utility(l, b).unwrap();
            prop_assert!(u > 0.0 && u < l);
            prop_assert!(update_utility(l, b + db).unwrap() < u);
        }

        #[test]
        fn utility_iterates_to_zero(l in 0.1f64..10.0, b in 0.5f64..10.0) {
            let mut u = l;
            for _ in 0..10_000 {
                u = update_utility(u, b).unwrap();
            }
            // closed form after k steps: 1/(1/λ + kB)
            prop_assert!(u < 1.0 / (10_000.0 * b) + 1e-12);
        }

        #[test]
        fn updates_stay_non_negative(
            gs in prop::collection::vec(0.0f64..10.0, 1..6),
            devs in prop::collection::vec(0.0f64..10.0, 6),
            tau in 0.0f64..5.0,
            lam in 0.0f64..2.0,
            pick in 0usize..6,
        ) {
            let links: Vec<LinkId> = (0..gs.len()).map(LinkId).collect();
            let mut t = GradientTable::new(NodeIdx(0), &links, 0.0).unwrap();
            let a = NodeIdx(1);
            for (i, &g) in gs.iter().enumerate() {
                t.set(a, LinkId(i), Direction::TowardDestination, g).unwrap();
            }
            let dev_map: BTreeMap<LinkId, f64> = links.iter().map(|&l| (l, devs[l.0])).collect();
            let via = LinkId(pick % gs.len());
            t.update_gradients(a, Direction::TowardDestination, via, tau, &dev_map, lam).unwrap();
            for (_, g) in t.values(a, Direction::TowardDestination) {
                prop_assert!(g >= 0.0);
            }
        }

        #[test]
        fn no_decay_no_utility_is_identity(gs in prop::collection::vec(0.0f64..10.0, 1..6), pick in 0usize..6) {
            let links: Vec<LinkId> = (0..gs.len()).map(LinkId).collect();
            let mut t = GradientTable::new(NodeIdx(0), &links, 0.0).unwrap();
            let a = NodeIdx(1);
            for (i, &g) in gs.iter().enumerate() {
                t.set(a, LinkId(i), Direction::TowardSource, g).unwrap();
            }
            let before = t.clone();
            let dev_map: BTreeMap<LinkId, f64> = links.iter().map(|&l| (l, 3.0)).collect();
            t.update_gradients(a, Direction::TowardSource, LinkId(pick % gs.len()), 0.0, &dev_map, 0.0).unwrap();
            prop_assert_eq!(t.values(a, Direction::TowardSource), before.values(a, Direction::TowardSource));
        }

        #[test]
        fn correlation_even_and_non_increasing(tau in 0.0f64..10.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
            prop_assert_eq!(correlation(tau, a).unwrap(), correlation(tau, -a).unwrap());
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(correlation(tau, hi).unwrap() <= correlation(tau, lo).unwrap());
            let c = correlation(tau, a).unwrap();
            prop_assert!(c > 0.0 && c <= 1.0);
        }
    }
}
