//! Path entanglement gradients held at the two endpoints of a route.
//!
//! Each candidate path `P_i` between source `A` and destination `B` carries
//! a gradient at either end. One update step at `A` is
//!
//! ```text
//! G'_A(i) = κ_AB/(κ_AB+τ_A) · G_A(i) + κ_B/κ_AB · Pr_B(i) · μ_A(i)
//! ```
//!
//! where `Pr_B` is the power-rule distribution over the `B`-side gradients;
//! the `B` update mirrors it. The optimal path maximizes `G'_A`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gradient::{self, link_selection_probability, SelectionParams};
use crate::network::{EntangledPath, QuantumNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// The source `A`.
    Source,
    /// The destination `B`.
    Destination,
}

/// Mean arrival rates of entangled states at the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalRates {
    source: f64,
    destination: f64,
}

impl ArrivalRates {
    pub fn new(source: f64, destination: f64) -> Result<Self> {
        for (name, v) in [("source", source), ("destination", destination)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} arrival rate must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(ArrivalRates {
            source,
            destination,
        })
    }

    /// Symmetric arrivals: each endpoint sees half of `total`.
    pub fn symmetric(total: f64) -> Result<Self> {
        Self::new(total / 2.0, total / 2.0)
    }

    pub fn source(&self) -> f64 {
        self.source
    }

    pub fn destination(&self) -> f64 {
        self.destination
    }

    /// `κ_AB = κ_A + κ_B`.
    pub fn total(&self) -> f64 {
        self.source + self.destination
    }

    /// Rate observed at the opposite endpoint.
    fn opposite(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Source => self.destination,
            Endpoint::Destination => self.source,
        }
    }
}

/// Gradients, received means, and throughputs of one candidate path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGradientState {
    pub path: usize,
    pub gradient_source: f64,
    pub gradient_destination: f64,
    /// Mean gradient received at the source from this path.
    pub mean_source: f64,
    /// Mean gradient received at the destination from this path.
    pub mean_destination: f64,
    pub throughput: f64,
    pub expected_throughput: f64,
}

impl PathGradientState {
    pub fn new(path: usize, initial_gradient: f64, mean_source: f64, mean_destination: f64) -> Self {
        PathGradientState {
            path,
            gradient_source: initial_gradient,
            gradient_destination: initial_gradient,
            mean_source,
            mean_destination,
            throughput: 0.0,
            expected_throughput: 0.0,
        }
    }

    fn gradient(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Source => self.gradient_source,
            Endpoint::Destination => self.gradient_destination,
        }
    }

    fn mean(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Source => self.mean_source,
            Endpoint::Destination => self.mean_destination,
        }
    }

    /// Deviation of the current path throughput from its expected value.
    pub fn throughput_deviation(&self) -> f64 {
        (self.expected_throughput - self.throughput).abs()
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("{name} must be finite and > 0, got {x}")));
    }
    Ok(())
}

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("{name} must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Probability that each path is used by `endpoint`, from that endpoint's gradients.
pub fn path_usage_probabilities(
    states: &[PathGradientState],
    endpoint: Endpoint,
    selection: &SelectionParams,
) -> Result<Vec<f64>> {
    let dist = link_selection_probability(
        states
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.gradient(endpoint)))
            .collect(),
        selection,
    )?;
    Ok(dist.probabilities())
}

/// One gradient update at `endpoint` for every path.
///
/// The usage probability of each path is taken from the opposite endpoint's
/// gradients. Returns the updated gradients in input order.
pub fn update_endpoint_gradient(
    states: &[PathGradientState],
    rates: &ArrivalRates,
    tau: f64,
    endpoint: Endpoint,
    selection: &SelectionParams,
) -> Result<Vec<f64>> {
    if states.is_empty() {
        return Err(Error::domain("no paths to update"));
    }
    let total = rates.total();
    if total == 0.0 {
        return Err(Error::domain("total arrival rate is zero"));
    }
    check_non_negative("endpoint decay rate", tau)?;
    let opposite = match endpoint {
        Endpoint::Source => Endpoint::Destination,
        Endpoint::Destination => Endpoint::Source,
    };
    let usage = path_usage_probabilities(states, opposite, selection)?;
    let retention = total / (total + tau);
    let share = rates.opposite(endpoint) / total;
    states
        .iter()
        .zip(usage)
        .map(|(s, pr)| {
            check_non_negative("path gradient", s.gradient(endpoint))?;
            check_non_negative("received mean", s.mean(endpoint))?;
            Ok(retention * s.gradient(endpoint) + share * pr * s.mean(endpoint))
        })
        .collect()
}

/// Runs `rounds` joint updates of both endpoints, each from the previous
/// round's gradients. Returns the final states.
pub fn iterate_endpoint_gradients(
    states: &[PathGradientState],
    rates: &ArrivalRates,
    tau_source: f64,
    tau_destination: f64,
    selection: &SelectionParams,
    rounds: usize,
) -> Result<Vec<PathGradientState>> {
    let mut current = states.to_vec();
    for _ in 0..rounds {
        let at_source =
            update_endpoint_gradient(&current, rates, tau_source, Endpoint::Source, selection)?;
        let at_destination = update_endpoint_gradient(
            &current,
            rates,
            tau_destination,
            Endpoint::Destination,
            selection,
        )?;
        for ((s, a), b) in current.iter_mut().zip(at_source).zip(at_destination) {
            s.gradient_source = a;
            s.gradient_destination = b;
        }
    }
    Ok(current)
}

/// Mean path gradient when the path is used with probability one:
/// `((κ_AB + τ) κ_other / (κ_AB τ)) μ`.
pub fn mean_path_gradient(rates: &ArrivalRates, tau: f64, mean: f64, endpoint: Endpoint) -> Result<f64> {
    check_non_negative("endpoint decay rate", tau)?;
    check_non_negative("received mean", mean)?;
    if tau == 0.0 {
        return Err(Error::Divergence(
            "mean path gradient has a pole at zero decay rate".into(),
        ));
    }
    let total = rates.total();
    if total == 0.0 {
        return Err(Error::domain("total arrival rate is zero"));
    }
    Ok((total + tau) * rates.opposite(endpoint) / (total * tau) * mean)
}

/// Index of the maximal gradient; ties go to the smallest index.
pub fn select_optimal_path(gradients: &[f64]) -> Result<usize> {
    if gradients.is_empty() {
        return Err(Error::domain("no candidate paths"));
    }
    let mut best = 0;
    for (i, &g) in gradients.iter().enumerate().skip(1) {
        if g.is_nan() {
            return Err(Error::domain(format!("path {i} has a NaN gradient")));
        }
        if g > gradients[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Decay rate implied by a threshold: `-ln(∂ / (E φ))`.
pub fn decay_rate_from_threshold(threshold: f64, expected: f64, deviation: f64) -> Result<f64> {
    check_positive("threshold", threshold)?;
    check_positive("expected gradient", expected)?;
    check_positive("throughput deviation", deviation)?;
    Ok(-(threshold / (expected * deviation)).ln())
}

/// Optimal decay-rate estimate from an observed correlation `Y = e^{-τφ}`.
pub fn optimal_decay_estimator(observed: f64, deviation: f64) -> Result<f64> {
    if !(observed > 0.0 && observed <= 1.0) {
        return Err(Error::domain(format!(
            "observed correlation must lie in (0, 1], got {observed}"
        )));
    }
    check_positive("throughput deviation", deviation)?;
    // -0.0 at Y = 1
    Ok((-observed.ln() / deviation).max(0.0))
}

/// Threshold reached at a given decay rate: `((κ_AB + τ̃)/(2τ̃)) μ e^{-τ̃ φ}`.
pub fn threshold_at_optimal_decay(total_rate: f64, tau: f64, mean: f64, deviation: f64) -> Result<f64> {
    check_positive("total arrival rate", total_rate)?;
    check_non_negative("received mean", mean)?;
    check_non_negative("throughput deviation", deviation)?;
    if tau == 0.0 {
        return Err(Error::Divergence(
            "threshold has a pole at zero decay rate".into(),
        ));
    }
    check_positive("decay rate", tau)?;
    Ok((total_rate + tau) / (2.0 * tau) * mean * (-tau * deviation).exp())
}

/// Gradients received along a path when its links are traversed once from
/// a fresh state.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReplay {
    /// Reinforced toward-source gradient at each node after the source.
    pub forward: Vec<f64>,
    /// Reinforced toward-destination gradient at each node before the destination.
    pub backward: Vec<f64>,
}

impl PathReplay {
    /// Mean gradient received at the source (carried back from the destination).
    pub fn mean_source(&self) -> f64 {
        mean(&self.backward)
    }

    /// Mean gradient received at the destination (carried forward from the source).
    pub fn mean_destination(&self) -> f64 {
        mean(&self.forward)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Replays one traversal of `path`: each link's utility is updated once and
/// the gradient at the receiving node is reinforced from `initial_gradient`.
/// The backward sweep reuses the updated utilities.
pub fn replay_path(
    net: &QuantumNetwork,
    path: &EntangledPath,
    tau: f64,
    initial_gradient: f64,
) -> Result<PathReplay> {
    check_non_negative("initial gradient", initial_gradient)?;
    check_non_negative("decay rate", tau)?;
    let mut deviations = BTreeMap::new();
    let mut deviation = |node, link| -> Result<f64> {
        if let Some(d) = deviations.get(&(node, link)) {
            return Ok(*d);
        }
        let d = net.throughput_deviation(node, link)?;
        deviations.insert((node, link), d);
        Ok(d)
    };
    let mut utilities = Vec::with_capacity(path.hops());
    let mut forward = Vec::with_capacity(path.hops());
    for (h, &l) in path.links.iter().enumerate() {
        let link = net.link(l);
        let lambda = gradient::update_utility(link.utility, link.throughput)?;
        utilities.push(lambda);
        let receiver = path.nodes[h + 1];
        forward.push(initial_gradient * (-tau * deviation(receiver, l)?).exp() + lambda);
    }
    let mut backward = Vec::with_capacity(path.hops());
    for (h, &l) in path.links.iter().enumerate().rev() {
        let receiver = path.nodes[h];
        backward.push(initial_gradient * (-tau * deviation(receiver, l)?).exp() + utilities[h]);
    }
    backward.reverse();
    Ok(PathReplay { forward, backward })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(g: f64, mu: f64) -> Vec<PathGradientState> {
        vec![PathGradientState::new(0, g, mu, mu)]
    }

    #[test]
    fn endpoint_update_example() {
        let rates = ArrivalRates::new(2.0, 2.0).unwrap();
        let g = update_endpoint_gradient(&single(0.0, 1.0), &rates, 1.0, Endpoint::Source, &SelectionParams::default())
            .unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decay_free_input_free_update_retains() {
        let rates = ArrivalRates::new(1.0, 3.0).unwrap();
        let g = update_endpoint_gradient(&single(2.5, 0.0), &rates, 0.0, Endpoint::Source, &SelectionParams::default())
            .unwrap();
        assert_eq!(g[0], 2.5);
    }

    #[test]
    fn identical_paths_update_identically() {
        let rates = ArrivalRates::new(1.0, 3.0).unwrap();
        let states = vec![
            PathGradientState::new(0, 0.3, 1.2, 0.7),
            PathGradientState::new(1, 0.3, 1.2, 0.7),
        ];
        for endpoint in [Endpoint::Source, Endpoint::Destination] {
            let g = update_endpoint_gradient(&states, &rates, 0.5, endpoint, &SelectionParams::default()).unwrap();
            assert_eq!(g[0], g[1]);
        }
    }

    #[test]
    fn endpoint_update_errors() {
        let zero = ArrivalRates::new(0.0, 0.0).unwrap();
        assert!(update_endpoint_gradient(&single(0.0, 1.0), &zero, 1.0, Endpoint::Source, &SelectionParams::default()).is_err());
        let rates = ArrivalRates::new(1.0, 1.0).unwrap();
        assert!(update_endpoint_gradient(&[], &rates, 1.0, Endpoint::Source, &SelectionParams::default()).is_err());
        assert!(ArrivalRates::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn mean_gradient_examples() {
        let rates = ArrivalRates::new(2.0, 2.0).unwrap();
        assert!((mean_path_gradient(&rates, 2.0, 1.0, Endpoint::Source).unwrap() - 1.5).abs() < 1e-15);
        assert!((mean_path_gradient(&rates, 1.0, 1.0, Endpoint::Source).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(mean_path_gradient(&rates, 1.0, 0.0, Endpoint::Source).unwrap(), 0.0);
        assert!(matches!(
            mean_path_gradient(&rates, 0.0, 1.0, Endpoint::Source),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn mean_gradient_uses_opposite_rate() {
        let rates = ArrivalRates::new(1.0, 3.0).unwrap();
        let a = mean_path_gradient(&rates, 1.0, 1.0, Endpoint::Source).unwrap();
        let b = mean_path_gradient(&rates, 1.0, 1.0, Endpoint::Destination).unwrap();
        assert!((a - 5.0 * 3.0 / 4.0).abs() < 1e-15);
        assert!((b - 5.0 * 1.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn iteration_converges_to_mean_gradient() {
        // κ_AB = 4, κ_B = 2, μ = 1, single path so usage probability is 1
        let rates = ArrivalRates::new(2.0, 2.0).unwrap();
        for tau in [0.5, 1.0, 2.0, 4.0] {
            let out = iterate_endpoint_gradients(&single(0.0, 1.0), &rates, tau, tau, &SelectionParams::default(), 2000)
                .unwrap();
            let want = mean_path_gradient(&rates, tau, 1.0, Endpoint::Source).unwrap();
            assert!((out[0].gradient_source - want).abs() < 1e-9, "tau={tau}");
        }
    }

    #[test]
    fn optimal_path_selection() {
        assert_eq!(select_optimal_path(&[1.0]).unwrap(), 0);
        assert_eq!(select_optimal_path(&[0.2, 0.9, 0.5]).unwrap(), 1);
        assert_eq!(select_optimal_path(&[0.7, 0.7]).unwrap(), 0);
        assert!(select_optimal_path(&[]).is_err());
    }

    #[test]
    fn tie_break_matches_exhaustive_comparison() {
        // the chosen index beats every earlier index strictly and no later one is larger
        let gs = [0.3, 0.7, 0.1, 0.7, 0.7, 0.2];
        let best = select_optimal_path(&gs).unwrap();
        assert!((0..best).all(|j| gs[j] < gs[best]));
        assert!((best..gs.len()).all(|j| gs[j] <= gs[best]));
        assert_eq!(best, 1);
    }

    #[test]
    fn threshold_decay_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((decay_rate_from_threshold(1.0, 2.0, 1.0).unwrap() - ln2).abs() < 1e-15);
        assert_eq!(decay_rate_from_threshold(6.0, 2.0, 3.0).unwrap(), 0.0);
        let far = decay_rate_from_threshold(1.0, 2.0, 1e8).unwrap();
        assert!((far - 19.113827924512).abs() < 1e-9);
        assert!(decay_rate_from_threshold(0.0, 2.0, 1.0).is_err());
        assert!(decay_rate_from_threshold(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn estimator_examples() {
        assert!((optimal_decay_estimator((-2.0f64).exp(), 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(optimal_decay_estimator(1.0, 3.0).unwrap(), 0.0);
        assert!((optimal_decay_estimator(0.5, 1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(optimal_decay_estimator(0.0, 1.0).is_err());
        assert!(optimal_decay_estimator(1.5, 1.0).is_err());
    }

    #[test]
    fn threshold_at_decay_examples() {
        assert!((threshold_at_optimal_decay(4.0, 1.0, 1.0, 0.0).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(threshold_at_optimal_decay(4.0, 1.0, 0.0, 0.3).unwrap(), 0.0);
        let half = threshold_at_optimal_decay(4.0, 1.0, 1.0, std::f64::consts::LN_2).unwrap();
        assert!((half - 1.25).abs() < 1e-15);
        assert!(matches!(
            threshold_at_optimal_decay(4.0, 0.0, 1.0, 1.0),
            Err(Error::Divergence(_))
        ));
    }
}
