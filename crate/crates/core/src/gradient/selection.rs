//! Link-selection probability distributions.

use crate::error::{Error, Result};

/// Threshold, exponent, and source weight shared by the selection rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    /// Additive threshold `∂ ≥ 0`.
    pub threshold: f64,
    /// Tuning exponent `χ ≥ 0`.
    pub exponent: f64,
    /// Weight `ξ ≥ 0` on the source-side distribution.
    pub source_weight: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            threshold: 1.0,
            exponent: 1.0,
            source_weight: 0.0,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("threshold", self.threshold),
            ("exponent", self.exponent),
            ("source weight", self.source_weight),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "selection {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A finite probability distribution over candidates, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<K> {
    entries: Vec<(K, f64)>,
}

impl<K> Distribution<K> {
    /// Normalizes non-negative weights. Fails if every weight is zero.
    pub fn from_weights(weights: Vec<(K, f64)>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("a distribution needs at least one candidate"));
        }
        if let Some((_, w)) = weights.iter().find(|(_, w)| !(*w >= 0.0) || w.is_nan()) {
            return Err(Error::domain(format!("invalid selection weight {w}")));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if total == 0.0 {
            return Err(Error::Degenerate("all candidate weights are zero".into()));
        }
        if !total.is_finite() {
            return Err(Error::domain("selection weights overflow"));
        }
        Ok(Distribution {
            entries: weights.into_iter().map(|(k, w)| (k, w / total)).collect(),
        })
    }

    /// Normalizes weights given as natural logarithms. `-inf` is a zero weight.
    pub fn from_log_weights(log_weights: Vec<(K, f64)>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::domain("a distribution needs at least one candidate"));
        }
        if log_weights.iter().any(|(_, w)| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::domain("invalid log weight"));
        }
        let max = log_weights
            .iter()
            .map(|(_, w)| *w)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::Degenerate("all candidate weights are zero".into()));
        }
        Self::from_weights(
            log_weights
                .into_iter()
                .map(|(k, w)| (k, (w - max).exp()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.entries.iter().map(|(k, p)| (k, *p))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, p)| *p).collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Inverse-CDF sampling with `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> &K {
        let mut acc = 0.0;
        let mut last = None;
        for (k, p) in &self.entries {
            if *p > 0.0 {
                acc += p;
                last = Some(k);
                if u < acc {
                    return k;
                }
            }
        }
        last.expect("a distribution has positive mass")
    }
}

impl<K: PartialEq> Distribution<K> {
    pub fn probability(&self, key: &K) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, p)| *p)
    }
}

/// `(G + ∂)^χ` normalized over candidates, evaluated in log space.
fn power_rule<K>(gradients: Vec<(K, f64)>, params: &SelectionParams) -> Result<Distribution<K>> {
    params.validate()?;
    if let Some((_, g)) = gradients.iter().find(|(_, g)| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::domain(format!(
            "gradients must be finite and >= 0, got {g}"
        )));
    }
    if params.exponent == 0.0 {
        return Distribution::from_weights(gradients.into_iter().map(|(k, _)| (k, 1.0)).collect());
    }
    Distribution::from_log_weights(
        gradients
            .into_iter()
            .map(|(k, g)| (k, params.exponent * (g + params.threshold).ln()))
            .collect(),
    )
}

/// Probability of forwarding over each candidate toward the destination:
/// `(G'_z + ∂)^χ / Σ_k (G'_k + ∂)^χ`.
pub fn link_selection_probability<K>(
    gradients: Vec<(K, f64)>,
    params: &SelectionParams,
) -> Result<Distribution<K>> {
    power_rule(gradients, params)
}

/// The same rule over the toward-source gradients `G'^y_{A,x}`.
pub fn source_selection_probability<K>(
    gradients: Vec<(K, f64)>,
    params: &SelectionParams,
) -> Result<Distribution<K>> {
    power_rule(gradients, params)
}

/// Combines forward probabilities with their paired backward probabilities:
/// `p(z) ∝ Pr_fwd(z) · Pr_bwd(x_z)^{-ξ}`.
///
/// Each candidate is `(key, forward, backward)`, where `backward` is the
/// source-side probability of the link paired with that forward candidate.
pub fn normalized_selection_distribution<K>(
    candidates: Vec<(K, f64, f64)>,
    source_weight: f64,
) -> Result<Distribution<K>> {
    if !(source_weight >= 0.0) || !source_weight.is_finite() {
        return Err(Error::domain(format!(
            "source weight must be finite and >= 0, got {source_weight}"
        )));
    }
    let mut weights = Vec::with_capacity(candidates.len());
    for (k, fwd, bwd) in candidates {
        if !(0.0..=1.0).contains(&fwd) || !(0.0..=1.0).contains(&bwd) {
            return Err(Error::domain(format!(
                "component probabilities must lie in [0, 1], got ({fwd}, {bwd})"
            )));
        }
        let factor = if source_weight == 0.0 {
            1.0
        } else if bwd == 0.0 {
            return Err(Error::Singularity(
                "backward probability 0 raised to a negative power".into(),
            ));
        } else {
            bwd.powf(-source_weight)
        };
        weights.push((k, fwd * factor));
    }
    Distribution::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(threshold: f64, exponent: f64) -> SelectionParams {
        SelectionParams {
            threshold,
            exponent,
            source_weight: 0.0,
        }
    }

    fn probs(d: &Distribution<usize>) -> Vec<f64> {
        d.probabilities()
    }

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn forward_examples() {
        let d = link_selection_probability(vec![(0, 1.0), (1, 1.0)], &params(0.0, 1.0)).unwrap();
        assert_close(&probs(&d), &[0.5, 0.5]);
        let d = link_selection_probability(vec![(0, 3.0), (1, 1.0)], &params(0.0, 1.0)).unwrap();
        assert_close(&probs(&d), &[0.75, 0.25]);
        let d = link_selection_probability(vec![(0, 9.0), (1, 0.0), (2, 2.0)], &params(0.0, 0.0))
            .unwrap();
        assert_close(&probs(&d), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn source_examples() {
        let d = source_selection_probability(vec![(0, 2.0), (1, 2.0)], &params(1.0, 1.0)).unwrap();
        assert_close(&probs(&d), &[0.5, 0.5]);
        let d = source_selection_probability(vec![(0, 2.0), (1, 0.0)], &params(0.0, 1.0)).unwrap();
        assert_close(&probs(&d), &[1.0, 0.0]);
        let d = source_selection_probability(vec![(0, 2.0), (1, 1.0)], &params(1.0, 2.0)).unwrap();
        assert_close(&probs(&d), &[9.0 / 13.0, 4.0 / 13.0]);
    }

    #[test]
    fn degenerate_is_an_error() {
        let err = link_selection_probability(vec![(0, 0.0), (1, 0.0)], &params(0.0, 1.0));
        assert!(matches!(err, Err(Error::Degenerate(_))));
        assert!(link_selection_probability(Vec::<(usize, f64)>::new(), &params(1.0, 1.0)).is_err());
        assert!(link_selection_probability(vec![(0, -1.0)], &params(1.0, 1.0)).is_err());
        assert!(link_selection_probability(vec![(0, 1.0)], &params(-1.0, 1.0)).is_err());
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let d = link_selection_probability(vec![(0, 1e6), (1, 2e6)], &params(0.0, 500.0)).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!(d.probabilities()[1] > 0.999);
    }

    #[test]
    fn normalized_examples() {
        let d = normalized_selection_distribution(vec![(0, 0.75, 0.2), (1, 0.25, 0.9)], 0.0).unwrap();
        assert_close(&probs(&d), &[0.75, 0.25]);
        let d = normalized_selection_distribution(vec![(0, 0.5, 0.5), (1, 0.5, 0.5)], 2.0).unwrap();
        assert_close(&probs(&d), &[0.5, 0.5]);
        let d = normalized_selection_distribution(vec![(0, 0.75, 0.5), (1, 0.25, 0.5)], 1.0).unwrap();
        assert_close(&probs(&d), &[0.75, 0.25]);
    }

    #[test]
    fn normalized_backward_weight_shifts_mass() {
        // a low source-side probability is up-weighted by its inverse
        let d = normalized_selection_distribution(vec![(0, 0.5, 0.25), (1, 0.5, 1.0)], 1.0).unwrap();
        assert_close(&probs(&d), &[0.8, 0.2]);
    }

    #[test]
    fn normalized_singularity() {
        let err = normalized_selection_distribution(vec![(0, 0.5, 0.0), (1, 0.5, 0.5)], 1.0);
        assert!(matches!(err, Err(Error::Singularity(_))));
        assert!(normalized_selection_distribution(vec![(0, 0.5, 0.0), (1, 0.5, 0.5)], 0.0).is_ok());
    }

    #[test]
    fn sampling_follows_cdf() {
        let d = Distribution::from_weights(vec![('a', 1.0), ('b', 0.0), ('c', 3.0)]).unwrap();
        assert_eq!(*d.sample(0.0), 'a');
        assert_eq!(*d.sample(0.2499), 'a');
        assert_eq!(*d.sample(0.25), 'c');
        assert_eq!(*d.sample(0.999_999_999), 'c');
    }
}
