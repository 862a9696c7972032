use crate::error::{Error, Result};
use crate::gradient::Distribution;

/// Thresholded sum of log-ratios of successive gradients:
/// `Φ = Σ α_x ln(G_{x+1}/G_x)`, where `α_x = 1` iff the log-ratio exceeds
/// `threshold` in magnitude.
pub fn path_signal(gradients: &[f64], threshold: f64) -> Result<f64> {
    if gradients.len() < 2 {
        return Err(Error::domain("a path signal needs at least two gradients"));
    }
    if !(threshold >= 0.0) {
        return Err(Error::domain(format!("signal threshold must be >= 0, got {threshold}")));
    }
    if let Some(g) = gradients.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::domain(format!(
            "path signal needs finite positive gradients, got {g}"
        )));
    }
    Ok(gradients
        .windows(2)
        .map(|w| (w[1] / w[0]).ln())
        .filter(|s| s.abs() > threshold)
        .sum())
}

pub fn mean_path_signal(signals: &[f64]) -> Result<f64> {
    if signals.is_empty() {
        return Err(Error::domain("no path signals to average"));
    }
    Ok(signals.iter().sum::<f64>() / signals.len() as f64)
}

/// How the selection probability enters the distance function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiForm {
    /// `(1/Pr) |E_n − E_z|`.
    #[default]
    Inverse,
    /// `Pr |E_n − E_z|`.
    Direct,
}

impl std::str::FromStr for PsiForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq36" | "inverse" => Ok(PsiForm::Inverse),
            "eq44" | "direct" => Ok(PsiForm::Direct),
            other => Err(Error::config(format!(
                "unknown psi form `{other}` (expected inverse or direct)"
            ))),
        }
    }
}

/// Distance across a candidate link: `(1/Pr)·|E_n − E_z|`.
pub fn distance(pr_link: f64, mean_here: f64, mean_there: f64) -> Result<f64> {
    distance_with(PsiForm::Inverse, pr_link, mean_here, mean_there)
}

pub fn distance_with(form: PsiForm, pr_link: f64, mean_here: f64, mean_there: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pr_link) {
        return Err(Error::domain(format!("link probability must lie in [0, 1], got {pr_link}")));
    }
    let gap = (mean_here - mean_there).abs();
    if gap.is_nan() {
        return Err(Error::domain("mean gradient is NaN"));
    }
    match form {
        PsiForm::Inverse if pr_link == 0.0 => Err(Error::Singularity(
            "distance needs a link probability > 0".into(),
        )),
        PsiForm::Inverse => Ok(gap / pr_link),
        PsiForm::Direct => Ok(gap * pr_link),
    }
}

/// `θ = 1/G'`.
pub fn inverse_gradient(gradient: f64) -> Result<f64> {
    if gradient == 0.0 {
        return Err(Error::Singularity("inverse of a zero gradient".into()));
    }
    if !(gradient > 0.0) || !gradient.is_finite() {
        return Err(Error::domain(format!("gradient must be finite and > 0, got {gradient}")));
    }
    Ok(1.0 / gradient)
}

/// Explore `(1, 0)` while the mean signal is at most `threshold`, else exploit `(0, 1)`.
pub fn select_weights(mean_signal: f64, threshold: f64) -> (f64, f64) {
    if mean_signal <= threshold {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Next-hop distribution of one thread: an unvisited candidate gets weight
/// `θ^{C1} ψ^{C2}`, a visited one gets exactly zero.
///
/// Candidates are `(key, θ, ψ)`. A zero exponent contributes a factor of 1
/// even for a zero base. Fails with a degenerate-distribution error when no
/// unvisited candidate carries weight.
pub fn thread_step_distribution<K>(
    candidates: Vec<(K, f64, f64)>,
    visited: impl Fn(&K) -> bool,
    c1: f64,
    c2: f64,
) -> Result<Distribution<K>> {
    if !(c1 >= 0.0 && c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::domain(format!("weights must be finite and >= 0, got ({c1}, {c2})")));
    }
    let term = |base: f64, exp: f64| if exp == 0.0 { 0.0 } else { exp * base.ln() };
    let mut logs = Vec::with_capacity(candidates.len());
    for (k, theta, psi) in candidates {
        if !(theta >= 0.0 && psi >= 0.0) || !theta.is_finite() || !psi.is_finite() {
            return Err(Error::domain(format!(
                "candidate needs finite θ, ψ >= 0, got ({theta}, {psi})"
            )));
        }
        let w = if visited(&k) {
            f64::NEG_INFINITY
        } else {
            term(theta, c1) + term(psi, c2)
        };
        logs.push((k, w));
    }
    Distribution::from_log_weights(logs)
}
