//! Frequency response of gradient reception at a node.
//!
//! A node with observation rate `κ` and decay rate `τ` filters incoming
//! gradient with gain `γ = κ/(κ+τ)`; its magnitude response is
//! `ρ(ν) = |1/(1 − γ e^{-iν})|`, peaking at `1/(1−γ)` for `ν = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_gain(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::domain(format!("gain must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// `γ = κ/(κ+τ)`.
pub fn gain(kappa: f64, tau: f64) -> Result<f64> {
    if !(kappa >= 0.0 && tau >= 0.0) || !kappa.is_finite() || !tau.is_finite() {
        return Err(Error::domain(format!(
            "observation and decay rates must be finite and >= 0, got κ={kappa}, τ={tau}"
        )));
    }
    if kappa + tau == 0.0 {
        return Err(Error::domain("gain is undefined when κ + τ = 0"));
    }
    Ok(kappa / (kappa + tau))
}

/// `1/√(1 + γ² − 2γ cos ν)`.
pub fn response(gamma: f64, nu: f64) -> Result<f64> {
    check_gain(gamma)?;
    if !nu.is_finite() {
        return Err(Error::domain(format!("angular variable must be finite, got {nu}")));
    }
    Ok(1.0 / (1.0 + gamma * gamma - 2.0 * gamma * nu.cos()).sqrt())
}

/// Response at a node, with `ν` restricted to `[−2π/κ, 2π/κ]`.
pub fn node_response(kappa: f64, tau: f64, nu: f64) -> Result<f64> {
    let gamma = gain(kappa, tau)?;
    let bound = 2.0 * PI / kappa;
    if nu.abs() > bound {
        return Err(Error::domain(format!(
            "angular variable {nu} outside [-{bound}, {bound}] for κ={kappa}"
        )));
    }
    response(gamma, nu)
}

/// Peak of the response, `1/(1−γ)`.
pub fn peak(gamma: f64) -> Result<f64> {
    peak_mean_gradient(1.0, gamma)
}

/// Mean gradient at the response peak: `μ/(1−γ)`.
pub fn peak_mean_gradient(mean: f64, gamma: f64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("received mean must be finite and >= 0, got {mean}")));
    }
    if gamma >= 1.0 {
        return Err(Error::Divergence(format!("peak diverges at gain {gamma} >= 1")));
    }
    check_gain(gamma)?;
    Ok(mean / (1.0 - gamma))
}

/// Argument of the arccos in [`cutoff_rate`]; exposed so sweeps can probe
/// the valid region first.
pub fn cutoff_argument(kappa: f64, tau: f64, peak_fraction: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("observation rate must be finite and > 0, got {kappa}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("decay rate must be finite and >= 0, got {tau}")));
    }
    if !(peak_fraction > 0.0 && peak_fraction <= 1.0) {
        return Err(Error::domain(format!(
            "peak fraction must lie in (0, 1], got {peak_fraction}"
        )));
    }
    let base = kappa * kappa + kappa * tau;
    let pi2 = peak_fraction * peak_fraction;
    Ok((base - (tau * tau + pi2 * tau * tau) / (2.0 * pi2)) / base)
}

/// Cutoff observation rate `(κ/2π)·arccos(arg)` at peak fraction `Π`.
///
/// An argument outside `[−1, 1]` is an error rather than being clamped.
pub fn cutoff_rate(kappa: f64, tau: f64, peak_fraction: f64) -> Result<f64> {
    let arg = cutoff_argument(kappa, tau, peak_fraction)?;
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::domain(format!(
            "cutoff arccos argument {arg} outside [-1, 1] (κ={kappa}, τ={tau}, Π={peak_fraction})"
        )));
    }
    Ok(kappa / (2.0 * PI) * arg.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn response_examples() {
        assert_eq!(response(0.0, 1.3).unwrap(), 1.0);
        assert!((response(0.5, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((response(0.9, 0.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(response(1.0, 0.5).is_err());
        assert!(response(-0.1, 0.5).is_err());
    }

    #[test]
    fn response_matches_complex_magnitude() {
        for &g in &[0.0, 0.1, 0.5, 0.8, 0.9, 0.99] {
            for k in -40..=40 {
                let nu = k as f64 * PI / 40.0;
                let z = Complex64::new(1.0, 0.0) - g * Complex64::from_polar(1.0, -nu);
                let want = 1.0 / z.norm();
                assert!((response(g, nu).unwrap() - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn peak_examples() {
        assert!((peak_mean_gradient(3.0, 0.5).unwrap() - 6.0).abs() < 1e-15);
        assert_eq!(peak_mean_gradient(0.0, 0.3).unwrap(), 0.0);
        assert!((peak_mean_gradient(1.0, 0.9).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(peak_mean_gradient(1.0, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn gain_forms_agree() {
        for &(k, t) in &[(1.0, 1.0), (4.0, 0.5), (1e4, 1e3), (3.0, 0.0)] {
            let g = gain(k, t).unwrap();
            assert!((g - 1.0 / (1.0 + t / k)).abs() < 1e-12);
        }
    }

    #[test]
    fn node_response_enforces_band() {
        assert!(node_response(1.0, 1.0, 2.0 * PI).is_ok());
        assert!(node_response(1.0, 1.0, 2.0 * PI + 1e-9).is_err());
        assert!(node_response(4.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_rate(1e4, 0.0, 0.5).unwrap(), 0.0);
        let a = cutoff_rate(1e4, 1e3, 0.5).unwrap();
        assert!((a - 339.96543799839156).abs() < 1e-9, "{a}");
        let b = cutoff_rate(1e4, 1e2, 0.5).unwrap();
        assert!((b - 35.41218).abs() < 1e-4, "{b}");
    }

    #[test]
    fn cutoff_out_of_range_reports_argument() {
        let err = cutoff_rate(1.0, 10.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("argument")));
    }

    #[test]
    fn cutoff_increases_with_decay_rate() {
        for &k in &[1e4, 1e5, 1e6, 1e7, 1e8] {
            let mut prev = -1.0;
            for i in 0..=40 {
                let tau = k * 1e-4 * 10f64.powf(i as f64 / 10.0);
                let Ok(c) = cutoff_rate(k, tau, 0.5) else { break };
                assert!(c > prev, "κ={k} τ={tau}");
                prev = c;
            }
        }
    }
}
