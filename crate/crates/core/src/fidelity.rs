//! End-to-end fidelity, correlation measurement, and key-leakage bounds for
//! a shared Bell pair over a level-`l` link (hop distance `d = 2^{l−1}`)
//! with per-node error probability `P`.

use crate::error::{Error, Result};
use crate::network::hop_distance;

/// Per-node error probability split into logical and residual parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    logical: f64,
    residual: f64,
}

impl ErrorModel {
    pub fn new(logical: f64, residual: f64) -> Result<Self> {
        check_probability(logical)?;
        check_probability(residual)?;
        check_probability(logical + residual)?;
        Ok(ErrorModel { logical, residual })
    }

    pub fn logical(&self) -> f64 {
        self.logical
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Total per-node error probability.
    pub fn total(&self) -> f64 {
        self.logical + self.residual
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("error probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn survival_pow(p_err: f64, exponent: u64) -> Result<f64> {
    check_probability(p_err)?;
    Ok((1.0 - p_err).powf(exponent as f64))
}

/// `(1−P)^{2d}`.
pub fn entanglement_fidelity(p_err: f64, level: u32) -> Result<f64> {
    survival_pow(p_err, 2 * hop_distance(level)?)
}

/// `(1−P)^{d+1}`.
pub fn correlation_measurement(p_err: f64, level: u32) -> Result<f64> {
    survival_pow(p_err, hop_distance(level)? + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbabilities {
    /// Success of the recovery operations at the `d − 1` intermediate nodes.
    pub recovery: f64,
    /// Success of the final internal correction.
    pub correction: f64,
    /// Fidelity estimate as their product.
    pub fidelity: f64,
}

pub fn success_probabilities(p_err: f64, level: u32) -> Result<SuccessProbabilities> {
    let d = hop_distance(level)?;
    let recovery = survival_pow(p_err, 2 * (d - 1))?;
    let correction = survival_pow(p_err, 2)?;
    Ok(SuccessProbabilities {
        recovery,
        correction,
        fidelity: recovery * correction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBound {
    /// Security parameter `−log₂(1−F)`.
    pub security: f64,
    /// `s − log₂(2 + s + 1/ln 2)`.
    pub exponent: f64,
    /// `2^{−c} + 2^{−2s}`; values above 1 are vacuous but returned as-is.
    pub bound: f64,
}

/// Upper bound on information leaked to an eavesdropper at fidelity `F`.
///
/// The asymptotic `2^{O(−2s)}` term is taken with constant 1.
pub fn leakage_bound(fidelity: f64) -> Result<LeakageBound> {
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::domain(format!("fidelity must lie in (0, 1), got {fidelity}")));
    }
    let s = -(1.0 - fidelity).log2();
    let c = s - (2.0 + s + 1.0 / std::f64::consts::LN_2).log2();
    Ok(LeakageBound {
        security: s,
        exponent: c,
        bound: (-c).exp2() + (-2.0 * s).exp2(),
    })
}
