use crate::error::{Error, Result};

/// Discrete-time exponential filter estimating the utility process.
///
/// Its impulse response is `e^{-a k}` for `k >= 0` rounds, with
/// `a = τ ΔB_F`, so the running estimate is the convolution of the utility
/// samples with the gradient's decay kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityKernel {
    decay_exponent: f64,
    estimate: f64,
    last_round: u64,
}

impl UtilityKernel {
    /// A cold kernel with decay exponent `τ ΔB_F` per round.
    pub fn new(decay_exponent: f64) -> Result<Self> {
        if !(decay_exponent >= 0.0) || !decay_exponent.is_finite() {
            return Err(Error::domain(format!(
                "decay exponent must be finite and >= 0, got {decay_exponent}"
            )));
        }
        Ok(UtilityKernel {
            decay_exponent,
            estimate: 0.0,
            last_round: 0,
        })
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn last_round(&self) -> u64 {
        self.last_round
    }

    /// Folds in `sample` observed `elapsed_rounds` after the previous one.
    pub fn observe(&mut self, sample: f64, elapsed_rounds: u64) -> Result<f64> {
        if !(sample >= 0.0) || !sample.is_finite() {
            return Err(Error::domain(format!(
                "utility sample must be finite and >= 0, got {sample}"
            )));
        }
        let decay = (-self.decay_exponent * elapsed_rounds as f64).exp();
        self.estimate = self.estimate * decay + sample;
        self.last_round += elapsed_rounds;
        Ok(self.estimate)
    }

    /// Like [`observe`](Self::observe), with the lag taken from an absolute round index.
    pub fn observe_at(&mut self, sample: f64, round: u64) -> Result<f64> {
        let elapsed = round.checked_sub(self.last_round).ok_or_else(|| {
            Error::domain(format!(
                "round {round} precedes the last observation at {}",
                self.last_round
            ))
        })?;
        self.observe(sample, elapsed)
    }
}

/// Functional form of [`UtilityKernel::observe`].
pub fn kernel_estimate(kernel: UtilityKernel, sample: f64, elapsed_rounds: u64) -> Result<UtilityKernel> {
    let mut next = kernel;
    next.observe(sample, elapsed_rounds)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::correlation;

    #[test]
    fn cold_start_returns_sample() {
        for elapsed in [0, 1, 17] {
            let mut k = UtilityKernel::new(0.7).unwrap();
            assert_eq!(k.observe(1.0, elapsed).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_step_decay() {
        let mut k = UtilityKernel::new(1.0).unwrap();
        k.observe(1.0, 0).unwrap();
        let e = k.observe(0.0, 1).unwrap();
        assert!((e - 0.367879441171).abs() < 1e-12);
    }

    #[test]
    fn zero_lag_accumulates() {
        let k = UtilityKernel::new(2.0).unwrap();
        let k = kernel_estimate(k, 0.25, 0).unwrap();
        let k = kernel_estimate(k, 0.25, 0).unwrap();
        assert_eq!(k.estimate(), 0.5);
    }

    #[test]
    fn rejects_negative_sample_and_past_rounds() {
        let mut k = UtilityKernel::new(1.0).unwrap();
        assert!(k.observe(-0.1, 1).is_err());
        k.observe_at(1.0, 5).unwrap();
        assert!(k.observe_at(1.0, 4).is_err());
        assert!(UtilityKernel::new(-1.0).is_err());
    }

    /// Normalized autocorrelation of the impulse response, computed by
    /// direct summation over a finite impulse train.
    fn impulse_autocorrelation(a: f64, steps: usize, lag: usize) -> f64 {
        let mut k = UtilityKernel::new(a).unwrap();
        let mut h = vec![k.observe(1.0, 0).unwrap()];
        for _ in 1..steps {
            h.push(k.observe(0.0, 1).unwrap());
        }
        let energy: f64 = h.iter().map(|x| x * x).sum();
        let cross: f64 = (0..steps - lag).map(|i| h[i] * h[i + lag]).sum();
        cross / energy
    }

    #[test]
    fn impulse_response_autocorrelation_is_exponential() {
        for &a in &[0.5, 1.0, 2.0] {
            for lag in 0..=24usize {
                let got = impulse_autocorrelation(a, 64, lag);
                let want = correlation(a, lag as f64).unwrap();
                assert!((got - want).abs() < 1e-9, "a={a} lag={lag}: {got} vs {want}");
            }
        }
    }
}
