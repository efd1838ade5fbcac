//! Component-wise adaptive random-walk Metropolis.
//!
//! Each coordinate is its own block with a Gaussian proposal. During
//! burn-in the log proposal scale of every block is nudged after each batch
//! of [`ADAPT_BATCH`] iterations toward an acceptance rate of
//! [`TARGET_ACCEPTANCE`]; the step shrinks like `1/sqrt(batch)`. Scales are
//! frozen once burn-in ends, so the retained draws come from a fixed Markov
//! kernel.

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const TARGET_ACCEPTANCE: f64 = 0.44;
pub const ADAPT_BATCH: usize = 50;
const MAX_ADAPT_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Starting proposal standard deviation for every block.
    pub initial_scale: f64,
}

impl ChainConfig {
    pub fn new(iterations: usize, burnin: usize, thin: usize, seed: u64) -> Self {
        Self {
            iterations,
            burnin,
            thin,
            seed,
            initial_scale: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burnin {
            return Err(Error::SamplerConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(Error::SamplerConfig("thin must be at least 1".into()));
        }
        if !(self.initial_scale > 0.0 && self.initial_scale.is_finite()) {
            return Err(Error::SamplerConfig("initial scale must be positive".into()));
        }
        Ok(())
    }

    /// `(iterations - burnin) / thin`, rounded down.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burnin) / self.thin
    }
}

/// Output of one chain, in the sampler's (unconstrained) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub samples: Vec<Vec<f64>>,
    pub log_density: Vec<f64>,
    /// Post-burn-in acceptance rate of each block.
    pub acceptance: Vec<f64>,
    /// Proposal scales after adaptation.
    pub scales: Vec<f64>,
}

/// Runs one chain from `init` on `target`, drawing randomness from the
/// stream `(config.seed, stream)`.
pub fn run_chain<F>(init: &[f64], target: F, config: &ChainConfig, stream: u64) -> Result<ChainOutput>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let dim = init.len();
    let mut state = init.to_vec();
    let mut current = target(&state);
    if !current.is_finite() {
        return Err(Error::Initialization(current));
    }
    let mut rng = stream_rng(config.seed, stream);
    let mut log_scale = vec![config.initial_scale.ln(); dim];
    let mut batch_accepts = vec![0usize; dim];
    let mut batch = 0usize;
    let mut kept_accepts = vec![0usize; dim];
    let retained = config.retained();
    let mut samples = Vec::with_capacity(retained);
    let mut log_density = Vec::with_capacity(retained);

    for it in 0..config.iterations {
        let adapting = it < config.burnin;
        for j in 0..dim {
            let old = state[j];
            let step: f64 = rng.sample(StandardNormal);
            state[j] = old + log_scale[j].exp() * step;
            let proposed = target(&state);
            let log_u = rng.gen::<f64>().ln();
            let accept = !proposed.is_nan() && log_u < proposed - current;
            if accept {
                current = proposed;
                if adapting {
                    batch_accepts[j] += 1;
                } else {
                    kept_accepts[j] += 1;
                }
            } else {
                state[j] = old;
            }
        }
        if adapting && (it + 1) % ADAPT_BATCH == 0 {
            batch += 1;
            let delta = (1.0 / (batch as f64).sqrt()).min(MAX_ADAPT_STEP);
            for j in 0..dim {
                let rate = batch_accepts[j] as f64 / ADAPT_BATCH as f64;
                log_scale[j] += if rate > TARGET_ACCEPTANCE { delta } else { -delta };
                batch_accepts[j] = 0;
            }
        }
        if !adapting && (it - config.burnin + 1).is_multiple_of(config.thin) {
            samples.push(state.clone());
            log_density.push(current);
        }
    }

    let kept_iters = (config.iterations - config.burnin) as f64;
    Ok(ChainOutput {
        samples,
        log_density,
        acceptance: kept_accepts.iter().map(|&a| a as f64 / kept_iters).collect(),
        scales: log_scale.iter().map(|s| s.exp()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal(x: &[f64]) -> f64 {
        -0.5 * x[0] * x[0]
    }

    #[test]
    fn retained_length_is_floor_division() {
        let cfg = ChainConfig::new(1003, 500, 4, 1);
        assert_eq!(cfg.retained(), 125);
        let out = run_chain(&[0.0], std_normal, &cfg, 0).unwrap();
        assert_eq!(out.samples.len(), 125);
        assert_eq!(out.log_density.len(), 125);
    }

    #[test]
    fn config_errors() {
        assert!(ChainConfig::new(100, 100, 1, 0).validate().is_err());
        assert!(ChainConfig::new(100, 10, 0, 0).validate().is_err());
        let err = run_chain(&[0.0], |_| f64::NEG_INFINITY, &ChainConfig::new(10, 0, 1, 0), 0);
        assert!(matches!(err, Err(Error::Initialization(_))));
    }

    #[test]
    fn seed_determinism() {
        let cfg = ChainConfig::new(2000, 1000, 1, 42);
        let a = run_chain(&[0.3, -0.2], |x| std_normal(x) - 0.5 * x[1] * x[1], &cfg, 3).unwrap();
        let b = run_chain(&[0.3, -0.2], |x| std_normal(x) - 0.5 * x[1] * x[1], &cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = run_chain(&[0.3, -0.2], |x| std_normal(x) - 0.5 * x[1] * x[1], &cfg, 4).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn standard_normal_moments() {
        let cfg = ChainConfig::new(25_000, 5_000, 1, 11);
        let out = run_chain(&[2.0], std_normal, &cfg, 0).unwrap();
        let xs: Vec<f64> = out.samples.iter().map(|s| s[0]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let ess = crate::inference::diagnostics::effective_sample_size(std::slice::from_ref(&xs)).unwrap();
        assert!(mean.abs() < 3.0 / ess.sqrt(), "mean {mean} ess {ess}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
        assert!(out.acceptance[0] > 0.3 && out.acceptance[0] < 0.6);
    }
}
