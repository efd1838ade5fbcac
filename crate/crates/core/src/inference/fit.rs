//! Multi-chain posterior fitting of a survival model.

use super::diagnostics::{diagnostics, ConvergenceDiagnostics};
use super::posterior::{from_unconstrained, log_posterior, to_unconstrained};
use super::prior::PriorSpec;
use super::sampler::{run_chain, ChainConfig};
use super::summary::{summarize_posterior, ParameterSummary};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::likelihood::pointwise_into;
use crate::model::{ModelSpec, ParameterVector};
use crate::rng::stream_rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Jitter (sd, unconstrained scale) applied to each chain's starting point.
const INIT_JITTER: f64 = 0.1;
/// Random-stream offset separating initialisation jitter from the chains.
const INIT_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub chains: usize,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Credible level of the equal-tailed intervals.
    pub level: f64,
    pub priors: PriorSpec,
    /// Keep the `S × n` pointwise log-likelihood matrix (needed for WAIC).
    pub keep_pointwise: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations: 10_000,
            burnin: 5_000,
            thin: 1,
            seed: 1,
            level: 0.95,
            priors: PriorSpec::default(),
            keep_pointwise: true,
        }
    }
}

impl FitConfig {
    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig::new(self.iterations, self.burnin, self.thin, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::SamplerConfig("need at least one chain".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "credible level must lie in (0, 1), got {}",
                self.level
            )));
        }
        self.priors.validate()?;
        self.chain_config().validate()
    }
}

/// Retained draws of every chain, on the original parameter scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub param_names: Vec<String>,
    /// `S × D`, chains stacked in chain order.
    pub draws: Vec<Vec<f64>>,
    /// `S × n` pointwise log-likelihood, row `s` evaluated at `draws[s]`.
    pub pointwise_ll: Option<Vec<Vec<f64>>>,
    /// `chains × D` post-burn-in acceptance rates.
    pub acceptance: Vec<Vec<f64>>,
    pub n_chains: usize,
    pub draws_per_chain: usize,
    pub seed: u64,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn dim(&self) -> usize {
        self.param_names.len()
    }

    /// `chains[c][s][d]` view for diagnostics.
    pub fn by_chain(&self) -> Vec<Vec<Vec<f64>>> {
        self.draws
            .chunks(self.draws_per_chain.max(1))
            .map(|c| c.to_vec())
            .collect()
    }

    pub fn column(&self, d: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[d]).collect()
    }

    pub fn summarize(&self, level: f64) -> Result<Vec<ParameterSummary>> {
        (0..self.dim())
            .map(|d| summarize_posterior(&self.column(d), level))
            .collect()
    }

    pub fn diagnostics(&self) -> Option<ConvergenceDiagnostics> {
        diagnostics(&self.by_chain())
    }
}

/// Crude starting point: every baseline parameter at the exponential rate
/// `events / total time`, `β = 0`, `θ = 0.5`.
pub fn default_initial(data: &Dataset, spec: &ModelSpec) -> ParameterVector {
    let rate = (data.n_events().max(1) as f64) / data.total_time();
    ParameterVector::new(
        vec![rate; spec.n_baseline()],
        vec![0.0; data.n_covariates()],
        if spec.has_frailty() { 0.5 } else { 0.0 },
    )
}

/// Fits `spec` to `data` with `config.chains` independent chains.
///
/// Chain `c` draws from stream `(seed, c)`, so the result does not depend
/// on how many threads run the chains.
pub fn fit_model(
    data: &Dataset,
    spec: &ModelSpec,
    config: &FitConfig,
    init: Option<&ParameterVector>,
) -> Result<PosteriorDraws> {
    config.validate()?;
    spec.validate()?;
    let p = data.n_covariates();
    let start = match init {
        Some(v) => {
            v.validate(spec, p)?;
            v.clone()
        }
        None => default_initial(data, spec),
    };
    let z0 = to_unconstrained(&start, spec);
    let chain_cfg = config.chain_config();
    let target = |z: &[f64]| log_posterior(z, data, spec, &config.priors);
    if !target(&z0).is_finite() {
        return Err(Error::Initialization(target(&z0)));
    }

    let outputs = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(config.seed, INIT_STREAM_OFFSET + c as u64);
            let jitter = Normal::new(0.0, INIT_JITTER).expect("valid sd");
            let mut z: Vec<f64> = z0.iter().map(|v| v + jitter.sample(&mut rng)).collect();
            if !target(&z).is_finite() {
                z = z0.clone();
            }
            run_chain(&z, target, &chain_cfg, c as u64)
        })
        .collect::<Result<Vec<_>>>()?;

    let draws_per_chain = chain_cfg.retained();
    let mut draws = Vec::with_capacity(draws_per_chain * config.chains);
    let mut acceptance = Vec::with_capacity(config.chains);
    for out in &outputs {
        acceptance.push(out.acceptance.clone());
        for z in &out.samples {
            let params = from_unconstrained(z, spec, p).ok_or_else(|| {
                Error::Numerical("retained draw left the parameter space".into())
            })?;
            draws.push(params.to_flat(spec));
        }
    }
    let pointwise_ll = if config.keep_pointwise {
        Some(
            draws
                .par_iter()
                .map(|flat| {
                    let params = ParameterVector::from_flat(flat, spec, p)?;
                    let mut row = Vec::new();
                    pointwise_into(data, &params, spec, &mut row);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };

    Ok(PosteriorDraws {
        param_names: spec.parameter_names(data.covariate_names()),
        draws,
        pointwise_ll,
        acceptance,
        n_chains: config.chains,
        draws_per_chain,
        seed: config.seed,
        iterations: config.iterations,
        burnin: config.burnin,
        thin: config.thin,
    })
}
