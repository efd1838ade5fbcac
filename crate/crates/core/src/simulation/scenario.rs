use crate::error::{Error, Result};
use crate::inference::{FitConfig, PriorSpec};
use crate::model::{Frailty, ModelSpec, ParameterVector, TimeGrid};
use serde::{Deserialize, Serialize};

/// Data-generating baseline hazard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrueBaseline {
    Pe { cutpoints: TimeGrid, rates: Vec<f64> },
    /// Degree is `coefficients.len() - 1`.
    Bp { tau: f64, coefficients: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    /// Standard normal.
    Normal,
    /// Bernoulli(0.5) coded 0/1.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase", deny_unknown_fields)]
pub enum Censoring {
    None,
    /// Everyone still at risk at `time` is censored there.
    Administrative { time: f64 },
    /// Independent exponential censoring whose rate is tuned so the
    /// expected censored fraction equals `target_proportion`.
    Exponential { target_proportion: f64 },
}

impl Default for Censoring {
    fn default() -> Self {
        Censoring::Exponential {
            target_proportion: 0.2,
        }
    }
}

/// Sampler settings used for every replica of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyFitSettings {
    pub chains: usize,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub level: f64,
    pub priors: PriorSpec,
    /// Frailty of the fitted model; defaults to gamma iff the truth has `θ > 0`.
    pub frailty: Option<Frailty>,
    /// Replicas whose largest split-R̂ exceeds this are flagged.
    pub rhat_threshold: f64,
}

impl Default for StudyFitSettings {
    fn default() -> Self {
        Self {
            chains: 2,
            iterations: 4_000,
            burnin: 2_000,
            thin: 1,
            level: 0.95,
            priors: PriorSpec::default(),
            frailty: None,
            rhat_threshold: 1.1,
        }
    }
}

impl StudyFitSettings {
    pub fn fit_config(&self, seed: u64, keep_pointwise: bool) -> FitConfig {
        FitConfig {
            chains: self.chains,
            iterations: self.iterations,
            burnin: self.burnin,
            thin: self.thin,
            seed,
            level: self.level,
            priors: self.priors,
            keep_pointwise,
        }
    }
}

fn default_clusters() -> usize {
    100
}
fn default_cluster_size() -> usize {
    2
}
fn default_replicas() -> usize {
    100
}

/// A complete simulation scenario, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub baseline: TrueBaseline,
    #[serde(default)]
    pub beta: Vec<f64>,
    /// Frailty variance; 0 disables the frailty.
    #[serde(default)]
    pub theta: f64,
    /// One generator per covariate column, matching `beta`.
    #[serde(default)]
    pub covariates: Vec<CovariateKind>,
    #[serde(default = "default_clusters")]
    pub n_clusters: usize,
    #[serde(default = "default_cluster_size")]
    pub cluster_size: usize,
    #[serde(default)]
    pub censoring: Censoring,
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub fit: StudyFitSettings,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.cluster_size == 0 {
            return Err(Error::Config("n_clusters and cluster_size must be at least 1".into()));
        }
        if self.covariates.len() != self.beta.len() {
            return Err(Error::Config(format!(
                "{} covariate generators for {} coefficients",
                self.covariates.len(),
                self.beta.len()
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!("theta must be nonnegative, got {}", self.theta)));
        }
        match self.censoring {
            Censoring::None => {}
            Censoring::Administrative { time } if !(time > 0.0 && time.is_finite()) => {
                return Err(Error::Config("administrative censoring time must be positive".into()))
            }
            Censoring::Exponential { target_proportion } if !(0.0..1.0).contains(&target_proportion) => {
                return Err(Error::Config("target censoring proportion must lie in [0, 1)".into()))
            }
            _ => {}
        }
        let spec = self.true_spec();
        spec.validate()?;
        let truth = self.truth();
        truth.validate(&spec, self.beta.len())?;
        if let TrueBaseline::Bp { coefficients, .. } = &self.baseline {
            if coefficients.last().copied().unwrap_or(0.0) <= 0.0 {
                return Err(Error::Config(
                    "the last Bernstein coefficient must be positive so the hazard stays positive past tau".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn frailty(&self) -> Frailty {
        if self.theta > 0.0 {
            Frailty::Gamma
        } else {
            Frailty::None
        }
    }

    /// The data-generating model.
    pub fn true_spec(&self) -> ModelSpec {
        let baseline = match &self.baseline {
            TrueBaseline::Pe { cutpoints, .. } => crate::model::Baseline::Pe {
                cutpoints: cutpoints.clone(),
            },
            TrueBaseline::Bp { tau, coefficients } => crate::model::Baseline::Bp {
                degree: coefficients.len().saturating_sub(1),
                tau: *tau,
            },
        };
        ModelSpec {
            baseline,
            frailty: self.frailty(),
        }
    }

    /// The model fitted in a recovery study: true baseline structure with
    /// the configured frailty.
    pub fn fit_spec(&self) -> ModelSpec {
        ModelSpec {
            frailty: self.fit.frailty.unwrap_or_else(|| self.frailty()),
            ..self.true_spec()
        }
    }

    pub fn truth(&self) -> ParameterVector {
        let baseline = match &self.baseline {
            TrueBaseline::Pe { rates, .. } => rates.clone(),
            TrueBaseline::Bp { coefficients, .. } => coefficients.clone(),
        };
        ParameterVector::new(baseline, self.beta.clone(), self.theta)
    }

    pub fn covariate_names(&self) -> Vec<String> {
        (1..=self.beta.len()).map(|j| format!("x{j}")).collect()
    }
}
