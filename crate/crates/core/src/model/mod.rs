//! Model families, parameters, hazards and the frailty-marginal likelihood.

pub mod grid;
pub mod hazard;
pub mod likelihood;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub use grid::{build_time_grid, TimeGrid};
pub use hazard::{
    bernstein_basis, bp_cum_hazard, bp_hazard, pe_cum_hazard, pe_hazard, BaselineCurve,
    MAX_BERNSTEIN_DEGREE,
};
pub use likelihood::{cluster_log_likelihood, pointwise_log_likelihood, total_log_likelihood};

/// Margin applied to the largest observed time when `τ` is not given.
pub const DEFAULT_TAU_MARGIN: f64 = 1.01;

/// Baseline hazard family and its structural settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Baseline {
    /// Piecewise exponential on a fixed grid.
    Pe { cutpoints: TimeGrid },
    /// Bernstein polynomial of the given degree on `[0, tau]`.
    Bp { degree: usize, tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frailty {
    /// Cluster-shared, mean-one gamma frailty with variance `θ`.
    Gamma,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub baseline: Baseline,
    pub frailty: Frailty,
}

impl ModelSpec {
    pub fn piecewise(grid: TimeGrid, frailty: Frailty) -> Self {
        Self {
            baseline: Baseline::Pe { cutpoints: grid },
            frailty,
        }
    }

    pub fn bernstein(degree: usize, tau: f64, frailty: Frailty) -> Result<Self> {
        let spec = Self {
            baseline: Baseline::Bp { degree, tau },
            frailty,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Baseline::Bp { degree, tau } = self.baseline {
            if degree == 0 || degree > MAX_BERNSTEIN_DEGREE {
                return Err(Error::InvalidSpec(format!(
                    "Bernstein degree must lie in 1..={MAX_BERNSTEIN_DEGREE}, got {degree}"
                )));
            }
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidSpec(format!("tau must be positive, got {tau}")));
            }
        }
        Ok(())
    }

    /// Number of baseline parameters: `J` rates or `m + 1` coefficients.
    pub fn n_baseline(&self) -> usize {
        match &self.baseline {
            Baseline::Pe { cutpoints } => cutpoints.n_intervals(),
            Baseline::Bp { degree, .. } => degree + 1,
        }
    }

    pub fn has_frailty(&self) -> bool {
        self.frailty == Frailty::Gamma
    }

    /// Total free parameters for `p` covariates.
    pub fn n_params(&self, p: usize) -> usize {
        self.n_baseline() + p + usize::from(self.has_frailty())
    }

    /// Short human-readable label such as `pe5-gamma` or `bp4-none`.
    pub fn label(&self) -> String {
        let frailty = match self.frailty {
            Frailty::Gamma => "gamma",
            Frailty::None => "none",
        };
        match &self.baseline {
            Baseline::Pe { cutpoints } => format!("pe{}-{frailty}", cutpoints.n_intervals()),
            Baseline::Bp { degree, .. } => format!("bp{degree}-{frailty}"),
        }
    }

    /// Parameter names in [`ParameterVector::to_flat`] order.
    pub fn parameter_names(&self, covariate_names: &[String]) -> Vec<String> {
        let mut names: Vec<String> = match &self.baseline {
            Baseline::Pe { cutpoints } => (1..=cutpoints.n_intervals())
                .map(|j| format!("lambda[{j}]"))
                .collect(),
            Baseline::Bp { degree, .. } => (0..=*degree).map(|k| format!("gamma[{k}]")).collect(),
        };
        names.extend(covariate_names.iter().map(|c| format!("beta[{c}]")));
        if self.has_frailty() {
            names.push("theta".to_string());
        }
        names
    }

    /// The baseline curve for the given baseline parameters.
    pub fn curve<'a>(&'a self, baseline: &'a [f64]) -> Result<BaselineCurve<'a>> {
        match &self.baseline {
            Baseline::Pe { cutpoints } => BaselineCurve::piecewise(cutpoints, baseline),
            Baseline::Bp { tau, .. } => BaselineCurve::bernstein(baseline, *tau),
        }
    }
}

/// A baseline family whose structure is fixed from the data at fit time:
/// PE cutpoints at event-time quantiles, Bernstein `τ` defaulting to
/// [`DEFAULT_TAU_MARGIN`] times the largest observed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum BaselineChoice {
    Pe { intervals: usize },
    Bp { degree: usize, tau: Option<f64> },
}

impl BaselineChoice {
    pub fn build(&self, data: &crate::data::Dataset, frailty: Frailty) -> Result<ModelSpec> {
        match *self {
            Self::Pe { intervals } => Ok(ModelSpec::piecewise(
                build_time_grid(&data.event_times(), intervals)?,
                frailty,
            )),
            Self::Bp { degree, tau } => {
                let tau = tau.unwrap_or(DEFAULT_TAU_MARGIN * data.max_time());
                ModelSpec::bernstein(degree, tau, frailty)
            }
        }
    }
}

/// All free parameters of a model.
///
/// `baseline` holds the PE rates `λ_1..λ_J` or the Bernstein coefficients
/// `γ_0..γ_m`, depending on the [`ModelSpec`]. `theta` is the frailty
/// variance (gamma frailty with shape and rate `1/θ`); it is ignored when
/// the model has no frailty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub baseline: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: f64,
}

impl ParameterVector {
    pub fn new(baseline: Vec<f64>, beta: Vec<f64>, theta: f64) -> Self {
        Self {
            baseline,
            beta,
            theta,
        }
    }

    pub fn validate(&self, spec: &ModelSpec, p: usize) -> Result<()> {
        if self.baseline.len() != spec.n_baseline() {
            return Err(Error::InvalidParameter(format!(
                "expected {} baseline parameters, got {}",
                spec.n_baseline(),
                self.baseline.len()
            )));
        }
        if self.beta.len() != p {
            return Err(Error::InvalidParameter(format!(
                "expected {p} regression coefficients, got {}",
                self.beta.len()
            )));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("non-finite regression coefficient".into()));
        }
        match spec.baseline {
            Baseline::Pe { .. } => {
                if self.baseline.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return Err(Error::InvalidParameter("PE rates must be positive".into()));
                }
            }
            Baseline::Bp { .. } => {
                if self.baseline.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                    return Err(Error::InvalidParameter(
                        "Bernstein coefficients must be nonnegative".into(),
                    ));
                }
                if self.baseline.iter().all(|g| *g == 0.0) {
                    return Err(Error::InvalidParameter(
                        "at least one Bernstein coefficient must be positive".into(),
                    ));
                }
            }
        }
        if spec.has_frailty() && !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frailty variance must be nonnegative, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Flattens to `[baseline.., beta.., theta?]`, matching
    /// [`ModelSpec::parameter_names`].
    pub fn to_flat(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = self.baseline.clone();
        v.extend_from_slice(&self.beta);
        if spec.has_frailty() {
            v.push(self.theta);
        }
        v
    }

    pub fn from_flat(flat: &[f64], spec: &ModelSpec, p: usize) -> Result<Self> {
        let nb = spec.n_baseline();
        if flat.len() != spec.n_params(p) {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters, got {}",
                spec.n_params(p),
                flat.len()
            )));
        }
        Ok(Self {
            baseline: flat[..nb].to_vec(),
            beta: flat[nb..nb + p].to_vec(),
            theta: if spec.has_frailty() { flat[nb + p] } else { 0.0 },
        })
    }
}
