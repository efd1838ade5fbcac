use crate::error::{Error, Result};
use crate::model::{ModelSpec, ParameterVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Independent priors on every free parameter.
///
/// Baseline rates or Bernstein coefficients get `Gamma(shape, rate)`,
/// regression coefficients `Normal(0, beta_sd)`, and the frailty variance
/// `Gamma(theta_shape, theta_rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSpec {
    pub baseline_shape: f64,
    pub baseline_rate: f64,
    pub beta_sd: f64,
    pub theta_shape: f64,
    pub theta_rate: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            baseline_shape: 0.01,
            baseline_rate: 0.01,
            beta_sd: 10.0,
            theta_shape: 0.01,
            theta_rate: 0.01,
        }
    }
}

fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

fn normal_ln_pdf(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.baseline_shape,
            self.baseline_rate,
            self.beta_sd,
            self.theta_shape,
            self.theta_rate,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("prior hyperparameters must be positive".into()));
        }
        Ok(())
    }

    /// Log prior density on the original parameter scale.
    pub fn log_density(&self, params: &ParameterVector, spec: &ModelSpec) -> f64 {
        let mut lp: f64 = params
            .baseline
            .iter()
            .map(|&x| gamma_ln_pdf(x, self.baseline_shape, self.baseline_rate))
            .sum();
        lp += params
            .beta
            .iter()
            .map(|&b| normal_ln_pdf(b, self.beta_sd))
            .sum::<f64>();
        if spec.has_frailty() {
            lp += gamma_ln_pdf(params.theta, self.theta_shape, self.theta_rate);
        }
        lp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frailty, TimeGrid};
    use statrs::distribution::{Continuous, Gamma, Normal};

    #[test]
    fn matches_reference_densities() {
        let spec = ModelSpec::piecewise(TimeGrid::new(vec![0.0, 1.0]).unwrap(), Frailty::Gamma);
        let prior = PriorSpec {
            baseline_shape: 2.0,
            baseline_rate: 3.0,
            beta_sd: 1.5,
            theta_shape: 0.7,
            theta_rate: 1.2,
        };
        let params = ParameterVector::new(vec![0.4, 1.3], vec![-0.6], 0.9);
        let g = Gamma::new(2.0, 3.0).unwrap();
        let n = Normal::new(0.0, 1.5).unwrap();
        let t = Gamma::new(0.7, 1.2).unwrap();
        let want = g.ln_pdf(0.4) + g.ln_pdf(1.3) + n.ln_pdf(-0.6) + t.ln_pdf(0.9);
        assert!((prior.log_density(&params, &spec) - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_hyperparameters() {
        let mut p = PriorSpec::default();
        assert!(p.validate().is_ok());
        p.beta_sd = 0.0;
        assert!(p.validate().is_err());
    }
}
