//! Log posterior on the unconstrained scale.
//!
//! Positive parameters (rates, Bernstein coefficients, frailty variance) are
//! sampled as logarithms; regression coefficients are left as they are. The
//! density therefore carries the log-Jacobian `Σ log(positive parameter)`.

use super::prior::PriorSpec;
use crate::data::Dataset;
use crate::model::likelihood::total_unchecked;
use crate::model::{ModelSpec, ParameterVector};

/// Maps original-scale parameters to the sampler's unconstrained vector.
pub fn to_unconstrained(params: &ParameterVector, spec: &ModelSpec) -> Vec<f64> {
    let mut z: Vec<f64> = params.baseline.iter().map(|x| x.ln()).collect();
    z.extend_from_slice(&params.beta);
    if spec.has_frailty() {
        z.push(params.theta.ln());
    }
    z
}

/// Inverse of [`to_unconstrained`]. `None` when an exponentiated component
/// overflows or underflows to zero.
pub fn from_unconstrained(z: &[f64], spec: &ModelSpec, p: usize) -> Option<ParameterVector> {
    let nb = spec.n_baseline();
    let baseline: Vec<f64> = z[..nb].iter().map(|v| v.exp()).collect();
    let theta = if spec.has_frailty() {
        z[nb + p].exp()
    } else {
        0.0
    };
    let positive_ok = |x: &f64| x.is_finite() && *x > 0.0;
    if !baseline.iter().all(positive_ok) || (spec.has_frailty() && !positive_ok(&theta)) {
        return None;
    }
    Some(ParameterVector {
        baseline,
        beta: z[nb..nb + p].to_vec(),
        theta,
    })
}

/// Bundles everything needed to evaluate the posterior at a point.
#[derive(Debug, Clone, Copy)]
pub struct Posterior<'a> {
    pub data: &'a Dataset,
    pub spec: &'a ModelSpec,
    pub priors: &'a PriorSpec,
}

impl<'a> Posterior<'a> {
    pub fn new(data: &'a Dataset, spec: &'a ModelSpec, priors: &'a PriorSpec) -> Self {
        Self { data, spec, priors }
    }

    pub fn dim(&self) -> usize {
        self.spec.n_params(self.data.n_covariates())
    }

    pub fn log_density(&self, z: &[f64]) -> f64 {
        log_posterior(z, self.data, self.spec, self.priors)
    }
}

/// `log p(θ | data)` up to a constant, at the unconstrained point `z`.
///
/// Returns `-inf` for points outside the support (overflowed transforms,
/// non-finite likelihood).
pub fn log_posterior(z: &[f64], data: &Dataset, spec: &ModelSpec, priors: &PriorSpec) -> f64 {
    let p = data.n_covariates();
    if z.len() != spec.n_params(p) || z.iter().any(|v| v.is_nan()) {
        return f64::NEG_INFINITY;
    }
    let Some(params) = from_unconstrained(z, spec, p) else {
        return f64::NEG_INFINITY;
    };
    if params.beta.iter().any(|b| !b.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let ll = total_unchecked(data, &params, spec);
    if ll.is_nan() || ll == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let nb = spec.n_baseline();
    let mut jacobian: f64 = z[..nb].iter().sum();
    if spec.has_frailty() {
        jacobian += z[nb + p];
    }
    let value = ll + priors.log_density(&params, spec) + jacobian;
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ObservationRecord;
    use crate::model::{total_log_likelihood, Frailty, TimeGrid};
    use statrs::distribution::{Continuous, Gamma, Normal};

    fn data(shift: f64) -> Dataset {
        Dataset::from_records(vec![
            ObservationRecord::new(1, 0.7, true, vec![1.0 + shift]),
            ObservationRecord::new(1, 1.9, false, vec![-0.5 + shift]),
            ObservationRecord::new(2, 0.3, true, vec![0.2 + shift]),
        ])
        .unwrap()
    }

    fn spec() -> ModelSpec {
        ModelSpec::piecewise(TimeGrid::new(vec![0.0, 1.0]).unwrap(), Frailty::Gamma)
    }

    #[test]
    fn prior_and_jacobian_by_hand() {
        let d = data(0.0);
        let priors = PriorSpec::default();
        let params = ParameterVector::new(vec![0.6, 1.4], vec![0.3], 0.8);
        let z = to_unconstrained(&params, &spec());
        let lp = log_posterior(&z, &d, &spec(), &priors);
        let ll = total_log_likelihood(&d, &params, &spec()).unwrap();
        let g = Gamma::new(0.01, 0.01).unwrap();
        let n = Normal::new(0.0, 10.0).unwrap();
        let by_hand = g.ln_pdf(0.6)
            + 0.6f64.ln()
            + g.ln_pdf(1.4)
            + 1.4f64.ln()
            + n.ln_pdf(0.3)
            + g.ln_pdf(0.8)
            + 0.8f64.ln();
        assert!((lp - ll - by_hand).abs() < 1e-10);
    }

    #[test]
    fn zero_beta_ignores_covariate_shift() {
        let priors = PriorSpec::default();
        let params = ParameterVector::new(vec![0.6, 1.4], vec![0.0], 0.8);
        let z = to_unconstrained(&params, &spec());
        let a = log_posterior(&z, &data(0.0), &spec(), &priors);
        let b = log_posterior(&z, &data(123.0), &spec(), &priors);
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_is_rejected() {
        let priors = PriorSpec::default();
        let z = vec![0.0, 0.0, 0.0, 800.0];
        assert_eq!(log_posterior(&z, &data(0.0), &spec(), &priors), f64::NEG_INFINITY);
        let z = vec![0.0, -800.0, 0.0, 0.0];
        assert_eq!(log_posterior(&z, &data(0.0), &spec(), &priors), f64::NEG_INFINITY);
        assert_eq!(log_posterior(&[0.0], &data(0.0), &spec(), &priors), f64::NEG_INFINITY);
    }

    #[test]
    fn transform_round_trip() {
        let params = ParameterVector::new(vec![0.6, 1.4], vec![0.3], 0.8);
        let z = to_unconstrained(&params, &spec());
        let back = from_unconstrained(&z, &spec(), 1).unwrap();
        for (a, b) in back.to_flat(&spec()).iter().zip(params.to_flat(&spec())) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
