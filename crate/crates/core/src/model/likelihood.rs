//! Log-likelihood of clustered right-censored data, with the shared gamma
//! frailty integrated out in closed form.
//!
//! For a cluster with `d` events and load `A = Σ_j H0(t_j) e^{x_j'β}`:
//!
//! ```text
//! log L = Σ_{l<d} log(1 + lθ) + Σ_{events} [log h0(t_j) + x_j'β]
//!         − (1/θ + d) · log(1 + θA)
//! ```
//!
//! The first sum is `log[Γ(1/θ + d) / Γ(1/θ) · θ^d]` written as a finite
//! product, which stays accurate as `θ → 0` where the log-gamma difference
//! cancels catastrophically. At `θ = 0` the expression is replaced by its
//! limit, the ordinary proportional-hazards log-likelihood.

use super::hazard::BaselineCurve;
use super::{ModelSpec, ParameterVector};
use crate::data::{Dataset, ObservationRecord};
use crate::error::{Error, Result};

/// Per-cluster sufficient quantities.
struct ClusterTerms {
    events: usize,
    /// `Σ_events [log h0 + η]`; `-inf` when some event has zero hazard.
    log_hazard: f64,
    /// `Σ H0 e^η`
    load: f64,
}

#[inline]
fn accumulate<'a, I>(records: I, curve: &BaselineCurve<'_>, beta: &[f64]) -> ClusterTerms
where
    I: IntoIterator<Item = &'a ObservationRecord>,
{
    let mut terms = ClusterTerms {
        events: 0,
        log_hazard: 0.0,
        load: 0.0,
    };
    for r in records {
        let eta = r.linear_predictor(beta);
        let (h, cum) = curve.eval(r.time);
        if r.event {
            terms.events += 1;
            terms.log_hazard += if h > 0.0 { h.ln() + eta } else { f64::NEG_INFINITY };
        }
        terms.load += cum * eta.exp();
    }
    terms
}

#[inline]
fn marginal(terms: &ClusterTerms, theta: f64, frailty: bool) -> f64 {
    if !frailty || theta == 0.0 {
        return terms.log_hazard - terms.load;
    }
    let mut ll = terms.log_hazard;
    for l in 1..terms.events {
        ll += (l as f64 * theta).ln_1p();
    }
    ll - (1.0 / theta + terms.events as f64) * (theta * terms.load).ln_1p()
}

fn check(params: &ParameterVector, spec: &ModelSpec, p: usize) -> Result<()> {
    spec.validate()?;
    params.validate(spec, p)
}

/// Log marginal likelihood of one cluster's records.
///
/// Returns `-inf` (not an error) when an event falls where the baseline
/// hazard is zero.
pub fn cluster_log_likelihood<'a, I>(records: I, params: &ParameterVector, spec: &ModelSpec) -> Result<f64>
where
    I: IntoIterator<Item = &'a ObservationRecord>,
{
    let records: Vec<&ObservationRecord> = records.into_iter().collect();
    if records.is_empty() {
        return Err(Error::Domain("cluster has no records".into()));
    }
    for r in &records {
        if r.time.is_nan() || r.time <= 0.0 {
            return Err(Error::Domain(format!("non-positive time {}", r.time)));
        }
    }
    check(params, spec, records[0].covariates.len())?;
    let curve = spec.curve(&params.baseline)?;
    let terms = accumulate(records.iter().copied(), &curve, &params.beta);
    Ok(marginal(&terms, params.theta, spec.has_frailty()))
}

/// Sum of the cluster contributions, clusters in ascending id order.
pub fn total_log_likelihood(data: &Dataset, params: &ParameterVector, spec: &ModelSpec) -> Result<f64> {
    check(params, spec, data.n_covariates())?;
    Ok(total_unchecked(data, params, spec))
}

pub(crate) fn total_unchecked(data: &Dataset, params: &ParameterVector, spec: &ModelSpec) -> f64 {
    let curve = match spec.curve(&params.baseline) {
        Ok(c) => c,
        Err(_) => return f64::NEG_INFINITY,
    };
    let frailty = spec.has_frailty();
    let mut total = 0.0;
    for cluster in data.clusters() {
        let terms = accumulate(data.cluster_records(cluster), &curve, &params.beta);
        total += marginal(&terms, params.theta, frailty);
    }
    total
}

/// Log-likelihood split into its exchangeable units: one entry per cluster
/// (ascending id) under gamma frailty, one per record (dataset order)
/// without frailty. Entries sum to [`total_log_likelihood`].
pub fn pointwise_log_likelihood(
    data: &Dataset,
    params: &ParameterVector,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    check(params, spec, data.n_covariates())?;
    let mut out = Vec::new();
    pointwise_into(data, params, spec, &mut out);
    Ok(out)
}

pub(crate) fn pointwise_into(
    data: &Dataset,
    params: &ParameterVector,
    spec: &ModelSpec,
    out: &mut Vec<f64>,
) {
    out.clear();
    let curve = spec
        .curve(&params.baseline)
        .expect("parameters validated by caller");
    if spec.has_frailty() {
        out.extend(data.clusters().iter().map(|c| {
            let terms = accumulate(data.cluster_records(c), &curve, &params.beta);
            marginal(&terms, params.theta, true)
        }));
    } else {
        out.extend(data.records().iter().map(|r| {
            let terms = accumulate(std::iter::once(r), &curve, &params.beta);
            marginal(&terms, 0.0, false)
        }));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frailty, TimeGrid};
    use approx::assert_relative_eq;
    use frailtykit_oracle::{frailty_cluster_log_marginal, FrailtyTerm};

    fn pe_spec(frailty: Frailty) -> ModelSpec {
        ModelSpec::piecewise(TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap(), frailty)
    }

    fn small_data() -> Dataset {
        Dataset::from_records(vec![
            ObservationRecord::new(1, 0.4, true, vec![0.3]),
            ObservationRecord::new(1, 2.5, false, vec![-1.0]),
            ObservationRecord::new(2, 1.2, true, vec![1.5]),
            ObservationRecord::new(3, 0.9, true, vec![0.0]),
            ObservationRecord::new(3, 1.8, true, vec![0.7]),
            ObservationRecord::new(3, 3.1, false, vec![-0.2]),
        ])
        .unwrap()
    }

    #[test]
    fn censored_exponential_cluster() {
        let recs = vec![
            ObservationRecord::new(1, 0.5, false, vec![]),
            ObservationRecord::new(1, 1.7, false, vec![]),
            ObservationRecord::new(1, 2.9, false, vec![]),
        ];
        let params = ParameterVector::new(vec![0.8; 3], vec![], 0.0);
        let ll = cluster_log_likelihood(&recs, &params, &pe_spec(Frailty::Gamma)).unwrap();
        assert_relative_eq!(ll, -0.8 * (0.5 + 1.7 + 2.9), epsilon = 1e-14);
    }

    #[test]
    fn small_theta_approaches_no_frailty() {
        let data = small_data();
        let mut params = ParameterVector::new(vec![0.5, 1.1, 0.7], vec![0.4], 1e-8);
        let with = total_log_likelihood(&data, &params, &pe_spec(Frailty::Gamma)).unwrap();
        params.theta = 0.0;
        let without = total_log_likelihood(&data, &params, &pe_spec(Frailty::None)).unwrap();
        assert!((with - without).abs() < 1e-5);
    }

    #[test]
    fn matches_frailty_quadrature() {
        let data = small_data();
        let spec = pe_spec(Frailty::Gamma);
        let params = ParameterVector::new(vec![0.5, 1.1, 0.7], vec![0.4], 0.8);
        let curve = spec.curve(&params.baseline).unwrap();
        for c in data.clusters() {
            let terms: Vec<FrailtyTerm> = data
                .cluster_records(c)
                .map(|r| {
                    let (h, cum) = curve.eval(r.time);
                    FrailtyTerm {
                        hazard: h,
                        cum_hazard: cum,
                        linear_predictor: r.linear_predictor(&params.beta),
                        event: r.event,
                    }
                })
                .collect();
            let want = frailty_cluster_log_marginal(&terms, params.theta);
            let got = cluster_log_likelihood(data.cluster_records(c), &params, &spec).unwrap();
            assert!((got - want).abs() < 1e-6, "cluster {} got {got} want {want}", c.id);
        }
    }

    #[test]
    fn zero_hazard_event_is_neg_infinity() {
        let spec = ModelSpec::bernstein(1, 2.0, Frailty::Gamma).unwrap();
        let params = ParameterVector::new(vec![1.0, 0.0], vec![], 0.5);
        // past τ the hazard is frozen at γ_m = 0
        let recs = [ObservationRecord::new(1, 3.0, true, vec![])];
        let ll = cluster_log_likelihood(&recs, &params, &spec).unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn pointwise_units_and_additivity() {
        let data = small_data();
        let params = ParameterVector::new(vec![0.5, 1.1, 0.7], vec![0.4], 0.8);
        let gamma = pe_spec(Frailty::Gamma);
        let none = pe_spec(Frailty::None);
        let pw = pointwise_log_likelihood(&data, &params, &gamma).unwrap();
        assert_eq!(pw.len(), data.n_clusters());
        let total = total_log_likelihood(&data, &params, &gamma).unwrap();
        assert!((pw.iter().sum::<f64>() - total).abs() < 1e-12);
        let pw = pointwise_log_likelihood(&data, &params, &none).unwrap();
        assert_eq!(pw.len(), data.len());
        let total = total_log_likelihood(&data, &params, &none).unwrap();
        assert!((pw.iter().sum::<f64>() - total).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        let data = small_data();
        let spec = pe_spec(Frailty::Gamma);
        let bad = ParameterVector::new(vec![0.5, -1.0, 0.7], vec![0.4], 0.8);
        assert!(total_log_likelihood(&data, &bad, &spec).is_err());
        let wrong_p = ParameterVector::new(vec![0.5, 1.0, 0.7], vec![], 0.8);
        assert!(total_log_likelihood(&data, &wrong_p, &spec).is_err());
        let empty: Vec<ObservationRecord> = vec![];
        let ok = ParameterVector::new(vec![0.5, 1.0, 0.7], vec![], 0.8);
        assert!(matches!(
            cluster_log_likelihood(&empty, &ok, &spec),
            Err(Error::Domain(_))
        ));
    }
}
