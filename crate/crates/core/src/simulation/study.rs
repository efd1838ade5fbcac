//! Monte Carlo recovery and model-selection studies.
//!
//! Replica `k` draws its data from stream `(seed, k)` and fits with seed
//! `derive_seed(seed, k)`. Replicas run in parallel and are reduced in index
//! order, so results are identical for any thread count.

use super::generate::Simulator;
use super::metrics::{mc_metrics_lenient, McMetricsRow};
use super::scenario::Scenario;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inference::{fit_model, ConvergenceDiagnostics, ParameterSummary};
use crate::model::{BaselineChoice, Frailty, ModelSpec};
use crate::rng::{derive_seed, stream_rng};
use crate::selection::{waic, WaicResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Studies fail when more than this fraction of replicas is flagged.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

/// Posterior summaries of one replica, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaFit {
    pub summaries: Vec<ParameterSummary>,
    pub diagnostics: Option<ConvergenceDiagnostics>,
}

/// Anything that turns a simulated data set into posterior summaries.
pub trait ReplicaFitter: Sync {
    fn parameter_names(&self) -> Vec<String>;
    fn fit(&self, data: &Dataset, seed: u64) -> Result<ReplicaFit>;
}

/// Fits a fixed [`ModelSpec`] by MCMC.
#[derive(Debug, Clone)]
pub struct McmcFitter {
    pub spec: ModelSpec,
    pub scenario: Scenario,
}

impl McmcFitter {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        Self {
            spec: scenario.fit_spec(),
            scenario: scenario.clone(),
        }
    }
}

impl ReplicaFitter for McmcFitter {
    fn parameter_names(&self) -> Vec<String> {
        self.spec.parameter_names(&self.scenario.covariate_names())
    }

    fn fit(&self, data: &Dataset, seed: u64) -> Result<ReplicaFit> {
        let cfg = self.scenario.fit.fit_config(seed, false);
        let draws = fit_model(data, &self.spec, &cfg, None)?;
        Ok(ReplicaFit {
            summaries: draws.summarize(cfg.level)?,
            diagnostics: draws.diagnostics(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicaStatus {
    Ok,
    /// Fitted, but split-R̂ exceeded the threshold. Still aggregated.
    NotConverged,
    /// No estimates; excluded from the metrics.
    FitFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRecord {
    pub replica: usize,
    pub status: ReplicaStatus,
    pub message: Option<String>,
    pub summaries: Vec<ParameterSummary>,
    pub covered: Vec<bool>,
    pub max_rhat: Option<f64>,
    pub min_ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McStudy {
    pub parameter_names: Vec<String>,
    pub truth: Vec<f64>,
    pub rows: Vec<McMetricsRow>,
    pub replicas: Vec<ReplicaRecord>,
    pub level: f64,
    pub seed: u64,
    pub failed: usize,
    /// More than [`MAX_FAILED_FRACTION`] of the replicas were flagged.
    pub study_failed: bool,
    pub warnings: Vec<String>,
}

fn run_replica<F: ReplicaFitter>(
    sim: &Simulator,
    fitter: &F,
    truth: &[f64],
    k: usize,
    rhat_threshold: f64,
) -> ReplicaRecord {
    let seed = sim.scenario().seed;
    let outcome = sim
        .simulate(&mut stream_rng(seed, k as u64))
        .and_then(|data| fitter.fit(&data, derive_seed(seed, k as u64)));
    match outcome {
        Ok(fit) => {
            let covered = fit
                .summaries
                .iter()
                .zip(truth)
                .map(|(s, &t)| s.contains(t))
                .collect();
            let max_rhat = fit.diagnostics.as_ref().map(|d| d.max_rhat());
            let min_ess = fit.diagnostics.as_ref().map(|d| d.min_ess());
            let converged = max_rhat.is_none_or(|r| r <= rhat_threshold);
            ReplicaRecord {
                replica: k,
                status: if converged {
                    ReplicaStatus::Ok
                } else {
                    ReplicaStatus::NotConverged
                },
                message: None,
                summaries: fit.summaries,
                covered,
                max_rhat,
                min_ess,
            }
        }
        Err(e) => ReplicaRecord {
            replica: k,
            status: ReplicaStatus::FitFailed,
            message: Some(e.to_string()),
            summaries: Vec::new(),
            covered: Vec::new(),
            max_rhat: None,
            min_ess: None,
        },
    }
}

/// Simulate → fit → summarise `replicas` times, then aggregate per parameter.
///
/// Posterior means are the estimates, posterior sds the standard errors, and
/// the equal-tailed intervals at `scenario.fit.level` decide coverage.
pub fn run_monte_carlo<F: ReplicaFitter>(
    scenario: &Scenario,
    fitter: &F,
    replicas: usize,
) -> Result<McStudy> {
    if replicas < 2 {
        return Err(Error::Config(format!("need at least 2 replicas, got {replicas}")));
    }
    let sim = Simulator::new(scenario)?;
    let names = fitter.parameter_names();
    let spec = scenario.fit_spec();
    let truth = scenario.truth().to_flat(&spec);
    if truth.len() != names.len() {
        return Err(Error::Config(format!(
            "fitter reports {} parameters, scenario has {}",
            names.len(),
            truth.len()
        )));
    }
    let threshold = scenario.fit.rhat_threshold;
    let records: Vec<ReplicaRecord> = (0..replicas)
        .into_par_iter()
        .map(|k| run_replica(&sim, fitter, &truth, k, threshold))
        .collect();

    let failed = records
        .iter()
        .filter(|r| r.status != ReplicaStatus::Ok)
        .count();
    let usable: Vec<&ReplicaRecord> = records
        .iter()
        .filter(|r| r.status != ReplicaStatus::FitFailed)
        .collect();
    let study_failed = failed as f64 > MAX_FAILED_FRACTION * replicas as f64;
    let level = scenario.fit.level;
    let mut rows = Vec::with_capacity(names.len());
    if usable.len() >= 2 {
        for (d, name) in names.iter().enumerate() {
            let estimates: Vec<f64> = usable.iter().map(|r| r.summaries[d].mean).collect();
            let ses: Vec<f64> = usable.iter().map(|r| r.summaries[d].sd).collect();
            let covered: Vec<bool> = usable.iter().map(|r| r.covered[d]).collect();
            rows.push(mc_metrics_lenient(name, truth[d], &estimates, &ses, &covered)?);
        }
    }
    let warnings: Vec<String> = rows
        .iter()
        .filter_map(|r| r.undercoverage_warning(level))
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    if study_failed {
        log::warn!("{failed} of {replicas} replicas failed or did not converge");
    }
    let too_few = usable.len() < 2;
    Ok(McStudy {
        parameter_names: names,
        truth,
        rows,
        replicas: records,
        level,
        seed: scenario.seed,
        failed,
        study_failed: study_failed || too_few,
        warnings,
    })
}

/// A candidate model in a WAIC selection study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub baseline: BaselineChoice,
    pub frailty: Frailty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReplica {
    pub replica: usize,
    /// One result per candidate, in candidate order; `None` if the fit failed.
    pub waic: Vec<Option<WaicResult>>,
    /// Name of the candidate with the smallest WAIC.
    pub selected: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStudy {
    pub candidates: Vec<String>,
    pub replicas: Vec<SelectionReplica>,
}

impl SelectionStudy {
    /// Fraction of replicas whose WAIC winner is `name`.
    pub fn selection_rate(&self, name: &str) -> f64 {
        let hits = self
            .replicas
            .iter()
            .filter(|r| r.selected.as_deref() == Some(name))
            .count();
        hits as f64 / self.replicas.len() as f64
    }
}

/// Simulates from `scenario` and fits every candidate to each replica,
/// recording WAIC. Candidate structure (grid, `τ`) is built from each
/// replica's data.
pub fn run_selection_study(
    scenario: &Scenario,
    candidates: &[Candidate],
    replicas: usize,
) -> Result<SelectionStudy> {
    if candidates.len() < 2 {
        return Err(Error::IncomparableModels("need at least two candidates".into()));
    }
    let sim = Simulator::new(scenario)?;
    let seed = scenario.seed;
    let results: Vec<SelectionReplica> = (0..replicas)
        .into_par_iter()
        .map(|k| {
            let data = sim.simulate(&mut stream_rng(seed, k as u64));
            let fits: Vec<Option<WaicResult>> = candidates
                .iter()
                .enumerate()
                .map(|(c, cand)| {
                    let data = data.as_ref().ok()?;
                    let spec = cand.baseline.build(data, cand.frailty).ok()?;
                    let cfg = scenario
                        .fit
                        .fit_config(derive_seed(derive_seed(seed, k as u64), c as u64), true);
                    let draws = fit_model(data, &spec, &cfg, None).ok()?;
                    waic(draws.pointwise_ll.as_deref()?).ok()
                })
                .collect();
            let named: Vec<(String, WaicResult)> = candidates
                .iter()
                .zip(&fits)
                .filter_map(|(c, w)| w.clone().map(|w| (c.name.clone(), w)))
                .collect();
            let selected = if named.len() >= 2 {
                crate::selection::compare(&named)
                    .ok()
                    .map(|rows| rows[0].model.clone())
            } else {
                None
            };
            SelectionReplica {
                replica: k,
                waic: fits,
                selected,
            }
        })
        .collect();
    Ok(SelectionStudy {
        candidates: candidates.iter().map(|c| c.name.clone()).collect(),
        replicas: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeGrid;
    use crate::simulation::scenario::{Censoring, CovariateKind, TrueBaseline};

    /// Returns the truth as a degenerate posterior.
    struct Oracle {
        names: Vec<String>,
        truth: Vec<f64>,
    }

    impl ReplicaFitter for Oracle {
        fn parameter_names(&self) -> Vec<String> {
            self.names.clone()
        }

        fn fit(&self, _: &Dataset, _: u64) -> Result<ReplicaFit> {
            Ok(ReplicaFit {
                summaries: self
                    .truth
                    .iter()
                    .map(|&t| ParameterSummary {
                        mean: t,
                        sd: 0.0,
                        median: t,
                        lower: t,
                        upper: t,
                    })
                    .collect(),
                diagnostics: None,
            })
        }
    }

    struct Flaky;

    impl ReplicaFitter for Flaky {
        fn parameter_names(&self) -> Vec<String> {
            vec!["lambda[1]".into(), "beta[x1]".into(), "theta".into()]
        }

        fn fit(&self, data: &Dataset, _: u64) -> Result<ReplicaFit> {
            if data.records()[0].time < 0.5 {
                return Err(Error::Numerical("flaky".into()));
            }
            Oracle {
                names: self.parameter_names(),
                truth: vec![1.0, 0.5, 0.3],
            }
            .fit(data, 0)
        }
    }

    fn scenario() -> Scenario {
        Scenario {
            baseline: TrueBaseline::Pe {
                cutpoints: TimeGrid::single(),
                rates: vec![1.0],
            },
            beta: vec![0.5],
            theta: 0.3,
            covariates: vec![CovariateKind::Normal],
            n_clusters: 10,
            cluster_size: 2,
            censoring: Censoring::None,
            seed: 17,
            replicas: 10,
            fit: Default::default(),
        }
    }

    #[test]
    fn harness_identity() {
        let s = scenario();
        let fitter = Oracle {
            names: vec!["lambda[1]".into(), "beta[x1]".into(), "theta".into()],
            truth: vec![1.0, 0.5, 0.3],
        };
        let study = run_monte_carlo(&s, &fitter, 10).unwrap();
        assert_eq!(study.rows.len(), 3);
        for row in &study.rows {
            assert_eq!(row.rb_percent, Some(0.0));
            assert_eq!(row.sde, 0.0);
            assert_eq!(row.cp, 1.0);
            assert_eq!(row.m_c, 10);
        }
        assert!(!study.study_failed);
        assert_eq!(study.failed, 0);
    }

    #[test]
    fn failures_are_counted_not_dropped() {
        let study = run_monte_carlo(&scenario(), &Flaky, 40).unwrap();
        let failed = study
            .replicas
            .iter()
            .filter(|r| r.status == ReplicaStatus::FitFailed)
            .count();
        assert!(failed > 0);
        assert_eq!(study.failed, failed);
        assert_eq!(study.replicas.len(), 40);
        assert_eq!(study.rows[0].m_c, 40 - failed);
        assert_eq!(study.study_failed, failed as f64 > 8.0);
    }

    #[test]
    fn too_few_replicas() {
        assert!(run_monte_carlo(&scenario(), &Flaky, 1).is_err());
    }
}
