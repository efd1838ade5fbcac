//! Clustered right-censored survival data.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// One subject: cluster label, follow-up time, event flag and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    pub cluster_id: i64,
    /// Event or censoring time, strictly positive.
    pub time: f64,
    /// `true` when the event was observed, `false` when right-censored.
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl ObservationRecord {
    pub fn new(cluster_id: i64, time: f64, event: bool, covariates: Vec<f64>) -> Self {
        Self {
            cluster_id,
            time,
            event,
            covariates,
        }
    }

    /// Status flag in the conventional 0 = censored / 1 = event coding.
    pub fn status(&self) -> u8 {
        u8::from(self.event)
    }

    pub fn linear_predictor(&self, beta: &[f64]) -> f64 {
        self.covariates
            .iter()
            .zip(beta)
            .map(|(x, b)| x * b)
            .sum()
    }
}

/// Records belonging to one cluster, by position in the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub id: i64,
    /// Record indices in ascending order.
    pub members: Vec<usize>,
}

/// A validated collection of [`ObservationRecord`]s grouped into clusters.
///
/// Clusters are ordered by ascending id; within a cluster, records keep
/// their dataset order. Every likelihood sum runs in this order, which
/// makes evaluation independent of how clusters are interleaved on input.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<ObservationRecord>,
    covariate_names: Vec<String>,
    clusters: Vec<Cluster>,
}

impl Dataset {
    /// Builds a dataset with covariates named `x1..xp`.
    pub fn from_records(records: Vec<ObservationRecord>) -> Result<Self> {
        let p = records.first().map_or(0, |r| r.covariates.len());
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Self::new(records, names)
    }

    pub fn new(records: Vec<ObservationRecord>, covariate_names: Vec<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidData("dataset has no records".into()));
        }
        let p = covariate_names.len();
        let mut grouped: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if !(r.time.is_finite() && r.time > 0.0) {
                return Err(Error::InvalidData(format!(
                    "record {} has non-positive or non-finite time {}",
                    i + 1,
                    r.time
                )));
            }
            if r.covariates.len() != p {
                return Err(Error::InvalidData(format!(
                    "record {} has {} covariates, expected {p}",
                    i + 1,
                    r.covariates.len()
                )));
            }
            if r.covariates.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "record {} has a non-finite covariate",
                    i + 1
                )));
            }
            grouped.entry(r.cluster_id).or_default().push(i);
        }
        let clusters = grouped
            .into_iter()
            .map(|(id, members)| Cluster { id, members })
            .collect();
        Ok(Self {
            records,
            covariate_names,
            clusters,
        })
    }

    pub fn records(&self) -> &[ObservationRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ObservationRecord> {
        self.records
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    pub fn total_time(&self) -> f64 {
        self.records.iter().map(|r| r.time).sum()
    }

    pub fn max_time(&self) -> f64 {
        self.records.iter().map(|r| r.time).fold(0.0, f64::max)
    }

    /// Times of the observed events (status = 1), in record order.
    pub fn event_times(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.event)
            .map(|r| r.time)
            .collect()
    }

    /// Records of one cluster in summation order.
    pub fn cluster_records<'a>(
        &'a self,
        cluster: &'a Cluster,
    ) -> impl Iterator<Item = &'a ObservationRecord> + 'a {
        cluster.members.iter().map(move |&i| &self.records[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(c: i64, t: f64, e: bool) -> ObservationRecord {
        ObservationRecord::new(c, t, e, vec![0.0])
    }

    #[test]
    fn clusters_sorted_by_id_members_in_order() {
        let ds = Dataset::from_records(vec![
            rec(7, 1.0, true),
            rec(2, 2.0, false),
            rec(7, 3.0, true),
            rec(2, 0.5, true),
        ])
        .unwrap();
        let ids: Vec<_> = ds.clusters().iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![2, 7]);
        assert_eq!(ds.clusters()[0].members, vec![1, 3]);
        assert_eq!(ds.clusters()[1].members, vec![0, 2]);
        assert_eq!(ds.n_events(), 3);
        assert_eq!(ds.event_times(), vec![1.0, 3.0, 0.5]);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(Dataset::from_records(vec![]).is_err());
        assert!(Dataset::from_records(vec![rec(1, 0.0, true)]).is_err());
        assert!(Dataset::from_records(vec![rec(1, -2.0, true)]).is_err());
        let ragged = vec![rec(1, 1.0, true), ObservationRecord::new(1, 1.0, true, vec![])];
        assert!(Dataset::from_records(ragged).is_err());
    }
}
