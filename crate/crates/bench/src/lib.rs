//! Fixtures shared by the benchmarks.

use frailtykit::rng::stream_rng;
use frailtykit::simulation::{Scenario, Simulator};
use frailtykit::Dataset;

/// A PE + gamma frailty data set with two covariates and pairs of records.
pub fn paired_dataset(n_clusters: usize, seed: u64) -> Dataset {
    let scenario = Scenario::from_json(&format!(
        r#"{{"baseline": {{"family": "pe", "cutpoints": [0, 0.5, 1.5], "rates": [0.5, 1.0, 1.5]}},
            "beta": [0.5, -0.5], "covariates": ["normal", "bernoulli"], "theta": 0.5,
            "n_clusters": {n_clusters}, "cluster_size": 2, "seed": {seed}}}"#
    ))
    .expect("valid scenario");
    Simulator::new(&scenario)
        .and_then(|s| s.simulate(&mut stream_rng(seed, 0)))
        .expect("simulation succeeds")
}
