use frailtykit::model::{total_log_likelihood, Frailty, ModelSpec, ParameterVector, TimeGrid};
use frailtykit::rng::stream_rng;
use frailtykit::simulation::{Scenario, Simulator};
use frailtykit::Dataset;
use frailtykit_oracle::{kendall_tau, ks_critical_value, ks_statistic};

fn scenario(json: &str) -> Scenario {
    Scenario::from_json(json).unwrap()
}

#[test]
fn exponential_times_pass_ks() {
    let sc = scenario(
        r#"{"baseline": {"family": "pe", "cutpoints": [0], "rates": [1.3]},
            "n_clusters": 2000, "cluster_size": 1, "censoring": {"scheme": "none"}, "seed": 3}"#,
    );
    let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(3, 0)).unwrap();
    let times: Vec<f64> = data.records().iter().map(|r| r.time).collect();
    let d = ks_statistic(&times, |t| 1.0 - (-1.3 * t).exp());
    assert!(d < ks_critical_value(0.01, times.len()), "KS statistic {d}");
}

#[test]
fn bernstein_times_pass_ks() {
    // h(t) = 0.5 + t on [0, 2]: H(t) = 0.5 t + t²/2
    let sc = scenario(
        r#"{"baseline": {"family": "bp", "tau": 2.0, "coefficients": [0.5, 2.5]},
            "n_clusters": 2000, "cluster_size": 1, "censoring": {"scheme": "none"}, "seed": 4}"#,
    );
    let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(4, 0)).unwrap();
    let times: Vec<f64> = data.records().iter().map(|r| r.time).collect();
    let cum = |t: f64| {
        if t <= 2.0 {
            0.5 * t + t * t / 2.0
        } else {
            3.0 + 2.5 * (t - 2.0)
        }
    };
    let d = ks_statistic(&times, |t| 1.0 - (-cum(t)).exp());
    assert!(d < ks_critical_value(0.01, times.len()), "KS statistic {d}");
}

#[test]
fn within_cluster_dependence_grows_with_theta() {
    let mut taus = Vec::new();
    for theta in [0.2, 1.0, 3.0] {
        let sc = scenario(&format!(
            r#"{{"baseline": {{"family": "pe", "cutpoints": [0], "rates": [1.0]}}, "theta": {theta},
                "n_clusters": 800, "cluster_size": 2, "censoring": {{"scheme": "none"}}, "seed": 21}}"#
        ));
        let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(21, 0)).unwrap();
        let pairs: Vec<(f64, f64)> = data
            .clusters()
            .iter()
            .map(|c| (data.records()[c.members[0]].time, data.records()[c.members[1]].time))
            .collect();
        let tau = kendall_tau(&pairs);
        let clayton = theta / (theta + 2.0);
        assert!((tau - clayton).abs() < 0.07, "theta {theta}: tau {tau} vs {clayton}");
        taus.push(tau);
    }
    assert!(taus.windows(2).all(|w| w[0] < w[1]), "{taus:?}");
}

#[test]
fn censoring_hits_target_proportion() {
    for target in [0.1, 0.2, 0.4] {
        let sc = scenario(&format!(
            r#"{{"baseline": {{"family": "pe", "cutpoints": [0, 1], "rates": [0.5, 1.5]}},
                "beta": [0.5], "covariates": ["normal"], "theta": 0.5,
                "n_clusters": 1000, "cluster_size": 2,
                "censoring": {{"scheme": "exponential", "target_proportion": {target}}}, "seed": 8}}"#
        ));
        let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(8, 1)).unwrap();
        let censored = 1.0 - data.n_events() as f64 / data.len() as f64;
        assert!((censored - target).abs() <= 0.03, "target {target}, got {censored}");
    }
}

#[test]
fn administrative_censoring_caps_times() {
    let sc = scenario(
        r#"{"baseline": {"family": "pe", "cutpoints": [0], "rates": [1.0]},
            "censoring": {"scheme": "administrative", "time": 0.7}, "seed": 1}"#,
    );
    let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(1, 0)).unwrap();
    assert!(data.records().iter().all(|r| r.time <= 0.7));
    assert!(data.records().iter().filter(|r| !r.event).all(|r| r.time == 0.7));
}

#[test]
fn same_stream_same_data() {
    let sc = scenario(
        r#"{"baseline": {"family": "pe", "cutpoints": [0, 1], "rates": [0.5, 1.5]},
            "beta": [1.0], "covariates": ["bernoulli"], "theta": 0.8, "seed": 5}"#,
    );
    let sim = Simulator::new(&sc).unwrap();
    let a = sim.simulate(&mut stream_rng(5, 2)).unwrap();
    let b = sim.simulate(&mut stream_rng(5, 2)).unwrap();
    let c = sim.simulate(&mut stream_rng(5, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn likelihood_is_invariant_to_record_order() {
    let sc = scenario(
        r#"{"baseline": {"family": "pe", "cutpoints": [0, 1], "rates": [0.5, 1.5]},
            "beta": [0.3, -0.2], "covariates": ["normal", "normal"], "theta": 0.6,
            "n_clusters": 30, "cluster_size": 3, "seed": 12}"#,
    );
    let data = Simulator::new(&sc).unwrap().simulate(&mut stream_rng(12, 0)).unwrap();
    let mut shuffled = data.records().to_vec();
    shuffled.reverse();
    shuffled.rotate_left(7);
    let permuted = Dataset::new(shuffled, data.covariate_names().to_vec()).unwrap();
    let spec = ModelSpec::piecewise(TimeGrid::new(vec![0.0, 1.0]).unwrap(), Frailty::Gamma);
    let params = ParameterVector::new(vec![0.7, 1.1], vec![0.2, -0.1], 0.4);
    let a = total_log_likelihood(&data, &params, &spec).unwrap();
    let b = total_log_likelihood(&permuted, &params, &spec).unwrap();
    assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
}
