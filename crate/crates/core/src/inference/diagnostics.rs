//! Convergence diagnostics: split-R̂ and autocorrelation-based effective
//! sample size with Geyer's initial positive sequence truncation.

use serde::{Deserialize, Serialize};

/// Fewest draws per chain for which any diagnostic is attempted.
const MIN_DRAWS_PER_CHAIN: usize = 4;
/// With a single chain, at least this many draws are required.
const MIN_SINGLE_CHAIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDiagnostics {
    pub split_rhat: Vec<f64>,
    pub ess: Vec<f64>,
}

impl ConvergenceDiagnostics {
    pub fn max_rhat(&self) -> f64 {
        self.split_rhat.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_ess(&self) -> f64 {
        self.ess.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn usable(chains: &[Vec<f64>]) -> Option<usize> {
    let n = chains.iter().map(Vec::len).min()?;
    if n < MIN_DRAWS_PER_CHAIN || (chains.len() < 2 && n < MIN_SINGLE_CHAIN_DRAWS) {
        return None;
    }
    if chains.iter().flatten().any(|x| !x.is_finite()) {
        return None;
    }
    Some(n)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Potential scale reduction computed on chains split in half.
///
/// Chains are truncated to the shortest length; with an odd length the
/// middle draw is dropped. `None` when there are too few draws.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    let n = usable(chains)?;
    let half = n / 2;
    let pieces: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[n - half..n]])
        .collect();
    let means: Vec<f64> = pieces.iter().map(|p| mean(p)).collect();
    let within = pieces.iter().map(|p| sample_var(p)).sum::<f64>() / pieces.len() as f64;
    let between = half as f64 * sample_var(&means);
    if within == 0.0 {
        return Some(if between == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let h = half as f64;
    let var_plus = (h - 1.0) / h * within + between / h;
    Some((var_plus / within).sqrt())
}

/// Multi-chain effective sample size.
///
/// Autocorrelations are combined across chains as
/// `ρ_t = 1 - (W - mean_c γ_{c,t}) / var⁺`, summed in adjacent pairs until
/// the first non-positive pair. Capped at `N·log10(N)`.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Option<f64> {
    let n = usable(chains)?;
    let m = chains.len();
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let autocov = |c: usize, lag: usize| -> f64 {
        let x = chains[c];
        let mu = means[c];
        (0..n - lag).map(|i| (x[i] - mu) * (x[i + lag] - mu)).sum::<f64>() / n as f64
    };
    let nf = n as f64;
    let total = (m * n) as f64;
    let acov0: Vec<f64> = (0..m).map(|c| autocov(c, 0)).collect();
    let within = acov0.iter().map(|a| a * nf / (nf - 1.0)).sum::<f64>() / m as f64;
    let between_over_n = if m > 1 { sample_var(&means) } else { 0.0 };
    let var_plus = within * (nf - 1.0) / nf + between_over_n;
    if var_plus == 0.0 {
        return Some(total);
    }
    let rho = |lag: usize| -> f64 {
        let mean_acov = (0..m).map(|c| autocov(c, lag)).sum::<f64>() / m as f64;
        1.0 - (within - mean_acov) / var_plus
    };
    let mut pair_sum = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = if lag == 0 { 1.0 + rho(1) } else { rho(lag) + rho(lag + 1) };
        if pair <= 0.0 {
            break;
        }
        pair_sum += pair;
        lag += 2;
    }
    let tau = (-1.0 + 2.0 * pair_sum).max(1.0 / total.log10());
    Some((total / tau).min(total * total.log10()))
}

/// Split-R̂ and ESS for every parameter. `chains[c][s][d]` is draw `s` of
/// parameter `d` in chain `c`. `None` when there are too few draws.
pub fn diagnostics(chains: &[Vec<Vec<f64>>]) -> Option<ConvergenceDiagnostics> {
    let dim = chains.first()?.first()?.len();
    let mut split = Vec::with_capacity(dim);
    let mut ess = Vec::with_capacity(dim);
    for d in 0..dim {
        let per_chain: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| c.iter().map(|draw| draw[d]).collect())
            .collect();
        split.push(split_rhat(&per_chain)?);
        ess.push(effective_sample_size(&per_chain)?);
    }
    Some(ConvergenceDiagnostics {
        split_rhat: split,
        ess,
    })
}
