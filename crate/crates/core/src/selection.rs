//! WAIC and WAIC-based model ranking.
//!
//! ```text
//! lppd   = Σ_i log( (1/S) Σ_s exp(ll[s][i]) )
//! p_waic = Σ_i V_s ll[s][i],   V_s a_s = (1/S) Σ_s (a_s − ā)²
//! elppd  = lppd − p_waic
//! WAIC   = −2 · elppd
//! ```
//!
//! The variance uses the `1/S` divisor, not `1/(S−1)`. Lower WAIC is better.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn check_finite(ll: &[Vec<f64>]) -> Result<usize> {
    let n = ll.first().map_or(0, Vec::len);
    if ll.is_empty() || n == 0 {
        return Err(Error::InsufficientDraws {
            needed: 1,
            got: ll.len(),
        });
    }
    for (s, row) in ll.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidData(format!(
                "row {s} of the log-likelihood matrix has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLogLikelihood { draw: s, point: i });
        }
    }
    Ok(n)
}

fn point_lppd(ll: &[Vec<f64>], i: usize) -> f64 {
    let max = ll.iter().map(|row| row[i]).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ll.iter().map(|row| (row[i] - max).exp()).sum();
    max + (sum / ll.len() as f64).ln()
}

fn point_variance(ll: &[Vec<f64>], i: usize) -> f64 {
    // centred on the first draw, so a constant column gives exactly zero
    let s = ll.len() as f64;
    let anchor = ll[0][i];
    let mean = ll.iter().map(|row| row[i] - anchor).sum::<f64>() / s;
    ll.iter().map(|row| (row[i] - anchor - mean).powi(2)).sum::<f64>() / s
}

/// Log pointwise predictive density of an `S × n` log-likelihood matrix.
pub fn lppd(ll: &[Vec<f64>]) -> Result<f64> {
    let n = check_finite(ll)?;
    Ok((0..n).map(|i| point_lppd(ll, i)).sum())
}

/// Effective number of parameters: summed `1/S` posterior variances.
pub fn p_waic(ll: &[Vec<f64>]) -> Result<f64> {
    let n = check_finite(ll)?;
    if ll.len() < 2 {
        return Err(Error::InsufficientDraws {
            needed: 2,
            got: ll.len(),
        });
    }
    Ok((0..n).map(|i| point_variance(ll, i)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicResult {
    pub lppd: f64,
    pub p_waic: f64,
    pub elppd_waic: f64,
    pub waic: f64,
    /// Per-point `−2·(lppd_i − p_waic_i)`; sums to `waic`.
    pub pointwise: Vec<f64>,
}

impl WaicResult {
    pub fn n_points(&self) -> usize {
        self.pointwise.len()
    }
}

pub fn waic(ll: &[Vec<f64>]) -> Result<WaicResult> {
    let n = check_finite(ll)?;
    if ll.len() < 2 {
        return Err(Error::InsufficientDraws {
            needed: 2,
            got: ll.len(),
        });
    }
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut pointwise = Vec::with_capacity(n);
    for i in 0..n {
        let l = point_lppd(ll, i);
        let v = point_variance(ll, i);
        lppd += l;
        p_waic += v;
        pointwise.push(-2.0 * (l - v));
    }
    let elppd_waic = lppd - p_waic;
    Ok(WaicResult {
        lppd,
        p_waic,
        elppd_waic,
        waic: -2.0 * elppd_waic,
        pointwise,
    })
}

/// One row of a model comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub lppd: f64,
    pub p_waic: f64,
    pub elppd: f64,
    pub waic: f64,
    /// WAIC minus the best (smallest) WAIC.
    pub delta: f64,
}

/// Ranks models by ascending WAIC; ties go to the lexicographically
/// smaller name. All models must share the same pointwise unit count.
pub fn compare(results: &[(String, WaicResult)]) -> Result<Vec<ComparisonRow>> {
    if results.len() < 2 {
        return Err(Error::IncomparableModels(format!(
            "need at least two models, got {}",
            results.len()
        )));
    }
    let n = results[0].1.n_points();
    if let Some((name, r)) = results.iter().find(|(_, r)| r.n_points() != n) {
        return Err(Error::IncomparableModels(format!(
            "model `{name}` has {} pointwise terms, `{}` has {n}",
            r.n_points(),
            results[0].0
        )));
    }
    let mut order: Vec<&(String, WaicResult)> = results.iter().collect();
    order.sort_by(|a, b| a.1.waic.total_cmp(&b.1.waic).then_with(|| a.0.cmp(&b.0)));
    let best = order[0].1.waic;
    Ok(order
        .into_iter()
        .map(|(name, r)| ComparisonRow {
            model: name.clone(),
            lppd: r.lppd,
            p_waic: r.p_waic,
            elppd: r.elppd_waic,
            waic: r.waic,
            delta: r.waic - best,
        })
        .collect())
}
