//! Monte Carlo comparison criteria for one parameter.
//!
//! With `M` replicas, estimates `Φ̂_k`, standard errors `se_k` and truth `Φ`:
//!
//! ```text
//! est  = (1/M) Σ Φ̂_k
//! RB%  = (100/M) Σ (Φ̂_k − Φ) / |Φ|
//! ASE  = (1/M) Σ se_k
//! SDE  = sqrt( (1/(M−1)) Σ (Φ̂_k − est)² )
//! CP   = fraction of intervals containing Φ
//! ```

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McMetricsRow {
    pub parameter: String,
    pub truth: f64,
    pub est: f64,
    /// `None` when the truth is zero; report `est − truth` instead.
    pub rb_percent: Option<f64>,
    pub ase: f64,
    pub sde: f64,
    pub cp: f64,
    pub m_c: usize,
}

impl McMetricsRow {
    pub fn bias(&self) -> f64 {
        self.est - self.truth
    }

    /// The coverage shortfall pattern expected when standard errors are too
    /// small: `ASE < SDE` together with `CP < level`.
    pub fn undercoverage_warning(&self, level: f64) -> Option<String> {
        (self.ase < self.sde && self.cp < level).then(|| {
            format!(
                "{}: ASE {:.4} < SDE {:.4} and CP {:.3} < {level}",
                self.parameter, self.ase, self.sde, self.cp
            )
        })
    }
}

fn aggregate(
    parameter: &str,
    truth: f64,
    estimates: &[f64],
    ses: &[f64],
    covered: &[bool],
) -> Result<McMetricsRow> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::InsufficientDraws { needed: 2, got: m });
    }
    if ses.len() != m || covered.len() != m {
        return Err(Error::InvalidData(format!(
            "{m} estimates but {} standard errors and {} coverage flags",
            ses.len(),
            covered.len()
        )));
    }
    let mf = m as f64;
    // mean taken relative to the first estimate: exact when all agree
    let anchor = estimates[0];
    let est = anchor + estimates.iter().map(|e| e - anchor).sum::<f64>() / mf;
    let rb_percent = (truth != 0.0).then(|| 100.0 * (est - truth) / truth.abs());
    let ase = ses.iter().sum::<f64>() / mf;
    let sde = (estimates.iter().map(|e| (e - est).powi(2)).sum::<f64>() / (mf - 1.0)).sqrt();
    let cp = covered.iter().filter(|&&c| c).count() as f64 / mf;
    Ok(McMetricsRow {
        parameter: parameter.to_string(),
        truth,
        est,
        rb_percent,
        ase,
        sde,
        cp,
        m_c: m,
    })
}

/// All five criteria for one parameter. A zero truth makes relative bias
/// undefined and is an error here; [`mc_metrics_lenient`] reports such rows
/// without it.
pub fn mc_metrics(
    parameter: &str,
    truth: f64,
    estimates: &[f64],
    ses: &[f64],
    covered: &[bool],
) -> Result<McMetricsRow> {
    if truth == 0.0 {
        return Err(Error::UndefinedRelativeBias(parameter.to_string()));
    }
    aggregate(parameter, truth, estimates, ses, covered)
}

/// As [`mc_metrics`], but leaves `rb_percent` empty for a zero truth.
pub fn mc_metrics_lenient(
    parameter: &str,
    truth: f64,
    estimates: &[f64],
    ses: &[f64],
    covered: &[bool],
) -> Result<McMetricsRow> {
    aggregate(parameter, truth, estimates, ses, covered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_estimates() {
        let r = mc_metrics("phi", 2.0, &[2.2, 1.8], &[0.1, 0.3], &[true, true]).unwrap();
        assert!((r.est - 2.0).abs() < 1e-15);
        assert!(r.rb_percent.unwrap().abs() < 1e-13);
        assert!((r.sde - 0.08f64.sqrt()).abs() < 1e-15);
        assert!((r.sde - 0.28284).abs() < 1e-5);
        assert!((r.ase - 0.2).abs() < 1e-15);
        assert_eq!(r.m_c, 2);
    }

    #[test]
    fn constant_overestimate() {
        let r = mc_metrics("phi", 2.0, &[2.2, 2.2], &[0.1, 0.1], &[true, false]).unwrap();
        assert!((r.rb_percent.unwrap() - 10.0).abs() < 1e-13);
        assert_eq!(r.sde, 0.0);
        assert_eq!(r.cp, 0.5);
    }

    #[test]
    fn coverage_fraction() {
        let r = mc_metrics("phi", 1.0, &[1.0; 4], &[0.1; 4], &[true, true, false, true]).unwrap();
        assert_eq!(r.cp, 0.75);
    }

    #[test]
    fn zero_truth_and_arity() {
        assert!(matches!(
            mc_metrics("beta", 0.0, &[0.1, -0.1], &[0.1, 0.1], &[true, true]),
            Err(Error::UndefinedRelativeBias(_))
        ));
        let r = mc_metrics_lenient("beta", 0.0, &[0.3, 0.1], &[0.1, 0.1], &[true, true]).unwrap();
        assert_eq!(r.rb_percent, None);
        assert!((r.bias() - 0.2).abs() < 1e-15);
        assert!(mc_metrics("phi", 1.0, &[1.0], &[0.1], &[true]).is_err());
        assert!(mc_metrics("phi", 1.0, &[1.0, 1.0], &[0.1], &[true, true]).is_err());
    }

    #[test]
    fn warning_rule() {
        let r = McMetricsRow {
            parameter: "beta[x1]".into(),
            truth: 0.5,
            est: 0.5,
            rb_percent: Some(0.0),
            ase: 0.1,
            sde: 0.2,
            cp: 0.8,
            m_c: 100,
        };
        assert!(r.undercoverage_warning(0.95).is_some());
        let ok = McMetricsRow { ase: 0.3, ..r.clone() };
        assert!(ok.undercoverage_warning(0.95).is_none());
        let covered = McMetricsRow { cp: 0.96, ..r };
        assert!(covered.undercoverage_warning(0.95).is_none());
    }
}
