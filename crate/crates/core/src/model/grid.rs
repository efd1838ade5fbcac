use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cutpoints `0 = a_0 < a_1 < … < a_{J-1}` of a piecewise-exponential baseline.
///
/// Interval `j` is `(a_j, a_{j+1}]`; the last interval `(a_{J-1}, ∞)` is
/// open-ended, so a grid with `J` cutpoints carries `J` rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    cutpoints: Vec<f64>,
}

impl TimeGrid {
    pub fn new(cutpoints: Vec<f64>) -> Result<Self> {
        match cutpoints.first() {
            None => return Err(Error::DegenerateGrid("grid has no cutpoints".into())),
            Some(&a0) if a0 != 0.0 => {
                return Err(Error::DegenerateGrid(format!(
                    "first cutpoint must be 0, got {a0}"
                )))
            }
            _ => {}
        }
        if cutpoints.iter().any(|a| !a.is_finite()) {
            return Err(Error::DegenerateGrid("non-finite cutpoint".into()));
        }
        if let Some(w) = cutpoints.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateGrid(format!(
                "cutpoints must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { cutpoints })
    }

    /// Single open-ended interval: the exponential model.
    pub fn single() -> Self {
        Self {
            cutpoints: vec![0.0],
        }
    }

    pub fn cutpoints(&self) -> &[f64] {
        &self.cutpoints
    }

    pub fn n_intervals(&self) -> usize {
        self.cutpoints.len()
    }

    /// Index of the interval `(a_j, a_{j+1}]` containing `t > 0`.
    pub fn interval_of(&self, t: f64) -> usize {
        self.cutpoints.partition_point(|&a| a < t).saturating_sub(1)
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(cutpoints: Vec<f64>) -> Result<Self> {
        Self::new(cutpoints)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.cutpoints
    }
}

/// Linearly interpolated empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Places `intervals - 1` interior cutpoints at the `j / intervals` empirical
/// quantiles of the event times, so each interval holds roughly the same
/// number of events.
pub fn build_time_grid(event_times: &[f64], intervals: usize) -> Result<TimeGrid> {
    if intervals == 0 {
        return Err(Error::DegenerateGrid("interval count must be at least 1".into()));
    }
    if event_times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Domain("event times must be positive and finite".into()));
    }
    let mut sorted = event_times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < intervals {
        return Err(Error::DegenerateGrid(format!(
            "{} distinct event times cannot support {intervals} intervals",
            distinct.len()
        )));
    }
    let mut cutpoints = vec![0.0];
    for j in 1..intervals {
        cutpoints.push(quantile_sorted(&sorted, j as f64 / intervals as f64));
    }
    TimeGrid::new(cutpoints)
}
