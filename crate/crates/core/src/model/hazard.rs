//! Baseline hazards and their cumulative integrals.
//!
//! Two families: piecewise-constant rates on a [`TimeGrid`], and a
//! Bernstein polynomial in rescaled time `u = t / τ` with nonnegative
//! coefficients. Past `τ` the Bernstein hazard is frozen at `h0(τ)`, so the
//! cumulative hazard grows linearly and always diverges.

use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// Largest supported Bernstein degree. Basis values live on the stack.
pub const MAX_BERNSTEIN_DEGREE: usize = 60;

fn check_rates(rates: &[f64], grid: &TimeGrid) -> Result<()> {
    if rates.len() != grid.n_intervals() {
        return Err(Error::InvalidParameter(format!(
            "{} rates for a grid with {} intervals",
            rates.len(),
            grid.n_intervals()
        )));
    }
    Ok(())
}

/// Piecewise-exponential hazard: the rate of the interval containing `t`.
pub fn pe_hazard(t: f64, rates: &[f64], grid: &TimeGrid) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("hazard evaluated at t = {t}")));
    }
    check_rates(rates, grid)?;
    Ok(rates[grid.interval_of(t)])
}

/// `H0(t) = Σ_j λ_j · |(a_j, a_{j+1}] ∩ (0, t]|`.
pub fn pe_cum_hazard(t: f64, rates: &[f64], grid: &TimeGrid) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("cumulative hazard evaluated at t = {t}")));
    }
    check_rates(rates, grid)?;
    Ok(pe_eval(t, rates, grid.cutpoints()).1)
}

#[inline]
fn pe_eval(t: f64, rates: &[f64], cuts: &[f64]) -> (f64, f64) {
    let mut cum = 0.0;
    for j in 0..cuts.len() {
        let start = cuts[j];
        match cuts.get(j + 1) {
            Some(&end) if t > end => cum += rates[j] * (end - start),
            _ => return (rates[j], cum + rates[j] * (t - start)),
        }
    }
    unreachable!("grid has at least one cutpoint")
}

/// Fills `out[..=degree]` with `b_{k,degree}(u)` via the de Casteljau
/// recurrence `b_{k,d} = (1-u) b_{k,d-1} + u b_{k-1,d-1}`.
fn bernstein_into(u: f64, degree: usize, out: &mut [f64]) {
    let v = 1.0 - u;
    out[0] = 1.0;
    for d in 1..=degree {
        out[d] = u * out[d - 1];
        for k in (1..d).rev() {
            out[k] = v * out[k] + u * out[k - 1];
        }
        out[0] *= v;
    }
}

/// Bernstein basis `b_{k,m}(u) = C(m,k) u^k (1-u)^{m-k}` for `k = 0..=m`.
pub fn bernstein_basis(degree: usize, u: f64) -> Vec<f64> {
    let mut out = vec![0.0; degree + 1];
    bernstein_into(u, degree, &mut out);
    out
}

fn check_bernstein(coef: &[f64], tau: f64) -> Result<()> {
    if coef.len() < 2 || coef.len() > MAX_BERNSTEIN_DEGREE + 1 {
        return Err(Error::InvalidParameter(format!(
            "Bernstein degree must lie in 1..={MAX_BERNSTEIN_DEGREE}, got {}",
            coef.len() as isize - 1
        )));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// `h0(t) = Σ_k γ_k b_{k,m}(t/τ)` with degree `m = coef.len() - 1`,
/// held at `h0(τ) = γ_m` for `t > τ`.
pub fn bp_hazard(t: f64, coef: &[f64], tau: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("hazard evaluated at t = {t}")));
    }
    check_bernstein(coef, tau)?;
    Ok(bp_eval(t, coef, tau).0)
}

/// Closed-form integral of [`bp_hazard`] through degree elevation:
/// `∫_0^x b_{k,m} = (1/(m+1)) Σ_{j>k} b_{j,m+1}(x)`, extended linearly past `τ`.
pub fn bp_cum_hazard(t: f64, coef: &[f64], tau: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("cumulative hazard evaluated at t = {t}")));
    }
    check_bernstein(coef, tau)?;
    Ok(bp_eval(t, coef, tau).1)
}

/// Hazard and cumulative hazard together; shares one basis recurrence.
#[inline]
fn bp_eval(t: f64, coef: &[f64], tau: f64) -> (f64, f64) {
    let m = coef.len() - 1;
    let scale = tau / (m + 1) as f64;
    if t >= tau {
        let h = coef[m];
        let at_tau = scale * coef.iter().sum::<f64>();
        return (h, at_tau + h * (t - tau));
    }
    let u = t / tau;
    let mut basis = [0.0f64; MAX_BERNSTEIN_DEGREE + 2];
    bernstein_into(u, m, &mut basis);
    let h: f64 = coef.iter().zip(&basis).map(|(g, b)| g * b).sum();
    // one more elevation step gives the degree m+1 basis
    let v = 1.0 - u;
    basis[m + 1] = u * basis[m];
    for k in (1..=m).rev() {
        basis[k] = v * basis[k] + u * basis[k - 1];
    }
    basis[0] *= v;
    // Σ_k γ_k Σ_{j>k} b_{j,m+1} accumulated from the top
    let mut tail = 0.0;
    let mut cum = 0.0;
    for k in (0..=m).rev() {
        tail += basis[k + 1];
        cum += coef[k] * tail;
    }
    (h, scale * cum)
}

/// A baseline hazard with concrete parameters, evaluated without
/// revalidating on every call.
#[derive(Debug, Clone, Copy)]
pub enum BaselineCurve<'a> {
    Piecewise { grid: &'a TimeGrid, rates: &'a [f64] },
    Bernstein { coef: &'a [f64], tau: f64 },
}

impl<'a> BaselineCurve<'a> {
    pub fn piecewise(grid: &'a TimeGrid, rates: &'a [f64]) -> Result<Self> {
        check_rates(rates, grid)?;
        Ok(Self::Piecewise { grid, rates })
    }

    pub fn bernstein(coef: &'a [f64], tau: f64) -> Result<Self> {
        check_bernstein(coef, tau)?;
        Ok(Self::Bernstein { coef, tau })
    }

    /// `(h0(t), H0(t))` for `t ≥ 0`.
    #[inline]
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Self::Piecewise { grid, rates } => pe_eval(t, rates, grid.cutpoints()),
            Self::Bernstein { coef, tau } => bp_eval(t, coef, tau),
        }
    }

    pub fn hazard(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn cum_hazard(&self, t: f64) -> f64 {
        self.eval(t).1
    }
}
