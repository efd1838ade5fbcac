//! Independent numerical oracles for the frailtykit test suites.
//!
//! Nothing in here shares code with the `frailtykit` crate. Every routine
//! computes its answer by a different route (brute-force quadrature,
//! direct formula evaluation, exhaustive enumeration) so that tests can
//! compare the production path against it.

use statrs::function::gamma::ln_gamma;

/// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half, descending order).
const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK15_NODES[i];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += GK15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if depth == 0 || err <= tol || err <= 1e-15 * whole.abs() {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, whole, depth - 1) + adapt(f, mid, b, 0.5 * tol, whole, depth - 1)
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Subdivides bisectively until the Kronrod/Gauss difference drops below
/// `tol` on each piece.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, _) = gk15(&f, a, b);
    adapt(&f, a, b, tol, whole, 40)
}

/// Adaptive quadrature over `[a, b]` split at the given interior breakpoints.
///
/// Used for integrands with known kinks or jumps (piecewise-constant hazards).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let pieces = (points.len() - 1) as f64;
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / pieces))
        .sum()
}

/// `log ∫_0^∞ exp(log_f(z)) dz` by exp-sinh (double exponential) quadrature.
///
/// The substitution `z = scale · exp(π/2 · sinh t)` absorbs integrable
/// endpoint singularities at zero and the infinite tail. The step is halved
/// until two successive estimates agree to ~1e-14. `scale` should sit near
/// the bulk of the integrand's mass.
pub fn log_integral_half_line<F: Fn(f64) -> f64>(log_f: F, scale: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| -> Option<f64> {
        let s = half_pi * t.sinh();
        let z = scale * s.exp();
        if !(z.is_finite() && z > 0.0) {
            return None;
        }
        // dz/dt = z · π/2 · cosh t
        let v = log_f(z) + z.ln() + (half_pi * t.cosh()).ln();
        v.is_finite().then_some(v)
    };
    let estimate = |h: f64| -> f64 {
        let mut logs = Vec::new();
        let limit = (6.5 / h).ceil() as i64;
        for j in -limit..=limit {
            if let Some(v) = term(j as f64 * h) {
                logs.push(v);
            }
        }
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + logs.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + h.ln()
    };
    let mut h = 0.5;
    let mut previous = estimate(h);
    for _ in 0..8 {
        h *= 0.5;
        let current = estimate(h);
        if (current - previous).abs() < 1e-14 {
            return current;
        }
        previous = current;
    }
    previous
}

/// One observation as seen by the frailty oracle.
#[derive(Debug, Clone, Copy)]
pub struct FrailtyTerm {
    pub hazard: f64,
    pub cum_hazard: f64,
    pub linear_predictor: f64,
    pub event: bool,
}

/// Log marginal likelihood of one cluster, integrating the conditional
/// likelihood against a mean-one gamma density with variance `theta`
/// numerically over the frailty.
pub fn frailty_cluster_log_marginal(terms: &[FrailtyTerm], theta: f64) -> f64 {
    assert!(theta > 0.0);
    let shape = 1.0 / theta;
    let events = terms.iter().filter(|t| t.event).count() as f64;
    let load: f64 = terms
        .iter()
        .map(|t| t.cum_hazard * t.linear_predictor.exp())
        .sum();
    let hazard_part: f64 = terms
        .iter()
        .filter(|t| t.event)
        .map(|t| t.hazard.ln() + t.linear_predictor)
        .sum();
    let log_norm = shape * shape.ln() - ln_gamma(shape);
    let log_integrand = |z: f64| -> f64 {
        let conditional = hazard_part + events * z.ln() - z * load;
        conditional + log_norm + (shape - 1.0) * z.ln() - shape * z
    };
    let exponent = shape + events - 1.0;
    let scale = if exponent >= 1.0 {
        exponent / (shape + load)
    } else {
        1.0 / (shape + load)
    };
    log_integral_half_line(log_integrand, scale)
}

/// Bernstein basis polynomial `C(m,k) u^k (1-u)^(m-k)` evaluated from the
/// textbook formula with an explicitly built binomial coefficient.
pub fn bernstein_direct(k: usize, m: usize, u: f64) -> f64 {
    let mut binom = 1.0f64;
    for i in 0..k {
        binom = binom * (m - i) as f64 / (i + 1) as f64;
    }
    binom * u.powi(k as i32) * (1.0 - u).powi((m - k) as i32)
}

/// `Σ_k coef[k] · b_{k,m}(u)` with a Neumaier-compensated sum.
pub fn bernstein_sum_direct(coef: &[f64], u: f64) -> f64 {
    let m = coef.len() - 1;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (k, &c) in coef.iter().enumerate() {
        let term = c * bernstein_direct(k, m, u);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `c(α) / sqrt(n)` with `c(α) = sqrt(-ln(α/2)/2)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Kendall's tau-a over bivariate pairs by exhaustive pair enumeration.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    let mut score = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pairs[i].0 - pairs[j].0;
            let dy = pairs[i].1 - pairs[j].1;
            score += (dx * dy).signum();
        }
    }
    score / (n * (n - 1) / 2) as f64
}
