//! Maximum-likelihood fitting of `(c, kappa)`.
//!
//! With `t = (x/c)^kappa` the log-likelihood of a sample is
//!
//! ```text
//! l(c, kappa) = n ln kappa - sum ln x_j + kappa sum ln(x_j/c) + sum ln f0((x_j/c)^kappa)
//! ```
//!
//! Three solver paths share it:
//!
//! * Weibull: `c` is profiled out and the shape solves the profile score
//!   (see [`weibull_profile_score`]) by Newton steps kept inside a bisection
//!   bracket.
//! * Pareto I: closed form, `c = min x`, `kappa = n / sum ln(x_j / c)`.
//! * Frechet and Burr XII: Nelder-Mead on `(ln c, ln kappa)` followed by a
//!   few Newton steps with the analytic Hessian to pin the optimum down to
//!   rounding level.
//!
//! All paths work on the sorted log-sample, so the result does not depend
//! on the input order.

pub mod nelder_mead;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::families::{FamilySpec, ParamPair, Sample};
use nelder_mead::NelderMeadOptions;

/// Profile-score tolerance for the Weibull path.
pub const WEIBULL_SCORE_TOL: f64 = 1e-10;
/// Tolerance on the per-observation score norm for the optimizer path.
pub const GRADIENT_TOL: f64 = 1e-9;
pub const MAX_NEWTON_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FamilySpec,
    pub params: ParamPair,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the score divided by `n`. For Weibull this is `|g(kappa)|`;
    /// for Pareto I only the shape score counts since `c` sits on the
    /// support boundary.
    pub gradient_norm: f64,
}

/// Log-likelihood of `s` under `spec` with parameters `p`. Observations
/// outside the support give a domain error.
pub fn loglikelihood(spec: &FamilySpec, p: &ParamPair, s: &Sample) -> Result<f64> {
    s.values().iter().map(|&x| spec.log_pdf(p, x)).sum()
}

/// Weibull profile score
///
/// ```text
/// g(kappa) = sum x^kappa ln x / sum x^kappa - 1/kappa - mean(ln x)
/// ```
///
/// Strictly increasing in `kappa`; its root is the shape MLE. Evaluated
/// after dividing the sample by its maximum, which leaves `g` unchanged.
pub fn weibull_profile_score(kappa: f64, s: &Sample) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(GofError::InvalidParameter(format!(
            "kappa must be > 0, got {kappa}"
        )));
    }
    let logs = centered_logs(s.values());
    Ok(ProfileScore::new(&logs).eval(kappa).0)
}

/// Computes the MLE of `(c, kappa)` for `spec`.
pub fn fit_mle(spec: &FamilySpec, s: &Sample) -> Result<FitResult> {
    spec.validate()?;
    if s.len() < 2 {
        return Err(GofError::Estimation(format!(
            "need at least two observations, got {}",
            s.len()
        )));
    }
    let mut logs: Vec<f64> = s.values().iter().map(|x| x.ln()).collect();
    logs.sort_by(f64::total_cmp);
    if logs[0] == logs[logs.len() - 1] {
        return Err(GofError::Estimation(
            "shape diverges: all observations are equal".to_string(),
        ));
    }
    match spec {
        FamilySpec::Weibull => fit_weibull(&logs),
        FamilySpec::ParetoI => fit_pareto(s, &logs),
        FamilySpec::Frechet | FamilySpec::BurrXII { .. } => fit_optimizer(spec, &logs),
    }
}

fn centered_logs(values: &[f64]) -> Vec<f64> {
    let mut logs: Vec<f64> = values.iter().map(|x| x.ln()).collect();
    logs.sort_by(f64::total_cmp);
    let max = logs[logs.len() - 1];
    logs.iter().map(|l| l - max).collect()
}

/// Method-of-moments shape from the spread of the logs: for Weibull the
/// log-variance is `pi^2 / (6 kappa^2)`.
fn initial_shape(logs: &[f64]) -> f64 {
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
    PI / (var.sqrt() * 6f64.sqrt())
}

/// Profile score on logs shifted so that the largest is zero.
struct ProfileScore<'a> {
    logs: &'a [f64],
    mean: f64,
}

impl<'a> ProfileScore<'a> {
    fn new(logs: &'a [f64]) -> Self {
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        Self { logs, mean }
    }

    /// Returns `(g, g', sum_j exp(kappa y_j))`.
    fn eval(&self, kappa: f64) -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &y in self.logs {
            let w = (kappa * y).exp();
            s0 += w;
            s1 += w * y;
            s2 += w * y * y;
        }
        let m1 = s1 / s0;
        let var = (s2 / s0 - m1 * m1).max(0.0);
        (
            m1 - 1.0 / kappa - self.mean,
            var + 1.0 / (kappa * kappa),
            s0,
        )
    }
}

fn fit_weibull(sorted_logs: &[f64]) -> Result<FitResult> {
    let n = sorted_logs.len() as f64;
    let shift = sorted_logs[sorted_logs.len() - 1];
    let logs: Vec<f64> = sorted_logs.iter().map(|l| l - shift).collect();
    let score = ProfileScore::new(&logs);

    let mut kappa = initial_shape(&logs);
    let (mut lo, mut hi) = (kappa, kappa);
    for _ in 0..2_000 {
        if score.eval(lo).0 < 0.0 {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..2_000 {
        if score.eval(hi).0 > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if !(score.eval(lo).0 < 0.0 && score.eval(hi).0 > 0.0) {
        return Err(GofError::Estimation(
            "could not bracket the Weibull shape".to_string(),
        ));
    }

    let mut iterations = 0;
    let mut g = score.eval(kappa);
    while iterations < MAX_NEWTON_ITER {
        iterations += 1;
        if g.0 < 0.0 {
            lo = kappa;
        } else if g.0 > 0.0 {
            hi = kappa;
        } else {
            break;
        }
        let newton = kappa - g.0 / g.1;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - kappa).abs();
        kappa = next;
        g = score.eval(kappa);
        if g.0.abs() <= WEIBULL_SCORE_TOL && step <= 1e-12 * kappa {
            break;
        }
    }

    let (g, _, s0) = g;
    let log_c = shift + (s0 / n).ln() / kappa;
    let params = ParamPair::new(log_c.exp(), kappa)?;
    if g.abs() > WEIBULL_SCORE_TOL {
        return Err(GofError::NotConverged {
            iterations,
            best: params,
        });
    }
    Ok(FitResult {
        family: FamilySpec::Weibull,
        params,
        loglik: log_lik_uv(&FamilySpec::Weibull, sorted_logs, log_c, kappa.ln()),
        iterations,
        converged: true,
        gradient_norm: g.abs(),
    })
}

fn fit_pareto(s: &Sample, sorted_logs: &[f64]) -> Result<FitResult> {
    let n = sorted_logs.len() as f64;
    // Take the minimum itself; exp(ln x) may round above x.
    let c = s.values().iter().copied().fold(f64::INFINITY, f64::min);
    let log_c = sorted_logs[0];
    let spread: f64 = sorted_logs.iter().map(|l| l - log_c).sum();
    let kappa = n / spread;
    let params = ParamPair::new(c, kappa)?;
    let shape_score = (n / kappa - spread).abs() / n;
    Ok(FitResult {
        family: FamilySpec::ParetoI,
        params,
        loglik: log_lik_uv(&FamilySpec::ParetoI, sorted_logs, log_c, kappa.ln()),
        iterations: 0,
        converged: true,
        gradient_norm: shape_score,
    })
}

/// Log-likelihood as a function of `u = ln c`, `v = ln kappa`. Returns
/// `-inf` outside the support.
fn log_lik_uv(spec: &FamilySpec, logs: &[f64], u: f64, v: f64) -> f64 {
    let kappa = v.exp();
    let mut total = logs.len() as f64 * v;
    for &l in logs {
        let s = kappa * (l - u);
        if matches!(spec, FamilySpec::ParetoI) && s < 0.0 {
            return f64::NEG_INFINITY;
        }
        total += spec.log_t_density(s).0 - l;
    }
    total
}

/// Gradient and Hessian of [`log_lik_uv`] in `(u, v)`.
fn score_and_hessian(spec: &FamilySpec, logs: &[f64], u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let kappa = v.exp();
    let n = logs.len() as f64;
    let (mut d1, mut d1s, mut d2, mut d2s, mut d2ss) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &l in logs {
        let s = kappa * (l - u);
        let (_, p1, p2) = spec.log_t_density(s);
        d1 += p1;
        d1s += p1 * s;
        d2 += p2;
        d2s += p2 * s;
        d2ss += p2 * s * s;
    }
    let grad = [-kappa * d1, n + d1s];
    let huu = kappa * kappa * d2;
    let huv = -kappa * (d2s + d1);
    let hvv = d2ss + d1s;
    (grad, [[huu, huv], [huv, hvv]])
}

fn fit_optimizer(spec: &FamilySpec, sorted_logs: &[f64]) -> Result<FitResult> {
    let n = sorted_logs.len() as f64;
    let mean = sorted_logs.iter().sum::<f64>() / n;
    let x0 = [mean, initial_shape(sorted_logs).ln()];

    let objective = |x: &[f64]| -log_lik_uv(spec, sorted_logs, x[0], x[1]) / n;
    let nm = nelder_mead::minimize(
        objective,
        &x0,
        &NelderMeadOptions {
            f_spread_tol: 1e-10 / n,
            ..NelderMeadOptions::default()
        },
    );
    let (mut u, mut v) = (nm.x[0], nm.x[1]);
    let mut iterations = nm.iterations;
    let mut ll = log_lik_uv(spec, sorted_logs, u, v);

    // Newton polish from the simplex optimum.
    for _ in 0..MAX_NEWTON_ITER {
        let (g, h) = score_and_hessian(spec, sorted_logs, u, v);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if !(h[0][0] < 0.0 && det > 0.0) {
            break;
        }
        iterations += 1;
        let du = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dv = -(h[0][0] * g[1] - h[1][0] * g[0]) / det;
        let mut t = 1.0;
        let slack = 1e-12 * (1.0 + ll.abs());
        let accepted = loop {
            let cand = log_lik_uv(spec, sorted_logs, u + t * du, v + t * dv);
            if cand >= ll - slack {
                break Some(cand);
            }
            t *= 0.5;
            if t < 1e-6 {
                break None;
            }
        };
        let Some(cand) = accepted else { break };
        u += t * du;
        v += t * dv;
        ll = cand;
        if (t * du).abs().max((t * dv).abs()) < 1e-14 {
            break;
        }
    }

    let (g, _) = score_and_hessian(spec, sorted_logs, u, v);
    let gradient_norm = g[0].hypot(g[1]) / n;
    let best = ParamPair::new(u.exp(), v.exp())
        .map_err(|e| GofError::Estimation(format!("optimizer left the parameter space: {e}")))?;
    if !(gradient_norm <= GRADIENT_TOL) {
        return Err(GofError::NotConverged { iterations, best });
    }
    Ok(FitResult {
        family: *spec,
        params: best,
        loglik: ll,
        iterations,
        converged: true,
        gradient_norm,
    })
}
