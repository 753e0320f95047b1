//! Exponentiality statistics on a standardized sample.
//!
//! All four statistics treat their input as a candidate unit-exponential
//! sample and reject for large values. For a family other than Weibull the
//! standardized values are first mapped through `-ln(1 - F0(y))`
//! (see [`StandardizedSample::exponential_scores`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::montecarlo::CriticalValueTable;
use crate::standardize::StandardizedSample;

/// Lower clamp for `Z = 1 - exp(-y)` inside the Anderson-Darling sum.
pub const AD_CLAMP: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatisticKind {
    AD,
    HM,
    RB,
    KS,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [
        StatisticKind::AD,
        StatisticKind::HM,
        StatisticKind::RB,
        StatisticKind::KS,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::AD => "AD",
            StatisticKind::HM => "HM",
            StatisticKind::RB => "RB",
            StatisticKind::KS => "KS",
        }
    }

    /// Evaluates the statistic on unit-exponential candidates.
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        match self {
            StatisticKind::AD => ad_statistic(y),
            StatisticKind::HM => hm_statistic(y),
            StatisticKind::RB => rb_statistic(y),
            StatisticKind::KS => ks_statistic(y),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = GofError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AD" => Ok(StatisticKind::AD),
            "HM" => Ok(StatisticKind::HM),
            "RB" => Ok(StatisticKind::RB),
            "KS" => Ok(StatisticKind::KS),
            other => Err(GofError::InvalidParameter(format!(
                "unknown statistic '{other}'"
            ))),
        }
    }
}

fn sorted(y: &[f64]) -> Vec<f64> {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Anderson-Darling statistic together with a flag telling whether any
/// `Z_(j)` had to be clamped away from zero.
pub fn ad_statistic_checked(y: &[f64]) -> (f64, bool) {
    let ys = sorted(y);
    let n = ys.len();
    let nf = n as f64;
    let mut clamped = false;
    let mut sum = 0.0;
    for j in 0..n {
        let z = -(-ys[j]).exp_m1();
        let log_z = if z < AD_CLAMP {
            clamped = true;
            AD_CLAMP.ln()
        } else {
            z.ln()
        };
        // ln(1 - Z) = -y exactly, which sidesteps 1 - Z underflowing.
        let log_tail = -ys[n - 1 - j];
        sum += (2 * j + 1) as f64 * (log_z + log_tail);
    }
    (-nf - sum / nf, clamped)
}

/// `AD_n = -n - (1/n) sum (2j-1) (ln Z_(j) + ln(1 - Z_(n+1-j)))` with
/// `Z = 1 - exp(-y)`.
pub fn ad_statistic(y: &[f64]) -> f64 {
    ad_statistic_checked(y).0
}

/// Henze-Meintanis statistic
///
/// ```text
/// HM_n = (1/n) sum_{j,k} [1 + (y_j + y_k + 2)^2] / (y_j + y_k + 1)^3
///        - 2 sum_j (y_j + 2) / (y_j + 1)^2 + n
/// ```
pub fn hm_statistic(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let kernel = |s: f64| (1.0 + (s + 2.0).powi(2)) / (s + 1.0).powi(3);
    let mut double = 0.0;
    for (j, &a) in y.iter().enumerate() {
        double += kernel(2.0 * a);
        let mut off = 0.0;
        for &b in &y[j + 1..] {
            off += kernel(a + b);
        }
        double += 2.0 * off;
    }
    let single: f64 = y.iter().map(|&a| (a + 2.0) / (a + 1.0).powi(2)).sum();
    double / n - 2.0 * single + n
}

pub fn laguerre2(z: f64) -> f64 {
    1.0 - 2.0 * z + z * z / 2.0
}

pub fn laguerre3(z: f64) -> f64 {
    1.0 - 3.0 * z + 1.5 * z * z - z * z * z / 6.0
}

/// Smooth test built from the order 2 and 3 Laguerre components.
pub fn rb_statistic(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let s2: f64 = y.iter().map(|&z| laguerre2(z)).sum();
    let s3: f64 = y.iter().map(|&z| laguerre3(z)).sum();
    (s2 * s2 + s3 * s3) / n
}

/// Kolmogorov-Smirnov distance to the unit exponential DF.
pub fn ks_statistic(y: &[f64]) -> f64 {
    let ys = sorted(y);
    let n = ys.len() as f64;
    ys.iter()
        .enumerate()
        .map(|(i, &v)| {
            let z = -(-v).exp_m1();
            let j = (i + 1) as f64;
            (j / n - z).max(z - (j - 1.0) / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaDecision {
    pub alpha: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: StatisticKind,
    pub value: f64,
    pub n: usize,
    pub decisions: Vec<AlphaDecision>,
    /// Critical values were interpolated in `n` between tabulated sizes.
    pub interpolated: bool,
    /// Anderson-Darling only: some `Z_(j)` hit the lower clamp.
    pub clamped: bool,
}

impl TestResult {
    /// Decision at the smallest tabulated alpha.
    pub fn rejects_at_smallest_alpha(&self) -> bool {
        self.decisions
            .iter()
            .min_by(|a, b| a.alpha.total_cmp(&b.alpha))
            .is_some_and(|d| d.reject)
    }
}

/// Evaluates every statistic present in `table` on `y` and compares with
/// the table's critical values at each tabulated alpha.
pub fn run_battery(
    y: &StandardizedSample,
    table: &CriticalValueTable,
    interpolate_n: bool,
) -> Result<Vec<TestResult>> {
    let prov = table.provenance();
    if prov.family != *y.family() {
        return Err(GofError::InvalidParameter(format!(
            "critical values were simulated for {} but the sample was fitted as {}",
            prov.family,
            y.family()
        )));
    }
    let scores = y.exponential_scores();
    let n = scores.len();
    prov.statistics
        .iter()
        .map(|&kind| {
            let (value, clamped) = match kind {
                StatisticKind::AD => ad_statistic_checked(&scores),
                other => (other.evaluate(&scores), false),
            };
            let mut interpolated = false;
            let decisions = prov
                .alphas
                .iter()
                .map(|&alpha| {
                    let lookup = table.critical_value(kind, n, alpha, interpolate_n)?;
                    interpolated |= lookup.interpolated;
                    Ok(AlphaDecision {
                        alpha,
                        critical_value: lookup.value,
                        reject: value > lookup.value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TestResult {
                kind,
                value,
                n,
                decisions,
                interpolated,
                clamped,
            })
        })
        .collect()
}
