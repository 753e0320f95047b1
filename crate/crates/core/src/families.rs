//! Scale-shape families `F(x) = F0((x/c)^kappa)`.
//!
//! Every family is generated by a fixed kernel distribution function `F0`
//! on the positive half line. The root-type map `x -> a x^(1/b)` keeps the
//! family and sends `(c, kappa)` to `(a c^(1/b), b kappa)`, which is what
//! makes the estimators in [`crate::estimation`] equivariant.

use std::fmt;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};

/// Kernel selection. Burr XII carries its second shape `xi`, which is held
/// fixed and never estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `F0(t) = 1 - exp(-t)`, `t > 0`.
    Weibull,
    /// `F0(t) = 1 - 1/t`, `t >= 1`.
    ParetoI,
    /// `F0(t) = exp(-1/t)`, `t > 0`.
    Frechet,
    /// `F0(t) = 1 - (1 + t)^(-xi)`, `t > 0`.
    BurrXII { xi: f64 },
}

impl FamilySpec {
    pub fn burr_xii(xi: f64) -> Result<Self> {
        let spec = FamilySpec::BurrXII { xi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::BurrXII { xi } if !(xi.is_finite() && xi > 0.0) => Err(
                GofError::InvalidParameter(format!("Burr XII xi must be finite and > 0, got {xi}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Weibull => "weibull",
            FamilySpec::ParetoI => "pareto1",
            FamilySpec::Frechet => "frechet",
            FamilySpec::BurrXII { .. } => "burr12",
        }
    }

    /// Inverse of [`FamilySpec::name`]; Burr XII needs its `xi`.
    pub fn from_name(name: &str, xi: Option<f64>) -> Result<Self> {
        let spec = match name.to_ascii_lowercase().as_str() {
            "weibull" => FamilySpec::Weibull,
            "pareto1" | "paretoi" | "pareto" => FamilySpec::ParetoI,
            "frechet" => FamilySpec::Frechet,
            "burr12" | "burrxii" | "burr" => match xi {
                Some(xi) => FamilySpec::BurrXII { xi },
                None => return Err(GofError::InvalidParameter("burr12 requires xi".to_string())),
            },
            other => {
                return Err(GofError::InvalidParameter(format!(
                    "unknown family '{other}'"
                )))
            }
        };
        if xi.is_some() && !matches!(spec, FamilySpec::BurrXII { .. }) {
            return Err(GofError::InvalidParameter(format!(
                "xi is only meaningful for burr12, not {name}"
            )));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn xi(&self) -> Option<f64> {
        match *self {
            FamilySpec::BurrXII { xi } => Some(xi),
            _ => None,
        }
    }

    fn kernel_support(&self) -> &'static str {
        match self {
            FamilySpec::ParetoI => "[1, inf)",
            _ => "(0, inf)",
        }
    }

    fn check_kernel_arg(&self, t: f64) -> Result<()> {
        let ok = match self {
            FamilySpec::ParetoI => t >= 1.0,
            _ => t > 0.0,
        };
        if ok && !t.is_nan() {
            Ok(())
        } else {
            Err(GofError::Domain {
                family: self.name(),
                value: t,
                support: self.kernel_support(),
            })
        }
    }

    /// The kernel distribution function `F0(t)`.
    pub fn kernel_cdf(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_kernel_arg(t)?;
        Ok(match *self {
            FamilySpec::Weibull => -(-t).exp_m1(),
            FamilySpec::ParetoI => 1.0 - 1.0 / t,
            FamilySpec::Frechet => (-1.0 / t).exp(),
            FamilySpec::BurrXII { xi } => -(-xi * t.ln_1p()).exp_m1(),
        })
    }

    /// `ln f0(t)` for the kernel density `f0 = F0'`.
    pub fn kernel_log_pdf(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_kernel_arg(t)?;
        Ok(match *self {
            FamilySpec::Weibull => -t,
            FamilySpec::ParetoI => -2.0 * t.ln(),
            FamilySpec::Frechet => -2.0 * t.ln() - 1.0 / t,
            FamilySpec::BurrXII { xi } => xi.ln() - (xi + 1.0) * t.ln_1p(),
        })
    }

    pub fn kernel_pdf(&self, t: f64) -> Result<f64> {
        self.kernel_log_pdf(t).map(f64::exp)
    }

    /// Closed-form `F0^{-1}(u)`.
    pub fn kernel_quantile(&self, u: f64) -> Result<f64> {
        self.validate()?;
        check_probability(u)?;
        Ok(match *self {
            FamilySpec::Weibull => -(-u).ln_1p(),
            FamilySpec::ParetoI => 1.0 / (1.0 - u),
            FamilySpec::Frechet => -1.0 / u.ln(),
            FamilySpec::BurrXII { xi } => (-(-u).ln_1p() / xi).exp_m1(),
        })
    }

    /// `-ln(1 - F0(t))`: maps a kernel variate to a unit exponential one.
    /// The identity for the Weibull kernel.
    pub fn kernel_exponential_score(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_kernel_arg(t)?;
        Ok(match *self {
            FamilySpec::Weibull => t,
            FamilySpec::ParetoI => t.ln(),
            FamilySpec::Frechet => -(-(-1.0 / t).exp_m1()).ln(),
            FamilySpec::BurrXII { xi } => xi * t.ln_1p(),
        })
    }

    /// Log-density of `s = ln t` when `t ~ F0`, with its first two
    /// derivatives in `s`. Drives the likelihood in `(ln c, ln kappa)`.
    pub(crate) fn log_t_density(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            FamilySpec::Weibull => {
                let e = s.exp();
                (s - e, 1.0 - e, -e)
            }
            FamilySpec::ParetoI => (-s, -1.0, 0.0),
            FamilySpec::Frechet => {
                let e = (-s).exp();
                (-s - e, -1.0 + e, -e)
            }
            FamilySpec::BurrXII { xi } => {
                let softplus = if s > 0.0 {
                    s + (-s).exp().ln_1p()
                } else {
                    s.exp().ln_1p()
                };
                let sig = logistic(s);
                (
                    s + xi.ln() - (xi + 1.0) * softplus,
                    1.0 - (xi + 1.0) * sig,
                    -(xi + 1.0) * sig * (1.0 - sig),
                )
            }
        }
    }

    /// `F(x) = F0((x/c)^kappa)`.
    pub fn cdf(&self, p: &ParamPair, x: f64) -> Result<f64> {
        self.kernel_cdf(self.reduce(p, x)?)
    }

    /// `f(x) = (kappa/c) (x/c)^(kappa-1) f0((x/c)^kappa)`, evaluated on the
    /// log scale as `kappa t / x * f0(t)`.
    pub fn pdf(&self, p: &ParamPair, x: f64) -> Result<f64> {
        self.log_pdf(p, x).map(f64::exp)
    }

    pub fn log_pdf(&self, p: &ParamPair, x: f64) -> Result<f64> {
        let t = self.reduce(p, x)?;
        Ok(p.kappa.ln() - x.ln() + t.ln() + self.kernel_log_pdf(t)?)
    }

    pub fn quantile(&self, p: &ParamPair, u: f64) -> Result<f64> {
        Ok(p.c * self.kernel_quantile(u)?.powf(1.0 / p.kappa))
    }

    /// `n` i.i.d. draws by inverse transform of uniforms on the open unit
    /// interval.
    pub fn sample<R: Rng + ?Sized>(&self, p: &ParamPair, n: usize, rng: &mut R) -> Result<Sample> {
        self.validate()?;
        if n == 0 {
            return Err(GofError::EmptySample);
        }
        let values = (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(p, u)
            })
            .collect::<Result<Vec<_>>>()?;
        Sample::new(values)
    }

    /// `(x/c)^kappa`, checked against the kernel support.
    fn reduce(&self, p: &ParamPair, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(GofError::Domain {
                family: self.name(),
                value: x,
                support: if matches!(self, FamilySpec::ParetoI) {
                    "[c, inf)"
                } else {
                    "(0, inf)"
                },
            });
        }
        if matches!(self, FamilySpec::ParetoI) && x < p.c {
            return Err(GofError::Domain {
                family: self.name(),
                value: x,
                support: "[c, inf)",
            });
        }
        // x >= c must map to t >= 1 even when powf rounds just below.
        let t = (x / p.c).powf(p.kappa);
        Ok(if matches!(self, FamilySpec::ParetoI) {
            t.max(1.0)
        } else {
            t
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::BurrXII { xi } => write!(f, "burr12(xi={xi})"),
            other => f.write_str(other.name()),
        }
    }
}

fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(GofError::Domain {
            family: "probability",
            value: u,
            support: "(0, 1)",
        })
    }
}

/// Scale `c` and shape `kappa`, both strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPair {
    c: f64,
    kappa: f64,
}

impl ParamPair {
    pub fn new(c: f64, kappa: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(GofError::InvalidParameter(format!(
                "scale c must be finite and > 0, got {c}"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(GofError::InvalidParameter(format!(
                "shape kappa must be finite and > 0, got {kappa}"
            )));
        }
        Ok(ParamPair { c, kappa })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Parameters of `a X^(1/b)` when `X` has parameters `self`.
    pub fn root_transformed(&self, a: f64, b: f64) -> Result<Self> {
        ParamPair::new(a * self.c.powf(1.0 / b), b * self.kappa)
    }
}

/// Raw observations; nonempty, finite, strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GofError::EmptySample);
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(GofError::InvalidParameter(format!(
                "observation {i} must be finite and > 0, got {v}"
            )));
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}
