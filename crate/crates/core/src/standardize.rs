//! Standardization `Y_j = (X_j / c_hat)^kappa_hat`, the inverse of the
//! family-preserving root transform at the fitted parameters.

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::estimation::FitResult;
use crate::families::{FamilySpec, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    values: Vec<f64>,
    source_fit: FitResult,
}

impl StandardizedSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_fit(&self) -> &FitResult {
        &self.source_fit
    }

    pub fn family(&self) -> &FamilySpec {
        &self.source_fit.family
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `-ln(1 - F0(Y_j))`, a unit-exponential sample under the null. Equal
    /// to the values themselves for the Weibull kernel.
    pub fn exponential_scores(&self) -> Vec<f64> {
        let family = self.source_fit.family;
        self.values
            .iter()
            .map(|&y| {
                // Pareto I: Y >= 1 always holds for the fitted minimum.
                family.kernel_exponential_score(y).unwrap_or(0.0)
            })
            .collect()
    }

    /// Summary used in run reports: `(min, max, mean)`.
    pub fn summary(&self) -> (f64, f64, f64) {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        (min, max, mean)
    }
}

/// Maps `s` through `x -> (x / c_hat)^kappa_hat`, preserving order.
/// Refuses fits that did not converge.
pub fn standardize(s: &Sample, fit: &FitResult) -> Result<StandardizedSample> {
    if !fit.converged {
        return Err(GofError::UnconvergedFit);
    }
    let (c, kappa) = (fit.params.c(), fit.params.kappa());
    let mut values: Vec<f64> = s.values().iter().map(|&x| (x / c).powf(kappa)).collect();
    if matches!(fit.family, FamilySpec::ParetoI) {
        if let Some(x) = s.values().iter().find(|&&x| x < c) {
            return Err(GofError::Domain {
                family: fit.family.name(),
                value: *x,
                support: "[c, inf)",
            });
        }
        for v in &mut values {
            *v = v.max(1.0);
        }
    }
    Ok(StandardizedSample {
        values,
        source_fit: fit.clone(),
    })
}

/// Elementwise `a x^(1/b)`.
pub fn root_transform(s: &Sample, a: f64, b: f64) -> Result<Sample> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(GofError::InvalidParameter(format!(
                "{name} must be finite and > 0, got {v}"
            )));
        }
    }
    Sample::new(s.values().iter().map(|&x| a * x.powf(1.0 / b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::fit_mle;
    use crate::families::ParamPair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit_with(c: f64, kappa: f64) -> FitResult {
        FitResult {
            family: FamilySpec::Weibull,
            params: ParamPair::new(c, kappa).unwrap(),
            loglik: 0.0,
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
        }
    }

    #[test]
    fn identity_fit_leaves_values() {
        let s = Sample::new(vec![0.5, 3.0, 1.25]).unwrap();
        let y = standardize(&s, &fit_with(1.0, 1.0)).unwrap();
        assert_eq!(y.values(), s.values());
    }

    #[test]
    fn direct_evaluation() {
        let s = Sample::new(vec![2.0, 8.0]).unwrap();
        let y = standardize(&s, &fit_with(2.0, 3.0)).unwrap();
        assert!((y.values()[0] - 1.0).abs() < 1e-14);
        assert!((y.values()[1] - 64.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_unconverged_fit() {
        let mut fit = fit_with(1.0, 1.0);
        fit.converged = false;
        let s = Sample::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(standardize(&s, &fit), Err(GofError::UnconvergedFit));
    }

    #[test]
    fn root_transform_values() {
        let s = Sample::new(vec![4.0, 9.0]).unwrap();
        assert_eq!(root_transform(&s, 1.0, 1.0).unwrap(), s);
        let t = root_transform(&s, 2.0, 2.0).unwrap();
        assert!((t.values()[0] - 4.0).abs() < 1e-14);
        assert!((t.values()[1] - 6.0).abs() < 1e-14);
        assert!(root_transform(&s, 0.0, 1.0).is_err());
        assert!(root_transform(&s, 1.0, -2.0).is_err());
    }

    #[test]
    fn weibull_refit_is_unit() {
        let s = FamilySpec::Weibull
            .sample(
                &ParamPair::new(4.0, 0.6).unwrap(),
                80,
                &mut ChaCha8Rng::seed_from_u64(4),
            )
            .unwrap();
        let fit = fit_mle(&FamilySpec::Weibull, &s).unwrap();
        let y = standardize(&s, &fit).unwrap();
        let refit = fit_mle(
            &FamilySpec::Weibull,
            &Sample::new(y.values().to_vec()).unwrap(),
        )
        .unwrap();
        assert!((refit.params.c() - 1.0).abs() < 1e-6);
        assert!((refit.params.kappa() - 1.0).abs() < 1e-6);
        // Weibull MLE forces the standardized mean to one.
        assert!((y.summary().2 - 1.0).abs() < 1e-9);
    }
}
