//! Monte Carlo critical values.
//!
//! Each iteration draws `n` observations from the family at the configured
//! parameters, fits the MLE, standardizes and evaluates every requested
//! statistic on the same standardized sample. The `(1 - alpha)` empirical
//! quantile over `M` iterations is the critical value.
//!
//! Iteration `m` owns a ChaCha8 stream selected by `m`, keyed by the master
//! seed and `n`, so results do not depend on how iterations are scheduled
//! across workers.

mod table;

pub use table::{
    CriticalLookup, CriticalValueTable, TableCell, TableProvenance, TABLE_FORMAT_VERSION,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::estimation::fit_mle;
use crate::families::{FamilySpec, ParamPair};
use crate::standardize::standardize;
use crate::statistics::StatisticKind;

/// Minimum `M` accepted by [`build_table`].
pub const MIN_TABLE_ITERATIONS: usize = 1_000;
/// A run aborts when more than this fraction of iterations needed a redraw.
pub const MAX_REDRAW_RATE: f64 = 1e-3;
/// Attempts per iteration before the whole run is abandoned.
const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub family: FamilySpec,
    pub true_params: ParamPair,
    pub n: usize,
    pub iterations: usize,
    pub alphas: Vec<f64>,
    pub master_seed: u64,
    pub statistics: Vec<StatisticKind>,
}

impl SimConfig {
    /// Weibull(1, 1) with every statistic at alpha = 0.1, 0.05, 0.01.
    pub fn standard(n: usize, iterations: usize, master_seed: u64) -> Self {
        SimConfig {
            family: FamilySpec::Weibull,
            true_params: ParamPair::new(1.0, 1.0).expect("unit parameters"),
            n,
            iterations,
            alphas: vec![0.1, 0.05, 0.01],
            master_seed,
            statistics: StatisticKind::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.n < 2 {
            return Err(GofError::InvalidParameter(format!(
                "sample size must be >= 2, got {}",
                self.n
            )));
        }
        if self.iterations == 0 {
            return Err(GofError::InvalidParameter("M must be >= 1".to_string()));
        }
        if self.statistics.is_empty() {
            return Err(GofError::InvalidParameter(
                "no statistics requested".to_string(),
            ));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(GofError::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {a}"
            )));
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if self.alphas[..i].contains(a) {
                return Err(GofError::InvalidParameter(format!("duplicate alpha {a}")));
            }
        }
        Ok(())
    }

    /// RNG for iteration `m`.
    fn stream(&self, m: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&(self.n as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(m as u64);
        rng
    }
}

/// Null-distribution draws, one vector of length `M` per statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct NullStatistics {
    pub statistics: Vec<StatisticKind>,
    pub values: Vec<Vec<f64>>,
    pub redraws: usize,
}

impl NullStatistics {
    pub fn get(&self, kind: StatisticKind) -> Option<&[f64]> {
        self.statistics
            .iter()
            .position(|k| *k == kind)
            .map(|i| self.values[i].as_slice())
    }
}

fn run_iteration(cfg: &SimConfig, m: usize) -> Result<(Vec<f64>, usize)> {
    let mut rng = cfg.stream(m);
    for attempt in 0..MAX_ATTEMPTS {
        let sample = cfg.family.sample(&cfg.true_params, cfg.n, &mut rng)?;
        let Ok(fit) = fit_mle(&cfg.family, &sample) else {
            continue;
        };
        let y = standardize(&sample, &fit)?.exponential_scores();
        let stats = cfg.statistics.iter().map(|k| k.evaluate(&y)).collect();
        return Ok((stats, attempt));
    }
    Err(GofError::TooManyRedraws {
        redraws: MAX_ATTEMPTS,
        iterations: 1,
    })
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GofError::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Simulates `M` null statistics. `workers = 0` picks the rayon default.
/// Output is identical for any worker count.
pub fn simulate_null_statistics(cfg: &SimConfig, workers: usize) -> Result<NullStatistics> {
    cfg.validate()?;
    let per_iteration: Vec<Result<(Vec<f64>, usize)>> = with_workers(workers, || {
        (0..cfg.iterations)
            .into_par_iter()
            .map(|m| run_iteration(cfg, m))
            .collect()
    })?;

    let k = cfg.statistics.len();
    let mut values = vec![Vec::with_capacity(cfg.iterations); k];
    let mut redraws = 0;
    for item in per_iteration {
        let (stats, extra) = item?;
        redraws += extra;
        for (column, v) in values.iter_mut().zip(stats) {
            column.push(v);
        }
    }
    if redraws as f64 > MAX_REDRAW_RATE * cfg.iterations as f64 {
        return Err(GofError::TooManyRedraws {
            redraws,
            iterations: cfg.iterations,
        });
    }
    Ok(NullStatistics {
        statistics: cfg.statistics.clone(),
        values,
        redraws,
    })
}

/// 1-based rank `ceil(q M)`, clamped to `[1, M]`. Products within rounding
/// of an integer are treated as that integer, so `0.95 * 20000` is 19000.
fn order_rank(q: f64, m: usize) -> usize {
    let x = q * m as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    (rank.max(1.0) as usize).min(m)
}

/// The `ceil(q M)`-th smallest value.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(GofError::EmptySample);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(GofError::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[order_rank(q, sorted.len()) - 1])
}

/// Quantile and its distribution-free standard error from already sorted
/// draws. The error is a quarter of the distance between the order
/// statistics at ranks `q M -+ 2 sqrt(M q (1-q))`.
fn quantile_with_stderr(sorted: &[f64], q: f64) -> (f64, f64) {
    let m = sorted.len();
    let half = 2.0 * (m as f64 * q * (1.0 - q)).sqrt();
    let centre = q * m as f64;
    let at = |x: f64| sorted[((x.ceil().max(1.0)) as usize).min(m) - 1];
    let quantile = sorted[order_rank(q, m) - 1];
    let stderr = (at(centre + half) - at(centre - half)) / 4.0;
    (quantile, stderr)
}

/// Critical values for a single sample size.
pub fn build_table(cfg: &SimConfig, workers: usize) -> Result<CriticalValueTable> {
    if cfg.iterations < MIN_TABLE_ITERATIONS {
        return Err(GofError::InvalidParameter(format!(
            "table generation needs M >= {MIN_TABLE_ITERATIONS}, got {}",
            cfg.iterations
        )));
    }
    let sims = simulate_null_statistics(cfg, workers)?;
    let mut alphas = cfg.alphas.clone();
    alphas.sort_by(|a, b| b.total_cmp(a));

    let mut cells = Vec::new();
    for (kind, draws) in sims.statistics.iter().zip(&sims.values) {
        let mut sorted = draws.clone();
        sorted.sort_by(f64::total_cmp);
        for &alpha in &alphas {
            let (quantile, mc_stderr) = quantile_with_stderr(&sorted, 1.0 - alpha);
            cells.push(TableCell {
                statistic: *kind,
                n: cfg.n,
                alpha,
                quantile,
                mc_stderr,
            });
        }
    }
    CriticalValueTable::new(
        TableProvenance {
            family: cfg.family,
            true_params: cfg.true_params,
            iterations: cfg.iterations,
            master_seed: cfg.master_seed,
            alphas,
            statistics: cfg.statistics.clone(),
            sizes: vec![cfg.n],
            redraws: sims.redraws,
        },
        cells,
    )
}

/// Critical values for several sample sizes; `cfg.n` is ignored.
pub fn build_table_for_sizes(
    cfg: &SimConfig,
    sizes: &[usize],
    workers: usize,
) -> Result<CriticalValueTable> {
    let mut tables = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut sized = cfg.clone();
        sized.n = n;
        tables.push(build_table(&sized, workers)?);
    }
    CriticalValueTable::merge(tables)
}
