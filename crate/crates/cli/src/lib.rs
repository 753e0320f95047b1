//! Library half of the `invgof` command-line tool: dataset ingestion, the
//! three commands, and their text and JSON renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use invariant_gof::montecarlo::{build_table_for_sizes, CriticalValueTable, SimConfig};
use invariant_gof::{
    fit_mle, run_battery, standardize, FamilySpec, FitResult, GofError, ParamPair, Sample,
    StatisticKind, TestResult,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {}", format_rejects(.rejects))]
    Parse {
        path: PathBuf,
        rejects: Vec<(usize, String)>,
    },

    #[error(transparent)]
    Gof(#[from] GofError),

    #[error("{0}")]
    Usage(String),
}

fn format_rejects(rejects: &[(usize, String)]) -> String {
    rejects
        .iter()
        .map(|(line, why)| format!("line {line}: {why}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses one observation per line, or a single-column CSV with an optional
/// header line. Blank lines and `#` comments are skipped. Every rejected
/// line is reported, not just the first.
pub fn parse_dataset(path: &Path, text: &str) -> CliResult<Sample> {
    let mut values = Vec::new();
    let mut rejects = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = match fields.as_slice() {
            [one] => *one,
            [one, ""] => *one,
            _ => {
                rejects.push((
                    line_no,
                    format!("expected a single column, found {}", fields.len()),
                ));
                continue;
            }
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => {
                values.push(v);
                seen_data = true;
            }
            Ok(v) => rejects.push((
                line_no,
                format!("observation must be finite and > 0, got {v}"),
            )),
            Err(_) if !seen_data && values.is_empty() && rejects.is_empty() => {
                // header
            }
            Err(_) => rejects.push((line_no, format!("not a number: '{field}'"))),
        }
    }
    if !rejects.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            rejects,
        });
    }
    if values.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            rejects: vec![(0, "no observations".to_string())],
        });
    }
    Ok(Sample::new(values)?)
}

pub fn read_dataset(path: &Path) -> CliResult<Sample> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(path, &text)
}

pub fn parse_alphas(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad alpha '{a}'")))
        })
        .collect()
}

pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|a| {
            a.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad sample size '{a}'")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub file: String,
    pub n: usize,
    pub fit: FitResult,
}

pub fn cmd_fit(file: &Path, family: FamilySpec) -> CliResult<FitReport> {
    let sample = read_dataset(file)?;
    let fit = fit_mle(&family, &sample)?;
    Ok(FitReport {
        file: file.display().to_string(),
        n: sample.len(),
        fit,
    })
}

impl FitReport {
    pub fn render_text(&self) -> String {
        let f = &self.fit;
        let mut out = String::new();
        let _ = writeln!(out, "file        {}", self.file);
        let _ = writeln!(out, "family      {}", f.family);
        let _ = writeln!(out, "n           {}", self.n);
        let _ = writeln!(out, "c_hat       {:.6}", f.params.c());
        let _ = writeln!(out, "kappa_hat   {:.6}", f.params.kappa());
        let _ = writeln!(out, "loglik      {:.6}", f.loglik);
        let _ = writeln!(out, "iterations  {}", f.iterations);
        let _ = writeln!(out, "converged   {}", f.converged);
        let _ = writeln!(out, "grad_norm   {:.3e}", f.gradient_norm);
        out
    }
}

/// Where critical values come from in `cmd_test`.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSource {
    File(PathBuf),
    Simulate {
        iterations: usize,
        seed: u64,
        workers: usize,
    },
}

#[derive(Debug, Clone)]
pub struct TestOptions {
    pub family: FamilySpec,
    pub table: TableSource,
    /// `None` uses every alpha in a stored table, or 0.1, 0.05, 0.01 when
    /// simulating.
    pub alphas: Option<Vec<f64>>,
    pub interpolate_n: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub family: FamilySpec,
    pub table: String,
    pub alphas: Vec<f64>,
    pub interpolate_n: bool,
    pub table_iterations: usize,
    pub table_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StandardizedSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub file: String,
    pub n: usize,
    pub config: ConfigEcho,
    pub fit: FitResult,
    pub standardized: StandardizedSummary,
    pub results: Vec<TestResult>,
}

impl RunReport {
    /// True when some statistic rejects at the smallest alpha.
    pub fn any_rejection(&self) -> bool {
        self.results
            .iter()
            .any(TestResult::rejects_at_smallest_alpha)
    }

    pub fn result(&self, kind: StatisticKind) -> Option<&TestResult> {
        self.results.iter().find(|r| r.kind == kind)
    }

    pub fn render_text(&self) -> String {
        let f = &self.fit;
        let mut out = String::new();
        let _ = writeln!(out, "file        {}", self.file);
        let _ = writeln!(out, "family      {}", f.family);
        let _ = writeln!(out, "n           {}", self.n);
        let _ = writeln!(out, "c_hat       {:.6}", f.params.c());
        let _ = writeln!(out, "kappa_hat   {:.6}", f.params.kappa());
        let _ = writeln!(out, "loglik      {:.6}", f.loglik);
        let _ = writeln!(
            out,
            "Y_hat       min {:.4}  max {:.4}  mean {:.4}",
            self.standardized.min, self.standardized.max, self.standardized.mean
        );
        let _ = writeln!(out, "table       {}", self.config.table);
        let _ = writeln!(out);
        let mut header = format!("{:<6}{:>10}", "stat", "act.");
        for a in &self.config.alphas {
            let _ = write!(header, "{:>12}", a);
        }
        let _ = writeln!(out, "{header}");
        for r in &self.results {
            let mut row = format!("{:<6}{:>10.3}", r.kind.name(), r.value);
            for d in &r.decisions {
                let mark = if d.reject { "*" } else { " " };
                let _ = write!(row, "{:>11.3}{}", d.critical_value, mark);
            }
            if r.interpolated {
                row.push_str("  (interpolated in n)");
            }
            if r.clamped {
                row.push_str("  (Z clamped)");
            }
            let _ = writeln!(out, "{row}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "* = rejected: statistic exceeds the critical value");
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fit, standardize and run the battery against a stored or freshly
/// simulated critical-value table.
pub fn cmd_test(file: &Path, opts: &TestOptions) -> CliResult<RunReport> {
    let sample = read_dataset(file)?;
    let fit = fit_mle(&opts.family, &sample)?;
    let y = standardize(&sample, &fit)?;
    let n = sample.len();

    let (table, label) = match &opts.table {
        TableSource::File(path) => {
            let t = CriticalValueTable::read(path)?;
            let t = match &opts.alphas {
                Some(alphas) => t.select_alphas(alphas)?,
                None => t,
            };
            (t, path.display().to_string())
        }
        TableSource::Simulate {
            iterations,
            seed,
            workers,
        } => {
            let mut cfg = SimConfig::standard(n, *iterations, *seed);
            cfg.family = opts.family;
            if let Some(alphas) = &opts.alphas {
                cfg.alphas = alphas.clone();
            }
            let t = build_table_for_sizes(&cfg, &[n], *workers)?;
            (t, format!("simulated (M={iterations}, seed={seed})"))
        }
    };
    let results = run_battery(&y, &table, opts.interpolate_n)?;
    let (min, max, mean) = y.summary();
    let prov = table.provenance();
    Ok(RunReport {
        file: file.display().to_string(),
        n,
        config: ConfigEcho {
            family: opts.family,
            table: label,
            alphas: prov.alphas.clone(),
            interpolate_n: opts.interpolate_n,
            table_iterations: prov.iterations,
            table_seed: prov.master_seed,
        },
        fit,
        standardized: StandardizedSummary { min, max, mean },
        results,
    })
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub family: FamilySpec,
    pub params: ParamPair,
    pub sizes: Vec<usize>,
    pub iterations: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    pub statistics: Vec<StatisticKind>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            family: FamilySpec::Weibull,
            params: ParamPair::new(1.0, 1.0).expect("unit parameters"),
            sizes: vec![50, 100, 150, 200],
            iterations: 100_000,
            alphas: vec![0.1, 0.05, 0.01],
            seed: 1,
            workers: 0,
            statistics: StatisticKind::ALL.to_vec(),
        }
    }
}

/// Simulates the table and writes it to `out` (and the cell rows as CSV to
/// `csv`, when given).
pub fn cmd_table(
    opts: &TableOptions,
    out: &Path,
    csv: Option<&Path>,
) -> CliResult<CriticalValueTable> {
    if opts.sizes.is_empty() {
        return Err(CliError::Usage("no sample sizes given".to_string()));
    }
    let cfg = SimConfig {
        family: opts.family,
        true_params: opts.params,
        n: opts.sizes[0],
        iterations: opts.iterations,
        alphas: opts.alphas.clone(),
        master_seed: opts.seed,
        statistics: opts.statistics.clone(),
    };
    let table = build_table_for_sizes(&cfg, &opts.sizes, opts.workers)?;
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    write(out, table.to_text())?;
    if let Some(csv) = csv {
        write(csv, table.to_csv())?;
    }
    Ok(table)
}

/// Rows are sample sizes; columns are statistic by alpha.
pub fn render_table(table: &CriticalValueTable) -> String {
    let prov = table.provenance();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "critical values: {} (c={}, kappa={}), M={}, seed={}",
        prov.family,
        prov.true_params.c(),
        prov.true_params.kappa(),
        prov.iterations,
        prov.master_seed
    );
    let mut head = format!("{:<8}", "n\\alpha");
    for k in &prov.statistics {
        for a in &prov.alphas {
            let _ = write!(head, "{:>10}", format!("{k} {a}"));
        }
        head.push_str(" |");
    }
    let _ = writeln!(out, "{head}");
    for &n in &prov.sizes {
        let mut row = format!("{:<8}", n);
        for &k in &prov.statistics {
            for &a in &prov.alphas {
                let q = table.cell(k, n, a).map(|c| c.quantile).unwrap_or(f64::NAN);
                let _ = write!(row, "{:>10.3}", q);
            }
            row.push_str(" |");
        }
        let _ = writeln!(out, "{row}");
    }
    out
}
