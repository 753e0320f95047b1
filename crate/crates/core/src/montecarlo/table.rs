//! Critical-value tables and their text serialization.
//!
//! The text form is a header of `key = value` provenance lines followed by
//! a `[cells]` section with one comma-separated row per
//! `(statistic, n, alpha)`. Floats are written in shortest round-trip form,
//! so reading a written table gives back the identical bits.
//!
//! ```text
//! # invariant-gof critical-value table
//! version = 1
//! family = weibull
//! xi = none
//! true_c = 1.0
//! true_kappa = 1.0
//! iterations = 20000
//! master_seed = 42
//! alphas = 0.1,0.05,0.01
//! statistics = AD,HM,RB,KS
//! sizes = 50,200
//! redraws = 0
//! [cells]
//! statistic,n,alpha,quantile,mc_stderr
//! AD,50,0.1,0.6301...,0.0041...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::families::{FamilySpec, ParamPair};
use crate::statistics::StatisticKind;

pub const TABLE_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# invariant-gof critical-value table";
const CELLS_MARKER: &str = "[cells]";
const CELLS_HEADER: &str = "statistic,n,alpha,quantile,mc_stderr";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProvenance {
    pub family: FamilySpec,
    pub true_params: ParamPair,
    pub iterations: usize,
    pub master_seed: u64,
    /// Sorted descending.
    pub alphas: Vec<f64>,
    pub statistics: Vec<StatisticKind>,
    /// Sorted ascending.
    pub sizes: Vec<usize>,
    pub redraws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub statistic: StatisticKind,
    pub n: usize,
    pub alpha: f64,
    pub quantile: f64,
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLookup {
    pub value: f64,
    pub interpolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    provenance: TableProvenance,
    cells: Vec<TableCell>,
}

fn same_alpha(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

impl CriticalValueTable {
    /// Builds a table, putting cells in canonical order and checking that
    /// every `(statistic, n, alpha)` cell is present exactly once and that
    /// quantiles do not decrease as alpha decreases.
    pub fn new(mut provenance: TableProvenance, mut cells: Vec<TableCell>) -> Result<Self> {
        provenance.alphas.sort_by(|a, b| b.total_cmp(a));
        provenance.sizes.sort_unstable();
        provenance.sizes.dedup();
        let stat_rank = |k: StatisticKind| {
            provenance
                .statistics
                .iter()
                .position(|s| *s == k)
                .ok_or_else(|| {
                    GofError::Format(format!("cell statistic {k} not listed in provenance"))
                })
        };
        for c in &cells {
            stat_rank(c.statistic)?;
            if !provenance.sizes.contains(&c.n) {
                return Err(GofError::Format(format!(
                    "cell n={} not listed in provenance",
                    c.n
                )));
            }
            if !provenance.alphas.iter().any(|a| same_alpha(*a, c.alpha)) {
                return Err(GofError::Format(format!(
                    "cell alpha={} not listed in provenance",
                    c.alpha
                )));
            }
        }
        let expected =
            provenance.statistics.len() * provenance.sizes.len() * provenance.alphas.len();
        if cells.len() != expected {
            return Err(GofError::Format(format!(
                "expected {expected} cells, found {}",
                cells.len()
            )));
        }
        cells.sort_by(|a, b| {
            let ra = provenance.statistics.iter().position(|s| *s == a.statistic);
            let rb = provenance.statistics.iter().position(|s| *s == b.statistic);
            ra.cmp(&rb)
                .then(a.n.cmp(&b.n))
                .then(b.alpha.total_cmp(&a.alpha))
        });
        for w in cells.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.statistic == b.statistic && a.n == b.n {
                if same_alpha(a.alpha, b.alpha) {
                    return Err(GofError::Format(format!(
                        "duplicate cell {} n={} alpha={}",
                        a.statistic, a.n, a.alpha
                    )));
                }
                if b.quantile < a.quantile {
                    return Err(GofError::Format(format!(
                        "{} n={}: quantile at alpha={} is below the one at alpha={}",
                        a.statistic, a.n, b.alpha, a.alpha
                    )));
                }
            }
        }
        Ok(Self { provenance, cells })
    }

    /// Joins tables that differ only in their sample sizes.
    pub fn merge(tables: Vec<CriticalValueTable>) -> Result<Self> {
        let mut iter = tables.into_iter();
        let Some(first) = iter.next() else {
            return Err(GofError::InvalidParameter("no tables to merge".to_string()));
        };
        let mut provenance = first.provenance;
        let mut cells = first.cells;
        for t in iter {
            let p = &t.provenance;
            let compatible = p.family == provenance.family
                && p.true_params == provenance.true_params
                && p.iterations == provenance.iterations
                && p.master_seed == provenance.master_seed
                && p.alphas == provenance.alphas
                && p.statistics == provenance.statistics;
            if !compatible {
                return Err(GofError::InvalidParameter(
                    "tables disagree on provenance and cannot be merged".to_string(),
                ));
            }
            if p.sizes.iter().any(|n| provenance.sizes.contains(n)) {
                return Err(GofError::InvalidParameter(
                    "tables overlap in sample size".to_string(),
                ));
            }
            provenance.sizes.extend(&p.sizes);
            provenance.redraws += p.redraws;
            cells.extend(t.cells);
        }
        Self::new(provenance, cells)
    }

    /// Copy of the table holding only the requested alphas.
    pub fn select_alphas(&self, alphas: &[f64]) -> Result<Self> {
        if let Some(&a) = alphas
            .iter()
            .find(|a| !self.provenance.alphas.iter().any(|t| same_alpha(*t, **a)))
        {
            return Err(GofError::InvalidParameter(format!(
                "alpha {a} is not tabulated (table has {:?})",
                self.provenance.alphas
            )));
        }
        let mut provenance = self.provenance.clone();
        provenance
            .alphas
            .retain(|t| alphas.iter().any(|a| same_alpha(*t, *a)));
        let cells = self
            .cells
            .iter()
            .filter(|c| alphas.iter().any(|a| same_alpha(c.alpha, *a)))
            .copied()
            .collect();
        Self::new(provenance, cells)
    }

    pub fn provenance(&self) -> &TableProvenance {
        &self.provenance
    }

    pub fn cells(&self) -> &[TableCell] {
        &self.cells
    }

    pub fn cell(&self, statistic: StatisticKind, n: usize, alpha: f64) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.statistic == statistic && c.n == n && same_alpha(c.alpha, alpha))
    }

    /// Critical value for `(statistic, n, alpha)`. Without an exact `n`,
    /// `interpolate` enables linear interpolation between the nearest
    /// tabulated sizes on either side; extrapolation is never done.
    pub fn critical_value(
        &self,
        statistic: StatisticKind,
        n: usize,
        alpha: f64,
        interpolate: bool,
    ) -> Result<CriticalLookup> {
        let missing = || GofError::MissingCell {
            statistic: statistic.to_string(),
            n,
            alpha,
        };
        if let Some(c) = self.cell(statistic, n, alpha) {
            return Ok(CriticalLookup {
                value: c.quantile,
                interpolated: false,
            });
        }
        if !interpolate {
            return Err(missing());
        }
        let sizes = &self.provenance.sizes;
        let below = sizes.iter().rev().find(|&&s| s < n).copied();
        let above = sizes.iter().find(|&&s| s > n).copied();
        let (Some(lo), Some(hi)) = (below, above) else {
            return Err(missing());
        };
        let qlo = self
            .cell(statistic, lo, alpha)
            .ok_or_else(missing)?
            .quantile;
        let qhi = self
            .cell(statistic, hi, alpha)
            .ok_or_else(missing)?
            .quantile;
        let w = (n - lo) as f64 / (hi - lo) as f64;
        Ok(CriticalLookup {
            value: qlo + w * (qhi - qlo),
            interpolated: true,
        })
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let join_f = |v: &[f64]| {
            v.iter()
                .map(|a| format!("{a:?}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "version = {TABLE_FORMAT_VERSION}");
        let _ = writeln!(out, "family = {}", p.family.name());
        match p.family.xi() {
            Some(xi) => {
                let _ = writeln!(out, "xi = {xi:?}");
            }
            None => {
                let _ = writeln!(out, "xi = none");
            }
        }
        let _ = writeln!(out, "true_c = {:?}", p.true_params.c());
        let _ = writeln!(out, "true_kappa = {:?}", p.true_params.kappa());
        let _ = writeln!(out, "iterations = {}", p.iterations);
        let _ = writeln!(out, "master_seed = {}", p.master_seed);
        let _ = writeln!(out, "alphas = {}", join_f(&p.alphas));
        let stats: Vec<&str> = p.statistics.iter().map(|s| s.name()).collect();
        let _ = writeln!(out, "statistics = {}", stats.join(","));
        let sizes: Vec<String> = p.sizes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "sizes = {}", sizes.join(","));
        let _ = writeln!(out, "redraws = {}", p.redraws);
        let _ = writeln!(out, "{CELLS_MARKER}");
        out.push_str(&self.cells_csv());
        out
    }

    /// Just the cell rows, with a CSV header.
    pub fn to_csv(&self) -> String {
        self.cells_csv()
    }

    fn cells_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CELLS_HEADER}");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?},{:?}",
                c.statistic, c.n, c.alpha, c.quantile, c.mc_stderr
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            _ => return Err(GofError::Format("missing table header line".to_string())),
        }

        let mut header: Vec<(usize, String, String)> = Vec::new();
        let mut in_cells = false;
        let mut cells = Vec::new();
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            if !in_cells {
                if line == CELLS_MARKER {
                    in_cells = true;
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    GofError::Format(format!("line {no}: expected 'key = value'"))
                })?;
                header.push((no, k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if line == CELLS_HEADER {
                continue;
            }
            cells.push(parse_cell(no, line)?);
        }
        if !in_cells {
            return Err(GofError::Format("missing [cells] section".to_string()));
        }

        let get = |key: &str| -> Result<(usize, &str)> {
            header
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(no, _, v)| (*no, v.as_str()))
                .ok_or_else(|| GofError::Format(format!("missing header key '{key}'")))
        };
        let (no, version) = get("version")?;
        let version: u32 = parse_at(no, version)?;
        if version != TABLE_FORMAT_VERSION {
            return Err(GofError::Format(format!(
                "unsupported table version {version}"
            )));
        }
        let (no, xi) = get("xi")?;
        let xi = if xi == "none" {
            None
        } else {
            Some(parse_at::<f64>(no, xi)?)
        };
        let family = FamilySpec::from_name(get("family")?.1, xi)?;
        let (no_c, c) = get("true_c")?;
        let (no_k, k) = get("true_kappa")?;
        let true_params = ParamPair::new(parse_at(no_c, c)?, parse_at(no_k, k)?)?;
        let (no, iterations) = get("iterations")?;
        let (no_s, seed) = get("master_seed")?;
        let (no_a, alphas) = get("alphas")?;
        let (no_st, statistics) = get("statistics")?;
        let (no_n, sizes) = get("sizes")?;
        let (no_r, redraws) = get("redraws")?;
        let provenance = TableProvenance {
            family,
            true_params,
            iterations: parse_at(no, iterations)?,
            master_seed: parse_at(no_s, seed)?,
            alphas: parse_list(no_a, alphas)?,
            statistics: parse_list(no_st, statistics)?,
            sizes: parse_list(no_n, sizes)?,
            redraws: parse_at(no_r, redraws)?,
        };
        Self::new(provenance, cells)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GofError::Format(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

fn parse_at<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| GofError::Format(format!("line {line}: cannot parse '{s}'")))
}

fn parse_list<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split(',').map(|item| parse_at(line, item)).collect()
}

fn parse_cell(no: usize, line: &str) -> Result<TableCell> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(GofError::Format(format!(
            "line {no}: expected 5 fields, found {}",
            fields.len()
        )));
    }
    Ok(TableCell {
        statistic: parse_at(no, fields[0])?,
        n: parse_at(no, fields[1])?,
        alpha: parse_at(no, fields[2])?,
        quantile: parse_at(no, fields[3])?,
        mc_stderr: parse_at(no, fields[4])?,
    })
}
