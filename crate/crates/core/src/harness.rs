//! Named Monte Carlo experiments, their reports and the key-value config
//! format read by the command-line runner.
//!
//! Every experiment draws trial `t` from `trial_seed(master_seed, t)` and
//! folds rows in trial order, so rows do not depend on the worker count.
//! Thresholds and knobs have per-experiment defaults that the config may
//! override; the effective values are echoed in the report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::edge::{pair_sign_probability, DetectionSystem, EntryLaw, SecularProblem};
use crate::ensembles::{normalize_shifted, sample_gnp, AdjacencyMatrix, Normalized, MAX_DENSE};
use crate::greenlaw::{lindeberg_gap, sweep_trials, ComparisonEnsemble, ComparisonStatistic, SweepGrid, SweepRow, TestFunction};
use crate::nodal::{count_and_balance, nodal_domains};
use crate::par::map_trials;
use crate::rng::{rng_from, substream, trial_seed};
use crate::signpoly::{
    default_weights, gauss_product_expectation, project_odd, residual_against_monomial, smoothed_sign, sobolev_norm,
    ProjectionOptions,
};
use crate::spectral::{eigendecompose, eigenvalues, phi_n, Spectrum};
use crate::deloc::{level_repulsion_min_gap, typicality_from_spectrum, TypicalityParams, Variant};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Experiment names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 12] = [
    "verify-bulk-balance",
    "verify-edge-balance",
    "two-domains",
    "bhy-moments",
    "typicality",
    "level-repulsion",
    "detection-consistency",
    "sticking",
    "wgw",
    "sign-probability",
    "signpoly-report",
    "green-comparison",
];

const TAG_INDEX: u64 = 0x11;
const TAG_RESAMPLE: u64 = 0x12;
const TAG_DIRECTIONS: u64 = 0x13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Bulk indices are drawn from `[κn, n − κn]`.
    pub kappa: f64,
    /// 1-based edge indices; empty means `2..=⌈φ_n⌉` (and their mirrors).
    pub edge_indices: Vec<usize>,
    pub thresholds: BTreeMap<String, f64>,
    pub params: BTreeMap<String, f64>,
    pub workers: usize,
}

struct Defaults {
    n: usize,
    p: f64,
    trials: usize,
    thresholds: &'static [(&'static str, f64)],
    params: &'static [(&'static str, f64)],
}

fn defaults(experiment: &str) -> Result<Defaults> {
    let d = |n, trials, thresholds, params| Defaults {
        n,
        p: 0.5,
        trials,
        thresholds,
        params,
    };
    Ok(match experiment {
        "verify-bulk-balance" => d(
            1000,
            100,
            &[("balance_max", 0.6), ("max_unbalanced_freq", 0.05)],
            &[("bulk_count", 10.0)],
        ),
        "verify-edge-balance" => d(
            1000,
            50,
            &[("balance_max", 0.6), ("min_balanced_freq", 0.9), ("min_two_domain_freq", 0.9)],
            &[],
        ),
        "two-domains" => d(
            1000,
            50,
            &[
                ("min_two_domain_freq", 0.95),
                ("balance_max", 0.6),
                ("min_balanced_freq", 0.95),
                ("min_zero_free_freq", 0.99),
            ],
            &[("bulk_count", 10.0)],
        ),
        "bhy-moments" => d(
            2000,
            200,
            &[("max_gap_x", 0.1), ("max_gap_x2", 0.5)],
            &[("bulk_fraction", 0.5), ("pair_directions", 1.0)],
        ),
        "typicality" => d(1000, 20, &[("min_typical_freq", 0.9)], &[("shifted", 0.0), ("minor_samples", 0.0)]),
        "level-repulsion" => d(
            1000,
            100,
            &[("gap_eps", 0.1), ("min_pass_freq", 0.9)],
            &[("window_const", 3.0)],
        ),
        "detection-consistency" => d(
            50,
            100,
            &[("root_tol", 1e-8), ("cosine_tol", 1e-10), ("min_pass_freq", 1.0)],
            &[],
        ),
        "sticking" => d(1000, 100, &[("gap_exponent", 0.8), ("min_pass_freq", 0.9)], &[("beta", 2.0)]),
        "wgw" => d(1000, 100, &[("residual_shift", 0.2), ("min_pass_freq", 0.9)], &[]),
        "sign-probability" => d(
            1000,
            10,
            &[("max_bias", 0.05)],
            &[("resamples", 10000.0), ("alpha", 2.0)],
        ),
        "signpoly-report" => d(
            0,
            1,
            &[("orthogonality_tol", 1e-8), ("mean_tol", 1e-10), ("max_sup_error", 0.1), ("max_fallback_degree", 61.0)],
            &[("r", 0.1), ("target_degree", 41.0), ("max_degree", 61.0), ("sup_range", 10.0)],
        ),
        "green-comparison" => d(
            300,
            1000,
            &[
                ("gap_se_factor", 3.0),
                ("gap_shift", 0.3),
                ("sweep_shift", 0.3),
                ("min_sweep_freq", 0.9),
                ("growth_const", 10.0),
                ("min_growth_freq", 0.95),
            ],
            &[
                ("stat_eps", 0.05),
                ("sweep_trials", 40.0),
                ("sweep_eps", 0.01),
                ("sweep_coordinates", 4.0),
                ("sweep_energies", 64.0),
                ("max_n", 400.0),
            ],
        ),
        other => return Err(Error::UnknownExperiment(other.to_string())),
    })
}

impl ExperimentConfig {
    /// Defaults for `experiment`, with empty override maps.
    pub fn new(experiment: &str) -> Result<Self> {
        let d = defaults(experiment)?;
        Ok(ExperimentConfig {
            experiment: experiment.to_string(),
            n: d.n,
            p: d.p,
            trials: d.trials,
            master_seed: 42,
            kappa: 0.25,
            edge_indices: Vec::new(),
            thresholds: BTreeMap::new(),
            params: BTreeMap::new(),
            workers: 1,
        })
    }

    /// Copy with every threshold and parameter filled in from the defaults.
    pub fn resolved(&self) -> Result<Self> {
        let d = defaults(&self.experiment)?;
        let merge = |over: &BTreeMap<String, f64>, base: &[(&str, f64)], what: &str| -> Result<BTreeMap<String, f64>> {
            let mut m: BTreeMap<String, f64> = base.iter().map(|&(k, v)| (k.to_string(), v)).collect();
            for (k, &v) in over {
                if !m.contains_key(k) {
                    return Err(Error::Config(format!("`{}` has no {what} named `{k}`", self.experiment)));
                }
                m.insert(k.clone(), v);
            }
            Ok(m)
        };
        Ok(ExperimentConfig {
            thresholds: merge(&self.thresholds, d.thresholds, "threshold")?,
            params: merge(&self.params, d.params, "parameter")?,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        defaults(&self.experiment)?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(Error::Config(format!("κ = {} must lie in (0, 1/2)", self.kappa)));
        }
        if self.experiment != "signpoly-report" {
            if !(self.p > 0.0 && self.p < 1.0) {
                return Err(Error::Config(format!("p = {} must lie in (0, 1)", self.p)));
            }
            if self.n < 6 {
                return Err(Error::Size(format!("n = {} is below the minimum of 6", self.n)));
            }
            if self.n > MAX_DENSE {
                return Err(Error::Size(format!("n = {} exceeds the dense cap {MAX_DENSE}", self.n)));
            }
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn threshold(&self, key: &str) -> f64 {
        self.thresholds[key]
    }

    fn param(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Parses the key-value format:
    ///
    /// ```text
    /// # comment
    /// experiment = sticking
    /// n = 1000
    /// p = 0.5
    /// trials = 100
    /// seed = 42
    /// kappa = 0.25
    /// edge_indices = 2, 3, 4
    /// workers = 4
    /// threshold.min_pass_freq = 0.9
    /// param.beta = 2
    /// ```
    ///
    /// `experiment` may be omitted when `fallback` names one.
    pub fn parse(text: &str, path: &Path, fallback: Option<&str>) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(k + 1, format!("expected `key = value`, found `{line}`")))?;
            pairs.push((k + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let name = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| v.as_str())
            .or(fallback)
            .ok_or_else(|| perr(1, "no experiment given".into()))?;
        let mut cfg = ExperimentConfig::new(name)?;
        for (line, key, value) in pairs {
            fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
                v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
            }
            let r: std::result::Result<(), String> = match key.as_str() {
                "experiment" => Ok(()),
                "n" => num(&value).map(|v| cfg.n = v),
                "p" => num(&value).map(|v| cfg.p = v),
                "trials" => num(&value).map(|v| cfg.trials = v),
                "seed" | "master_seed" => num(&value).map(|v| cfg.master_seed = v),
                "kappa" => num(&value).map(|v| cfg.kappa = v),
                "workers" => num(&value).map(|v| cfg.workers = v),
                "edge_indices" => value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(num::<usize>)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map(|v| cfg.edge_indices = v),
                k => {
                    if let Some(t) = k.strip_prefix("threshold.") {
                        num(&value).map(|v| {
                            cfg.thresholds.insert(t.to_string(), v);
                        })
                    } else if let Some(t) = k.strip_prefix("param.") {
                        num(&value).map(|v| {
                            cfg.params.insert(t.to_string(), v);
                        })
                    } else {
                        Err(format!("unknown key `{k}`"))
                    }
                }
            };
            r.map_err(|m| perr(line, m))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path, fallback: Option<&str>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, fallback)
    }

    /// Inverse of [`ExperimentConfig::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "kappa = {}", self.kappa);
        if !self.edge_indices.is_empty() {
            let list: Vec<String> = self.edge_indices.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "edge_indices = {}", list.join(", "));
        }
        let _ = writeln!(s, "workers = {}", self.workers);
        for (k, v) in &self.thresholds {
            let _ = writeln!(s, "threshold.{k} = {v}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k} = {v}");
        }
        s
    }
}

/// One data row; several rows may share a trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub trial: usize,
    pub seed: u64,
    #[serde(with = "crate::jsonfloat::options")]
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub column: String,
    pub count: usize,
    #[serde(with = "crate::jsonfloat")]
    pub mean: f64,
    #[serde(with = "crate::jsonfloat")]
    pub sd: f64,
    #[serde(with = "crate::jsonfloat")]
    pub se: f64,
    #[serde(with = "crate::jsonfloat")]
    pub min: f64,
    #[serde(with = "crate::jsonfloat")]
    pub q05: f64,
    #[serde(with = "crate::jsonfloat")]
    pub q50: f64,
    #[serde(with = "crate::jsonfloat")]
    pub q95: f64,
    #[serde(with = "crate::jsonfloat")]
    pub max: f64,
}

/// `successes/total` with the binomial standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub name: String,
    /// Column summed for the numerator.
    pub successes_column: String,
    /// Column summed for the denominator; `None` counts the rows.
    pub total_column: Option<String>,
    pub successes: f64,
    pub total: f64,
    pub value: f64,
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::jsonfloat")]
    pub value: f64,
    pub comparison: Comparison,
    #[serde(with = "crate::jsonfloat")]
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
        };
        Check {
            name: name.to_string(),
            value,
            comparison,
            threshold,
            pass,
        }
    }
}

/// A named extra output file (for instance the sweep rows).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub file: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
    pub frequencies: Vec<Frequency>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub attachments: Vec<Attachment>,
    /// Excluded from every determinism comparison.
    pub wall_time_s: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary statistics of every column, skipping missing values.
pub fn compute_aggregates(columns: &[String], rows: &[Row]) -> Vec<Aggregate> {
    columns
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mut v: Vec<f64> = rows.iter().filter_map(|r| r.values[c]).collect();
            v.sort_by(f64::total_cmp);
            let k = v.len();
            if k == 0 {
                return Aggregate {
                    column: name.clone(),
                    count: 0,
                    mean: 0.0,
                    sd: 0.0,
                    se: 0.0,
                    min: 0.0,
                    q05: 0.0,
                    q50: 0.0,
                    q95: 0.0,
                    max: 0.0,
                };
            }
            let mean = v.iter().sum::<f64>() / k as f64;
            let sd = if k > 1 {
                (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64).sqrt()
            } else {
                0.0
            };
            Aggregate {
                column: name.clone(),
                count: k,
                mean,
                sd,
                se: sd / (k as f64).sqrt(),
                min: v[0],
                q05: quantile(&v, 0.05),
                q50: quantile(&v, 0.5),
                q95: quantile(&v, 0.95),
                max: v[k - 1],
            }
        })
        .collect()
}

/// Recomputes a frequency from the rows.
pub fn compute_frequency(name: &str, successes: &str, total: Option<&str>, columns: &[String], rows: &[Row]) -> Frequency {
    let col = |c: &str| columns.iter().position(|x| x == c).unwrap_or_else(|| panic!("no column {c}"));
    let sc = col(successes);
    let s: f64 = rows.iter().filter_map(|r| r.values[sc]).sum();
    let t: f64 = match total {
        Some(tc) => {
            let tc = col(tc);
            rows.iter().filter_map(|r| r.values[tc]).sum()
        }
        None => rows.iter().filter(|r| r.values[sc].is_some()).count() as f64,
    };
    let value = if t > 0.0 { s / t } else { 0.0 };
    Frequency {
        name: name.to_string(),
        successes_column: successes.to_string(),
        total_column: total.map(str::to_string),
        successes: s,
        total: t,
        value,
        se: if t > 0.0 { (value * (1.0 - value) / t).sqrt() } else { 0.0 },
    }
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

impl StatReport {
    pub fn aggregate(&self, column: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.column == column)
    }

    pub fn frequency(&self, name: &str) -> Option<&Frequency> {
        self.frequencies.iter().find(|f| f.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Aggregates and frequencies recomputed from the rows.
    pub fn recompute(&self) -> (Vec<Aggregate>, Vec<Frequency>) {
        let aggs = compute_aggregates(&self.columns, &self.rows);
        let freqs = self
            .frequencies
            .iter()
            .map(|f| compute_frequency(&f.name, &f.successes_column, f.total_column.as_deref(), &self.columns, &self.rows))
            .collect();
        (aggs, freqs)
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("trial,seed");
        for c in &self.columns {
            h.push(',');
            h.push_str(c);
        }
        h
    }

    /// Fixed column order `trial, seed, metrics…`; header only when empty.
    pub fn to_csv(&self) -> String {
        let mut s = self.csv_header();
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.trial, r.seed);
            for v in &r.values {
                s.push(',');
                s.push_str(&fmt_value(*v));
            }
            s.push('\n');
        }
        s
    }

    /// `trial, seed, row, metric, value` with one line per present value.
    pub fn to_long_csv(&self) -> String {
        let mut s = String::from("trial,seed,row,metric,value\n");
        for (k, r) in self.rows.iter().enumerate() {
            for (c, v) in self.columns.iter().zip(&r.values) {
                if let Some(x) = v {
                    let _ = writeln!(s, "{},{},{k},{c},{x}", r.trial, r.seed);
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.config.experiment, if self.pass { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            let _ = writeln!(
                s,
                "  [{}] {}: {:.6e} {op} {:.6e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}`, expected csv or json"))),
        }
    }
}

/// Writes the report into `dir`: `<experiment>.csv` and `<experiment>.long.csv`
/// for CSV, `<experiment>.json` for JSON, plus attachments. Returns the paths.
pub fn emit(report: &StatReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = &report.config.experiment;
    let mut files: Vec<(PathBuf, String)> = match format {
        Format::Csv => vec![
            (dir.join(format!("{stem}.csv")), report.to_csv()),
            (dir.join(format!("{stem}.long.csv")), report.to_long_csv()),
        ],
        Format::Json => vec![(dir.join(format!("{stem}.json")), report.to_json())],
    };
    files.extend(report.attachments.iter().map(|a| (dir.join(&a.file), a.contents.clone())));
    for (path, contents) in &files {
        fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

struct Outcome {
    columns: Vec<&'static str>,
    rows: Vec<Row>,
    /// `(name, successes column, total column)`.
    frequencies: Vec<(&'static str, &'static str, Option<&'static str>)>,
    checks: Box<dyn Fn(&[Aggregate], &[Frequency]) -> Vec<Check>>,
    notes: Vec<String>,
    attachments: Vec<Attachment>,
}

fn b(x: bool) -> Option<f64> {
    Some(if x { 1.0 } else { 0.0 })
}

fn freq<'a>(f: &'a [Frequency], name: &str) -> &'a Frequency {
    f.iter().find(|x| x.name == name).expect("frequency declared")
}

fn agg<'a>(a: &'a [Aggregate], name: &str) -> &'a Aggregate {
    a.iter().find(|x| x.column == name).expect("column declared")
}

/// Runs `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    cfg.validate()?;
    let cfg = cfg.resolved()?;
    let start = Instant::now();
    let out = match cfg.experiment.as_str() {
        "verify-bulk-balance" => bulk_balance(&cfg, false)?,
        "two-domains" => bulk_balance(&cfg, true)?,
        "verify-edge-balance" => edge_balance(&cfg)?,
        "bhy-moments" => bhy_moments(&cfg)?,
        "typicality" => typicality(&cfg)?,
        "level-repulsion" => level_repulsion(&cfg)?,
        "detection-consistency" => detection_consistency(&cfg)?,
        "sticking" => sticking(&cfg)?,
        "wgw" => wgw(&cfg)?,
        "sign-probability" => sign_probability(&cfg)?,
        "signpoly-report" => signpoly_report(&cfg)?,
        "green-comparison" => green_comparison(&cfg)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    let columns: Vec<String> = out.columns.iter().map(|c| c.to_string()).collect();
    let aggregates = compute_aggregates(&columns, &out.rows);
    let frequencies: Vec<Frequency> = out
        .frequencies
        .iter()
        .map(|&(name, s, t)| compute_frequency(name, s, t, &columns, &out.rows))
        .collect();
    let checks = (out.checks)(&aggregates, &frequencies);
    Ok(StatReport {
        schema_version: SCHEMA_VERSION,
        pass: checks.iter().all(|c| c.pass),
        config: cfg,
        columns,
        rows: out.rows,
        aggregates,
        frequencies,
        checks,
        notes: out.notes,
        attachments: out.attachments,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn gnp_trial(cfg: &ExperimentConfig, seed: u64) -> Result<(AdjacencyMatrix, Normalized)> {
    let a = sample_gnp(cfg.n, cfg.p, seed)?;
    let nz = normalize_shifted(&a, cfg.p)?;
    Ok((a, nz))
}

/// `count` distinct 1-based indices in `[⌈κn⌉, n − ⌈κn⌉]`.
pub fn bulk_indices(n: usize, kappa: f64, count: usize, seed: u64) -> Vec<usize> {
    let lo = ((kappa * n as f64).ceil() as usize).max(2);
    let hi = n - (kappa * n as f64).ceil() as usize;
    let width = hi + 1 - lo;
    let mut idx: Vec<usize> = sample(&mut rng_from(seed), width, count.min(width))
        .into_iter()
        .map(|k| lo + k)
        .collect();
    idx.sort_unstable();
    idx
}

/// Default edge indices `2..=⌈φ_n⌉` at the top and their mirrors at the bottom.
pub fn edge_indices(n: usize, explicit: &[usize]) -> Vec<usize> {
    if !explicit.is_empty() {
        return explicit.iter().copied().filter(|&a| a >= 1 && a <= n).collect();
    }
    let top = (phi_n(n).ceil() as usize).min(n / 2);
    let mut v: Vec<usize> = (2..=top).collect();
    v.extend((2..=top).map(|a| n + 1 - a));
    v.sort_unstable();
    v.dedup();
    v
}

fn nodal_rows(cfg: &ExperimentConfig, indices: impl Fn(u64) -> Vec<usize> + Sync) -> Result<Vec<Row>> {
    let balance_max = cfg.threshold("balance_max");
    let per = map_trials(cfg.trials, cfg.workers, |t| -> Result<Vec<Row>> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (a, nz) = gnp_trial(cfg, seed)?;
        let spec = eigendecompose(&nz.shifted)?;
        indices(seed)
            .into_iter()
            .map(|alpha| {
                let dec = nodal_domains(&a, spec.vector(alpha - 1))?;
                let bal = count_and_balance(&dec);
                Ok(Row {
                    trial: t,
                    seed,
                    values: vec![
                        Some(alpha as f64),
                        Some(bal.domain_count as f64),
                        Some(bal.balance),
                        Some(dec.zero_count as f64),
                        b(bal.domain_count == 2),
                        b(bal.balance <= balance_max),
                        b(dec.zero_count == 0),
                    ],
                })
            })
            .collect()
    });
    Ok(per.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

const NODAL_COLUMNS: [&str; 7] = ["alpha", "domains", "balance", "zeros", "two_domains", "balanced", "zero_free"];

fn bulk_balance(cfg: &ExperimentConfig, two_domains: bool) -> Result<Outcome> {
    let count = cfg.param("bulk_count") as usize;
    let (n, kappa) = (cfg.n, cfg.kappa);
    let rows = nodal_rows(cfg, |seed| bulk_indices(n, kappa, count, substream(seed, TAG_INDEX)))?;
    let th = cfg.thresholds.clone();
    let checks: Box<dyn Fn(&[Aggregate], &[Frequency]) -> Vec<Check>> = if two_domains {
        Box::new(move |_, f| {
            vec![
                Check::new("two_domain_freq", freq(f, "two_domains").value, Comparison::AtLeast, th["min_two_domain_freq"]),
                Check::new("balanced_freq", freq(f, "balanced").value, Comparison::AtLeast, th["min_balanced_freq"]),
                Check::new("zero_free_freq", freq(f, "zero_free").value, Comparison::AtLeast, th["min_zero_free_freq"]),
            ]
        })
    } else {
        Box::new(move |_, f| {
            vec![Check::new(
                "unbalanced_freq",
                1.0 - freq(f, "balanced").value,
                Comparison::AtMost,
                th["max_unbalanced_freq"],
            )]
        })
    };
    Ok(Outcome {
        columns: NODAL_COLUMNS.to_vec(),
        rows,
        frequencies: vec![
            ("two_domains", "two_domains", None),
            ("balanced", "balanced", None),
            ("zero_free", "zero_free", None),
        ],
        checks,
        notes: vec![],
        attachments: vec![],
    })
}

fn edge_balance(cfg: &ExperimentConfig) -> Result<Outcome> {
    let idx = edge_indices(cfg.n, &cfg.edge_indices);
    let rows = nodal_rows(cfg, |_| idx.clone())?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: NODAL_COLUMNS.to_vec(),
        rows,
        frequencies: vec![
            ("two_domains", "two_domains", None),
            ("balanced", "balanced", None),
            ("zero_free", "zero_free", None),
        ],
        checks: Box::new(move |_, f| {
            vec![
                Check::new("two_domain_freq", freq(f, "two_domains").value, Comparison::AtLeast, th["min_two_domain_freq"]),
                Check::new("balanced_freq", freq(f, "balanced").value, Comparison::AtLeast, th["min_balanced_freq"]),
            ]
        }),
        notes: vec!["balance distribution reported; no rate exponent is asserted at this size".into()],
        attachments: vec![],
    })
}

/// `E g^{2k}` for a standard normal `g`.
pub fn gaussian_even_moment(k: u32) -> f64 {
    (1..=k).map(|j| (2 * j - 1) as f64).product()
}

/// Result of [`bhy_moment_gap`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentGap {
    pub trials: usize,
    pub empirical: f64,
    pub gaussian: f64,
    pub gap: f64,
    pub se: f64,
}

/// Unit `(e_{2k} − e_{2k+1})/√2` for `k < n/2`, each orthogonal to `1⃗`.
pub fn disjoint_pair_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (0..count.min(n / 2))
        .map(|k| {
            let mut q = vec![0.0; n];
            q[2 * k] = h;
            q[2 * k + 1] = -h;
            q
        })
        .collect()
}

fn bulk_index(cfg: &ExperimentConfig) -> usize {
    let frac = cfg.params.get("bulk_fraction").copied().unwrap_or(0.5);
    ((frac * cfg.n as f64).round() as usize).clamp(2, cfg.n - 1)
}

/// `n⟨q, v_j⟩²` for every direction in `qs`, one vector per trial, with `j`
/// the configured bulk index.
pub fn bhy_overlaps(cfg: &ExperimentConfig, qs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    for q in qs {
        if q.len() != cfg.n {
            return Err(Error::Config("direction length differs from n".into()));
        }
        let norm: f64 = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sum: f64 = q.iter().sum();
        if (norm - 1.0).abs() > 1e-10 || sum.abs() / (cfg.n as f64).sqrt() > 1e-10 {
            return Err(Error::Config("q must be a unit vector orthogonal to the equal-coordinate direction".into()));
        }
    }
    let j = bulk_index(cfg);
    let nf = cfg.n as f64;
    map_trials(cfg.trials, cfg.workers, |t| {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let spec = eigendecompose(&nz.shifted)?;
        let v = spec.vector(j - 1);
        Ok(qs
            .iter()
            .map(|q| {
                let o: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
                nf * o * o
            })
            .collect())
    })
    .into_iter()
    .collect()
}

/// Per-trial `Σ_{k≥1} a_k (x^k − E g^{2k})` averaged over directions;
/// the constant term cancels exactly.
pub fn centered_poly_values(per_trial: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    per_trial
        .iter()
        .map(|xs| {
            xs.iter()
                .map(|&x| {
                    coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, a)| a * (x.powi(k as i32) - gaussian_even_moment(k as u32)))
                        .sum::<f64>()
                })
                .sum::<f64>()
                / xs.len() as f64
        })
        .collect()
}

fn gap_from(per_trial: &[Vec<f64>], coeffs: &[f64]) -> MomentGap {
    let d = centered_poly_values(per_trial, coeffs);
    let k = d.len() as f64;
    let mean = d.iter().sum::<f64>() / k;
    let var = if d.len() > 1 {
        d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let gaussian: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| a * gaussian_even_moment(j as u32))
        .sum();
    MomentGap {
        trials: d.len(),
        empirical: gaussian + mean,
        gaussian,
        gap: mean.abs(),
        se: (var / k).sqrt(),
    }
}

/// `|Ê f(n⟨q,v_j⟩²) − E f(g²)|` for the polynomial `f = Σ a_k x^k`,
/// averaging over the supplied directions within each trial.
pub fn bhy_moment_gap(cfg: &ExperimentConfig, coeffs: &[f64], qs: &[Vec<f64>]) -> Result<MomentGap> {
    cfg.validate()?;
    Ok(gap_from(&bhy_overlaps(cfg, qs)?, coeffs))
}

fn bhy_moments(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n;
    let pairs = cfg.param("pair_directions") != 0.0;
    let qs = disjoint_pair_directions(n, if pairs { n / 2 } else { 1 });
    let per = bhy_overlaps(cfg, &qs)?;
    let single: Vec<Vec<f64>> = per.iter().map(|v| vec![v[0]]).collect();
    let x1 = centered_poly_values(&per, &[0.0, 1.0]);
    let x2 = centered_poly_values(&per, &[0.0, 0.0, 1.0]);
    let x3 = centered_poly_values(&per, &[0.0, 0.0, 0.0, 1.0]);
    let s1 = centered_poly_values(&single, &[0.0, 1.0]);
    let s2 = centered_poly_values(&single, &[0.0, 0.0, 1.0]);
    let rows = (0..cfg.trials)
        .map(|t| Row {
            trial: t,
            seed: trial_seed(cfg.master_seed, t as u64),
            values: vec![
                Some(x1[t] + 1.0),
                Some(x2[t] + 3.0),
                Some(x3[t] + 15.0),
                Some(s1[t] + 1.0),
                Some(s2[t] + 3.0),
            ],
        })
        .collect();
    let th = cfg.thresholds.clone();
    let g1 = gap_from(&per, &[0.0, 1.0]);
    let g2 = gap_from(&per, &[0.0, 0.0, 1.0]);
    Ok(Outcome {
        columns: vec!["m1", "m2", "m3", "m1_single", "m2_single"],
        rows,
        frequencies: vec![],
        checks: Box::new(move |_, _| {
            vec![
                Check::new("gap_x", g1.gap, Comparison::AtMost, th["max_gap_x"]),
                Check::new("gap_x2", g2.gap, Comparison::AtMost, th["max_gap_x2"]),
            ]
        }),
        notes: vec![format!(
            "bulk index j = {}; {} direction(s) per trial; Gaussian moments 1, 3, 15",
            bulk_index(cfg),
            qs.len()
        )],
        attachments: vec![],
    })
}

fn typicality(cfg: &ExperimentConfig) -> Result<Outcome> {
    let shifted = cfg.param("shifted") != 0.0;
    let minors = cfg.param("minor_samples") as usize;
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let params = TypicalityParams {
            variant: if shifted { Variant::Shifted { p: cfg.p } } else { Variant::Wigner },
            direction_seed: substream(seed, TAG_DIRECTIONS),
            minor_samples: minors,
            ..TypicalityParams::default()
        };
        let m = if shifted { &nz.shifted } else { &nz.centered };
        let spec = eigendecompose(m)?;
        let r = typicality_from_spectrum(m, &spec, &params)?;
        let f = &r.flags;
        Ok(Row {
            trial: t,
            seed,
            values: vec![
                Some(r.isotropic_law_residual),
                Some(r.rigidity_max),
                Some(r.linf_max),
                Some(r.isotropic_overlap),
                Some(r.min_edge_gap).filter(|g| g.is_finite()),
                b(f.isotropic_law),
                b(f.rigidity),
                b(f.linf),
                b(f.isotropic_overlap),
                b(f.level_repulsion),
                f.minors.and_then(b),
                b(f.all()),
            ],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec![
            "law_residual",
            "rigidity_max",
            "linf_max",
            "isotropic_overlap",
            "min_edge_gap",
            "law_pass",
            "rigidity_pass",
            "linf_pass",
            "overlap_pass",
            "repulsion_pass",
            "minor_pass",
            "typical",
        ],
        rows,
        frequencies: vec![
            ("law_pass", "law_pass", None),
            ("rigidity_pass", "rigidity_pass", None),
            ("linf_pass", "linf_pass", None),
            ("overlap_pass", "overlap_pass", None),
            ("repulsion_pass", "repulsion_pass", None),
            ("typical", "typical", None),
        ],
        checks: Box::new(move |_, f| {
            vec![Check::new("typical_freq", freq(f, "typical").value, Comparison::AtLeast, th["min_typical_freq"])]
        }),
        notes: vec![format!(
            "{} matrix, default typicality constants",
            if shifted { "shifted" } else { "centered" }
        )],
        attachments: vec![],
    })
}

fn level_repulsion(cfg: &ExperimentConfig) -> Result<Outcome> {
    let nf = cfg.n as f64;
    let window = cfg.param("window_const") * nf.powf(-2.0 / 3.0);
    let floor = nf.powf(-2.0 / 3.0 - cfg.threshold("gap_eps"));
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let eigs = eigenvalues(&nz.centered)?;
        let gap = level_repulsion_min_gap(&eigs, window);
        let inside = eigs.iter().filter(|l| (*l - 2.0).abs() <= window).count();
        Ok(Row {
            trial: t,
            seed,
            values: vec![Some(gap).filter(|g| g.is_finite()), Some(inside as f64), b(gap >= floor)],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec!["min_gap", "in_window", "pass"],
        rows,
        frequencies: vec![("pass", "pass", None)],
        checks: Box::new(move |_, f| vec![Check::new("pass_freq", freq(f, "pass").value, Comparison::AtLeast, th["min_pass_freq"])]),
        notes: vec![format!("window half-width {window:.6e}, gap floor {floor:.6e}")],
        attachments: vec![],
    })
}

/// Root, eigenvector and sign comparisons of the detection system against a
/// direct eigendecomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionComparison {
    pub root_count_ok: bool,
    pub max_root_error: f64,
    pub min_cosine: f64,
    pub sign_cases: usize,
    pub sign_matches: usize,
    pub warnings: usize,
}

/// Compares every detection root (plus uncoupled eigenvalues of `B`) with
/// the eigenvalues of `s`, reconstructed eigenvectors with direct ones at
/// simple eigenvalues, and the sign formula with `sign(v(1)v(2))`.
pub fn compare_detection(s: &crate::ensembles::SymmetricMatrix) -> Result<DetectionComparison> {
    let sys = DetectionSystem::from_matrix(s)?;
    let direct = eigendecompose(s)?;
    let roots = sys.all_roots();
    let mut all = roots.roots.clone();
    all.extend(sys.uncoupled_eigenvalues());
    all.sort_by(|a, b| b.total_cmp(a));
    let eigs = &direct.eigenvalues;
    let root_count_ok = all.len() == eigs.len();
    let max_root_error = if root_count_ok {
        all.iter()
            .zip(eigs)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let scale = 1.0 + eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut min_cosine = 1.0f64;
    let mut sign_cases = 0;
    let mut sign_matches = 0;
    for &l in &roots.roots {
        let Some(a) = (0..eigs.len()).min_by(|&x, &y| (eigs[x] - l).abs().total_cmp(&(eigs[y] - l).abs())) else {
            continue;
        };
        let sep = eigs
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != a)
            .map(|(_, e)| (e - eigs[a]).abs())
            .fold(f64::INFINITY, f64::min);
        if sep <= 1e-6 * scale {
            continue;
        }
        let u = direct.vector(a);
        if let Ok(v) = sys.reconstruct_eigenvector(l) {
            let c: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>().abs();
            min_cosine = min_cosine.min(c);
        } else {
            min_cosine = 0.0;
        }
        if u[0].abs() > 1e-8 && u[1].abs() > 1e-8 {
            if let Ok(sg) = sys.sign_formula(l) {
                sign_cases += 1;
                let direct_sign = (u[0] * u[1]).signum() as i8;
                sign_matches += (sg == direct_sign) as usize;
            }
        }
    }
    Ok(DetectionComparison {
        root_count_ok,
        max_root_error,
        min_cosine,
        sign_cases,
        sign_matches,
        warnings: roots.warnings.len(),
    })
}

fn detection_consistency(cfg: &ExperimentConfig) -> Result<Outcome> {
    let root_tol = cfg.threshold("root_tol");
    let cos_tol = cfg.threshold("cosine_tol");
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let c = compare_detection(&nz.shifted)?;
        let pass = c.root_count_ok && c.max_root_error <= root_tol && c.min_cosine >= 1.0 - cos_tol && c.sign_matches == c.sign_cases;
        Ok(Row {
            trial: t,
            seed,
            values: vec![
                Some(c.max_root_error).filter(|x| x.is_finite()),
                Some(c.min_cosine),
                Some(c.sign_cases as f64),
                Some(c.sign_matches as f64),
                Some(c.warnings as f64),
                b(pass),
            ],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec!["max_root_error", "min_cosine", "sign_cases", "sign_matches", "scan_warnings", "pass"],
        rows,
        frequencies: vec![("pass", "pass", None), ("sign_match", "sign_matches", Some("sign_cases"))],
        checks: Box::new(move |_, f| vec![Check::new("pass_freq", freq(f, "pass").value, Comparison::AtLeast, th["min_pass_freq"])]),
        notes: vec![],
        attachments: vec![],
    })
}

fn sticking(cfg: &ExperimentConfig) -> Result<Outcome> {
    let beta = cfg.param("beta") as usize;
    let upper = (cfg.n as f64).powf(-cfg.threshold("gap_exponent"));
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let prob = SecularProblem::from_centered(&nz.centered, cfg.p)?;
        let r = prob.sticking_report(beta)?;
        Ok(Row {
            trial: t,
            seed,
            values: vec![
                Some(r.gap),
                r.overlap_ratio,
                r.overlap_ratio_next,
                b(r.gap >= 0.0 && r.gap <= upper),
            ],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec!["gap", "overlap_ratio", "overlap_ratio_next", "in_range"],
        rows,
        frequencies: vec![("in_range", "in_range", None)],
        checks: Box::new(move |_, f| vec![Check::new("in_range_freq", freq(f, "in_range").value, Comparison::AtLeast, th["min_pass_freq"])]),
        notes: vec![format!("β = {beta}, gap range [0, {upper:.6e}]")],
        attachments: vec![],
    })
}

fn wgw(cfg: &ExperimentConfig) -> Result<Outcome> {
    let bound = (cfg.n as f64).powf(-1.0 / 3.0 + cfg.threshold("residual_shift"));
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let e = eigenvalues(&nz.shifted)?[1];
        let sys = DetectionSystem::from_matrix(&nz.shifted)?;
        let mut worst = 0.0f64;
        for (i, j) in [(1, 1), (1, 2), (2, 2)] {
            worst = worst.max(sys.wgw_residual(e, i, j)?.abs());
        }
        Ok(Row {
            trial: t,
            seed,
            values: vec![Some(e), Some(worst), b(worst <= bound)],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec!["energy", "residual", "pass"],
        rows,
        frequencies: vec![("pass", "pass", None)],
        checks: Box::new(move |_, f| vec![Check::new("pass_freq", freq(f, "pass").value, Comparison::AtLeast, th["min_pass_freq"])]),
        notes: vec![format!("E = λ₂ of the full matrix; residual bound {bound:.6e}")],
        attachments: vec![],
    })
}

fn sign_probability(cfg: &ExperimentConfig) -> Result<Outcome> {
    let resamples = cfg.param("resamples") as usize;
    let alpha = cfg.param("alpha") as usize;
    let rows = map_trials(cfg.trials, cfg.workers, |t| -> Result<Row> {
        let seed = trial_seed(cfg.master_seed, t as u64);
        let (_, nz) = gnp_trial(cfg, seed)?;
        let keep: Vec<usize> = (2..cfg.n).collect();
        let bspec: Spectrum = eigendecompose(&nz.shifted.principal_minor(&keep))?;
        if alpha == 0 || alpha > bspec.n() {
            return Err(Error::Config(format!("alpha = {alpha} outside 1..={}", bspec.n())));
        }
        let law = EntryLaw { p: cfg.p, n: cfg.n };
        let r = pair_sign_probability(bspec.vector(alpha - 1), law, resamples, substream(seed, TAG_RESAMPLE))?;
        Ok(Row {
            trial: t,
            seed,
            values: vec![Some(r.p_hat), Some(r.p_se), Some(r.product_mean), Some(r.product_se), Some((r.p_hat - 0.5).abs())],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let th = cfg.thresholds.clone();
    Ok(Outcome {
        columns: vec!["p_hat", "p_se", "product_mean", "product_se", "bias"],
        rows,
        frequencies: vec![],
        checks: Box::new(move |a, _| vec![Check::new("max_bias", agg(a, "bias").max, Comparison::AtMost, th["max_bias"])]),
        notes: vec![format!("u = eigenvector {alpha} of the lower block; {resamples} resamples per trial")],
        attachments: vec![],
    })
}

fn signpoly_report(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = cfg.param("r");
    let target = cfg.param("target_degree") as usize;
    let max_deg = cfg.param("max_degree") as usize;
    let w = default_weights();
    let h = smoothed_sign(r)?;
    let opts = ProjectionOptions {
        sup_range: cfg.param("sup_range"),
        ..ProjectionOptions::default()
    };
    let hn = sobolev_norm(&h, &w)?;
    let degrees: Vec<usize> = (1..=max_deg).step_by(2).collect();
    let rows = map_trials(degrees.len(), cfg.workers, |k| -> Result<Row> {
        let deg = degrees[k];
        let q = project_odd(&h, deg, &w, r, &opts)?;
        let orth = (0..deg.div_ceil(2))
            .map(|j| residual_against_monomial(&h, &q, 2 * j as u32 + 1, &w, &opts).abs() / hn)
            .fold(0.0, f64::max);
        let mean = gauss_product_expectation(&|y| q.eval(y), deg, None)?.abs();
        Ok(Row {
            trial: k,
            seed: cfg.master_seed,
            values: vec![
                Some(deg as f64),
                Some(q.errors.sobolev),
                Some(q.errors.sup),
                Some(q.errors.l2mu),
                Some(q.gram_condition).filter(|c| c.is_finite()),
                b(q.basis == crate::signpoly::BasisMode::Orthogonal),
                Some(orth),
                Some(mean),
            ],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let sob: Vec<f64> = rows.iter().map(|r| r.values[1].unwrap_or(f64::NAN)).collect();
    let sup: Vec<f64> = rows.iter().map(|r| r.values[2].unwrap_or(f64::NAN)).collect();
    let monotone = sob.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
    let target_sup = degrees.iter().position(|&d| d == target).map_or(f64::INFINITY, |i| sup[i]);
    let th = cfg.thresholds.clone();
    let max_sup = th["max_sup_error"];
    let reached = degrees
        .iter()
        .zip(&sup)
        .find(|(_, &s)| s <= max_sup)
        .map_or(f64::INFINITY, |(&d, _)| d as f64);
    Ok(Outcome {
        columns: vec!["degree", "sobolev", "sup", "l2mu", "gram_condition", "orthogonal_basis", "orthogonality", "mean_abs"],
        rows,
        frequencies: vec![],
        checks: Box::new(move |a, _| {
            vec![
                Check::new("orthogonality", agg(a, "orthogonality").max, Comparison::AtMost, th["orthogonality_tol"]),
                Check::new("mean_zero", agg(a, "mean_abs").max, Comparison::AtMost, th["mean_tol"]),
                Check::new("sobolev_monotone", if monotone { 1.0 } else { 0.0 }, Comparison::AtLeast, 1.0),
                Check::new("sup_at_target_degree", target_sup, Comparison::AtMost, max_sup),
                Check::new("first_degree_reaching_sup", reached, Comparison::AtMost, th["max_fallback_degree"]),
            ]
        }),
        notes: vec![format!("smoothed sign with r = {r}; one row per odd degree up to {max_deg}")],
        attachments: vec![],
    })
}

fn green_comparison(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n;
    if n as f64 > cfg.param("max_n") {
        return Err(Error::Size(format!("green-comparison is capped at n = {}", cfg.param("max_n"))));
    }
    let stat = ComparisonStatistic::edge(n, cfg.param("stat_eps"), TestFunction::Logistic);
    let gap = lindeberg_gap(
        &stat,
        ComparisonEnsemble::Goe,
        ComparisonEnsemble::GoeZeroDiagonal,
        n,
        cfg.trials,
        cfg.master_seed,
        cfg.workers,
    )?;
    let st = (cfg.param("sweep_trials") as usize).min(cfg.trials);
    let mut grid = SweepGrid::checkpoints(n, cfg.param("sweep_eps"), cfg.param("sweep_coordinates") as usize, 0);
    grid.energy_points = cfg.param("sweep_energies") as usize;
    let sweeps = sweep_trials(n, &grid, st, substream(cfg.master_seed, 0x5eed), cfg.workers)?;
    let th = cfg.thresholds.clone();
    let nf = n as f64;
    let law_bound = nf.powf(-1.0 / 3.0 + th["sweep_shift"]);
    let growth_bound = 1.0 + th["growth_const"] / (phi_n(n) * nf);
    let rows: Vec<Row> = (0..cfg.trials)
        .map(|t| {
            let mut values = vec![Some(gap.values_a[t]), Some(gap.values_b[t]), Some(gap.values_a[t] - gap.values_b[t])];
            if let Some(s) = sweeps.get(t) {
                values.extend([
                    Some(s.rows.len() as f64),
                    Some(s.rows.iter().filter(|r| r.residual <= law_bound).count() as f64),
                    Some(s.max_residual()),
                    Some(s.growth.len() as f64),
                    Some(s.growth.iter().filter(|&&g| g <= growth_bound).count() as f64),
                ]);
            } else {
                values.extend([None; 5]);
            }
            Row {
                trial: t,
                seed: trial_seed(cfg.master_seed, t as u64),
                values,
            }
        })
        .collect();
    let mut sweep_csv = format!("trial,{}\n", SweepRow::CSV_HEADER);
    for (t, s) in sweeps.iter().enumerate() {
        for r in &s.rows {
            let _ = writeln!(sweep_csv, "{t},{}", r.csv());
        }
    }
    let all_rows: Vec<f64> = sweeps.iter().flat_map(|s| s.rows.iter().map(|r| r.residual)).collect();
    let summary = serde_json::json!({
        "n": n,
        "trials": st,
        "eta": grid.eta(n),
        "energies": grid.energy_points,
        "coordinates": grid.coordinates,
        "points": all_rows.len(),
        "max_residual": all_rows.iter().copied().fold(0.0, f64::max),
        "threshold": law_bound,
        "growth_bound": growth_bound,
    });
    let (gap_value, se) = (gap.gap, gap.se);
    let gap_bound_floor = nf.powf(-1.0 / 3.0 + th["gap_shift"]);
    Ok(Outcome {
        columns: vec![
            "stat_goe",
            "stat_zero_diag",
            "stat_diff",
            "sweep_points",
            "sweep_pass",
            "sweep_max",
            "growth_steps",
            "growth_pass",
        ],
        rows,
        frequencies: vec![
            ("sweep_pass", "sweep_pass", Some("sweep_points")),
            ("growth_pass", "growth_pass", Some("growth_steps")),
        ],
        checks: Box::new(move |_, f| {
            vec![
                Check::new(
                    "lindeberg_gap",
                    gap_value,
                    Comparison::AtMost,
                    (th["gap_se_factor"] * se).max(gap_bound_floor),
                ),
                Check::new("sweep_pass_freq", freq(f, "sweep_pass").value, Comparison::AtLeast, th["min_sweep_freq"]),
                Check::new("growth_pass_freq", freq(f, "growth_pass").value, Comparison::AtLeast, th["min_growth_freq"]),
            ]
        }),
        notes: vec![format!(
            "logistic statistic on [{:.6}, {:.6}] at η = {:.6e}; paired SE {:.3e}, unpaired SE {:.3e}",
            stat.e1, stat.e2, stat.eta, gap.se, gap.se_unpaired
        )],
        attachments: vec![
            Attachment {
                file: "green-comparison.sweep.csv".into(),
                contents: sweep_csv,
            },
            Attachment {
                file: "green-comparison.sweep.json".into(),
                contents: serde_json::to_string_pretty(&summary).expect("summary serializes"),
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let mut c = ExperimentConfig::new("sticking").unwrap();
        c.thresholds.insert("min_pass_freq".into(), 0.8);
        c.edge_indices = vec![2, 3];
        let back = ExperimentConfig::parse(&c.to_kv(), Path::new("x"), None).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ExperimentConfig::parse("experiment = wgw\nbogus = 1\n", Path::new("cfg"), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let mut c = ExperimentConfig::new("wgw").unwrap();
        c.thresholds.insert("nope".into(), 1.0);
        assert!(c.resolved().is_err());
        assert!(ExperimentConfig::new("nonsense").is_err());
    }

    #[test]
    fn moments() {
        assert_eq!(gaussian_even_moment(0), 1.0);
        assert_eq!(gaussian_even_moment(2), 3.0);
        assert_eq!(gaussian_even_moment(3), 15.0);
    }

    #[test]
    fn index_sets() {
        let b = bulk_indices(1000, 0.25, 10, 7);
        assert_eq!(b.len(), 10);
        assert!(b.iter().all(|&a| (250..=750).contains(&a)));
        let e = edge_indices(1000, &[]);
        assert_eq!(e[0], 2);
        assert_eq!(*e.last().unwrap(), 999);
        assert_eq!(e.len(), 2 * (phi_n(1000).ceil() as usize - 1));
    }
}
