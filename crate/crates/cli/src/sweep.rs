//! Grid sweeps: one JSONL record per cell, resumable by cell hash.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use solgeo::certificate::CheckRole;
use solgeo::instance::{compact_json, sha256_hex};
use solgeo::oracle::{OracleValue, Verdict};
use solgeo::{Certificate, Check, TOOL_VERSION};

use crate::error::{usage, CliError, Result};
use crate::ops::{self, CertKind, CertifyParams, Density, GenSpec, Generator, PredicateSpec};

pub const RECORDS_FILE: &str = "sweep.jsonl";
pub const CSV_FILE: &str = "sweep.csv";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    /// Expected clause counts.
    #[serde(default)]
    pub m: Vec<f64>,
    /// Clauses per variable.
    #[serde(default)]
    pub delta: Vec<f64>,
    /// Density exponents: `Δ = n^δ`.
    #[serde(default)]
    pub delta_exp: Vec<f64>,
    #[serde(default)]
    pub eta: Vec<f64>,
    #[serde(default)]
    pub rho: Vec<f64>,
    /// Degrees for regular graphs.
    #[serde(default)]
    pub d: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: CertKind,
    pub instance: Generator,
    #[serde(default)]
    pub predicate: Option<PredicateSpec>,
    pub grid: Grid,
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    /// Run the brute-force oracle when the instance is small enough.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "enforce_default")]
    pub enforce_checks: bool,
    pub output_dir: PathBuf,
}

fn enforce_default() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CertKind,
    pub instance: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateSpec>,
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub d: usize,
    pub seeds: Vec<u64>,
    pub oracle: bool,
    pub enforce_checks: bool,
}

impl Cell {
    pub fn hash(&self) -> String {
        sha256_hex(compact_json(self).as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// `log2` of the certified bound; `None` when no certificate was emitted.
    pub log2_bound: Option<f64>,
    pub fallback: bool,
    /// Oracle value in `log2` for counts, raw otherwise; `None` out of range.
    pub oracle_value: Option<f64>,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell_hash: String,
    pub cell: Cell,
    pub outcomes: Vec<SeedOutcome>,
    pub mean_log2_bound: Option<f64>,
    pub fallback_rate: f64,
    /// Fraction of seeds on which each gate passed.
    pub check_pass_rates: BTreeMap<String, f64>,
    pub violations: usize,
    pub tool_version: String,
}

fn or_default<T: Clone>(v: &[T], d: T) -> Vec<T> {
    if v.is_empty() {
        vec![d]
    } else {
        v.to_vec()
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(usage("sweep needs seeds >= 1"));
        }
        if self.grid.n.is_empty() {
            return Err(usage("sweep grid needs at least one n"));
        }
        let clauses = matches!(self.instance, Generator::Csp | Generator::Xor | Generator::Hypergraph);
        if clauses && self.densities().is_empty() {
            return Err(usage("clause instances need m, delta or delta_exp in the grid"));
        }
        if self.kind == CertKind::Balance && self.grid.rho.is_empty() {
            return Err(usage("balance sweeps need rho in the grid"));
        }
        Ok(())
    }

    fn densities(&self) -> Vec<Density> {
        let g = &self.grid;
        g.m.iter()
            .map(|&x| Density::M(x))
            .chain(g.delta.iter().map(|&x| Density::Delta(x)))
            .chain(g.delta_exp.iter().map(|&x| Density::DeltaExp(x)))
            .collect()
    }

    /// Cells in a fixed order: n, k, density, d, ρ, η with η varying fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let densities: Vec<Option<Density>> = match self.instance {
            Generator::Graph | Generator::Matrix => vec![None],
            _ => self.densities().into_iter().map(Some).collect(),
        };
        let rhos: Vec<Option<f64>> = if g.rho.is_empty() { vec![None] } else { g.rho.iter().map(|&r| Some(r)).collect() };
        let seeds: Vec<u64> = (0..self.seeds).map(|j| self.base_seed + j).collect();
        let mut out = Vec::new();
        for &n in &g.n {
            for &k in &or_default(&g.k, 3) {
                for &density in &densities {
                    for &d in &or_default(&g.d, 3) {
                        for &rho in &rhos {
                            for &eta in &or_default(&g.eta, 0.0) {
                                out.push(Cell {
                                    kind: self.kind,
                                    instance: self.instance,
                                    predicate: self.predicate.clone(),
                                    n,
                                    k,
                                    density,
                                    eta,
                                    rho,
                                    d,
                                    seeds: seeds.clone(),
                                    oracle: self.oracle,
                                    enforce_checks: self.enforce_checks,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn within_oracle_range(cert: &Certificate, n: usize) -> bool {
    use solgeo::oracle::*;
    let limit = match cert {
        Certificate::Count(_) | Certificate::Refutation(_) => COUNT_LIMIT,
        Certificate::Clusters(_) => CLUSTER_LIMIT,
        Certificate::Balance(_) => BIAS_LIMIT,
        Certificate::SkCount(_) => SK_LIMIT,
        Certificate::IndsetCount(_) | Certificate::IndsetRefutation(_) => INDSET_LIMIT,
    };
    n <= limit
}

fn summary(cert: &Certificate) -> (Option<f64>, bool, Vec<Check>) {
    match cert {
        Certificate::Count(c) | Certificate::SkCount(c) | Certificate::IndsetCount(c) => (Some(c.log2_bound), c.fallback, c.checks.clone()),
        Certificate::Clusters(c) => (Some(c.log2_cluster_bound), c.fallback, c.checks.clone()),
        Certificate::Balance(c) => (Some(c.min_violated as f64), !c.emitted, c.checks.clone()),
        Certificate::Refutation(c) => (Some(c.count_certificate.log2_bound), false, c.count_certificate.checks.clone()),
        Certificate::IndsetRefutation(c) => (Some(c.count_certificate.log2_bound), false, c.count_certificate.checks.clone()),
    }
}

fn oracle_scalar(v: &OracleValue) -> f64 {
    let log2 = |c: u64| if c == 0 { f64::NEG_INFINITY } else { (c as f64).log2() };
    match v {
        OracleValue::Count { count, .. } => log2(*count),
        OracleValue::Clusters { cover_size, .. } => log2(*cover_size as u64),
        OracleValue::MaxBias { max_abs_sum, .. } => *max_abs_sum as f64,
        OracleValue::Sk { count, .. } => log2(*count),
        OracleValue::IndependentSets { count, .. } => log2(*count),
        OracleValue::SubspaceCount { count, .. } => log2(*count),
    }
}

fn run_seed(cell: &Cell, seed: u64) -> Result<(SeedOutcome, Vec<Check>)> {
    let spec = GenSpec { kind: cell.instance, k: cell.k, n: cell.n, density: cell.density, d: cell.d, seed };
    let inst = ops::generate(&spec)?;
    let params = CertifyParams {
        eta: cell.eta,
        rho: cell.rho,
        enforce_checks: cell.enforce_checks,
        predicate: cell.predicate.clone(),
        ..Default::default()
    };
    let Some(cert) = ops::certify(&inst, cell.kind, &params)? else {
        return Ok((SeedOutcome { seed, log2_bound: None, fallback: true, oracle_value: None, verdict: None }, Vec::new()));
    };
    let (log2_bound, fallback, checks) = summary(&cert);
    let (mut oracle_value, mut verdict) = (None, None);
    if cell.oracle && within_oracle_range(&cert, cell.n) {
        // Empty instances have nothing to enumerate.
        match ops::oracle_for(&inst, &cert, cell.predicate.clone(), Some(seed)) {
            Ok(o) => {
                let v = ops::verify(&cert, &o)?;
                let x = oracle_scalar(&o.value);
                oracle_value = x.is_finite().then_some(x);
                verdict = Some(v.verdict);
            }
            Err(CliError::Core(solgeo::Error::EmptyInstance(_))) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((SeedOutcome { seed, log2_bound, fallback, oracle_value, verdict }, checks))
}

pub fn run_cell(cell: &Cell) -> Result<CellRecord> {
    let mut outcomes = Vec::with_capacity(cell.seeds.len());
    let mut passes: BTreeMap<String, usize> = BTreeMap::new();
    for &seed in &cell.seeds {
        let (o, checks) = run_seed(cell, seed)?;
        for c in checks.iter().filter(|c| c.role == CheckRole::Gate) {
            *passes.entry(c.name.clone()).or_default() += usize::from(c.passed);
        }
        outcomes.push(o);
    }
    let bounds: Vec<f64> = outcomes.iter().filter_map(|o| o.log2_bound).collect();
    let total = outcomes.len() as f64;
    Ok(CellRecord {
        cell_hash: cell.hash(),
        cell: cell.clone(),
        mean_log2_bound: (!bounds.is_empty()).then(|| bounds.iter().sum::<f64>() / bounds.len() as f64),
        fallback_rate: outcomes.iter().filter(|o| o.fallback).count() as f64 / total,
        check_pass_rates: passes.into_iter().map(|(k, p)| (k, p as f64 / total)).collect(),
        violations: outcomes.iter().filter(|o| o.verdict == Some(Verdict::Violated)).count(),
        outcomes,
        tool_version: TOOL_VERSION.into(),
    })
}

/// Hashes of the cells already recorded in `path`.
fn completed(path: &Path) -> Result<HashSet<String>> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    Ok(text
        .lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter_map(|v| v.get("cell_hash").and_then(|h| h.as_str()).map(String::from))
        .collect())
}

/// Worker count from `SOLGEO_THREADS`, or rayon's default.
pub fn thread_count() -> Result<usize> {
    match std::env::var("SOLGEO_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| usage(format!("SOLGEO_THREADS={v:?} is not a positive integer"))),
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

pub struct SweepSummary {
    pub cells: usize,
    pub skipped: usize,
    pub violations: usize,
    pub records: PathBuf,
}

/// Runs the pending cells in batches of the worker count, appending each
/// batch in cell order so that output does not depend on scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    let records = dir.join(RECORDS_FILE);
    let done = completed(&records)?;
    let cells = cfg.cells();
    let pending: Vec<&Cell> = cells.iter().filter(|c| !done.contains(&c.hash())).collect();
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Pool(e.to_string()))?;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&records)
        .map_err(|source| CliError::Write { path: records.clone(), source })?;
    let mut violations = 0;
    for batch in pending.chunks(threads) {
        let results: Vec<Result<CellRecord>> = pool.install(|| batch.par_iter().map(|c| run_cell(c)).collect());
        for r in results {
            let r = r?;
            violations += r.violations;
            let mut line = compact_json(&r);
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(|source| CliError::Write { path: records.clone(), source })?;
        }
    }
    file.flush().map_err(|source| CliError::Write { path: records.clone(), source })?;
    export_csv(&records, &dir.join(CSV_FILE))?;
    Ok(SweepSummary { cells: cells.len(), skipped: cells.len() - pending.len(), violations, records })
}

pub fn read_records(path: &Path) -> Result<Vec<CellRecord>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|source| CliError::Parse { path: path.into(), source }))
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    cell_hash: &'a str,
    kind: String,
    instance: String,
    n: usize,
    k: usize,
    density: String,
    eta: f64,
    rho: Option<f64>,
    d: usize,
    seeds: usize,
    mean_log2_bound: Option<f64>,
    fallback_rate: f64,
    violations: usize,
}

fn export_csv(records: &Path, out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    for r in read_records(records)? {
        let c = &r.cell;
        w.serialize(CsvRow {
            cell_hash: &r.cell_hash,
            kind: compact_json(&c.kind).trim_matches('"').into(),
            instance: compact_json(&c.instance).trim_matches('"').into(),
            n: c.n,
            k: c.k,
            density: c.density.map(|d| compact_json(&d)).unwrap_or_default(),
            eta: c.eta,
            rho: c.rho,
            d: c.d,
            seeds: c.seeds.len(),
            mean_log2_bound: r.mean_log2_bound,
            fallback_rate: r.fallback_rate,
            violations: r.violations,
        })?;
    }
    w.flush().map_err(|source| CliError::Write { path: out.into(), source })
}
