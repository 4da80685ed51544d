//! Upper bounds on the number of `(1 − η)`-satisfying assignments.
//!
//! Budgets are absolute: an assignment is a near-satisfier when it violates
//! at most `violation_budget(η, m)` clauses of the instance as given. The
//! certifiers then discard hyperedges with repeated vertices and duplicate
//! tuples without changing the budget, which can only admit more
//! assignments.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{gates_pass, Check};
use crate::error::{invalid, Error, Result};
use crate::instance::{
    csp_to_ksat, induced_hypergraph, violation_budget, Hypergraph, InstanceFile, MultiGraph, Predicate,
    Selection, SignedHypergraph, Var, VarSubset,
};
use crate::numeric::{log2_binom_tail_upper, log2_sum_exp2, round_up};
use crate::refuter::{kxor_principle, QuasirandomnessCertificate};
use crate::spectral::{edge_expansion_lower_bound, normalized_laplacian_gap, SpectralReport};
use crate::TOOL_VERSION;

/// How the kXOR recursion splits the vertex set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PartitionMode {
    /// Consecutive index blocks; the certificate is seed-independent.
    #[default]
    Contiguous,
    /// Blocks of the same sizes over a seeded permutation.
    Shuffled { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountOptions {
    /// When false the nontrivial bound is computed even if the calibration
    /// gates fail. The result stays sound; the gates only predict whether it
    /// will be informative.
    pub enforce_checks: bool,
    pub partition: PartitionMode,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { enforce_checks: true, partition: PartitionMode::Contiguous }
    }
}

/// Default slack added to the partition exponent.
pub const DEFAULT_PARTITION_EPS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountCertificate {
    pub n: usize,
    /// Clause count the budget refers to.
    pub m: usize,
    pub log2_bound: f64,
    pub eta: f64,
    pub violation_budget: u64,
    pub fallback: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasirandom: Option<QuasirandomnessCertificate>,
    #[serde(default)]
    pub recursion_trace: Vec<BlockCertificate>,
    pub instance_sha256: String,
    pub tool_version: String,
}

/// One block of the kXOR partition and the certificate for its induced
/// `(k−1)`-uniform hypergraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCertificate {
    pub index: usize,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Var>>,
    pub induced_edges: usize,
    pub certificate: CountCertificate,
}

impl CountCertificate {
    fn new(n: usize, m: usize, eta: f64, budget: u64, hash: String) -> Self {
        Self {
            n,
            m,
            log2_bound: n as f64,
            eta,
            violation_budget: budget,
            fallback: true,
            checks: Vec::new(),
            parameters: BTreeMap::new(),
            spectral: None,
            quasirandom: None,
            recursion_trace: Vec::new(),
            instance_sha256: hash,
            tool_version: TOOL_VERSION.into(),
        }
    }

    /// Sets the bound, falling back to `2^n` when it is not below it.
    fn conclude(&mut self, log2_bound: f64) {
        if log2_bound < self.n as f64 {
            self.log2_bound = log2_bound.max(0.0);
            self.fallback = false;
        } else {
            self.log2_bound = self.n as f64;
            self.fallback = true;
        }
    }

    fn param(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.parameters.insert(name.into(), v);
        }
    }

    /// Whether `count` assignments fit under the bound.
    pub fn admits(&self, count: u128) -> bool {
        count == 0 || self.fallback || (count as f64).log2() <= self.log2_bound + 1e-9
    }
}

fn hypergraph_hash(h: &Hypergraph) -> String {
    InstanceFile::from_hypergraph(h, None).sha256()
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("eta = {eta} outside [0, 1]")));
    }
    Ok(())
}

/// Count bound for 2XOR on the graph `g`, valid for every signing.
pub fn certify_count_2xor(g: &Hypergraph, eta: f64) -> Result<CountCertificate> {
    certify_count_2xor_with(g, eta, &CountOptions::default())
}

pub fn certify_count_2xor_with(g: &Hypergraph, eta: f64, opts: &CountOptions) -> Result<CountCertificate> {
    check_eta(eta)?;
    if g.k() != 2 {
        return Err(invalid(format!("2XOR certificate needs a graph, got k = {}", g.k())));
    }
    xor2_with_budget(g, eta, violation_budget(eta, g.m()), opts)
}

fn xor2_with_budget(h: &Hypergraph, eta: f64, budget: u64, opts: &CountOptions) -> Result<CountCertificate> {
    let n = h.n();
    let mut cert = CountCertificate::new(n, h.m(), eta, budget, hypergraph_hash(h));
    let g = MultiGraph::from_hypergraph(h)?.simplified();
    cert.param("edges_after_cleaning", g.m() as f64);
    if n == 0 {
        cert.conclude(0.0);
        return Ok(cert);
    }
    if budget as usize >= g.m() {
        // Every assignment violates at most m ≤ budget clauses.
        cert.checks.push(Check::gate("budget_below_edges", budget as f64, g.m() as f64, false));
        return Ok(cert);
    }
    let delta = g.m() as f64 / n as f64;
    cert.param("delta", delta);
    let report = SpectralReport::degrees(&g);
    let window = delta.powf(-1.0 / 3.0);
    let (lo, hi) = (2.0 * delta * (1.0 - window), 2.0 * delta * (1.0 + window));
    cert.checks.push(Check::gate("degree_min", report.d_min as f64, lo, report.d_min as f64 >= lo));
    cert.checks.push(Check::gate("degree_max", report.d_max as f64, hi, report.d_max as f64 <= hi));
    if report.d_min == 0 {
        cert.checks.push(Check::gate("no_isolated_vertex", 0.0, 1.0, false));
        cert.spectral = Some(report);
        return Ok(cert);
    }
    let report = normalized_laplacian_gap(&g)?;
    let l2 = report.lambda2.expect("gap computed");
    let gap_threshold = 1.0 - delta.powf(-0.25);
    cert.checks.push(Check::gate("lambda2", l2, gap_threshold, l2 >= gap_threshold));
    let reference = if eta <= 1.0 / (3.0 * n as f64) {
        1.0
    } else {
        1.0 + 3.0 * eta * n as f64 * (n as f64).ln() / std::f64::consts::LN_2
    };
    cert.param("reference_log2", reference);
    let gates = gates_pass(&cert.checks);
    cert.spectral = Some(report.clone());
    if !gates && opts.enforce_checks {
        return Ok(cert);
    }
    // Two near-satisfiers x, x' give y = x ∘ x' violating at most 2·budget
    // clauses of the all-positive instance; the minority side S of y then has
    // e(S, S̄) ≤ 2·budget, which the expansion bound forbids once |S| ≥ s*.
    let target = 2.0 * budget as f64;
    let s_star = (1..=n / 2).find(|&s| edge_expansion_lower_bound(&report, s) > target);
    let Some(s_star) = s_star else {
        cert.checks.push(Check::gate("radius_closes", 0.0, 1.0, false));
        return Ok(cert);
    };
    cert.param("s_star", s_star as f64);
    cert.param("radius", (s_star - 1) as f64);
    cert.conclude(1.0 + log2_binom_tail_upper(n as u64, (s_star - 1) as u64));
    Ok(cert)
}

/// `log2 Σ_i 2^{|S_i|} u_i` for a partition of `[n]` into the given blocks,
/// each paired with `log2 u_i`.
pub fn aggregate_partition(n: usize, blocks: &[(Vec<Var>, f64)]) -> Result<f64> {
    let mut seen = vec![false; n];
    for (b, _) in blocks {
        for &v in b {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(invalid("blocks do not partition [n]"));
            }
            seen[v] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(invalid("blocks do not cover [n]"));
    }
    let terms: Vec<f64> = blocks.iter().map(|(b, u)| b.len() as f64 + u).collect();
    Ok(round_up(log2_sum_exp2(&terms)))
}

/// Count bound for kXOR on `h`, valid for every signing.
pub fn certify_count_kxor(h: &Hypergraph, eta: f64, eps: f64) -> Result<CountCertificate> {
    certify_count_kxor_with(h, eta, eps, &CountOptions::default())
}

pub fn certify_count_kxor_with(h: &Hypergraph, eta: f64, eps: f64, opts: &CountOptions) -> Result<CountCertificate> {
    check_eta(eta)?;
    if h.k() < 2 {
        return Err(invalid("kXOR certificate needs k >= 2"));
    }
    kxor_with_budget(h, eta, violation_budget(eta, h.m()), eps, opts, 0)
}

fn blocks_for(n: usize, size: usize, mode: PartitionMode) -> Vec<VarSubset> {
    let mut order: Vec<usize> = (0..n).collect();
    if let PartitionMode::Shuffled { seed } = mode {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    order
        .chunks(size)
        .map(|chunk| {
            let mut mask = vec![false; n];
            chunk.iter().for_each(|&v| mask[v] = true);
            VarSubset::from_mask(mask)
        })
        .collect()
}

fn kxor_with_budget(
    h: &Hypergraph,
    eta: f64,
    budget: u64,
    eps: f64,
    opts: &CountOptions,
    depth: usize,
) -> Result<CountCertificate> {
    let k = h.k();
    if depth > k.max(2) + 1 {
        return Err(Error::RecursionDepth(depth));
    }
    if k == 2 {
        return xor2_with_budget(h, eta, budget, opts);
    }
    let n = h.n();
    let mut cert = CountCertificate::new(n, h.m(), eta, budget, hypergraph_hash(h));
    let clean = h.cleaned();
    cert.param("edges_after_cleaning", clean.m() as f64);
    if n == 0 {
        cert.conclude(0.0);
        return Ok(cert);
    }
    if budget as usize >= clean.m() {
        cert.checks.push(Check::gate("budget_below_edges", budget as f64, clean.m() as f64, false));
        return Ok(cert);
    }
    let delta = clean.m() as f64 / n as f64;
    let exponent = if n > 1 { delta.ln() / (n as f64).ln() } else { 0.0 };
    let c = if exponent < (k - 2) as f64 { 1.0 - exponent / (k - 2) as f64 + eps } else { 0.0 };
    let c = c.clamp(0.0, 1.0);
    let size = ((n as f64).powf(c).ceil() as usize).clamp(1, n);
    let blocks = blocks_for(n, size, opts.partition);
    let ell = blocks.len();
    let sub_budget = (k as u64 * budget) / ell as u64;
    cert.param("delta", delta);
    cert.param("density_exponent", exponent);
    cert.param("partition_exponent", c);
    cert.param("block_size", size as f64);
    cert.param("blocks", ell as f64);
    cert.param("block_budget", sub_budget as f64);
    // Each clause lands in at most k blocks and a violated induced clause
    // comes from a violated clause, so some block sees at most k·budget/ℓ
    // violations.
    let mut terms = Vec::with_capacity(ell);
    for (index, s) in blocks.iter().enumerate() {
        let sub = induced_hypergraph(&clean, s, k - 1, true, Selection::SetMembership)?;
        let sub_eta = if sub.m() == 0 { 1.0 } else { (sub_budget as f64 / sub.m() as f64).min(1.0) };
        let sub_cert = kxor_with_budget(&sub, sub_eta, sub_budget, eps, opts, depth + 1)?;
        terms.push(s.len() as f64 + sub_cert.log2_bound);
        let contiguous = matches!(opts.partition, PartitionMode::Contiguous);
        cert.recursion_trace.push(BlockCertificate {
            index,
            size: s.len(),
            start: contiguous.then(|| s.members()[0] as usize),
            members: (!contiguous).then(|| s.members().to_vec()),
            induced_edges: sub.m(),
            certificate: sub_cert,
        });
    }
    cert.conclude(round_up(log2_sum_exp2(&terms)));
    Ok(cert)
}

/// Count bound for kSAT through the kXOR principle.
pub fn certify_count_ksat(i: &SignedHypergraph, eta: f64, eps: f64) -> Result<CountCertificate> {
    certify_count_ksat_with(i, eta, eps, &CountOptions::default())
}

pub fn certify_count_ksat_with(i: &SignedHypergraph, eta: f64, eps: f64, opts: &CountOptions) -> Result<CountCertificate> {
    ksat_inner(i, eta, eps, opts, InstanceFile::from_signed(i, None).sha256())
}

fn ksat_inner(i: &SignedHypergraph, eta: f64, eps: f64, opts: &CountOptions, hash: String) -> Result<CountCertificate> {
    check_eta(eta)?;
    if i.k() < 3 {
        return Err(invalid(format!("kSAT count certificate needs k >= 3, got {}", i.k())));
    }
    let m = i.m();
    let budget = violation_budget(eta, m);
    let mut cert = CountCertificate::new(i.n(), m, eta, budget, hash.clone());
    if m == 0 {
        cert.checks.push(Check::gate("nonempty", 0.0, 1.0, false));
        return Ok(cert);
    }
    let principle = kxor_principle(i, budget as f64 / m as f64)?;
    let xor_budget = principle.xor_violation_budget(m);
    cert.param("quasirandom_eps", principle.eps);
    cert.param("xor_fraction_lb", principle.xor_fraction_lb);
    cert.param("xor_violation_budget", xor_budget as f64);
    cert.checks.push(Check::gate("quasirandom_eps", principle.eps, 1.0, principle.eps < 1.0));
    cert.checks.push(Check::gate("xor_slack", xor_budget as f64 / m as f64, 1.0, (xor_budget as usize) < m));
    cert.quasirandom = Some(principle.quasirandom.clone());
    if xor_budget as usize >= m {
        return Ok(cert);
    }
    let inner = kxor_with_budget(&i.underlying(), xor_budget as f64 / m as f64, xor_budget, eps, opts, 0)?;
    cert.checks.extend(inner.checks.iter().cloned());
    for (k, v) in &inner.parameters {
        cert.parameters.entry(k.clone()).or_insert(*v);
    }
    cert.spectral = inner.spectral.clone();
    cert.recursion_trace = inner.recursion_trace;
    cert.log2_bound = inner.log2_bound;
    cert.fallback = inner.fallback;
    Ok(cert)
}

/// Count bound for a `P`-CSP through its kSAT rewriting.
pub fn certify_count_kcsp(i: &SignedHypergraph, p: &Predicate, eta: f64, eps: f64) -> Result<CountCertificate> {
    certify_count_kcsp_with(i, p, eta, eps, &CountOptions::default())
}

pub fn certify_count_kcsp_with(
    i: &SignedHypergraph,
    p: &Predicate,
    eta: f64,
    eps: f64,
    opts: &CountOptions,
) -> Result<CountCertificate> {
    let sat = csp_to_ksat(i, p)?;
    ksat_inner(&sat, eta, eps, opts, InstanceFile::from_signed(i, None).sha256())
}

/// Evidence that an instance has no `(1 − η/2)`-satisfying assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    pub eta_refuted: f64,
    /// Violations allowed at slack `eta_refuted`; no assignment meets it.
    pub refuted_budget: u64,
    pub subset_size: usize,
    pub touching_clauses: usize,
    pub count_certificate: CountCertificate,
    pub instance_sha256: String,
    pub tool_version: String,
}

/// Refutes `(1 − η/2)`-satisfiability from a count bound at slack `η`.
///
/// Any `(1 − η/2)`-satisfier stays a `(1 − η)`-satisfier under every
/// re-assignment of a set `S` touched by at most `η m / 2` clauses, giving
/// `2^{|S|}` near-satisfiers. A count bound below that rules it out.
/// `h` carries the clause tuples of the instance the certificate counts.
pub fn refute_from_count(h: &Hypergraph, cert: &CountCertificate, eta: f64) -> Option<RefutationCertificate> {
    let (n, m) = (h.n(), h.m());
    if cert.n != n || cert.m != m || cert.fallback || !(eta > 0.0) {
        return None;
    }
    let full = violation_budget(eta, m);
    if cert.violation_budget < full {
        return None;
    }
    let size = ((eta * n as f64) / (3.0 * h.k() as f64) + 1e-9).floor() as usize;
    let touching = h.edges().iter().filter(|e| e.iter().any(|&v| (v as usize) < size)).count();
    let half = violation_budget(eta / 2.0, m);
    let closes = touching as f64 <= eta * m as f64 / 2.0 && half + touching as u64 <= full;
    if !closes || !(cert.log2_bound < size as f64) {
        return None;
    }
    Some(RefutationCertificate {
        n,
        m,
        eta,
        eta_refuted: eta / 2.0,
        refuted_budget: half,
        subset_size: size,
        touching_clauses: touching,
        count_certificate: cert.clone(),
        instance_sha256: cert.instance_sha256.clone(),
        tool_version: TOOL_VERSION.into(),
    })
}
