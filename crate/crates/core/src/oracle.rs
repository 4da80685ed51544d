//! Exact ground truth for small instances: Gray-code enumeration, GF(2)
//! elimination and branch-and-bound. Nothing here is used to certify.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::error::{invalid, Error, Result};
use crate::instance::{violation_budget, InstanceFile, MultiGraph, Predicate, SignedHypergraph, XorInstance};
use crate::matrix::SymMatrix;

pub const COUNT_LIMIT: usize = 24;
pub const CLUSTER_LIMIT: usize = 14;
pub const BIAS_LIMIT: usize = 18;
pub const SK_LIMIT: usize = 18;
pub const INDSET_LIMIT: usize = 40;
pub const SUBSPACE_LIMIT: usize = 20;

/// Constraint systems the enumerators understand.
#[derive(Clone, Copy, Debug)]
pub enum Constraints<'a> {
    Csp { instance: &'a SignedHypergraph, predicate: &'a Predicate },
    Xor(&'a XorInstance),
}

impl Constraints<'_> {
    pub fn n(&self) -> usize {
        match self {
            Self::Csp { instance, .. } => instance.n(),
            Self::Xor(i) => i.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Csp { instance, .. } => instance.m(),
            Self::Xor(i) => i.m(),
        }
    }

    fn hashes(&self) -> (String, String) {
        match self {
            Self::Csp { instance, .. } => (
                InstanceFile::from_signed(instance, None).sha256(),
                InstanceFile::from_hypergraph(&instance.underlying(), None).sha256(),
            ),
            Self::Xor(i) => (
                InstanceFile::from_xor(i, None).sha256(),
                InstanceFile::from_hypergraph(&i.underlying(), None).sha256(),
            ),
        }
    }

    /// Calls `f(mask, violations)` for every assignment; bit `v` of `mask`
    /// set means `x_v = −1`.
    fn for_each(&self, mut f: impl FnMut(u32, usize)) {
        match self {
            Self::Csp { instance, predicate } => walk_csp(instance, predicate, &mut f),
            Self::Xor(i) => walk_xor(i, &mut f),
        }
    }
}

fn walk_csp(i: &SignedHypergraph, p: &Predicate, f: &mut impl FnMut(u32, usize)) {
    let n = i.n();
    let ones = vec![1i8; n];
    let mut patterns: Vec<usize> = i.clauses().iter().map(|c| c.pattern(&ones)).collect();
    let mut incidence: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ci, c) in i.clauses().iter().enumerate() {
        let mut per_var: Vec<(usize, usize)> = Vec::new();
        for (pos, &v) in c.vars.iter().enumerate() {
            match per_var.iter_mut().find(|(u, _)| *u == v as usize) {
                Some(e) => e.1 |= 1 << pos,
                None => per_var.push((v as usize, 1 << pos)),
            }
        }
        for (v, bits) in per_var {
            incidence[v].push((ci, bits));
        }
    }
    let mut violated = patterns.iter().filter(|&&z| !p.eval(z)).count();
    let mut mask = 0u32;
    f(mask, violated);
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        mask ^= 1 << v;
        for &(ci, bits) in &incidence[v] {
            let before = p.eval(patterns[ci]);
            patterns[ci] ^= bits;
            let after = p.eval(patterns[ci]);
            match (before, after) {
                (true, false) => violated += 1,
                (false, true) => violated -= 1,
                _ => {}
            }
        }
        f(mask, violated);
    }
}

fn walk_xor(i: &XorInstance, f: &mut impl FnMut(u32, usize)) {
    let n = i.n();
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
    // `state[c]` is true when clause c is currently violated.
    let mut state: Vec<bool> = Vec::with_capacity(i.m());
    for (ci, c) in i.clauses().iter().enumerate() {
        let mut parity = 0u64;
        for &v in &c.vars {
            parity ^= 1 << v;
        }
        for v in 0..n {
            if parity >> v & 1 == 1 {
                incidence[v].push(ci);
            }
        }
        state.push(c.rhs == -1);
    }
    let mut violated = state.iter().filter(|&&s| s).count();
    let mut mask = 0u32;
    f(mask, violated);
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        mask ^= 1 << v;
        for &ci in &incidence[v] {
            state[ci] = !state[ci];
            if state[ci] {
                violated += 1;
            } else {
                violated -= 1;
            }
        }
        f(mask, violated);
    }
}

fn check_range(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::OracleRange { n, limit });
    }
    Ok(())
}

fn check_nonempty(c: &Constraints) -> Result<()> {
    if c.m() == 0 {
        return Err(Error::EmptyInstance("oracle on an instance without clauses"));
    }
    Ok(())
}

/// Number of assignments with exactly `v` violations, for `v = 0..=m`.
pub fn violation_histogram(c: Constraints) -> Result<Vec<u64>> {
    check_range(c.n(), COUNT_LIMIT)?;
    let mut hist = vec![0u64; c.m() + 1];
    c.for_each(|_, v| hist[v] += 1);
    Ok(hist)
}

/// XOR shortcut for [`violation_histogram`].
pub fn xor_violation_histogram(i: &XorInstance) -> Result<Vec<u64>> {
    violation_histogram(Constraints::Xor(i))
}

/// Ground truth together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub kind: String,
    pub n: usize,
    pub enumeration_size: u64,
    pub instance_sha256: String,
    /// Hash of the unsigned hypergraph, which signing-independent
    /// certificates refer to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub underlying_sha256: Option<String>,
    pub value: OracleValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OracleValue {
    Count {
        m: usize,
        eta: f64,
        budget: u64,
        count: u64,
        histogram: Vec<u64>,
    },
    Clusters {
        m: usize,
        budget: u64,
        theta: f64,
        solutions: u64,
        /// Number of unordered near-satisfier pairs at each distance `0..=n`.
        distance_histogram: Vec<u64>,
        cover_size: usize,
    },
    MaxBias {
        m: usize,
        budget: u64,
        /// Largest `|Σ x|` over assignments with exactly `v` violations;
        /// `−1` when there are none.
        max_abs_sum_by_violations: Vec<i64>,
        max_abs_sum: i64,
    },
    Sk {
        eta: f64,
        threshold: f64,
        max_value: f64,
        count: u64,
    },
    IndependentSets {
        size_threshold: usize,
        independence_number: usize,
        count: u64,
    },
    SubspaceCount {
        eps: f64,
        dim: usize,
        count: u64,
    },
}

impl OracleResult {
    fn new(kind: &str, n: usize, hashes: (String, Option<String>), value: OracleValue) -> Self {
        Self {
            kind: kind.into(),
            n,
            enumeration_size: if n >= 64 { u64::MAX } else { 1u64 << n },
            instance_sha256: hashes.0,
            underlying_sha256: hashes.1,
            value,
            runtime_ms: None,
        }
    }

    /// Stamps the wall time since `start`. Off by default so that oracle
    /// outputs are reproducible.
    pub fn with_runtime(mut self, start: Instant) -> Self {
        self.runtime_ms = Some(start.elapsed().as_millis() as u64);
        self
    }
}

/// Number of assignments violating at most `violation_budget(η, m)` clauses.
pub fn brute_count(c: Constraints, eta: f64) -> Result<OracleResult> {
    check_nonempty(&c)?;
    let histogram = violation_histogram(c)?;
    let budget = violation_budget(eta, c.m());
    let count = histogram[..=budget as usize].iter().sum();
    let (h, u) = c.hashes();
    Ok(OracleResult::new(
        "count",
        c.n(),
        (h, Some(u)),
        OracleValue::Count { m: c.m(), eta, budget, count, histogram },
    ))
}

/// Exact solutions of an XOR system over GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianCount {
    pub rank: usize,
    pub solvable: bool,
    pub n: usize,
}

impl GaussianCount {
    /// `log2` of the solution count, `None` when there is no solution.
    pub fn log2_count(&self) -> Option<usize> {
        self.solvable.then_some(self.n - self.rank)
    }

    pub fn count(&self) -> Option<u128> {
        match self.log2_count() {
            None => Some(0),
            Some(e) if e < 128 => Some(1u128 << e),
            Some(_) => None,
        }
    }
}

/// `0` or `2^{n − rank}` exact solutions. With `x_v = (−1)^{z_v}` each
/// clause reads `Σ z_v = [rhs = −1]` over GF(2).
pub fn gaussian_count(i: &XorInstance) -> GaussianCount {
    let n = i.n();
    let words = n / 64 + 1;
    // Column n holds the right-hand side.
    let mut rows: Vec<Vec<u64>> = i
        .clauses()
        .iter()
        .map(|c| {
            let mut r = vec![0u64; words];
            for &v in &c.vars {
                r[v as usize / 64] ^= 1 << (v % 64);
            }
            if c.rhs == -1 {
                r[n / 64] ^= 1 << (n % 64);
            }
            r
        })
        .collect();
    let bit = |r: &[u64], j: usize| r[j / 64] >> (j % 64) & 1 == 1;
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && bit(row, col) {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    let solvable = rows[rank..].iter().all(|r| !bit(r, n));
    GaussianCount { rank, solvable, n }
}

fn near_satisfiers(c: &Constraints, budget: u64) -> Vec<u32> {
    let mut out = Vec::new();
    c.for_each(|mask, v| {
        if v as u64 <= budget {
            out.push(mask);
        }
    });
    out
}

/// Pairwise distance profile of the near-satisfiers and the size of a
/// greedy cover by Hamming balls of radius `⌊θ n⌋`.
pub fn brute_clusters(c: Constraints, eta: f64, theta: f64) -> Result<OracleResult> {
    let budget = violation_budget(eta, c.m());
    brute_clusters_with_budget(c, budget, theta)
}

pub fn brute_clusters_with_budget(c: Constraints, budget: u64, theta: f64) -> Result<OracleResult> {
    check_nonempty(&c)?;
    let n = c.n();
    check_range(n, CLUSTER_LIMIT)?;
    let sols = near_satisfiers(&c, budget);
    let mut distance_histogram = vec![0u64; n + 1];
    for (a, &x) in sols.iter().enumerate() {
        for &y in &sols[a + 1..] {
            distance_histogram[(x ^ y).count_ones() as usize] += 1;
        }
    }
    let radius = (theta * n as f64 + 1e-9).floor() as u32;
    let mut covered = vec![false; sols.len()];
    let mut cover_size = 0;
    for a in 0..sols.len() {
        if covered[a] {
            continue;
        }
        cover_size += 1;
        for b in a..sols.len() {
            if (sols[a] ^ sols[b]).count_ones() <= radius {
                covered[b] = true;
            }
        }
    }
    let (h, u) = c.hashes();
    Ok(OracleResult::new(
        "clusters",
        n,
        (h, Some(u)),
        OracleValue::Clusters {
            m: c.m(),
            budget,
            theta,
            solutions: sols.len() as u64,
            distance_histogram,
            cover_size,
        },
    ))
}

/// Largest `|Σ x|` over near-satisfiers, tabulated by violation count.
pub fn brute_max_bias(c: Constraints, eta: f64) -> Result<OracleResult> {
    check_nonempty(&c)?;
    let n = c.n();
    check_range(n, BIAS_LIMIT)?;
    let budget = violation_budget(eta, c.m());
    let mut by_v = vec![-1i64; c.m() + 1];
    c.for_each(|mask, v| {
        let sum = (n as i64 - 2 * mask.count_ones() as i64).abs();
        by_v[v] = by_v[v].max(sum);
    });
    let max_abs_sum = by_v[..=budget as usize].iter().copied().max().unwrap_or(-1);
    let (h, u) = c.hashes();
    Ok(OracleResult::new(
        "balance",
        n,
        (h, Some(u)),
        OracleValue::MaxBias { m: c.m(), budget, max_abs_sum_by_violations: by_v, max_abs_sum },
    ))
}

/// `max xᵀGx` and `#{x : xᵀGx ≥ 2(1 − η) n^{3/2}}`.
pub fn brute_sk_opt_and_count(g: &SymMatrix, eta: f64) -> Result<OracleResult> {
    let n = g.n();
    check_range(n, SK_LIMIT)?;
    if n == 0 {
        return Err(Error::EmptyInstance("SK oracle on an empty matrix"));
    }
    let threshold = 2.0 * (1.0 - eta) * (n as f64).powf(1.5);
    let mut x = vec![1.0f64; n];
    let recompute = |x: &[f64]| -> (Vec<f64>, f64) {
        let h: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g.get(i, j) * x[j]).sum()).collect();
        let f = x.iter().zip(&h).map(|(a, b)| a * b).sum();
        (h, f)
    };
    let (mut h, mut f) = recompute(&x);
    let mut max_value = f;
    let mut count = u64::from(f >= threshold);
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        if step % 1024 == 0 {
            x[v] = -x[v];
            (h, f) = recompute(&x);
        } else {
            let old = x[v];
            f -= 4.0 * old * (h[v] - g.get(v, v) * old);
            for (u, hu) in h.iter_mut().enumerate() {
                *hu -= 2.0 * g.get(u, v) * old;
            }
            x[v] = -old;
        }
        max_value = max_value.max(f);
        count += u64::from(f >= threshold);
    }
    let hash = InstanceFile::from_matrix(g, None).sha256();
    Ok(OracleResult::new("sk", n, (hash, None), OracleValue::Sk { eta, threshold, max_value, count }))
}

fn clique_cover_bound(mut cand: u64, adj: &[u64]) -> u32 {
    let mut cliques = 0;
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        let mut clique_nbrs = adj[v];
        cand &= !(1 << v);
        let mut rest = cand & clique_nbrs;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= !(1 << u);
            if clique_nbrs >> u & 1 == 1 {
                cand &= !(1 << u);
                clique_nbrs &= adj[u];
                rest &= adj[u];
            }
        }
        cliques += 1;
    }
    cliques
}

fn max_indset(cand: u64, size: u32, best: &mut u32, adj: &[u64]) {
    if size > *best {
        *best = size;
    }
    let mut rest = cand;
    while rest != 0 {
        if size + clique_cover_bound(rest, adj) <= *best {
            return;
        }
        let v = rest.trailing_zeros() as usize;
        rest &= !(1 << v);
        max_indset(rest & !adj[v], size + 1, best, adj);
    }
}

fn count_indsets(cand: u64, size: u32, target: u32, adj: &[u64]) -> u64 {
    let mut total = u64::from(size >= target);
    let mut rest = cand;
    while rest != 0 {
        if size + clique_cover_bound(rest, adj) < target {
            break;
        }
        let v = rest.trailing_zeros() as usize;
        rest &= !(1 << v);
        total += count_indsets(rest & !adj[v], size + 1, target, adj);
    }
    total
}

/// Independence number and the number of independent sets with at least
/// `size_threshold` vertices.
pub fn brute_independent_sets(g: &MultiGraph, size_threshold: usize) -> Result<OracleResult> {
    let n = g.n();
    check_range(n, INDSET_LIMIT)?;
    if g.has_loops() {
        return Err(invalid("independent sets of a graph with self-loops"));
    }
    let adj = g.neighbour_masks().expect("n checked");
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0;
    max_indset(all, 0, &mut best, &adj);
    let count = count_indsets(all, 0, size_threshold as u32, &adj);
    let hash = InstanceFile::from_graph(g, None).sha256();
    Ok(OracleResult::new(
        "indset",
        n,
        (hash, None),
        OracleValue::IndependentSets { size_threshold, independence_number: best as usize, count },
    ))
}

/// Number of `x ∈ {±1}ⁿ` with `‖x/√n − Π x/√n‖ ≤ ε`, `Π` the projection
/// onto the span of the orthonormal `basis`.
pub fn brute_subspace_count(basis: &[Vec<f64>], n: usize, eps: f64) -> Result<OracleResult> {
    check_range(n, SUBSPACE_LIMIT)?;
    if basis.iter().any(|b| b.len() != n) {
        return Err(invalid("basis vectors must have length n"));
    }
    let dim = basis.len();
    let mut x = vec![1.0f64; n];
    let proj = |x: &[f64]| -> Vec<f64> { basis.iter().map(|b| b.iter().zip(x).map(|(p, q)| p * q).sum()).collect() };
    let mut c = proj(&x);
    let limit = eps * eps * n as f64 + 1e-9 * n as f64;
    let close = |c: &[f64]| n as f64 - c.iter().map(|v| v * v).sum::<f64>() <= limit;
    let mut count = u64::from(close(&c));
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        x[v] = -x[v];
        if step % 1024 == 0 {
            c = proj(&x);
        } else {
            for (cj, b) in c.iter_mut().zip(basis) {
                *cj += 2.0 * x[v] * b[v];
            }
        }
        count += u64::from(close(&c));
    }
    Ok(OracleResult::new("subspace", n, (String::new(), None), OracleValue::SubspaceCount { eps, dim, count }))
}

/// Size of the largest `ε`-balanced code of length `n ≤ 20` found by
/// randomized greedy passes over all of `{±1}ⁿ`. A lower-bound witness only.
pub fn greedy_balanced_code(n: usize, eps: f64, restarts: usize, seed: u64) -> Result<usize> {
    check_range(n, SUBSPACE_LIMIT)?;
    let limit = (eps * n as f64 + 1e-9).floor() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..1u32 << n).collect();
    let mut best = 0;
    for _ in 0..restarts {
        order.shuffle(&mut rng);
        let mut code: Vec<u32> = Vec::new();
        for &w in &order {
            let ok = code.iter().all(|&c| (n as i64 - 2 * (c ^ w).count_ones() as i64).abs() <= limit);
            if ok {
                code.push(w);
            }
        }
        best = best.max(code.len());
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Sound,
    Violated,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub verdict: Verdict,
    pub detail: String,
}

fn verdict(ok: bool, detail: String) -> Verification {
    Verification { verdict: if ok { Verdict::Sound } else { Verdict::Violated }, detail }
}

fn inapplicable(detail: impl Into<String>) -> Verification {
    Verification { verdict: Verdict::Inapplicable, detail: detail.into() }
}

fn log2_fits(count: u64, log2_bound: f64) -> bool {
    count == 0 || (count as f64).log2() <= log2_bound + 1e-9
}

/// Compares a certificate against ground truth for the same instance.
pub fn verify_certificate(cert: &Certificate, oracle: &OracleResult) -> Result<Verification> {
    let hash = cert.instance_sha256();
    let same = hash.is_empty() || hash == oracle.instance_sha256 || oracle.underlying_sha256.as_deref() == Some(hash);
    if !same {
        return Ok(inapplicable("certificate and oracle refer to different instances"));
    }
    let mismatch = || Error::KindMismatch(format!("{} certificate against {} oracle", cert.kind(), oracle.kind));
    Ok(match (cert, &oracle.value) {
        (Certificate::Count(c), OracleValue::Count { m, histogram, .. }) => {
            if c.n != oracle.n || c.m != *m {
                return Ok(inapplicable("instance sizes differ"));
            }
            let b = (c.violation_budget as usize).min(histogram.len() - 1);
            let count: u64 = histogram[..=b].iter().sum();
            verdict(
                log2_fits(count, c.log2_bound),
                format!("{count} assignments within budget {}, certified log2 bound {}", c.violation_budget, c.log2_bound),
            )
        }
        (Certificate::SkCount(c), OracleValue::Sk { eta, count, .. }) => {
            if (c.eta - eta).abs() > 1e-12 || c.n != oracle.n {
                return Ok(inapplicable("slack or size differs"));
            }
            verdict(log2_fits(*count, c.log2_bound), format!("{count} near-optimal x, log2 bound {}", c.log2_bound))
        }
        (Certificate::IndsetCount(c), OracleValue::IndependentSets { size_threshold, count, .. }) => {
            let t = c.parameters.get("size_threshold").copied().unwrap_or(-1.0);
            if t != *size_threshold as f64 || c.n != oracle.n {
                return Ok(inapplicable("size threshold differs"));
            }
            verdict(log2_fits(*count, c.log2_bound), format!("{count} large independent sets, log2 bound {}", c.log2_bound))
        }
        (Certificate::Clusters(c), OracleValue::Clusters { budget, theta, distance_histogram, cover_size, .. }) => {
            if c.fallback {
                return Ok(verdict(true, "fallback certificate".into()));
            }
            if *budget != c.violation_budget || c.n != oracle.n || (theta - c.theta).abs() > 1e-12 {
                return Ok(inapplicable("budget, size or theta differs"));
            }
            let bad: Vec<usize> =
                (0..distance_histogram.len()).filter(|&d| distance_histogram[d] > 0 && !c.admits_distance(d)).collect();
            let cover_ok = log2_fits(*cover_size as u64, c.log2_cluster_bound);
            verdict(
                bad.is_empty() && cover_ok,
                format!("distances outside the certified set: {bad:?}; cover {cover_size} vs log2 bound {}", c.log2_cluster_bound),
            )
        }
        (Certificate::Balance(c), OracleValue::MaxBias { max_abs_sum_by_violations, .. }) => {
            if !c.emitted {
                return Ok(verdict(true, "no claim".into()));
            }
            if c.n != oracle.n || c.m + 1 != max_abs_sum_by_violations.len() {
                return Ok(inapplicable("instance sizes differ"));
            }
            let b = (c.violation_budget as usize).min(c.m);
            let worst = max_abs_sum_by_violations[..=b].iter().copied().max().unwrap_or(-1);
            verdict(
                (worst as f64) < c.rho * c.n as f64 - 1e-9,
                format!("max |sum| {worst} within budget {b}, excluded from {}", c.rho * c.n as f64),
            )
        }
        (Certificate::Refutation(c), OracleValue::Count { m, histogram, .. }) => {
            if c.n != oracle.n || c.m != *m {
                return Ok(inapplicable("instance sizes differ"));
            }
            let b = (c.refuted_budget as usize).min(histogram.len() - 1);
            let count: u64 = histogram[..=b].iter().sum();
            verdict(count == 0, format!("{count} assignments within the refuted budget {}", c.refuted_budget))
        }
        (Certificate::IndsetRefutation(c), OracleValue::IndependentSets { independence_number, .. }) => verdict(
            *independence_number < c.refuted_size,
            format!("independence number {independence_number}, refuted size {}", c.refuted_size),
        ),
        _ => return Err(mismatch()),
    })
}
