//! Cluster-count certificates for 3XOR and 3CSP, and balance certificates
//! that exclude strongly biased near-satisfiers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certificate::{gates_pass, Check};
use crate::error::{invalid, Result};
use crate::instance::{
    csp_to_ksat, primal_graph, split_by_sign, violation_budget, Hypergraph, InstanceFile, MultiGraph, Predicate,
    SignedHypergraph, Var, VarSubset, XorInstance,
};
use crate::numeric::log2_binom_upper;
use crate::refuter::{
    certify_quasirandom, kxor_principle, refute_polynomial, xor_fraction_lower_bound, ksat_xor_view,
    QuasirandomnessCertificate, SparsePolynomial,
};
use crate::spectral::{mixing_interval, Interval, SpectralReport};
use crate::TOOL_VERSION;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryOptions {
    /// See `CountOptions::enforce_checks`.
    pub enforce_checks: bool,
    /// Constant in the primal-norm calibration threshold `C √(Δ ln n)`.
    pub norm_constant: f64,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self { enforce_checks: true, norm_constant: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalExpansion {
    pub report: SpectralReport,
    /// Hyperedges per vertex.
    pub delta: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Measured de-meaned norm of the primal graph of `h`, checked against
/// `c0 √(Δ ln n)`. Hyperedges with repeated vertices are dropped first.
pub fn certify_primal_expansion(h: &Hypergraph, c0: f64) -> Result<PrimalExpansion> {
    let clean = h.cleaned();
    let g = primal_graph(&clean)?;
    let report = SpectralReport::demeaned(&g)?;
    let n = h.n();
    let delta = if n == 0 { 0.0 } else { clean.m() as f64 / n as f64 };
    let threshold = c0 * (delta * (n.max(2) as f64).ln()).sqrt();
    let passed = report.demeaned_norm.unwrap_or(0.0) <= threshold;
    Ok(PrimalExpansion { report, delta, threshold, passed })
}

/// Lower bounds on the hyperedge counts `T2` (two vertices in `S`) and `T3`
/// (all three in `S`), valid for every `S` of the given size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperedgeSplit {
    pub s: f64,
    /// `≤ T2 − 3 T0 ≤ T2`.
    pub lb2: f64,
    /// `≤ T3 − T1/3 ≤ T3`.
    pub lb3: f64,
}

/// Split bounds at `|S| = s` from the primal-graph report.
///
/// With `e(·,·)` counting ordered primal pairs, `e(S,S) = 6T3 + 2T2`,
/// `e(S,S̄) = 2T2 + 2T1` and `e(S̄,S̄) = 6T0 + 2T1`; each `e` is replaced by
/// the matching end of its mixing interval.
pub fn split_bounds(report: &SpectralReport, s: f64) -> HyperedgeSplit {
    let n = report.n as f64;
    let s = s.clamp(0.0, n);
    let inside = mixing_interval(report, s, s);
    let cross = mixing_interval(report, s, n - s);
    let outside = mixing_interval(report, n - s, n - s);
    let lb2 = 0.5 * cross.lo - 0.5 * outside.hi;
    let lb3 = (inside.lo - cross.hi) / 6.0;
    HyperedgeSplit { s, lb2: lb2.max(0.0), lb3: lb3.max(0.0) }
}

/// Split bounds for `|S| = (1/2 + γ) n`.
pub fn hyperedge_split_bounds(h: &Hypergraph, report: &SpectralReport, gamma: f64) -> Result<HyperedgeSplit> {
    if !(0.0..=0.5).contains(&gamma) {
        return Err(invalid(format!("gamma = {gamma} outside [0, 1/2]")));
    }
    if h.k() != 3 || h.n() != report.n {
        return Err(invalid("split bounds need a 3-uniform hypergraph matching the report"));
    }
    Ok(split_bounds(report, (0.5 + gamma) * h.n() as f64))
}

/// `log2` of an upper bound on the size of any `ε`-balanced code of length
/// `n`, i.e. ±1 vectors with pairwise `|⟨c, c'⟩| ≤ ε n`.
///
/// The `k`-th Hadamard power of the Gram matrix is PSD with rank at most
/// `R(k) = C(n+k−1, k)` and at least `N / (1 + N ε^{2k})`, so
/// `R(k) ε^{2k} < 1/2` forces `N ≤ 2 R(k)`. `R` grows with `k`, so the first
/// feasible `k` is the best one.
pub fn balanced_code_bound(eps: f64, n: usize) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("code balance eps = {eps} outside [0, 1/2)")));
    }
    let nf = n as f64;
    for k in 1u64.. {
        let log_r = log2_binom_upper(n as u64 + k - 1, k);
        if 1.0 + log_r >= nf {
            break;
        }
        if eps == 0.0 || log_r + 2.0 * k as f64 * eps.log2() < -1.0 {
            return Ok(1.0 + log_r);
        }
    }
    Ok(nf)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterCertificate {
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    /// Violations allowed to a single near-satisfier.
    pub violation_budget: u64,
    /// Violations of the all-positive instance allowed to `x ∘ x'`.
    pub pair_budget: u64,
    pub theta: f64,
    pub log2_cluster_bound: f64,
    pub gap_interval: Interval,
    /// Hamming distances not excluded between two near-satisfiers.
    pub allowed_distances: Vec<usize>,
    pub fallback: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_report: Option<SpectralReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasirandom: Option<QuasirandomnessCertificate>,
    pub instance_sha256: String,
    pub tool_version: String,
}

impl ClusterCertificate {
    fn fallback(n: usize, m: usize, eta: f64, budget: u64, hash: String) -> Self {
        Self {
            n,
            m,
            eta,
            violation_budget: budget,
            pair_budget: 2 * budget,
            theta: 0.5,
            log2_cluster_bound: n as f64,
            gap_interval: Interval { lo: 0.0, hi: n as f64 },
            allowed_distances: (0..=n).collect(),
            fallback: true,
            checks: Vec::new(),
            parameters: BTreeMap::new(),
            primal_report: None,
            quasirandom: None,
            instance_sha256: hash,
            tool_version: TOOL_VERSION.into(),
        }
    }

    /// Whether two near-satisfiers at Hamming distance `d` are consistent
    /// with the certificate.
    pub fn admits_distance(&self, d: usize) -> bool {
        let (d, n) = (d as f64, self.n as f64);
        self.fallback
            || d <= self.theta * n + 1e-9
            || (self.gap_interval.lo - 1e-9 <= d && d <= self.gap_interval.hi + 1e-9)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("eta = {eta} outside [0, 1]")));
    }
    Ok(())
}

fn paper_theta(eta: f64, h: &Hypergraph) -> f64 {
    let n = h.n().max(2) as f64;
    let delta = h.m() as f64 / n;
    (2.0 * eta).max(delta.powf(-0.5) * n.ln())
}

/// Cluster certificate for 3XOR on `h`, valid for every signing.
pub fn certify_clusters_3xor(h: &Hypergraph, eta: f64) -> Result<ClusterCertificate> {
    certify_clusters_3xor_with(h, eta, &GeometryOptions::default())
}

pub fn certify_clusters_3xor_with(h: &Hypergraph, eta: f64, opts: &GeometryOptions) -> Result<ClusterCertificate> {
    check_eta(eta)?;
    let hash = InstanceFile::from_hypergraph(h, None).sha256();
    clusters_with_budget(h, eta, violation_budget(eta, h.m()), opts, hash)
}

fn clusters_with_budget(
    h: &Hypergraph,
    eta: f64,
    budget: u64,
    opts: &GeometryOptions,
    hash: String,
) -> Result<ClusterCertificate> {
    if h.k() != 3 {
        return Err(invalid(format!("cluster certificates need k = 3, got {}", h.k())));
    }
    let n = h.n();
    let mut cert = ClusterCertificate::fallback(n, h.m(), eta, budget, hash);
    cert.parameters.insert("paper_theta".into(), paper_theta(eta, h));
    if n == 0 {
        return Ok(cert);
    }
    let primal = certify_primal_expansion(h, opts.norm_constant)?;
    let norm = primal.report.certified_norm().unwrap_or(0.0);
    cert.checks.push(Check::gate("primal_norm", norm, primal.threshold, primal.passed));
    cert.parameters.insert("delta".into(), primal.delta);
    cert.primal_report = Some(primal.report.clone());
    if !gates_pass(&cert.checks) && opts.enforce_checks {
        return Ok(cert);
    }
    // y = x ∘ x' violates at most 2·budget clauses of the all-positive
    // instance, and a clause is violated by y exactly when an odd number of
    // its vertices lie in S− = {y = −1}. So T2(S+) and T3(S−) are at most
    // the pair budget, where |S−| is the distance d.
    let target = cert.pair_budget as f64;
    let report = &primal.report;
    let allowed: Vec<usize> = (0..=n)
        .filter(|&d| {
            d == 0 || {
                let lb2 = split_bounds(report, (n - d) as f64).lb2;
                let lb3 = split_bounds(report, d as f64).lb3;
                lb2 <= target && lb3 <= target
            }
        })
        .collect();
    let nf = n as f64;
    let theta = allowed
        .iter()
        .map(|&d| {
            let d = d as f64;
            (d / nf).min((d - nf / 2.0).abs() / nf)
        })
        .fold(0.0, f64::max);
    cert.checks.push(Check::gate("theta_below_quarter", theta, 0.25, theta < 0.25));
    if theta >= 0.25 {
        return Ok(cert);
    }
    // A maximal set of near-satisfiers pairwise more than θn apart has all
    // its distances in the gap, so it is a 2θ-balanced code, and the θn-balls
    // around it cover every near-satisfier.
    let bound = balanced_code_bound(2.0 * theta, n)?;
    cert.theta = theta;
    cert.allowed_distances = allowed;
    cert.gap_interval = Interval { lo: (0.5 - theta) * nf, hi: (0.5 + theta) * nf };
    // The distance structure holds even when the count is trivial.
    cert.log2_cluster_bound = bound.min(nf);
    cert.fallback = false;
    Ok(cert)
}

/// Cluster certificate for a 3-ary `P`-CSP through the kXOR principle.
pub fn certify_clusters_3csp(i: &SignedHypergraph, p: &Predicate, eta: f64) -> Result<ClusterCertificate> {
    certify_clusters_3csp_with(i, p, eta, &GeometryOptions::default())
}

pub fn certify_clusters_3csp_with(
    i: &SignedHypergraph,
    p: &Predicate,
    eta: f64,
    opts: &GeometryOptions,
) -> Result<ClusterCertificate> {
    check_eta(eta)?;
    if i.k() != 3 {
        return Err(invalid(format!("3CSP cluster certificates need k = 3, got {}", i.k())));
    }
    let hash = InstanceFile::from_signed(i, None).sha256();
    let m = i.m();
    let budget = violation_budget(eta, m);
    if m == 0 {
        return Ok(ClusterCertificate::fallback(i.n(), m, eta, budget, hash));
    }
    let sat = csp_to_ksat(i, p)?;
    let principle = kxor_principle(&sat, budget as f64 / m as f64)?;
    let xor_budget = principle.xor_violation_budget(m);
    let mut cert = clusters_with_budget(&sat.underlying(), eta, xor_budget, opts, hash)?;
    cert.violation_budget = budget;
    cert.parameters.insert("quasirandom_eps".into(), principle.eps);
    cert.parameters.insert("xor_violation_budget".into(), xor_budget as f64);
    cert.quasirandom = Some(principle.quasirandom);
    Ok(cert)
}

/// Claim that every assignment with `|Σ x| ≥ ρ n` violates at least
/// `min_violated` clauses, more than `violation_budget`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceCertificate {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub eta: f64,
    pub violation_budget: u64,
    pub emitted: bool,
    pub min_violated: u64,
    pub violated_fraction_bound: f64,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<SpectralReport>,
    pub instance_sha256: String,
    pub tool_version: String,
}

impl BalanceCertificate {
    fn declined(n: usize, m: usize, rho: f64, eta: f64, hash: String) -> Self {
        Self {
            n,
            m,
            rho,
            eta,
            violation_budget: violation_budget(eta, m),
            emitted: false,
            min_violated: 0,
            violated_fraction_bound: 0.0,
            checks: Vec::new(),
            parameters: BTreeMap::new(),
            reports: Vec::new(),
            instance_sha256: hash,
            tool_version: TOOL_VERSION.into(),
        }
    }

    fn param(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.parameters.insert(name.into(), v);
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho = {rho} outside (0, 1]")));
    }
    Ok(())
}

/// Excludes `ρ`-biased `(1 − η)`-satisfiers of a 3-ary `P`-CSP.
pub fn certify_balance_3csp(i: &SignedHypergraph, p: &Predicate, rho: f64, eta: f64) -> Result<BalanceCertificate> {
    certify_balance_3csp_with(i, p, rho, eta, &GeometryOptions::default())
}

pub fn certify_balance_3csp_with(
    i: &SignedHypergraph,
    p: &Predicate,
    rho: f64,
    eta: f64,
    opts: &GeometryOptions,
) -> Result<BalanceCertificate> {
    check_rho(rho)?;
    check_eta(eta)?;
    if i.k() != 3 {
        return Err(invalid(format!("3CSP balance needs k = 3, got {}", i.k())));
    }
    let (n, m) = (i.n(), i.m());
    let mut cert = BalanceCertificate::declined(n, m, rho, eta, InstanceFile::from_signed(i, None).sha256());
    cert.param("paper_eta", rho / 16.0);
    if n == 0 || m == 0 {
        return Ok(cert);
    }
    // A P-satisfied clause is satisfied by the kSAT rewriting. Its all-plus
    // clauses are violated by x whenever all three vertices sit in S+, and
    // its all-minus clauses whenever all three sit in S−. T3 only grows with
    // S, so the smallest admissible side size suffices.
    let sat = csp_to_ksat(i, p)?.cleaned();
    let (pos, neg) = split_by_sign(&sat);
    let s0 = ((1.0 + rho) * n as f64 / 2.0 - 1e-9).ceil().min(n as f64);
    cert.param("side_size", s0);
    let mut lbs = Vec::new();
    for (name, part) in [("positive", pos), ("negative", neg)] {
        let primal = certify_primal_expansion(&part.underlying(), opts.norm_constant)?;
        let norm = primal.report.certified_norm().unwrap_or(0.0);
        cert.checks.push(Check::gate(&format!("{name}_primal_norm"), norm, primal.threshold, primal.passed));
        let lb3 = split_bounds(&primal.report, s0).lb3;
        cert.param(&format!("{name}_lb3"), lb3);
        lbs.push(lb3);
        cert.reports.push(primal.report);
    }
    if !gates_pass(&cert.checks) && opts.enforce_checks {
        return Ok(cert);
    }
    let lb = lbs.iter().copied().fold(f64::INFINITY, f64::min);
    let min_violated = (lb - 1e-9).ceil().max(0.0) as u64;
    cert.min_violated = min_violated;
    cert.violated_fraction_bound = min_violated as f64 / m as f64;
    cert.emitted = min_violated > cert.violation_budget;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedPositivity {
    /// Every induced 2XOR has at most a `1/2 + eps` fraction of `+1` clauses.
    pub eps: f64,
    pub truncated_clauses: usize,
    /// Upper bound on `max_σ Σ_U w_U σ^U`.
    pub polynomial_bound: f64,
}

/// Certified positivity of the induced 2XOR instances on the complement of
/// `s`, uniformly over the assignment to `s`. Clauses are selected by set
/// membership with exactly `k − 2` vertices in `s`.
pub fn certify_induced_positive_fraction(i: &XorInstance, s: &VarSubset) -> Result<InducedPositivity> {
    let k = i.k();
    if k < 3 {
        return Err(invalid(format!("induced positivity needs k >= 3, got {k}")));
    }
    if s.is_empty() || s.n() != i.n() {
        return Err(invalid("subset must be nonempty and match the instance"));
    }
    let mut poly = SparsePolynomial::new(s.len(), k - 2)?;
    let mut count = 0usize;
    for c in i.cleaned().clauses() {
        let ins: Vec<Var> = c.vars.iter().filter(|&&v| s.contains(v)).map(|&v| s.label(v)).collect();
        if ins.len() == k - 2 {
            poly.add(ins, c.rhs as f64)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(crate::Error::EmptyInstance("no clauses with exactly k-2 vertices in the subset"));
    }
    let bound = refute_polynomial(&poly)?.value;
    let eps = (bound / (2.0 * count as f64)).clamp(0.0, 0.5);
    Ok(InducedPositivity { eps, truncated_clauses: count, polynomial_bound: bound })
}

/// Lower bound on the violated fraction of every `(1/2 + ε)`-positive 2XOR
/// on `g` under every assignment with `|Σ y| ≥ ρ n`; `0` means no claim.
///
/// A positive clause is violated on a bichromatic edge and a negative one on
/// a monochromatic edge, so violations are at least (monochromatic edges)
/// minus (positive clauses); the monochromatic count follows from
/// `yᵀ A y ≥ d ρ² n − ‖A − (d/n) J‖ n`.
pub fn refute_biased_2xor_family(g: &MultiGraph, report: &SpectralReport, eps: f64, rho: f64) -> f64 {
    let e = g.m() as f64;
    let n = g.n() as f64;
    if e == 0.0 || n == 0.0 || rho <= 0.0 {
        return 0.0;
    }
    let Some(norm) = report.certified_norm() else {
        return 0.0;
    };
    let d = report.d_avg;
    let mono = (d * n / 2.0 * (1.0 + rho * rho) - norm * n - d) / (2.0 * e);
    (mono - (0.5 + eps)).max(0.0)
}

/// Excludes `2ρ`-biased near-satisfiers of a kXOR instance, `k ≥ 4`.
///
/// The certificate's `rho` is the excluded bias `2ρ`; its `eta` is the
/// largest slack the chain supports.
pub fn certify_balance_kxor(i: &XorInstance, rho: f64) -> Result<BalanceCertificate> {
    check_rho(rho)?;
    if i.k() < 4 {
        return Err(invalid(format!("kXOR balance needs k >= 4, got {}", i.k())));
    }
    let hash = InstanceFile::from_xor(i, None).sha256();
    balance_kxor_inner(i, rho, hash)
}

fn balance_kxor_inner(i: &XorInstance, rho: f64, hash: String) -> Result<BalanceCertificate> {
    let (n, m, k) = (i.n(), i.m(), i.k());
    let excluded = (2.0 * rho).min(1.0);
    let mut cert = BalanceCertificate::declined(n, m, excluded, 0.0, hash);
    cert.param("subset_fraction", rho);
    cert.param("paper_eta", rho.powi(k as i32 - 2) * rho * rho / 2.0);
    let size = ((rho * n as f64) - 1e-9).ceil().max(1.0) as usize;
    if n == 0 || m == 0 || size >= n {
        return Ok(cert);
    }
    let s = VarSubset::range(n, 0, size);
    let clean = i.cleaned();
    let edges: Vec<(Var, Var)> = clean
        .clauses()
        .iter()
        .filter(|c| c.vars.iter().filter(|&&v| s.contains(v)).count() == k - 2)
        .map(|c| {
            let out: Vec<Var> = c.vars.iter().filter(|&&v| !s.contains(v)).map(|&v| s.label(v)).collect();
            (out[0], out[1])
        })
        .collect();
    let selected = edges.len();
    cert.param("selected_clauses", selected as f64);
    cert.checks.push(Check::gate("selected_clauses", selected as f64, 1.0, selected > 0));
    if selected == 0 {
        return Ok(cert);
    }
    let positivity = certify_induced_positive_fraction(&clean, &s)?;
    cert.param("positivity_eps", positivity.eps);
    let g = MultiGraph::new(n - size, edges)?;
    let report = SpectralReport::demeaned(&g)?;
    // On the complement the sum is at least 2ρn − |S| in magnitude.
    let rho_g = (2.0 * rho * n as f64 - size as f64) / (n - size) as f64;
    cert.param("family_rho", rho_g);
    let fraction = if rho_g > 0.0 { refute_biased_2xor_family(&g, &report, positivity.eps, rho_g.min(1.0)) } else { 0.0 };
    cert.reports.push(report);
    cert.param("family_violated_fraction", fraction);
    // Each violated induced clause is a violated clause of the instance.
    let min_violated = (fraction * selected as f64 - 1e-9).ceil().max(0.0) as u64;
    cert.min_violated = min_violated;
    cert.violated_fraction_bound = min_violated as f64 / m as f64;
    if min_violated == 0 {
        return Ok(cert);
    }
    cert.violation_budget = min_violated - 1;
    cert.eta = (min_violated - 1) as f64 / m as f64;
    cert.emitted = true;
    Ok(cert)
}

/// Excludes `2ρ`-biased near-satisfiers of a `P`-CSP with `k ≥ 4` through
/// the kXOR principle; `eta` is the largest slack the chain supports.
pub fn certify_balance_kcsp(i: &SignedHypergraph, p: &Predicate, rho: f64) -> Result<BalanceCertificate> {
    check_rho(rho)?;
    if i.k() < 4 {
        return Err(invalid(format!("kCSP balance needs k >= 4, got {}", i.k())));
    }
    let hash = InstanceFile::from_signed(i, None).sha256();
    let (n, m, k) = (i.n(), i.m(), i.k());
    if m == 0 {
        return Ok(BalanceCertificate::declined(n, m, (2.0 * rho).min(1.0), 0.0, hash));
    }
    let sat = csp_to_ksat(i, p)?;
    let mut cert = balance_kxor_inner(&ksat_xor_view(&sat), rho, hash)?;
    let xor_min = cert.min_violated;
    cert.emitted = false;
    cert.eta = 0.0;
    cert.violation_budget = 0;
    if xor_min == 0 {
        return Ok(cert);
    }
    let q = certify_quasirandom(&sat, k - 1)?;
    cert.param("quasirandom_eps", q.eps);
    let xor_budget = |b: u64| {
        let f = xor_fraction_lower_bound(k, b as f64 / m as f64, q.eps);
        (((1.0 - f) * m as f64 + 1e-9).floor().max(0.0) as u64).min(m as u64)
    };
    // A near-satisfier with `b` violations XOR-violates at most
    // `xor_budget(b)` clauses of the view, which is monotone in `b`.
    let best = (0..=m as u64).take_while(|&b| xor_budget(b) < xor_min).last();
    let Some(b) = best else {
        return Ok(cert);
    };
    cert.param("xor_min_violated", xor_min as f64);
    cert.min_violated = b + 1;
    cert.violated_fraction_bound = (b + 1) as f64 / m as f64;
    cert.violation_budget = b;
    cert.eta = b as f64 / m as f64;
    cert.emitted = true;
    Ok(cert)
}
