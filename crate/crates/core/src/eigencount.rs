//! Counting by dimension: Boolean vectors near a low-dimensional subspace,
//! near-optimal SK assignments, and large independent sets in regular
//! graphs.

use serde::{Deserialize, Serialize};

use crate::certificate::{gates_pass, Check};
use crate::counting::CountCertificate;
use crate::error::{invalid, Error, Result};
use crate::instance::{InstanceFile, MultiGraph};
use crate::matrix::SymMatrix;
use crate::numeric::{log2_binom_lower, log2_binom_tail_upper, log2_sum_exp2, round_up};
use crate::spectral::{eigen, eigenvalues};
use crate::TOOL_VERSION;

pub use crate::numeric::entropy2;

/// `(H₂(4ε²) + α log₂(3/ε)) n`, capped at `n`: normalized Boolean vectors
/// within `ε` of an `αn`-dimensional subspace.
///
/// An `ε`-net of the subspace's unit ball has at most `(3/ε)^{αn}` points,
/// and every counted vector lies within `2ε` of one of them.
pub fn subspace_count_bound(alpha: f64, eps: f64, n: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(invalid(format!("eps = {eps} outside (0, 1/4)")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    let nf = n as f64;
    let bits = (entropy2(4.0 * eps * eps) + alpha * (3.0 / eps).log2()) * nf;
    Ok(round_up(bits).min(nf))
}

/// `H₂(ε²) n`: normalized Boolean vectors in a ball of radius `ε`.
pub fn boolean_in_ball_bound(eps: f64, n: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(invalid(format!("eps = {eps} outside (0, 1/sqrt 2)")));
    }
    Ok(round_up(entropy2(eps * eps) * n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowSide {
    /// Eigenvalues of `M` near its maximum.
    Top,
    /// Eigenvalues of `−M` near its maximum.
    Bottom,
}

/// Span of the eigenvectors whose (signed) eigenvalues reach
/// `(1 − δ)` of the extremal one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenspaceWindow {
    pub delta: f64,
    pub side: WindowSide,
    /// Measured extremal eigenvalue of the signed matrix.
    pub lambda_top: f64,
    /// `lambda_top` plus solver slack.
    pub lambda_upper: f64,
    pub slack: f64,
    /// Measured values at or above this are counted.
    pub threshold: f64,
    pub dim: usize,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
}

/// Dimension of the window `λ ≥ λ_up (1 − δ)`, counted with the slack so
/// that it is never below the true dimension.
pub fn eigenspace_window(m: &SymMatrix, delta: f64, side: WindowSide) -> Result<EigenspaceWindow> {
    window(m, delta, side, false)
}

/// As [`eigenspace_window`], also returning an orthonormal basis.
pub fn eigenspace_window_with_basis(m: &SymMatrix, delta: f64, side: WindowSide) -> Result<EigenspaceWindow> {
    window(m, delta, side, true)
}

fn window(m: &SymMatrix, delta: f64, side: WindowSide, with_basis: bool) -> Result<EigenspaceWindow> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(invalid(format!("delta = {delta} outside [0, 1]")));
    }
    let n = m.n();
    if n == 0 {
        return Err(Error::EmptyInstance("eigenspace window of an empty matrix"));
    }
    let signed = match side {
        WindowSide::Top => m.clone(),
        WindowSide::Bottom => m.scaled(-1.0),
    };
    let (values, slack, basis_src) = if with_basis {
        let e = eigen(&signed)?;
        (e.values.clone(), e.slack, Some(e))
    } else {
        let s = eigenvalues(&signed)?;
        (s.values, s.slack, None)
    };
    let lambda_top = *values.last().expect("n > 0");
    let lambda_upper = lambda_top + slack;
    let threshold = lambda_upper * (1.0 - delta) - slack;
    let first = values.iter().position(|&v| v >= threshold).unwrap_or(n);
    let dim = n - first;
    let basis = basis_src.map(|e| (first..n).map(|j| e.vector(j).to_vec()).collect());
    Ok(EigenspaceWindow {
        delta,
        side,
        lambda_top,
        lambda_upper,
        slack,
        threshold,
        dim,
        alpha: dim as f64 / n as f64,
        basis,
    })
}

/// Binding slack for the SK count: `4 (2ε)² ≤ 1/2` at the nominal
/// `ε = √(η/δ)`, `δ = η^{2/5}`.
pub fn sk_eta0() -> f64 {
    (1.0 / (4.0 * std::f64::consts::SQRT_2)).powf(10.0 / 3.0)
}

fn count_cert(n: usize, eta: f64, hash: String) -> CountCertificate {
    CountCertificate {
        n,
        m: 0,
        log2_bound: n as f64,
        eta,
        violation_budget: 0,
        fallback: true,
        checks: Vec::new(),
        parameters: Default::default(),
        spectral: None,
        quasirandom: None,
        recursion_trace: Vec::new(),
        instance_sha256: hash,
        tool_version: TOOL_VERSION.into(),
    }
}

fn set_bound(cert: &mut CountCertificate, log2: f64) {
    let n = cert.n as f64;
    if log2 < n {
        cert.log2_bound = log2.max(0.0);
        cert.fallback = false;
    } else {
        cert.log2_bound = n;
        cert.fallback = true;
    }
}

fn param(cert: &mut CountCertificate, name: &str, v: f64) {
    if v.is_finite() {
        cert.parameters.insert(name.into(), v);
    }
}

/// Bound on `#{x ∈ {±1}ⁿ : xᵀ G x ≥ 2(1 − η) n^{3/2}}`.
pub fn certify_count_sk(g: &SymMatrix, eta: f64) -> Result<CountCertificate> {
    certify_count_sk_with(g, eta, true)
}

pub fn certify_count_sk_with(g: &SymMatrix, eta: f64, enforce_checks: bool) -> Result<CountCertificate> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta = {eta} outside (0, 1)")));
    }
    if !g.is_symmetric() {
        return Err(Error::MalformedInstance("matrix is not symmetric".into()));
    }
    let n = g.n();
    let mut cert = count_cert(n, eta, InstanceFile::from_matrix(g, None).sha256());
    if n == 0 {
        set_bound(&mut cert, 0.0);
        return Ok(cert);
    }
    let nf = n as f64;
    let delta = eta.powf(0.4);
    let win = eigenspace_window(g, delta, WindowSide::Top)?;
    let target = 2.0 * (1.0 - eta) * nf.sqrt();
    param(&mut cert, "delta", delta);
    param(&mut cert, "lambda1", win.lambda_top);
    param(&mut cert, "lambda1_upper", win.lambda_upper);
    param(&mut cert, "eta0", sk_eta0());
    let dev = (win.lambda_top / nf.sqrt() - 2.0).abs();
    cert.checks.push(Check::info("lambda1_near_edge", dev, nf.powf(-0.25), dev < nf.powf(-0.25)));
    cert.checks.push(Check::gate("eta_below_eta0", eta, sk_eta0(), eta < sk_eta0()));
    // xᵀGx ≤ λ1 n rules everything out below the spectral edge.
    if win.lambda_upper < target {
        set_bound(&mut cert, 0.0);
        return Ok(cert);
    }
    if !gates_pass(&cert.checks) && enforce_checks {
        return Ok(cert);
    }
    // Outside the window the form is at most λ_up(1 − δ), so a counted x
    // has ‖Π⊥ x‖² ≤ (η′/δ) n.
    let eta_measured = (1.0 - target / win.lambda_upper).max(0.0);
    let eps = (eta_measured / delta).sqrt();
    param(&mut cert, "eta_measured", eta_measured);
    param(&mut cert, "eps", eps);
    param(&mut cert, "alpha", win.alpha);
    param(&mut cert, "window_dim", win.dim as f64);
    if eps == 0.0 {
        // Every counted x lies in the window, which holds at most 2^dim
        // hypercube points.
        set_bound(&mut cert, win.dim as f64);
        return Ok(cert);
    }
    cert.checks.push(Check::gate("net_radius", 2.0 * eps, 0.25, 2.0 * eps < 0.25));
    if 2.0 * eps >= 0.25 {
        return Ok(cert);
    }
    let bound = subspace_count_bound(win.alpha, 2.0 * eps, n)?;
    set_bound(&mut cert, bound);
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndSetConstants {
    pub d: usize,
    pub r_d: f64,
    pub c_d: f64,
    pub c_y: f64,
}

impl IndSetConstants {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(invalid(format!("degree {d} below 3")));
        }
        let df = d as f64;
        let r_d = 2.0 * (df - 1.0).sqrt() / df;
        Ok(Self { d, r_d, c_d: r_d / (1.0 + r_d), c_y: r_d.sqrt() / (1.0 + r_d) })
    }

    /// Largest `η` with `2 C_y √(2η/δ) < 1/(4√2)` at `δ = η^{2/5}`.
    pub fn eta0(&self) -> f64 {
        let e = 1.0 / (8.0 * std::f64::consts::SQRT_2 * self.c_y);
        (e * e / 2.0).powf(5.0 / 3.0)
    }

    /// Smallest counted size `⌈C_d (1 − η) n⌉`.
    pub fn size_threshold(&self, eta: f64, n: usize) -> usize {
        ((self.c_d * (1.0 - eta) * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// `y_S = 1_S − (|S|/n) 1⃗`, stored exactly as `n · y_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenteredIndicator {
    pub n: usize,
    pub size: usize,
    pub scaled: Vec<i64>,
}

impl CenteredIndicator {
    pub fn new(n: usize, set: &[bool]) -> Self {
        assert_eq!(set.len(), n);
        let size = set.iter().filter(|&&b| b).count();
        let scaled = set.iter().map(|&b| if b { (n - size) as i64 } else { -(size as i64) }).collect();
        Self { n, size, scaled }
    }

    pub fn values(&self) -> Vec<f64> {
        self.scaled.iter().map(|&v| v as f64 / self.n as f64).collect()
    }

    /// `n · ⟨y, 1⃗⟩`.
    pub fn scaled_sum(&self) -> i64 {
        self.scaled.iter().sum()
    }

    /// `n² ‖y‖²`.
    pub fn scaled_norm_sq(&self) -> i128 {
        self.scaled.iter().map(|&v| v as i128 * v as i128).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoffmanBound {
    pub d: usize,
    /// `−λ_min(A)` plus slack.
    pub lambda: f64,
    pub bound: usize,
}

/// `⌊λ n / (d + λ)⌋` with `λ = −λ_min` of a `d`-regular graph.
pub fn hoffman_bound(g: &MultiGraph) -> Result<HoffmanBound> {
    let d = regular_degree(g)?;
    let spec = eigenvalues(&g.adjacency())?;
    let lambda = -spec.min() + spec.slack;
    let n = g.n() as f64;
    let bound = ((lambda * n / (d as f64 + lambda)) + 1e-9).floor().clamp(0.0, n) as usize;
    Ok(HoffmanBound { d, lambda, bound })
}

fn regular_degree(g: &MultiGraph) -> Result<usize> {
    if g.n() == 0 {
        return Err(Error::EmptyInstance("graph without vertices"));
    }
    let deg = g.degrees();
    let (lo, hi) = (*deg.iter().min().unwrap(), *deg.iter().max().unwrap());
    if lo != hi {
        return Err(Error::NotRegular { min: lo, max: hi });
    }
    if g.has_loops() {
        return Err(Error::MalformedInstance("graph has self-loops".into()));
    }
    Ok(lo)
}

/// Bound on the number of independent sets of size at least
/// `⌈C_d (1 − η) n⌉` in a `d`-regular graph.
pub fn certify_count_indsets(g: &MultiGraph, eta: f64) -> Result<CountCertificate> {
    certify_count_indsets_with(g, eta, true)
}

pub fn certify_count_indsets_with(g: &MultiGraph, eta: f64, enforce_checks: bool) -> Result<CountCertificate> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta = {eta} outside (0, 1)")));
    }
    let d = regular_degree(g)?;
    let consts = IndSetConstants::new(d)?;
    let n = g.n();
    let nf = n as f64;
    let mut cert = count_cert(n, eta, InstanceFile::from_graph(g, None).sha256());
    let s_min = consts.size_threshold(eta, n);
    let delta = eta.powf(0.4);
    let nominal_eps = (2.0 * eta / delta).sqrt();
    let eps_prime = 2.0 * nominal_eps * consts.c_y;
    param(&mut cert, "size_threshold", s_min as f64);
    param(&mut cert, "c_d", consts.c_d);
    param(&mut cert, "c_y", consts.c_y);
    param(&mut cert, "delta", delta);
    param(&mut cert, "eta0", consts.eta0());
    param(&mut cert, "eps_prime", eps_prime);
    cert.checks.push(Check::gate("eta_below_eta0", eta, consts.eta0(), eta < consts.eta0()));
    if s_min == 0 {
        return Ok(cert);
    }
    let hoff = hoffman_bound(g)?;
    param(&mut cert, "hoffman_bound", hoff.bound as f64);
    if s_min > hoff.bound {
        set_bound(&mut cert, 0.0);
        return Ok(cert);
    }
    // On the de-meaned adjacency Ā (Ā 1⃗ = 0), an independent S of size s
    // has y_Sᵀ(−Ā)y_S = d s²/n and ‖y_S‖² = s(n − s)/n, so its Rayleigh
    // quotient d s/(n − s) is at least the value at s_min.
    let demeaned = g.adjacency().minus_constant(d as f64 / nf);
    let win = eigenspace_window(&demeaned, delta, WindowSide::Bottom)?;
    let lambda = win.lambda_upper;
    let rayleigh = d as f64 * s_min as f64 / (nf - s_min as f64);
    param(&mut cert, "lambda_bottom", win.lambda_top);
    param(&mut cert, "rayleigh_min", rayleigh);
    let paper_edge = 2.0 * ((d - 1) as f64).sqrt();
    let dev = (win.lambda_top - paper_edge).abs();
    cert.checks.push(Check::info("lambda_near_edge", dev, nf.powf(-0.25), dev < nf.powf(-0.25)));
    if rayleigh > lambda {
        set_bound(&mut cert, 0.0);
        return Ok(cert);
    }
    if !gates_pass(&cert.checks) && enforce_checks {
        return Ok(cert);
    }
    let eta_measured = 1.0 - rayleigh / lambda;
    let eps = nominal_eps.max((eta_measured / delta).sqrt());
    param(&mut cert, "eta_measured", eta_measured);
    param(&mut cert, "eps", eps);
    param(&mut cert, "alpha", win.alpha);
    param(&mut cert, "window_dim", win.dim as f64);
    if eps_prime > 0.0 && eps_prime < 1.0 {
        let paper = (32.0 * eps_prime * eps_prime * (1.0 / eps_prime).log2() + win.alpha * (3.0 / eps).log2()) * nf;
        param(&mut cert, "paper_log2_bound", paper);
    }
    cert.checks.push(Check::gate("net_radius", eps, 1.0, eps < 1.0));
    if eps >= 1.0 {
        return Ok(cert);
    }
    // Per size s: normalized y_S lie within ε of the window, hence within
    // 2ε of a point of an ε-net with (3/ε)^dim points. Two same-size sets
    // near one net point have |S Δ S'| = ‖y_S − y_S'‖² ≤ 16 ε² s(n − s)/n.
    let net = win.dim as f64 * (3.0 / eps).log2();
    let terms: Vec<f64> = (s_min..=hoff.bound)
        .map(|s| {
            let y2 = s as f64 * (nf - s as f64) / nf;
            let radius = (16.0 * eps * eps * y2 + 1e-9).floor() as u64;
            net + log2_binom_tail_upper(n as u64, radius)
        })
        .collect();
    set_bound(&mut cert, round_up(log2_sum_exp2(&terms)));
    Ok(cert)
}

/// Evidence that no independent set of size `(1 − η/2) C_d n` exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndsetRefutationCertificate {
    pub n: usize,
    pub d: usize,
    pub eta: f64,
    /// No independent set has at least this many vertices.
    pub refuted_size: usize,
    /// `log2 C(refuted_size, size_threshold)`, rounded down.
    pub log2_subsets: f64,
    pub count_certificate: CountCertificate,
    pub instance_sha256: String,
    pub tool_version: String,
}

/// An independent set of size `s1` has at least `C(s1, s_min)` independent
/// subsets of size `s_min`; a smaller certified count rules it out.
pub fn refute_indset_from_count(
    g: &MultiGraph,
    cert: &CountCertificate,
    eta: f64,
) -> Option<IndsetRefutationCertificate> {
    let d = regular_degree(g).ok()?;
    let consts = IndSetConstants::new(d).ok()?;
    let n = g.n();
    if cert.n != n || cert.fallback || cert.eta != eta {
        return None;
    }
    let s_min = consts.size_threshold(eta, n);
    let s1 = ((1.0 - eta / 2.0) * consts.c_d * n as f64 - 1e-9).ceil() as usize;
    if s_min == 0 || s1 < s_min || s1 > n {
        return None;
    }
    let log2_subsets = log2_binom_lower(s1 as u64, s_min as u64);
    if !(cert.log2_bound < log2_subsets) {
        return None;
    }
    Some(IndsetRefutationCertificate {
        n,
        d,
        eta,
        refuted_size: s1,
        log2_subsets,
        count_certificate: cert.clone(),
        instance_sha256: cert.instance_sha256.clone(),
        tool_version: TOOL_VERSION.into(),
    })
}
