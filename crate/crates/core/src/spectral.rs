//! Dense symmetric eigensolves and the graph certificates built on them:
//! edge expansion from the normalized-Laplacian gap, and expander mixing
//! from the de-meaned adjacency norm.
//!
//! Every bound here uses measured eigenvalues. Each measured value is paired
//! with a slack of `10 · EIG_TOLERANCE · ‖M‖_F`, which dominates the
//! backward error of the solver, and the slack is always applied in the
//! direction that weakens the bound.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::MultiGraph;
use crate::matrix::SymMatrix;

/// Relative residual tolerance of the eigensolver.
pub const EIG_TOLERANCE: f64 = 1e-8;

/// Largest order handled by the dense path.
pub const DENSE_LIMIT: usize = 5000;

fn to_faer(m: &SymMatrix) -> Result<Mat<f64>> {
    if m.n() > DENSE_LIMIT {
        return Err(Error::TooLarge(m.n()));
    }
    Ok(Mat::from_fn(m.n(), m.n(), |i, j| m.get(i, j)))
}

/// Slack attached to eigenvalues of `m`.
pub fn eig_slack(m: &SymMatrix) -> f64 {
    10.0 * EIG_TOLERANCE * m.frobenius()
}

/// Eigenvalues in ascending order together with their slack.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub slack: f64,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        self.max().abs().max(self.min().abs())
    }
}

pub fn eigenvalues(m: &SymMatrix) -> Result<Spectrum> {
    if m.n() == 0 {
        return Ok(Spectrum { values: Vec::new(), slack: 0.0 });
    }
    let a = to_faer(m)?;
    let mut values = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    values.sort_by(f64::total_cmp);
    Ok(Spectrum { values, slack: eig_slack(m) })
}

/// Full decomposition with every residual checked.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector of `values[j]`, stored column-major.
    vectors: Vec<f64>,
    n: usize,
    pub max_residual: f64,
    pub slack: f64,
}

impl EigenDecomposition {
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.n();
    if n == 0 {
        return Ok(EigenDecomposition { values: Vec::new(), vectors: Vec::new(), n, max_residual: 0.0, slack: 0.0 });
    }
    let a = to_faer(m)?;
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let au = &a * u;
    let frob = m.frobenius();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    let mut max_residual: f64 = 0.0;
    for &j in &order {
        let lambda = s[j];
        let mut r2 = 0.0;
        for i in 0..n {
            let d = au[(i, j)] - lambda * u[(i, j)];
            r2 += d * d;
            vectors.push(u[(i, j)]);
        }
        max_residual = max_residual.max(r2.sqrt());
        values.push(lambda);
    }
    if max_residual > EIG_TOLERANCE * frob.max(f64::MIN_POSITIVE) {
        return Err(Error::Eigensolver(format!(
            "residual {max_residual:e} exceeds {EIG_TOLERANCE:e}·‖M‖_F = {:e}",
            EIG_TOLERANCE * frob
        )));
    }
    Ok(EigenDecomposition { values, vectors, n, max_residual, slack: eig_slack(m) })
}

/// Measured spectral evidence for a multigraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub edges: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub d_avg: f64,
    /// Second-smallest eigenvalue of the normalized Laplacian.
    pub lambda2: Option<f64>,
    pub lambda2_slack: f64,
    /// `‖A − (d_avg/n) J‖`.
    pub demeaned_norm: Option<f64>,
    pub norm_slack: f64,
    pub eig_tolerance: f64,
}

impl SpectralReport {
    /// Degree statistics only.
    pub fn degrees(g: &MultiGraph) -> Self {
        let d = g.degrees();
        let n = g.n();
        Self {
            n,
            edges: g.m(),
            d_min: d.iter().copied().min().unwrap_or(0),
            d_max: d.iter().copied().max().unwrap_or(0),
            d_avg: if n == 0 { 0.0 } else { 2.0 * g.m() as f64 / n as f64 },
            lambda2: None,
            lambda2_slack: 0.0,
            demeaned_norm: None,
            norm_slack: 0.0,
            eig_tolerance: EIG_TOLERANCE,
        }
    }

    /// Both the Laplacian gap and the de-meaned norm.
    pub fn full(g: &MultiGraph) -> Result<Self> {
        let mut r = normalized_laplacian_gap(g)?;
        let (norm, slack) = demeaned(g)?;
        r.demeaned_norm = Some(norm);
        r.norm_slack = slack;
        Ok(r)
    }

    /// Degree statistics plus the de-meaned norm; isolated vertices allowed.
    pub fn demeaned(g: &MultiGraph) -> Result<Self> {
        let mut r = Self::degrees(g);
        let (norm, slack) = demeaned(g)?;
        r.demeaned_norm = Some(norm);
        r.norm_slack = slack;
        Ok(r)
    }

    /// `λ2` lowered by its slack, clamped at 0.
    pub fn certified_lambda2(&self) -> Option<f64> {
        self.lambda2.map(|l| (l - self.lambda2_slack).max(0.0))
    }

    /// De-meaned norm raised by its slack.
    pub fn certified_norm(&self) -> Option<f64> {
        self.demeaned_norm.map(|v| v + self.norm_slack)
    }
}

/// `λ2` of `I − D^{-1/2} A D^{-1/2}` by a dense eigensolve.
pub fn normalized_laplacian_gap(g: &MultiGraph) -> Result<SpectralReport> {
    let n = g.n();
    if n < 2 {
        return Err(invalid("the Laplacian gap needs at least two vertices"));
    }
    let deg = g.degrees();
    if let Some(v) = deg.iter().position(|&d| d == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let a = g.adjacency();
    let l = SymMatrix::from_lower(n, |i, j| {
        let off = -a.get(i, j) * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 + off
        } else {
            off
        }
    });
    let spec = eigenvalues(&l)?;
    let mut r = SpectralReport::degrees(g);
    r.lambda2 = Some(spec.values[1].clamp(0.0, 2.0));
    r.lambda2_slack = spec.slack;
    Ok(r)
}

fn demeaned_matrix(g: &MultiGraph) -> SymMatrix {
    let n = g.n();
    let shift = if n == 0 { 0.0 } else { 2.0 * g.m() as f64 / (n as f64 * n as f64) };
    g.adjacency().minus_constant(shift)
}

fn demeaned(g: &MultiGraph) -> Result<(f64, f64)> {
    let spec = eigenvalues(&demeaned_matrix(g))?;
    Ok((spec.norm(), spec.slack))
}

/// Operator norm of `A − (d_avg/n) J`, multiplicities counted.
pub fn demeaned_norm(g: &MultiGraph) -> Result<f64> {
    Ok(demeaned(g)?.0)
}

/// Spectrum of the de-meaned adjacency.
pub fn demeaned_spectrum(g: &MultiGraph) -> Result<Spectrum> {
    eigenvalues(&demeaned_matrix(g))
}

/// Lower bound on `e(S, S̄)` for every `S` with `|S| = s`.
///
/// For `s <= n/2` this is `(λ2/2)·d_min·s`; larger sets are handled through
/// their complements.
pub fn edge_expansion_lower_bound(report: &SpectralReport, s: usize) -> f64 {
    let Some(l2) = report.certified_lambda2() else {
        return 0.0;
    };
    let s = s.min(report.n.saturating_sub(s));
    (l2 / 2.0 * report.d_min as f64 * s as f64).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Interval containing `e(S, T) = 1_S^T A 1_T` for all `|S| = s`, `|T| = t`.
///
/// Needs `report.demeaned_norm`; without it the interval is `[0, ∞)`.
pub fn mixing_interval(report: &SpectralReport, s: f64, t: f64) -> Interval {
    let Some(norm) = report.certified_norm() else {
        return Interval { lo: 0.0, hi: f64::INFINITY };
    };
    if report.n == 0 || s <= 0.0 || t <= 0.0 {
        return Interval { lo: 0.0, hi: 0.0 };
    }
    let centre = report.d_avg / report.n as f64 * s * t;
    let spread = norm * (s * t).sqrt();
    Interval { lo: (centre - spread).max(0.0), hi: centre + spread }
}
