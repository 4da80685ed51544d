//! Upper bounds on `max_x Σ_T w_T x^T` over the hypercube, quasirandomness
//! certificates for the local distributions of a CSP, and the kXOR
//! principle built on them.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::{SignedHypergraph, Var, XorClause, XorInstance};
use crate::matrix::SymMatrix;
use crate::spectral::{eigenvalues, DENSE_LIMIT};

/// Homogeneous polynomial of degree `t` over ordered index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<Var>, f64>,
}

impl SparsePolynomial {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("polynomial degree must be at least 1"));
        }
        Ok(Self { n, degree, terms: BTreeMap::new() })
    }

    /// Adds `w` to the coefficient of `x^tuple`.
    pub fn add(&mut self, tuple: Vec<Var>, w: f64) -> Result<()> {
        if tuple.len() != self.degree {
            return Err(invalid(format!("tuple of length {} in a degree-{} polynomial", tuple.len(), self.degree)));
        }
        if let Some(v) = tuple.iter().find(|&&v| v as usize >= self.n) {
            return Err(invalid(format!("index {v} out of range 0..{}", self.n)));
        }
        if !w.is_finite() {
            return Err(invalid("coefficient is not finite"));
        }
        *self.terms.entry(tuple).or_insert(0.0) += w;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Var>, f64> {
        &self.terms
    }

    pub fn evaluate(&self, x: &[i8]) -> f64 {
        self.terms.iter().map(|(t, w)| w * t.iter().map(|&v| x[v as usize] as f64).product::<f64>()).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, degree: self.degree, terms: self.terms.iter().map(|(t, w)| (t.clone(), w * c)).collect() }
    }

    /// Multilinear form: each tuple becomes its set of odd-multiplicity
    /// indices, since `x_i^2 = 1` on the hypercube.
    fn multilinear(&self) -> BTreeMap<Vec<Var>, f64> {
        let mut out = BTreeMap::new();
        for (t, &w) in &self.terms {
            let mut s = t.clone();
            s.sort_unstable();
            let mut odd = Vec::with_capacity(s.len());
            let mut i = 0;
            while i < s.len() {
                let mut j = i;
                while j < s.len() && s[j] == s[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    odd.push(s[i]);
                }
                i = j;
            }
            *out.entry(odd).or_insert(0.0) += w;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Constant plus `Σ |w|` over the multilinear form.
    AbsoluteSum,
    /// Degree 2: constant plus `n · λ_max` of the symmetric off-diagonal part.
    Quadratic,
    /// Degree ≥ 3: `|A|^{a/2} |B|^{b/2} σ_max(M)` for the rectangular flattening.
    Flattening,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialBound {
    pub value: f64,
    pub branch: Branch,
}

/// Bounds on `max p` and on `max (−p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedBound {
    pub max: PolynomialBound,
    pub neg_min: PolynomialBound,
}

impl TwoSidedBound {
    /// Bound on `max |p|`.
    pub fn magnitude(&self) -> f64 {
        self.max.value.max(self.neg_min.value)
    }
}

fn pick(candidates: &[(f64, Branch)]) -> PolynomialBound {
    // Strict comparison keeps the first listed branch on ties.
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if c.0 < best.0 {
            best = c;
        }
    }
    PolynomialBound { value: best.0, branch: best.1 }
}

/// Upper bound on `max_{x ∈ {±1}^n} p(x)`; the tightest of the branches
/// that apply.
pub fn refute_polynomial(p: &SparsePolynomial) -> Result<PolynomialBound> {
    Ok(refute_two_sided(p)?.max)
}

pub fn refute_two_sided(p: &SparsePolynomial) -> Result<TwoSidedBound> {
    let ml = p.multilinear();
    let constant = ml.get(&Vec::new()).copied().unwrap_or(0.0);
    let spread: f64 = ml.iter().filter(|(t, _)| !t.is_empty()).map(|(_, w)| w.abs()).sum();
    let mut up = vec![(constant + spread, Branch::AbsoluteSum)];
    let mut down = vec![(-constant + spread, Branch::AbsoluteSum)];
    match p.degree {
        1 => {}
        2 => {
            if let Some((c, hi, lo)) = quadratic(p)? {
                up.push((c + hi, Branch::Quadratic));
                down.push((-c + lo, Branch::Quadratic));
            }
        }
        _ => {
            if let Some(b) = flattening(p)? {
                up.push((b, Branch::Flattening));
                down.push((b, Branch::Flattening));
            }
        }
    }
    Ok(TwoSidedBound { max: pick(&up), neg_min: pick(&down) })
}

/// Returns `(constant, bound on max x^T W x, bound on max −x^T W x)` over the
/// active variables, or `None` above the dense limit.
fn quadratic(p: &SparsePolynomial) -> Result<Option<(f64, f64, f64)>> {
    let mut index: HashMap<Var, usize> = HashMap::new();
    for t in p.terms.keys() {
        for &v in t {
            let next = index.len();
            index.entry(v).or_insert(next);
        }
    }
    let na = index.len();
    if na > DENSE_LIMIT {
        return Ok(None);
    }
    let mut w = SymMatrix::zeros(na);
    let mut constant = 0.0;
    for (t, &c) in &p.terms {
        if t[0] == t[1] {
            constant += c;
        } else {
            w.add(index[&t[0]], index[&t[1]], c / 2.0);
        }
    }
    if na == 0 {
        return Ok(Some((constant, 0.0, 0.0)));
    }
    let spec = eigenvalues(&w)?;
    let nf = na as f64;
    let hi = nf * (spec.max().max(0.0) + spec.slack);
    let lo = nf * ((-spec.min()).max(0.0) + spec.slack);
    Ok(Some((constant, hi, lo)))
}

/// Flattening bound, or `None` when the Gram matrix would exceed the dense limit.
fn flattening(p: &SparsePolynomial) -> Result<Option<f64>> {
    let t = p.degree;
    let a = t.div_ceil(2);
    let mut row_vars = std::collections::BTreeSet::new();
    let mut col_vars = std::collections::BTreeSet::new();
    let mut rows: HashMap<&[Var], usize> = HashMap::new();
    let mut cols: HashMap<&[Var], usize> = HashMap::new();
    let mut entries = Vec::with_capacity(p.terms.len());
    for (tuple, &w) in &p.terms {
        if w == 0.0 {
            continue;
        }
        let (r, c) = tuple.split_at(a);
        row_vars.extend(r.iter().copied());
        col_vars.extend(c.iter().copied());
        let nr = rows.len();
        let ri = *rows.entry(r).or_insert(nr);
        let nc = cols.len();
        let ci = *cols.entry(c).or_insert(nc);
        entries.push((ri, ci, w));
    }
    if entries.is_empty() {
        return Ok(Some(0.0));
    }
    // Gram matrix on the smaller side.
    let (side, other, flip) = if rows.len() <= cols.len() { (rows.len(), cols.len(), false) } else { (cols.len(), rows.len(), true) };
    if side > DENSE_LIMIT {
        return Ok(None);
    }
    let mut by_other: Vec<Vec<(usize, f64)>> = vec![Vec::new(); other];
    for &(ri, ci, w) in &entries {
        if flip {
            by_other[ri].push((ci, w));
        } else {
            by_other[ci].push((ri, w));
        }
    }
    let mut gram = SymMatrix::zeros(side);
    // Within one list the indices are distinct, because (row, col) keys are.
    for list in &by_other {
        for (x, &(i, wi)) in list.iter().enumerate() {
            for &(j, wj) in &list[..=x] {
                gram.add(i, j, wi * wj);
            }
        }
    }
    let spec = eigenvalues(&gram)?;
    let sigma = (spec.max().max(0.0) + spec.slack).sqrt();
    let scale = (row_vars.len() as f64).powf(a as f64 / 2.0) * (col_vars.len() as f64).powf((t - a) as f64 / 2.0);
    Ok(Some(scale * sigma))
}

/// Certified bound on `max_x |D̂_{I,x}(T)|` for one `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetBound {
    pub subset: Vec<usize>,
    pub bound: f64,
    pub max: PolynomialBound,
    pub neg_min: PolynomialBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasirandomnessCertificate {
    pub t: usize,
    pub eps: f64,
    pub per_t_bounds: Vec<SubsetBound>,
}

/// The polynomial `x ↦ D̂_{I,x}(T) = (1/m) Σ (Π_{i∈T} c_i) x^{S|_T}`.
pub fn fourier_polynomial(i: &SignedHypergraph, subset: &[usize]) -> Result<SparsePolynomial> {
    if subset.is_empty() || subset.iter().any(|&p| p >= i.k()) {
        return Err(invalid("subset must be a nonempty set of clause positions"));
    }
    let mut p = SparsePolynomial::new(i.n(), subset.len())?;
    let scale = 1.0 / i.m() as f64;
    for c in i.clauses() {
        let sign: i8 = subset.iter().map(|&q| c.signs[q]).product();
        p.add(subset.iter().map(|&q| c.vars[q]).collect(), sign as f64 * scale)?;
    }
    Ok(p)
}

/// Bounds `|D̂(T)|` for every nonempty `T ⊆ [k]` with `|T| ≤ t`.
pub fn certify_quasirandom(i: &SignedHypergraph, t: usize) -> Result<QuasirandomnessCertificate> {
    if i.is_empty() {
        return Err(Error::EmptyInstance("quasirandomness of an empty instance"));
    }
    let k = i.k();
    if t == 0 || t >= k {
        return Err(invalid(format!("need 1 <= t <= k-1, got t = {t}, k = {k}")));
    }
    let mut per_t_bounds = Vec::new();
    for mask in 1usize..1 << k {
        if mask.count_ones() as usize > t {
            continue;
        }
        let subset: Vec<usize> = (0..k).filter(|&q| mask >> q & 1 == 1).collect();
        let b = refute_two_sided(&fourier_polynomial(i, &subset)?)?;
        per_t_bounds.push(SubsetBound { subset, bound: b.magnitude().min(1.0), max: b.max, neg_min: b.neg_min });
    }
    per_t_bounds.sort_by(|a, b| a.subset.len().cmp(&b.subset.len()).then_with(|| a.subset.cmp(&b.subset)));
    let eps = per_t_bounds.iter().map(|b| b.bound).fold(0.0, f64::max);
    Ok(QuasirandomnessCertificate { t, eps, per_t_bounds })
}

/// `1 − 2^{k−1} η − (2^{k−1} − 1) ε`, clamped to `[0, 1]`.
pub fn xor_fraction_lower_bound(k: usize, eta: f64, eps: f64) -> f64 {
    let h = (1u64 << (k - 1)) as f64;
    (1.0 - h * eta - (h - 1.0) * eps).clamp(0.0, 1.0)
}

/// The XOR reading that near-satisfiers of a kSAT instance nearly satisfy.
///
/// A kSAT clause `(c, S)` is violated exactly when `c ∘ x_S = 1⃗`, so its
/// top Fourier coefficient enters the objective with a negative sign and
/// near-satisfiers drive `Π c_i x_{S_i}` towards `−1`: the right-hand side
/// is `b = −Π c_i`.
pub fn ksat_xor_view(i: &SignedHypergraph) -> XorInstance {
    let clauses = i.clauses().iter().map(|c| XorClause { vars: c.vars.clone(), rhs: -c.sign_product() }).collect();
    XorInstance::from_parts(i.k(), i.n(), clauses)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KxorPrincipleBound {
    pub eta: f64,
    pub eps: f64,
    /// Every `(1 − eta)`-satisfier XOR-satisfies at least this fraction of
    /// [`ksat_xor_view`].
    pub xor_fraction_lb: f64,
    pub quasirandom: QuasirandomnessCertificate,
}

impl KxorPrincipleBound {
    /// Largest number of view clauses a near-satisfier may XOR-violate.
    pub fn xor_violation_budget(&self, m: usize) -> u64 {
        let b = ((1.0 - self.xor_fraction_lb) * m as f64 + 1e-9).floor();
        (b.max(0.0) as u64).min(m as u64)
    }
}

/// Lower bound on the fraction of [`ksat_xor_view`] satisfied by any
/// `(1 − eta)`-satisfier of the kSAT instance `i`.
pub fn kxor_principle(i: &SignedHypergraph, eta: f64) -> Result<KxorPrincipleBound> {
    if i.k() < 3 {
        return Err(invalid(format!("the kXOR principle needs k >= 3, got {}", i.k())));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("eta = {eta} outside [0, 1]")));
    }
    let q = certify_quasirandom(i, i.k() - 1)?;
    Ok(KxorPrincipleBound { eta, eps: q.eps, xor_fraction_lb: xor_fraction_lower_bound(i.k(), eta, q.eps), quasirandom: q })
}
