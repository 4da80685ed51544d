//! Instances: signed hypergraphs (the carrier of a kCSP), XOR instances,
//! unsigned hypergraphs and multigraphs, with samplers and the derived
//! induced/truncated/primal views.
//!
//! Indices are 0-based. A sign or assignment entry is `+1` or `-1` stored as
//! `i8`. A string `z` in `{±1}^k` is encoded as the bitmask with bit `i` set
//! iff `z_i = -1`; a subset `T` of `[k]` is a bitmask too, so the character
//! `chi_T(z)` is `(-1)^popcount(T & z)`.

mod fourier;
mod graph;
mod io;
mod sample;
mod xor;

pub use fourier::{
    csp_to_ksat, density_table, evaluate, ksat_fourier, split_by_sign, walsh_hadamard,
    DensityTable, Predicate,
};
pub use graph::{primal_graph, MultiGraph};
pub use io::{canonical_json, compact_json, sha256_hex, InstanceFile};
pub use sample::{
    sample_goe, sample_regular_graph, sample_signed_hypergraph, sample_signing,
    sample_unsigned_hypergraph,
};
pub use xor::{
    induced_hypergraph, induced_xor, truncated_xor, Selection, VarSubset,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Var = u32;

/// Largest number of violated clauses a `(1 - eta)`-satisfying assignment of
/// an `m`-clause instance may have.
///
/// The tiny additive term keeps `eta * m` products such as `0.05 * 100` from
/// rounding down; it only ever admits more assignments.
pub fn violation_budget(eta: f64, m: usize) -> u64 {
    if !(eta > 0.0) {
        return 0;
    }
    let b = (eta * m as f64 + 1e-9).floor();
    (b as u64).min(m as u64)
}

fn check_sign(s: i8) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::MalformedInstance(format!("sign {s} is not ±1")))
    }
}

fn check_tuple(vars: &[Var], k: usize, n: usize) -> Result<()> {
    if vars.len() != k {
        return Err(Error::MalformedInstance(format!(
            "tuple of length {} in a {k}-uniform instance",
            vars.len()
        )));
    }
    if let Some(v) = vars.iter().find(|&&v| v as usize >= n) {
        return Err(Error::MalformedInstance(format!("variable {v} out of range 0..{n}")));
    }
    Ok(())
}

pub(crate) fn has_repeat(vars: &[Var]) -> bool {
    (1..vars.len()).any(|i| vars[..i].contains(&vars[i]))
}

/// A clause `(c, S)`: it reads the string `c ∘ x_S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedClause {
    pub vars: Vec<Var>,
    pub signs: Vec<i8>,
}

impl SignedClause {
    /// Bitmask of `c ∘ x_S` under the string encoding.
    #[inline]
    pub fn pattern(&self, x: &[i8]) -> usize {
        let mut p = 0;
        for (i, (&v, &c)) in self.vars.iter().zip(&self.signs).enumerate() {
            if c * x[v as usize] < 0 {
                p |= 1 << i;
            }
        }
        p
    }

    pub fn sign_product(&self) -> i8 {
        self.signs.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignedHypergraph {
    k: usize,
    n: usize,
    clauses: Vec<SignedClause>,
}

impl SignedHypergraph {
    pub fn new(k: usize, n: usize, clauses: Vec<SignedClause>) -> Result<Self> {
        if k < 1 {
            return Err(invalid("arity must be at least 1"));
        }
        for c in &clauses {
            check_tuple(&c.vars, k, n)?;
            if c.signs.len() != k {
                return Err(Error::MalformedInstance("sign tuple length differs from k".into()));
            }
            c.signs.iter().try_for_each(|&s| check_sign(s))?;
        }
        Ok(Self { k, n, clauses })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[SignedClause] {
        &self.clauses
    }

    pub fn underlying(&self) -> Hypergraph {
        Hypergraph {
            k: self.k,
            n: self.n,
            edges: self.clauses.iter().map(|c| c.vars.clone()).collect(),
        }
    }

    /// Drops clauses whose tuple repeats a variable.
    pub fn cleaned(&self) -> Self {
        Self {
            k: self.k,
            n: self.n,
            clauses: self.clauses.iter().filter(|c| !has_repeat(&c.vars)).cloned().collect(),
        }
    }

    pub fn with_clauses(&self, clauses: Vec<SignedClause>) -> Self {
        Self { k: self.k, n: self.n, clauses }
    }
}

/// Unsigned `k`-uniform hypergraph; tuples are ordered and may repeat a
/// vertex until cleaned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    edges: Vec<Vec<Var>>,
}

impl Hypergraph {
    pub fn new(k: usize, n: usize, edges: Vec<Vec<Var>>) -> Result<Self> {
        if k < 1 {
            return Err(invalid("arity must be at least 1"));
        }
        for e in &edges {
            check_tuple(e, k, n)?;
        }
        Ok(Self { k, n, edges })
    }

    pub(crate) fn from_parts(k: usize, n: usize, edges: Vec<Vec<Var>>) -> Self {
        Self { k, n, edges }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<Var>] {
        &self.edges
    }

    pub fn cleaned(&self) -> Self {
        Self {
            k: self.k,
            n: self.n,
            edges: self.edges.iter().filter(|e| !has_repeat(e)).cloned().collect(),
        }
    }

    /// Removes tuples that are permutations of an earlier tuple.
    pub fn deduplicated(&self) -> Self {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let mut key = e.clone();
            key.sort_unstable();
            if seen.insert(key) {
                edges.push(e.clone());
            }
        }
        Self { k: self.k, n: self.n, edges }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                d[v as usize] += 1;
            }
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct XorClause {
    pub vars: Vec<Var>,
    pub rhs: i8,
}

impl XorClause {
    #[inline]
    pub fn is_satisfied(&self, x: &[i8]) -> bool {
        self.vars.iter().map(|&v| x[v as usize]).product::<i8>() == self.rhs
    }
}

/// Clauses `x^S = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct XorInstance {
    k: usize,
    n: usize,
    clauses: Vec<XorClause>,
}

impl XorInstance {
    pub fn new(k: usize, n: usize, clauses: Vec<XorClause>) -> Result<Self> {
        if k < 1 {
            return Err(invalid("arity must be at least 1"));
        }
        for c in &clauses {
            check_tuple(&c.vars, k, n)?;
            check_sign(c.rhs)?;
        }
        Ok(Self { k, n, clauses })
    }

    pub(crate) fn from_parts(k: usize, n: usize, clauses: Vec<XorClause>) -> Self {
        Self { k, n, clauses }
    }

    /// The XOR reading of a signed hypergraph: `c ∘ x_S` has even parity,
    /// i.e. `b = Π c_i`.
    pub fn from_signed(i: &SignedHypergraph) -> Self {
        Self {
            k: i.k,
            n: i.n,
            clauses: i
                .clauses
                .iter()
                .map(|c| XorClause { vars: c.vars.clone(), rhs: c.sign_product() })
                .collect(),
        }
    }

    pub fn from_signing(h: &Hypergraph, rhs: &[i8]) -> Result<Self> {
        if rhs.len() != h.m() {
            return Err(invalid("signing length differs from edge count"));
        }
        rhs.iter().try_for_each(|&s| check_sign(s))?;
        Ok(Self {
            k: h.k,
            n: h.n,
            clauses: h
                .edges
                .iter()
                .zip(rhs)
                .map(|(e, &b)| XorClause { vars: e.clone(), rhs: b })
                .collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[XorClause] {
        &self.clauses
    }

    pub fn underlying(&self) -> Hypergraph {
        Hypergraph {
            k: self.k,
            n: self.n,
            edges: self.clauses.iter().map(|c| c.vars.clone()).collect(),
        }
    }

    pub fn cleaned(&self) -> Self {
        Self {
            k: self.k,
            n: self.n,
            clauses: self.clauses.iter().filter(|c| !has_repeat(&c.vars)).cloned().collect(),
        }
    }

    pub fn violations(&self, x: &[i8]) -> usize {
        self.clauses.iter().filter(|c| !c.is_satisfied(x)).count()
    }

    /// Number of clauses with `b = +1`.
    pub fn positive_count(&self) -> usize {
        self.clauses.iter().filter(|c| c.rhs == 1).count()
    }

    /// The instance is `p`-positive when at most `p·m` clauses have `b = +1`.
    pub fn is_positive_at_most(&self, p: f64) -> bool {
        self.positive_count() as f64 <= p * self.m() as f64 + 1e-9
    }
}

/// A `±1` assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(Vec<i8>);

impl Assignment {
    pub fn new(x: Vec<i8>) -> Result<Self> {
        x.iter().try_for_each(|&s| check_sign(s))?;
        Ok(Self(x))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Bit `i` of `mask` set means `x_i = -1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }

    /// `|Σ x_i| / n`.
    pub fn bias(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.sum().unsigned_abs() as f64 / self.0.len() as f64
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }
}

impl std::ops::Index<usize> for Assignment {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}
