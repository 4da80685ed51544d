use serde::{Deserialize, Serialize};

use super::{SignedClause, SignedHypergraph};
use crate::error::{invalid, Error, Result};

/// In-place unnormalized Walsh–Hadamard transform: afterwards
/// `v[T] = Σ_z v_old[z] · chi_T(z)`.
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// A Boolean predicate on `{±1}^k`, not identically true.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    k: usize,
    table: Vec<bool>,
    fourier: Vec<f64>,
}

impl Predicate {
    pub fn from_table(k: usize, table: Vec<bool>) -> Result<Self> {
        if k == 0 || k > 16 {
            return Err(invalid(format!("predicate arity {k} out of range 1..=16")));
        }
        if table.len() != 1 << k {
            return Err(invalid(format!("truth table has {} entries, expected {}", table.len(), 1 << k)));
        }
        if table.iter().all(|&b| b) {
            return Err(Error::ConstantPredicate);
        }
        let mut fourier: Vec<f64> = table.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        walsh_hadamard(&mut fourier);
        let scale = (1u64 << k) as f64;
        fourier.iter_mut().for_each(|c| *c /= scale);
        Ok(Self { k, table, fourier })
    }

    /// kSAT: false exactly on the all-ones string.
    pub fn ksat(k: usize) -> Result<Self> {
        Self::from_table(k, (0..1usize << k).map(|z| z != 0).collect())
    }

    /// Even-parity XOR: true iff `Π z_i = +1`.
    pub fn xor(k: usize) -> Result<Self> {
        Self::from_table(k, (0..1usize << k).map(|z: usize| z.count_ones() % 2 == 0).collect())
    }

    /// Not-all-equal.
    pub fn nae(k: usize) -> Result<Self> {
        let full = (1usize << k) - 1;
        Self::from_table(k, (0..1usize << k).map(|z| z != 0 && z != full).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn eval(&self, pattern: usize) -> bool {
        self.table[pattern]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    /// `P̂(T)` indexed by subset bitmask.
    pub fn fourier(&self) -> &[f64] {
        &self.fourier
    }

    /// `E_z[P(z)]`, which equals `E_z[P(z)^2]` for a Boolean predicate.
    pub fn mean(&self) -> f64 {
        self.fourier[0]
    }

    /// Smallest non-satisfying string.
    pub fn first_rejected(&self) -> usize {
        self.table.iter().position(|&b| !b).expect("predicate is not constant-1")
    }
}

/// Fourier expansion of kSAT.
pub fn ksat_fourier(k: usize) -> Result<Predicate> {
    Predicate::ksat(k)
}

/// The local distribution `D_{I,x}` as a density scaled by `2^k`, with its
/// Fourier coefficients `D̂(T) = avg over clauses of chi_T(c ∘ x_S)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub k: usize,
    pub values: Vec<f64>,
    pub fourier: Vec<f64>,
}

pub fn density_table(i: &SignedHypergraph, x: &[i8]) -> Result<DensityTable> {
    if i.is_empty() {
        return Err(Error::EmptyInstance("density table of an empty instance"));
    }
    if x.len() != i.n() {
        return Err(invalid("assignment length differs from n"));
    }
    let k = i.k();
    let size = 1usize << k;
    let mut counts = vec![0.0; size];
    for c in i.clauses() {
        counts[c.pattern(x)] += 1.0;
    }
    let m = i.m() as f64;
    let values: Vec<f64> = counts.iter().map(|c| c * size as f64 / m).collect();
    let mut fourier: Vec<f64> = counts.iter().map(|c| c / m).collect();
    walsh_hadamard(&mut fourier);
    Ok(DensityTable { k, values, fourier })
}

/// Satisfied fraction `P_I(x)`.
pub fn evaluate(i: &SignedHypergraph, p: &Predicate, x: &[i8]) -> Result<f64> {
    if i.is_empty() {
        return Err(Error::EmptyInstance("evaluate on an empty instance"));
    }
    if p.k() != i.k() {
        return Err(invalid("predicate arity differs from instance arity"));
    }
    if x.len() != i.n() {
        return Err(invalid("assignment length differs from n"));
    }
    let sat = i.clauses().iter().filter(|c| p.eval(c.pattern(x))).count();
    Ok(sat as f64 / i.m() as f64)
}

/// Rewrites a `P`-instance as kSAT: with `z` a rejected string of `P`, each
/// clause `(c, S)` becomes `(c ∘ z, S)`. Any `P`-satisfied clause is then
/// kSAT-satisfied.
pub fn csp_to_ksat(i: &SignedHypergraph, p: &Predicate) -> Result<SignedHypergraph> {
    if p.k() != i.k() {
        return Err(invalid("predicate arity differs from instance arity"));
    }
    let z = p.first_rejected();
    let clauses = i
        .clauses()
        .iter()
        .map(|c| SignedClause {
            vars: c.vars.clone(),
            signs: c
                .signs
                .iter()
                .enumerate()
                .map(|(j, &s)| if z >> j & 1 == 1 { -s } else { s })
                .collect(),
        })
        .collect();
    Ok(i.with_clauses(clauses))
}

/// `(I|+, I|-)`: clauses whose signs are all `+1`, and all `-1`.
pub fn split_by_sign(i: &SignedHypergraph) -> (SignedHypergraph, SignedHypergraph) {
    let pos = i.clauses().iter().filter(|c| c.signs.iter().all(|&s| s == 1)).cloned().collect();
    let neg = i.clauses().iter().filter(|c| c.signs.iter().all(|&s| s == -1)).cloned().collect();
    (i.with_clauses(pos), i.with_clauses(neg))
}
