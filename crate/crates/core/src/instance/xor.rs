use super::{Hypergraph, Var, XorClause, XorInstance};
use crate::error::{invalid, Result};

/// How clauses are selected when restricting to a variable subset `S`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    /// Exactly `k - t` of the positions carry `S`-variables, in any positions.
    #[default]
    SetMembership,
    /// The first `k - t` positions are in `S` and the last `t` are not.
    Positional,
}

/// A subset `S` of `[n]`. Members keep their relative order and are
/// labelled `0..|S|`; the complement is labelled `0..n-|S|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSubset {
    n: usize,
    members: Vec<Var>,
    in_set: Vec<bool>,
    label: Vec<u32>,
}

impl VarSubset {
    pub fn new(n: usize, members: impl IntoIterator<Item = Var>) -> Result<Self> {
        let mut in_set = vec![false; n];
        for v in members {
            let v = v as usize;
            if v >= n {
                return Err(invalid(format!("subset member {v} out of range 0..{n}")));
            }
            in_set[v] = true;
        }
        Ok(Self::from_mask(in_set))
    }

    pub fn from_mask(in_set: Vec<bool>) -> Self {
        let n = in_set.len();
        let mut label = vec![0u32; n];
        let (mut a, mut b) = (0u32, 0u32);
        let mut members = Vec::new();
        for v in 0..n {
            if in_set[v] {
                label[v] = a;
                a += 1;
                members.push(v as Var);
            } else {
                label[v] = b;
                b += 1;
            }
        }
        Self { n, members, in_set, label }
    }

    /// `{start, ..., end - 1}`.
    pub fn range(n: usize, start: usize, end: usize) -> Self {
        Self::from_mask((0..n).map(|v| v >= start && v < end).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement_len(&self) -> usize {
        self.n - self.members.len()
    }

    pub fn members(&self) -> &[Var] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, v: Var) -> bool {
        self.in_set[v as usize]
    }

    /// Label of `v` within its side of the partition.
    #[inline]
    pub fn label(&self, v: Var) -> u32 {
        self.label[v as usize]
    }

    /// Positions of `vars` inside and outside `S` when the clause is selected
    /// for an inside-count of `inside`.
    fn split(&self, vars: &[Var], inside: usize, sel: Selection) -> Option<(Vec<usize>, Vec<usize>)> {
        let (ins, outs): (Vec<usize>, Vec<usize>) =
            (0..vars.len()).partition(|&p| self.contains(vars[p]));
        if ins.len() != inside {
            return None;
        }
        if sel == Selection::Positional && ins.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Some((ins, outs))
    }
}

fn check_t(k: usize, t: usize) -> Result<()> {
    if t == 0 || t >= k {
        return Err(invalid(format!("need 1 <= t <= k-1, got t = {t}, k = {k}")));
    }
    Ok(())
}

/// Induced `t`XOR on the complement of `S` under the partial assignment
/// `sigma` (aligned with `S.members()`): each selected clause becomes
/// `x^{rest} = b · Π sigma over its S-part`.
pub fn induced_xor(
    i: &XorInstance,
    s: &VarSubset,
    sigma: &[i8],
    t: usize,
    sel: Selection,
) -> Result<XorInstance> {
    check_t(i.k(), t)?;
    if s.n() != i.n() {
        return Err(invalid("subset universe differs from n"));
    }
    if sigma.len() != s.len() {
        return Err(invalid("partial assignment length differs from |S|"));
    }
    let mut out = Vec::new();
    for c in i.clauses() {
        if let Some((ins, outs)) = s.split(&c.vars, i.k() - t, sel) {
            let sign: i8 = ins.iter().map(|&p| sigma[s.label(c.vars[p]) as usize]).product();
            out.push(XorClause {
                vars: outs.iter().map(|&p| s.label(c.vars[p])).collect(),
                rhs: c.rhs * sign,
            });
        }
    }
    Ok(XorInstance::from_parts(t, s.complement_len(), out))
}

/// Truncated `(k - t)`XOR on `S`: the `S`-part of every selected clause, sign kept.
pub fn truncated_xor(i: &XorInstance, s: &VarSubset, k_minus_t: usize, sel: Selection) -> Result<XorInstance> {
    check_t(i.k(), i.k().saturating_sub(k_minus_t))?;
    if s.n() != i.n() {
        return Err(invalid("subset universe differs from n"));
    }
    let mut out = Vec::new();
    for c in i.clauses() {
        if let Some((ins, _)) = s.split(&c.vars, k_minus_t, sel) {
            out.push(XorClause { vars: ins.iter().map(|&p| s.label(c.vars[p])).collect(), rhs: c.rhs });
        }
    }
    Ok(XorInstance::from_parts(k_minus_t, s.len(), out))
}

/// Unsigned tuples of the induced `t`XOR; it does not depend on `sigma`.
pub fn induced_hypergraph(
    h: &Hypergraph,
    s: &VarSubset,
    t: usize,
    dedupe: bool,
    sel: Selection,
) -> Result<Hypergraph> {
    check_t(h.k(), t)?;
    if s.n() != h.n() {
        return Err(invalid("subset universe differs from n"));
    }
    let edges = h
        .edges()
        .iter()
        .filter_map(|e| s.split(e, h.k() - t, sel).map(|(_, outs)| outs.iter().map(|&p| s.label(e[p])).collect()))
        .collect();
    let g = Hypergraph::from_parts(t, s.complement_len(), edges);
    Ok(if dedupe { g.deduplicated() } else { g })
}
