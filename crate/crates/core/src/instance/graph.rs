use super::{has_repeat, Hypergraph, Var};
use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;

/// Undirected multigraph. Parallel edges are kept; self-loops are allowed
/// on construction and removed by [`MultiGraph::without_loops`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(Var, Var)>,
    degrees: Vec<usize>,
}

impl MultiGraph {
    pub fn new(n: usize, edges: Vec<(Var, Var)>) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u as usize >= n || v as usize >= n) {
            return Err(Error::MalformedInstance(format!("edge ({u},{v}) out of range 0..{n}")));
        }
        let mut degrees = vec![0; n];
        for &(u, v) in &edges {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        Ok(Self { n, edges, degrees })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new(), degrees: vec![0; n] }
    }

    /// The 2-uniform hypergraph read as a multigraph.
    pub fn from_hypergraph(h: &Hypergraph) -> Result<Self> {
        if h.k() != 2 {
            return Err(invalid(format!("expected a 2-uniform hypergraph, got k = {}", h.k())));
        }
        Self::new(h.n(), h.edges().iter().map(|e| (e[0], e[1])).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges, counted with multiplicity.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Var, Var)] {
        &self.edges
    }

    /// Degree counting multiplicity; a self-loop adds 2.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    pub fn without_loops(&self) -> Self {
        let edges = self.edges.iter().copied().filter(|&(u, v)| u != v).collect();
        Self::new(self.n, edges).expect("indices already validated")
    }

    /// Drops self-loops and parallel edges, keeping first occurrences.
    pub fn simplified(&self) -> Self {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
            .collect();
        Self::new(self.n, edges).expect("indices already validated")
    }

    pub fn is_simple(&self) -> bool {
        self.simplified().m() == self.m()
    }

    /// Adjacency with multiplicities; a self-loop contributes 2 on the diagonal.
    pub fn adjacency(&self) -> SymMatrix {
        let mut a = SymMatrix::zeros(self.n);
        for &(u, v) in &self.edges {
            let (u, v) = (u as usize, v as usize);
            if u == v {
                a.add(u, u, 2.0);
            } else {
                a.add(u, v, 1.0);
            }
        }
        a
    }

    /// Bitmask adjacency for `n <= 64`, used by small exhaustive checks.
    pub fn neighbour_masks(&self) -> Option<Vec<u64>> {
        if self.n > 64 {
            return None;
        }
        let mut adj = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        Some(adj)
    }

    /// `e(S, T) = 1_S^T A 1_T`, counting ordered pairs and multiplicity.
    pub fn e(&self, s: &[bool], t: &[bool]) -> usize {
        let mut total = 0;
        for &(u, v) in &self.edges {
            let (u, v) = (u as usize, v as usize);
            if s[u] && t[v] {
                total += 1;
            }
            if s[v] && t[u] {
                total += 1;
            }
        }
        total
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = *self.degrees.first()?;
        self.degrees.iter().all(|&x| x == d).then_some(d)
    }
}

/// Primal graph of a 3-uniform hypergraph: a triangle per hyperedge,
/// parallel edges kept.
pub fn primal_graph(h: &Hypergraph) -> Result<MultiGraph> {
    if h.k() != 3 {
        return Err(invalid(format!("primal graph needs a 3-uniform hypergraph, got k = {}", h.k())));
    }
    if h.edges().iter().any(|e| has_repeat(e)) {
        return Err(invalid("primal graph input still has hyperedges with repeated vertices"));
    }
    let mut edges = Vec::with_capacity(3 * h.m());
    for e in h.edges() {
        edges.push((e[0], e[1]));
        edges.push((e[0], e[2]));
        edges.push((e[1], e[2]));
    }
    MultiGraph::new(h.n(), edges)
}
