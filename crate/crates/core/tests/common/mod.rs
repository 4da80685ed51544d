#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solgeo::instance::{sample_signing, sample_unsigned_hypergraph, Hypergraph, MultiGraph, SignedClause, SignedHypergraph, XorInstance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random hypergraph with exactly `m` tuples of distinct vertices.
pub fn distinct_hypergraph(k: usize, n: usize, m: usize, seed: u64) -> Hypergraph {
    let mut r = rng(seed);
    let edges = (0..m)
        .map(|_| {
            let mut e: Vec<u32> = Vec::with_capacity(k);
            while e.len() < k {
                let v = r.random_range(0..n as u32);
                if !e.contains(&v) {
                    e.push(v);
                }
            }
            e
        })
        .collect();
    Hypergraph::new(k, n, edges).unwrap()
}

pub fn random_signed(k: usize, n: usize, m: usize, seed: u64) -> SignedHypergraph {
    let h = distinct_hypergraph(k, n, m, seed);
    let mut r = rng(seed ^ 0x5151);
    let clauses = h
        .edges()
        .iter()
        .map(|e| SignedClause { vars: e.clone(), signs: (0..k).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect() })
        .collect();
    SignedHypergraph::new(k, n, clauses).unwrap()
}

pub fn signing_of(h: &Hypergraph, seed: u64) -> XorInstance {
    XorInstance::from_signing(h, &sample_signing(h.m(), seed)).unwrap()
}

/// Model hypergraph with average degree about `delta`, repeats allowed.
pub fn model_hypergraph(k: usize, n: usize, delta: f64, seed: u64) -> Hypergraph {
    sample_unsigned_hypergraph(k, n, delta * n as f64, seed).unwrap()
}

pub fn random_multigraph(n: usize, m: usize, seed: u64) -> MultiGraph {
    let mut r = rng(seed);
    let edges = (0..m)
        .map(|_| loop {
            let (u, v) = (r.random_range(0..n as u32), r.random_range(0..n as u32));
            if u != v {
                break (u, v);
            }
        })
        .collect();
    MultiGraph::new(n, edges).unwrap()
}

pub fn petersen() -> MultiGraph {
    let mut edges = Vec::new();
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    MultiGraph::new(10, edges).unwrap()
}

pub fn complete_graph(n: usize) -> MultiGraph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            edges.push((u, v));
        }
    }
    MultiGraph::new(n, edges).unwrap()
}

pub fn assignment(n: usize, mask: u32) -> Vec<i8> {
    (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn mask_of(set: &[bool]) -> u32 {
    set.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1u32 << i).sum()
}

pub fn subset(n: usize, mask: u32) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}
