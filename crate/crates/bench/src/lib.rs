//! Seeded fixtures shared by the benchmarks.

use solgeo::instance::{sample_goe, sample_regular_graph, sample_signed_hypergraph, sample_signing, sample_unsigned_hypergraph};
use solgeo::{Hypergraph, MultiGraph, SignedHypergraph, SymMatrix, XorInstance};

pub const SEED: u64 = 0x5eed;

/// `k`-uniform model hypergraph with about `delta · n` tuples.
pub fn hypergraph(k: usize, n: usize, delta: f64) -> Hypergraph {
    sample_unsigned_hypergraph(k, n, delta * n as f64, SEED).expect("valid sampler parameters")
}

pub fn ksat(k: usize, n: usize, delta: f64) -> SignedHypergraph {
    sample_signed_hypergraph(k, n, delta * n as f64, SEED).expect("valid sampler parameters")
}

pub fn xor(k: usize, n: usize, delta: f64) -> XorInstance {
    let h = hypergraph(k, n, delta);
    XorInstance::from_signing(&h, &sample_signing(h.m(), SEED)).expect("signing matches hypergraph")
}

pub fn cubic(n: usize) -> MultiGraph {
    sample_regular_graph(n, 3, SEED).expect("valid regular graph parameters")
}

pub fn goe(n: usize) -> SymMatrix {
    sample_goe(n, SEED).expect("nonempty matrix")
}
