use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Hypergraph, MultiGraph, SignedClause, SignedHypergraph, Var};
use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn universe(k: usize, n: usize, sign_bits: usize) -> Result<u128> {
    let mut total: u128 = 1u128.checked_shl(sign_bits as u32).ok_or_else(|| invalid("arity too large"))?;
    for _ in 0..k {
        total = total.checked_mul(n as u128).ok_or_else(|| invalid("n^k overflows the sampler index space"))?;
    }
    Ok(total)
}

fn check_params(k: usize, n: usize, m: f64) -> Result<()> {
    if k < 2 {
        return Err(invalid(format!("arity k = {k} must be at least 2")));
    }
    if n < k {
        return Err(invalid(format!("need n >= k, got n = {n}, k = {k}")));
    }
    if !(m >= 0.0) || !m.is_finite() {
        return Err(invalid(format!("expected clause count {m} must be a finite non-negative number")));
    }
    Ok(())
}

/// Visits each index of `0..total` independently with probability `p`, in
/// increasing order, by geometric skipping.
fn bernoulli_indices(total: u128, p: f64, rng: &mut ChaCha8Rng, mut visit: impl FnMut(u128)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(visit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next: u128 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if !(gap < (total - next) as f64) {
            return;
        }
        next += gap as u128;
        if next >= total {
            return;
        }
        visit(next);
        next += 1;
        if next >= total {
            return;
        }
    }
}

fn decode_tuple(mut idx: u128, k: usize, n: usize) -> Vec<Var> {
    let mut vars = vec![0; k];
    for slot in vars.iter_mut().rev() {
        *slot = (idx % n as u128) as Var;
        idx /= n as u128;
    }
    vars
}

/// Includes each of the `2^k n^k` pairs `(c, S)` independently with
/// probability `m / (2^k n^k)`. Clauses come out in index order.
pub fn sample_signed_hypergraph(k: usize, n: usize, m: f64, seed: u64) -> Result<SignedHypergraph> {
    check_params(k, n, m)?;
    let total = universe(k, n, k)?;
    let p = m / total as f64;
    if p > 1.0 {
        return Err(invalid(format!("inclusion probability {p} exceeds 1")));
    }
    let mut clauses = Vec::new();
    bernoulli_indices(total, p, &mut rng(seed), |idx| {
        let signs = (0..k).map(|i| if idx >> i & 1 == 1 { -1 } else { 1 }).collect();
        clauses.push(SignedClause { vars: decode_tuple(idx >> k, k, n), signs });
    });
    SignedHypergraph::new(k, n, clauses)
}

/// Includes each of the `n^k` ordered tuples with probability `m / n^k`.
pub fn sample_unsigned_hypergraph(k: usize, n: usize, m: f64, seed: u64) -> Result<Hypergraph> {
    check_params(k, n, m)?;
    let total = universe(k, n, 0)?;
    let p = m / total as f64;
    if p > 1.0 {
        return Err(invalid(format!("inclusion probability {p} exceeds 1")));
    }
    let mut edges = Vec::new();
    bernoulli_indices(total, p, &mut rng(seed), |idx| edges.push(decode_tuple(idx, k, n)));
    Hypergraph::new(k, n, edges)
}

/// Uniform `±1` signs.
pub fn sample_signing(m: usize, seed: u64) -> Vec<i8> {
    let mut r = rng(seed);
    (0..m).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect()
}

/// `G = (W + W^T)/√2` with `W` i.i.d. standard normal.
pub fn sample_goe(n: usize, seed: u64) -> Result<SymMatrix> {
    if n == 0 {
        return Err(invalid("GOE order must be at least 1"));
    }
    let mut r = rng(seed);
    let mut w = vec![0.0f64; n * n];
    for v in w.iter_mut() {
        *v = r.sample(StandardNormal);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(SymMatrix::from_lower(n, |i, j| (w[i * n + j] + w[j * n + i]) * s))
}

const REGULAR_ATTEMPTS: usize = 10_000;

/// Simple `d`-regular graph from the configuration model, rejecting
/// pairings with loops or parallel edges.
pub fn sample_regular_graph(n: usize, d: usize, seed: u64) -> Result<MultiGraph> {
    if d < 3 || n <= d || (n * d) % 2 != 0 {
        return Err(invalid(format!("need d >= 3, n > d and n·d even; got n = {n}, d = {d}")));
    }
    let mut r = rng(seed);
    let mut stubs: Vec<Var> = (0..n).flat_map(|v| std::iter::repeat_n(v as Var, d)).collect();
    let mut seen = std::collections::HashSet::with_capacity(n * d / 2);
    'attempt: for _ in 0..REGULAR_ATTEMPTS {
        // Fisher–Yates, then pair consecutive stubs.
        for i in (1..stubs.len()).rev() {
            let j = r.random_range(0..=i);
            stubs.swap(i, j);
        }
        seen.clear();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        return MultiGraph::new(n, edges);
    }
    Err(Error::SamplerExhausted { attempts: REGULAR_ATTEMPTS })
}
