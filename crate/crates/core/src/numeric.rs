//! Log-space binomial arithmetic with directed rounding.
//!
//! Up to `n = 64` values are exact integers; beyond that `log2 C(n, k)` is a
//! sum of `k` logarithms whose accumulated rounding error is covered by a
//! relative margin.

const EXACT_LIMIT: u64 = 64;
const MARGIN: f64 = 1e-9;

fn binom_exact(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

fn log2_binom_approx(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}

fn widen(x: f64, up: bool) -> f64 {
    let m = MARGIN * (1.0 + x.abs());
    if up {
        x + m
    } else {
        x - m
    }
}

/// `log2 C(n, k)` rounded up; `-∞` when `k > n`.
pub fn log2_binom_upper(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_LIMIT {
        return widen((binom_exact(n, k) as f64).log2(), true);
    }
    widen(log2_binom_approx(n, k), true)
}

/// `log2 C(n, k)` rounded down; `-∞` when `k > n`.
pub fn log2_binom_lower(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_LIMIT {
        return widen((binom_exact(n, k) as f64).log2(), false).max(0.0);
    }
    widen(log2_binom_approx(n, k), false).max(0.0)
}

/// `log2 Σ_{j ≤ r} C(n, j)` rounded up.
pub fn log2_binom_tail_upper(n: u64, r: u64) -> f64 {
    let r = r.min(n);
    if n <= EXACT_LIMIT {
        let total: u128 = (0..=r).map(|j| binom_exact(n, j)).sum();
        return widen((total as f64).log2(), true);
    }
    let mut terms = Vec::with_capacity(r as usize + 1);
    let mut log_c = 0.0f64;
    terms.push(0.0);
    for j in 1..=r {
        log_c += ((n - j + 1) as f64 / j as f64).log2();
        terms.push(log_c);
    }
    widen(log2_sum_exp2(&terms), true)
}

/// `log2 Σ 2^{x_i}` without overflow; `-∞` for an empty slice.
pub fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    if top == f64::INFINITY {
        return top;
    }
    let s: f64 = xs.iter().map(|&x| (x - top).exp2()).sum();
    top + s.log2()
}

/// Binary entropy, `0` at the endpoints.
pub fn entropy2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Rounds a log2 count up by the standard margin.
pub fn round_up(x: f64) -> f64 {
    widen(x, true)
}
