use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use solgeo::oracle::{brute_count, brute_independent_sets, brute_sk_opt_and_count, gaussian_count, Constraints};
use solgeo::Predicate;
use solgeo_bench::*;

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for n in [14usize, 18] {
        let i = xor(3, n, 8.0);
        g.bench_with_input(BenchmarkId::new("xor_count", n), &i, |b, i| {
            b.iter(|| brute_count(Constraints::Xor(black_box(i)), 0.05).unwrap())
        });
        let s = ksat(3, n, 8.0);
        let sat = Predicate::ksat(3).unwrap();
        g.bench_with_input(BenchmarkId::new("sat_count", n), &s, |b, s| {
            b.iter(|| brute_count(Constraints::Csp { instance: black_box(s), predicate: &sat }, 0.05).unwrap())
        });
    }
    let i = xor(3, 200, 2.0);
    g.bench_function("gaussian_count_n200", |b| b.iter(|| gaussian_count(black_box(&i))));
    let m = goe(16);
    g.bench_function("sk_n16", |b| b.iter(|| brute_sk_opt_and_count(black_box(&m), 0.05).unwrap()));
    let graph = cubic(30);
    g.bench_function("indsets_n30", |b| b.iter(|| brute_independent_sets(black_box(&graph), 8).unwrap()));
    g.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
