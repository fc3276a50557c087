//! Run twice to compare backends:
//!
//!     cargo bench -p lshxdp
//!     cargo bench -p lshxdp --no-default-features
//!
//! Benchmark ids carry the backend name so criterion keeps both baselines.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lshxdp::audit::certify_pxdp;
use lshxdp::data::{synthesize, SynthSpec};
use lshxdp::lsh::{hash_dataset, sample_family};
use lshxdp::mechanisms::Mechanism;
use lshxdp::nns::perturb_all;
use lshxdp::vectors::{DenseVector, Vector};

fn backend() -> &'static str {
    if lshxdp::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn users(n: usize, count: usize) -> Vec<Vector> {
    let spec = SynthSpec {
        n,
        clusters: 10,
        users_per_cluster: count / 10,
        sigma_theta: 0.1,
        seed: 7,
    };
    synthesize(&spec).unwrap().vectors().to_vec()
}

fn bench_hashing(c: &mut Criterion) {
    let mut group = c.benchmark_group("hash_dataset");
    for &(n, count) in &[(100usize, 2000usize), (1000, 2000)] {
        let xs = users(n, count);
        let fam = sample_family(n, 64, 1).unwrap();
        group.bench_with_input(BenchmarkId::new(backend(), format!("n{n}")), &xs, |b, xs| {
            b.iter(|| hash_dataset(&fam, xs).unwrap())
        });
    }
    group.finish();
}

fn bench_family(c: &mut Criterion) {
    c.bench_function(&format!("sample_family/{}/n1000_k256", backend()), |b| {
        b.iter(|| sample_family(1000, 256, 3).unwrap())
    });
}

fn bench_perturb(c: &mut Criterion) {
    let xs = users(200, 2000);
    let fam = sample_family(200, 20, 1).unwrap();
    let mut group = c.benchmark_group("perturb_all");
    for mech in [Mechanism::Lshrr { epsilon: 0.5 }, Mechanism::Laplsh { epsilon: 5.0 }] {
        group.bench_function(BenchmarkId::new(backend(), mech.name()), |b| {
            b.iter(|| perturb_all(&fam, mech, &xs, 11).unwrap())
        });
    }
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let x = DenseVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let y = DenseVector::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
    let mut group = c.benchmark_group("certify_pxdp");
    group.sample_size(10);
    group.bench_function(backend(), |b| {
        b.iter(|| certify_pxdp(1.0, 20, &x, &y, 0.05, 10_000, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_hashing, bench_family, bench_perturb, bench_certify);
criterion_main!(benches);
