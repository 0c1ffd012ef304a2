use biharm_bench::{scene, KAPPA};
use biharm_core::kernels::{green_biharm, sdir_block, sdir_selfsplit};
use biharm_core::specfun::{bessel_k_seq, hankel1_seq};
use biharm_core::{assemble, ShapeKind, Vec2};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn special_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    for x in [0.3, 8.0, 120.0] {
        g.bench_with_input(BenchmarkId::new("hankel1_seq_60", x), &x, |b, &x| b.iter(|| hankel1_seq(60, black_box(x))));
        g.bench_with_input(BenchmarkId::new("bessel_k_seq_60", x), &x, |b, &x| b.iter(|| bessel_k_seq(60, black_box(x))));
    }
    g.finish();
}

fn kernel_blocks(c: &mut Criterion) {
    let kite = scene(ShapeKind::Kite);
    let curve = &kite.curves()[0];
    c.bench_function("green_biharm", |b| {
        b.iter(|| green_biharm(KAPPA, black_box(Vec2::new(0.1, 0.2)), Vec2::new(0.7, -0.4)))
    });
    c.bench_function("sdir_block", |b| b.iter(|| sdir_block(KAPPA, curve, black_box(0.4), curve, 2.1)));
    c.bench_function("sdir_selfsplit", |b| b.iter(|| sdir_selfsplit(KAPPA, curve, black_box(0.4), 2.1)));
}

fn assembly(c: &mut Criterion) {
    let kite = scene(ShapeKind::Kite);
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    for m in [32, 64, 128] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| b.iter(|| assemble(&kite, KAPPA, m)));
    }
    g.finish();
}

criterion_group!(benches, special_functions, kernel_blocks, assembly);
criterion_main!(benches);
