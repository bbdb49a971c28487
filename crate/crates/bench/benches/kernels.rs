use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use parastokes::kernels::{heat_kernel_deriv, stokes_tensor, StokesJet};
use parastokes::quadrature::{ShellHalf, ShellSampler};
use parastokes::{MultiIndexSpec, SpaceTimePoint};

fn jet(c: &mut Criterion) {
    let mut group = c.benchmark_group("stokes_jet");
    for (n, order) in [(2, 2), (2, 4), (3, 2), (3, 4)] {
        let mut jet = StokesJet::new(n, order);
        let z = [0.3, -0.4, 0.2];
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), order), &order, |b, _| {
            b.iter(|| jet.eval(black_box(&z[..n]), black_box(0.37)).unwrap())
        });
    }
    group.finish();
}

fn pointwise(c: &mut Criterion) {
    let p = SpaceTimePoint::new(vec![0.3, -0.4], 0.37);
    let spec = MultiIndexSpec::new(vec![1, 1], 1);
    c.bench_function("stokes_tensor_mu11_l1", |b| b.iter(|| stokes_tensor(black_box(&spec), black_box(&p), 2).unwrap()));
    c.bench_function("heat_kernel_deriv_mu11_l1", |b| b.iter(|| heat_kernel_deriv(black_box(&spec), black_box(&p), 2).unwrap()));
}

fn shells(c: &mut Criterion) {
    let sampler = ShellSampler::new(3, 4096, ShellHalf::Past, 1);
    c.bench_function("shell_points_4096_n3", |b| b.iter(|| sampler.points(black_box(0.25), black_box(0.5))));
}

criterion_group!(benches, jet, pointwise, shells);
criterion_main!(benches);
