//! Wall-clock benchmarks for the hot paths of the decomposition pipeline:
//! kernel Gram assembly (quadratic in snapshots, linear in state
//! dimension), the end-to-end kernelized decomposition (dominated by the
//! symmetric eigensolve and the eigenfunction/mode solves), the
//! closed-form-vs-quadrature oracle, and the dense general eigensolve on
//! its own.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use kedmd::edmd::{kernel_edmd, SnapshotPairs};
use kedmd::kernels::{self, KernelSpec};
use kedmd::linalg::{eig_general, DEFAULT_RTOL};
use kedmd::rkhs::{monomial_inner_product_quadrature, QuadratureGrid};

fn random_matrix(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn bench_gram_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_assembly");
    for &(n, m) in &[(200usize, 50usize), (1000, 60)] {
        let x = random_matrix(1, n, m);
        for kernel in [KernelSpec::laplace(1.0), KernelSpec::grbf(1.0)] {
            group.bench_with_input(
                BenchmarkId::new(kernel.name(), format!("{n}x{m}")),
                &x,
                |b, x| b.iter(|| kernels::gram(x, &kernel).expect("valid kernel and data")),
            );
        }
    }
    group.finish();
}

fn bench_kernel_edmd(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_edmd");
    for &(n, m) in &[(100usize, 40usize), (1000, 60)] {
        let x = random_matrix(2, n, m);
        let y = random_matrix(3, n, m);
        let pairs = SnapshotPairs::new(x, y).expect("matching shapes");
        let kernel = KernelSpec::laplace(1.0);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &pairs, |b, p| {
            b.iter(|| kernel_edmd(p, &kernel, DEFAULT_RTOL).expect("well-posed decomposition"))
        });
    }
    group.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    let grid = QuadratureGrid::new(24, 32, 1.0).expect("grid is fine enough");
    c.bench_function("quadrature_inner_product", |b| {
        b.iter(|| monomial_inner_product_quadrature(4, 4, &grid).expect("valid orders"))
    });
}

fn bench_eig_general(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_general");
    for &dim in &[30usize, 60] {
        let m = random_matrix(4, dim, dim);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| eig_general(m).expect("square nonempty matrix"))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_gram_assembly,
    bench_kernel_edmd,
    bench_quadrature,
    bench_eig_general
);
criterion_main!(benches);
