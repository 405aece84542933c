use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kspectral::exec::{set_mode, Mode};
use kspectral::experiment::{build_region, RegionRecipe};
use kspectral::gallery::grcar;
use kspectral::geometry::numerical_range_boundary;
use kspectral::kconst::certify;
use kspectral::lemmas::{lemma_suite, Lemma};
use kspectral::regions::QuadratureSpec;

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn numrange(c: &mut Criterion) {
    let a = grcar(80);
    let mut group = c.benchmark_group("numrange_boundary");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, 80), |b| {
            set_mode(mode);
            b.iter(|| numerical_range_boundary(&a, 256).unwrap())
        });
    }
    group.finish();
}

fn certify_cutout(c: &mut Criterion) {
    let a = grcar(60);
    let region = build_region(&RegionRecipe::Cutout, &a, 256, QuadratureSpec::default()).unwrap();
    let mut group = c.benchmark_group("certify_cutout");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, 60), |b| {
            set_mode(mode);
            b.iter(|| certify(&a, &region).unwrap())
        });
    }
    group.finish();
}

fn lemmas(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_suite");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, 200), |b| {
            set_mode(mode);
            b.iter(|| lemma_suite(Lemma::InverseNumradius, 200, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, numrange, certify_cutout, lemmas);
criterion_main!(benches);
