use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use strata_core::exec::Mode;
use strata_core::hecke::{verify_all, CaseSetup, Flavor, HeckeCase};
use strata_core::padic::Ctx;
use strata_core::suites;

fn modes() -> [(&'static str, Mode); 2] {
    [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)]
}

fn relations(c: &mut Criterion) {
    let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
    let mut g = c.benchmark_group("hecke_relations_c_m1");
    g.sample_size(10);
    for (name, mode) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| black_box(verify_all(&s, Flavor::J, 7, mode).unwrap()))
        });
    }
    g.finish();
}

fn charpoly(c: &mut Criterion) {
    let ctx = Ctx::new(3, 14).unwrap();
    let mut g = c.benchmark_group("charpoly_rows");
    g.sample_size(10);
    for (name, mode) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| black_box(suites::charpoly(&ctx, 50, 3, mode).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, relations, charpoly);
criterion_main!(benches);
