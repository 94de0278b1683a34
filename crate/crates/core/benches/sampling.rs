use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use harmonic_acs::catalog::{self, Params};
use harmonic_acs::geom::Backend;
use harmonic_acs::harmonic::{harmonicity, JET_TOL};
use harmonic_acs::hyper::hypersurface_report;
use harmonic_acs::parallel::Execution;

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("harmonicity_32_points");
    group.sample_size(10);
    for id in ["kenmotsu-warped", "sasakian-sphere", "nearly-cosymplectic-s5"] {
        let model = catalog::build(id, &Params::default()).unwrap();
        let pts = model.structure().domain().sample(32, 42);
        for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
            group.bench_with_input(BenchmarkId::new(name, id), &pts, |b, pts| {
                b.iter(|| harmonicity(model.structure(), pts, JET_TOL, Backend::Jet, exec).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("hypersurface_32_points");
    group.sample_size(10);
    let model = catalog::build("nearly-sasakian-s5", &Params::default()).unwrap();
    let hs = model.hypersurface().unwrap();
    let pts = hs.domain().sample(32, 42);
    for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
        group.bench_function(name, |b| {
            b.iter(|| hypersurface_report(hs, &pts, JET_TOL, Backend::Jet, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
