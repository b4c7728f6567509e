use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mps_core::geometry::DomainSpec;
use mps_core::scanner::{scan, BasisConfig, ProblemSpec};
use mps_core::tension::{assemble, BoundaryCondition};
use mps_core::Exec;

const POLICIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn problem(exec: Exec) -> mps_core::scanner::Problem {
    let domain = DomainSpec::new(vec![0.0, 0.0, 0.1], vec![0.0, 0.0, 0.0, 0.0, 0.05]).unwrap();
    let mut spec = ProblemSpec::new(
        domain,
        BasisConfig::Mfs {
            points: 120,
            offset: 0.2,
        },
        BoundaryCondition::NeumannFiltered,
    );
    spec.n_boundary = 160;
    spec.interior_radial = 16;
    spec.interior_angular = 96;
    spec.prepare(exec).unwrap()
}

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let p = problem(exec);
        group.bench_function(BenchmarkId::new("mfs_120", name), |b| {
            b.iter(|| scan(&p, 40.0, 44.0, 16).unwrap())
        });
    }
    group.finish();
}

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        let p = problem(exec);
        group.bench_function(BenchmarkId::new("neumann_filtered", name), |b| {
            b.iter(|| {
                assemble(
                    BoundaryCondition::NeumannFiltered,
                    &p.basis,
                    42.0,
                    &p.bd,
                    &p.iq,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scan, bench_assembly);
criterion_main!(benches);
