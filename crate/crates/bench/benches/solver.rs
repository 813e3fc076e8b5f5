use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wg_elasticity::assembly::{condense, LocalElementSystem};
use wg_elasticity::mesh::{cube_tet_mesh, triangle_mesh};
use wg_elasticity::solver::solve;
use wg_elasticity::{assemble_global, CaseId, DofMap, ManufacturedCase, SolveOptions};

fn local_condensation(c: &mut Criterion) {
    let mut g = c.benchmark_group("condense");
    for k in 0..=2 {
        let m = triangle_mesh(2).unwrap();
        let dofs = DofMap::new(&m, k);
        let p = ManufacturedCase::with_lambda(CaseId::Case2d, 1e3).problem();
        g.bench_with_input(BenchmarkId::new("triangle", k), &k, |b, _| {
            b.iter(|| {
                let local = LocalElementSystem::new(&m, &dofs, &p, 0).unwrap();
                black_box(condense(&local, &dofs).unwrap())
            })
        });
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    for n in [16, 32] {
        let m = triangle_mesh(n).unwrap();
        let dofs = DofMap::new(&m, 1);
        let p = ManufacturedCase::with_lambda(CaseId::Case2d, 1e3).problem();
        g.bench_with_input(BenchmarkId::new("triangle-k1", n), &n, |b, _| {
            b.iter(|| black_box(assemble_global(&m, &dofs, &p).unwrap()))
        });
    }
    let m = cube_tet_mesh(4).unwrap();
    let dofs = DofMap::new(&m, 0);
    let p = ManufacturedCase::with_lambda(CaseId::Case3d, 1e3).problem();
    g.bench_function("cube-k0/4", |b| b.iter(|| black_box(assemble_global(&m, &dofs, &p).unwrap())));
    g.finish();
}

fn sparse_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for (k, n) in [(0, 32), (0, 64), (1, 32)] {
        let m = triangle_mesh(n).unwrap();
        let dofs = DofMap::new(&m, k);
        let p = ManufacturedCase::with_lambda(CaseId::Case2d, 1e6).problem();
        let sys = assemble_global(&m, &dofs, &p).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("triangle-k{k}"), n), &n, |b, _| {
            b.iter(|| black_box(solve(&sys.matrix, &sys.rhs, &SolveOptions::default()).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, local_condensation, assembly, sparse_solve);
criterion_main!(benches);
