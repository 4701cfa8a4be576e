use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use condenser_core::fem::{assemble_with, energy_with, solve, ElementOrder, SolveOptions};
use condenser_core::geometry::{build_spiked_annulus, validate_spec, SpikedAnnulusParams};
use condenser_core::mesh::{discretize_boundary, refine_uniform, triangulate, Mesh, TriangulateOptions};
use condenser_core::Execution;

fn spiked_mesh(refinements: u32) -> Mesh {
    let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(10)).unwrap();
    let cl = validate_spec(&spec).clearance;
    let pslg = discretize_boundary(&spec, cl / 20.0).unwrap();
    let mut mesh = triangulate(&pslg, &TriangulateOptions::with_max_area(cl * cl)).unwrap();
    for _ in 0..refinements {
        mesh = refine_uniform(&mesh).unwrap();
    }
    mesh
}

fn bench_assembly(c: &mut Criterion) {
    let mesh = spiked_mesh(3);
    let mut g = c.benchmark_group("assemble_p2");
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| assemble_with(&mesh, ElementOrder::Quadratic, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mesh = spiked_mesh(2);
    let mut g = c.benchmark_group("solve_and_energy_p2");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let system = assemble_with(&mesh, ElementOrder::Quadratic, exec).unwrap();
        let opts = SolveOptions { exec, ..SolveOptions::default() };
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                let field = solve(&mesh, &system, &opts).unwrap();
                energy_with(&field, exec)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_assembly, bench_solve);
criterion_main!(benches);
