use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use pftg::grid::{laplacian, NeumannSpectral};
use pftg::solver::{State, Stepper};
use pftg::sweep::{well_prepared_initial, Geometry};
use pftg::{Field, Grid, ModelSpec, Potential, Proliferation, StepConfig};

const SIZES: [usize; 3] = [64, 128, 256];

fn smooth(g: Grid) -> Field {
    Field::from_fn(g, |x, y| (3.0 * x).cos() * (2.0 * y).sin())
}

fn bench_laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplacian");
    for n in SIZES {
        let f = smooth(Grid::new_2d(n, n, 1.0, 1.0).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| laplacian(black_box(f))));
    }
    group.finish();
}

fn bench_spectral_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_solve");
    for n in SIZES {
        let g = Grid::new_2d(n, n, 1.0, 1.0).unwrap();
        let spectral = NeumannSpectral::new(g);
        let rhs = smooth(g);
        group.bench_with_input(BenchmarkId::from_parameter(n), &rhs, |b, rhs| {
            b.iter(|| spectral.solve_shifted(black_box(1.0), rhs.values()))
        });
    }
    group.finish();
}

fn bench_step_p(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_p");
    group.sample_size(20);
    let eps: f64 = 0.04;
    for n in [64, 128] {
        let g = Grid::new_2d(n, n, 1.0, 1.0).unwrap();
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::linear(0.5), eps).unwrap();
        let geom = Geometry::Circle { center: (0.5, 0.5), radius: 0.25 };
        let phi = well_prepared_initial(&geom, &spec, g).unwrap();
        let state = State::initial(phi, Field::constant(g, 0.8), &spec).unwrap();
        let stepper = Stepper::new(spec, StepConfig::new(0.5 * eps.powi(3)), g).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter(|| stepper.step_p(black_box(s)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_laplacian, bench_spectral_solve, bench_step_p);
criterion_main!(benches);
