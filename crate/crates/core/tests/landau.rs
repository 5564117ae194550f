//! Generic 3D assembly in Cartesian coordinates with a uniform field.

use curvedq_core::discretization::{assemble_generic_hamiltonian, GenericFields, MagneticScheme, Physics};
use curvedq_core::error::Result;
use curvedq_core::fields::{uniform_field_potential, Gauge};
use curvedq_core::grid::{Axis, Boundary, Grid};
use curvedq_core::solvers::eigensolve_lowest;

#[test]
fn lowest_landau_gap_in_a_box() {
    // hard walls in x and y, periodic z; with B = 2 the magnetic length is
    // 1/sqrt(2), well inside the box, so the lowest level is hbar Q B / 2m.
    let b = 2.0;
    let half = 3.0;
    let grid = Grid::new(vec![
        Axis::new(24, -half, half, Boundary::Dirichlet),
        Axis::new(24, -half, half, Boundary::Dirichlet),
        Axis::new(4, 0.0, 1.0, Boundary::Periodic),
    ])
    .unwrap();
    let cp = uniform_field_potential([0.0, 0.0, b], Gauge::Symmetric);
    let metric = |_x: [f64; 3]| -> Result<([[f64; 3]; 3], f64)> { Ok(([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 1.0)) };
    let potential = |x: [f64; 3]| cp.vector(x);
    let scalar = |_x: [f64; 3]| 0.0;
    let fields = GenericFields {
        metric: &metric,
        potential: &potential,
        scalar: &scalar,
    };
    let physics = Physics::default();
    for scheme in [MagneticScheme::Symmetrized, MagneticScheme::Peierls] {
        let h = assemble_generic_hamiltonian(&grid, &fields, physics, scheme).unwrap();
        let spec = eigensolve_lowest(&h, 2).unwrap();
        let gap = 2.0 * spec.eigenvalues[0];
        let want = physics.hbar * physics.charge * b / physics.mass;
        assert!((gap - want).abs() <= 0.05 * want, "{scheme:?}: {gap} vs {want}");
    }
}
