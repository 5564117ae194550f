//! Gauge covariance and the Aharonov-Bohm spectrum on the cylinder.

use curvedq_core::chart::cylinder;
use curvedq_core::discretization::{assemble_surface_hamiltonian, sample_geometry, HamiltonianOperator, MagneticScheme, Physics};
use curvedq_core::fields::{gauge_phase, normal_gauge_fix, transform_wavefunction, uniform_field_potential, Gauge};
use curvedq_core::grid::{build_grid, weighted_inner_product, Boundary};
use curvedq_core::solvers::{eigensolve_lowest, SpectrumResult};
use curvedq_core::systems::{axial_field_for_flux, cylinder_levels, SystemSpec};

fn cylinder_operator(n: usize, l: f64, b: [f64; 3], gauge: Gauge, scheme: MagneticScheme, y: Boundary) -> HamiltonianOperator {
    let chart = cylinder(1.0, l);
    let grid = build_grid(&chart, n, n, [None, Some(y)]).unwrap();
    let geo = sample_geometry(&chart, &grid).unwrap();
    let sp = normal_gauge_fix(&chart, &uniform_field_potential(b, gauge), &grid).unwrap();
    assemble_surface_hamiltonian(&grid, &geo, &sp, Physics::default(), scheme).unwrap()
}

#[test]
fn transverse_field_gauges_converge_and_map_eigenvectors() {
    let (l, b1, k) = (3.0, 0.8, 6);
    let mut diffs = Vec::new();
    let mut last: Option<(HamiltonianOperator, SpectrumResult, SpectrumResult)> = None;
    for n in [32, 64, 128] {
        let h1 = cylinder_operator(n, l, [b1, 0.0, 0.0], Gauge::AxialSymmetric, MagneticScheme::Symmetrized, Boundary::Dirichlet);
        let h2 = cylinder_operator(n, l, [b1, 0.0, 0.0], Gauge::Symmetric, MagneticScheme::Symmetrized, Boundary::Dirichlet);
        let s1 = eigensolve_lowest(&h1, k).unwrap();
        let s2 = eigensolve_lowest(&h2, k).unwrap();
        let d = s1.eigenvalues.iter().zip(&s2.eigenvalues).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        eprintln!("n={n} diff={d:e} {:?}", s1.eigenvalues);
        diffs.push(d);
        last = Some((h1, s1, s2));
    }
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("orders {orders:?}");
    assert!(orders.iter().all(|p| *p >= 1.7), "{orders:?}");

    let (h1, s1, s2) = last.unwrap();
    let phase = gauge_phase(&h1.grid, |t, y| -0.5 * b1 * t.sin() * y, 1.0, 1.0);
    let mapped = transform_wavefunction(&s1.eigenvectors[0].values, &phase);
    let overlap = weighted_inner_product(&s2.eigenvectors[0].values, &mapped, h1.weights()).unwrap().norm();
    eprintln!("overlap defect {:e}", 1.0 - overlap);
    assert!(overlap >= 1.0 - 1e-6);
}

#[test]
fn integer_flux_is_invisible_with_link_phases() {
    let levels = |f: f64| {
        let b0 = axial_field_for_flux(1.0, f, Physics::default());
        let spec = SystemSpec::cylinder(1.0, 10.0, b0, 0.0);
        let h = cylinder_operator(64, 10.0, spec.field(), Gauge::AxialSymmetric, MagneticScheme::Peierls, Boundary::Periodic);
        eigensolve_lowest(&h, 8).unwrap().eigenvalues
    };
    let (zero, one) = (levels(0.0), levels(1.0));
    for (a, b) in zero.iter().zip(&one) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
    for f in [0.25, 0.5] {
        let b0 = axial_field_for_flux(1.0, f, Physics::default());
        let want = cylinder_levels(1.0, 10.0, b0, true, Physics::default(), 8);
        for (g, w) in levels(f).iter().zip(&want) {
            // relative to the ring energy scale where levels cross zero
            assert!((g - w).abs() <= 5e-3 * w.abs().max(0.5), "flux {f}: {g} vs {w}");
        }
    }
}
