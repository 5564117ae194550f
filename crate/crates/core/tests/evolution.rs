use curvedq_core::discretization::{hermiticity_defect, MagneticScheme};
use curvedq_core::grid::{build_grid, WaveFunction};
use curvedq_core::solvers::{propagate_cn, Observable};
use curvedq_core::systems::{reference_hamiltonian, SystemSpec};
use curvedq_core::C64;

#[test]
fn crank_nicolson_conserves_norm_and_energy_on_tilted_torus() {
    let spec = SystemSpec::torus(2.0, 1.0, 0.7, 0.4);
    let grid = build_grid(&spec.chart(), 32, 32, [None, None]).unwrap();
    let h = reference_hamiltonian(&spec, &grid, MagneticScheme::Symmetrized).unwrap();
    assert!(hermiticity_defect(&h) <= 1e-12);
    let mut psi = WaveFunction::from_fn(&grid, |q| {
        let (dt, dp) = (q[0] - 1.0, q[1] - 3.0);
        C64::from_polar((-(dt * dt + dp * dp) / 0.5).exp(), 2.0 * q[1])
    });
    psi.normalize(h.weights()).unwrap();
    let trace = propagate_cn(&h, &psi, 0.01, 1000, &[Observable::Momentum(1)], 0).unwrap();
    let n_drift = trace.norms.iter().fold(0.0f64, |m, n| m.max((n - 1.0).abs()));
    let e0 = trace.energies[0];
    let e_drift = trace.energies.iter().fold(0.0f64, |m, e| m.max((e - e0).abs())) / e0.abs();
    assert!(n_drift <= 1e-10, "norm drift {n_drift:e}");
    assert!(e_drift <= 1e-8, "energy drift {e_drift:e}");
    assert_eq!(trace.observables[0].1.len(), 1001);
}
