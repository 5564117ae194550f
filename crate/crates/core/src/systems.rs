//! Closed-form reference Hamiltonians for the sphere, the cylinder and the
//! torus, and independent oracle spectra.
//!
//! The reference operators are written directly from the explicit
//! coefficient functions of each surface (measure, link conductances, drift
//! `u^a`, the `Q^2` term and the geometric term) and fed through the shared
//! assembler, so they can be compared entrywise with the generic pipeline.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::chart::{cylinder, sphere, torus, SurfaceChart};
use crate::dense::hermitian_generalized_eigen;
use crate::discretization::{assemble_from_coefficients, HamiltonianOperator, MagneticScheme, Physics, Provenance, StencilCoefficients};
use crate::error::{Error, Result};
use crate::fields::{normal_gauge_fix, uniform_field_potential, CartesianPotential, Gauge, SurfacePotential};
use crate::grid::{Boundary, Grid2D};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKind {
    Sphere { r: f64 },
    Cylinder { r: f64, l: f64 },
    Torus { big_r: f64, r: f64 },
}

/// A reference system. The field is `B` along the polar axis for the
/// sphere; for the cylinder and the torus `b0` is the component along the
/// symmetry axis and `b1` the transverse component along x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub b0: f64,
    pub b1: f64,
    pub physics: Physics,
}

impl SystemSpec {
    pub fn sphere(r: f64, b: f64) -> Self {
        Self {
            kind: SystemKind::Sphere { r },
            b0: b,
            b1: 0.0,
            physics: Physics::default(),
        }
    }

    pub fn cylinder(r: f64, l: f64, b0: f64, b1: f64) -> Self {
        Self {
            kind: SystemKind::Cylinder { r, l },
            b0,
            b1,
            physics: Physics::default(),
        }
    }

    pub fn torus(big_r: f64, r: f64, b0: f64, b1: f64) -> Self {
        Self {
            kind: SystemKind::Torus { big_r, r },
            b0,
            b1,
            physics: Physics::default(),
        }
    }

    pub fn with_physics(mut self, physics: Physics) -> Self {
        self.physics = physics;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidArgument(msg));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self.kind {
            SystemKind::Sphere { r } if !positive(r) => return bad(format!("sphere radius {r}")),
            SystemKind::Cylinder { r, l } if !positive(r) || !positive(l) => return bad(format!("cylinder r={r}, L={l}")),
            SystemKind::Torus { big_r, r } if !positive(r) || !(big_r > r) || !big_r.is_finite() => {
                return bad(format!("torus needs R > r > 0, got R={big_r}, r={r}"))
            }
            _ => {}
        }
        if let SystemKind::Sphere { .. } = self.kind {
            if self.b1 != 0.0 {
                return bad("the sphere field is along the polar axis".into());
            }
        }
        if !self.b0.is_finite() || !self.b1.is_finite() {
            return bad("field components must be finite".into());
        }
        let p = self.physics;
        if !positive(p.mass) || !positive(p.hbar) || !p.charge.is_finite() {
            return bad(format!("physics {p:?}"));
        }
        Ok(())
    }

    pub fn chart(&self) -> SurfaceChart {
        match self.kind {
            SystemKind::Sphere { r } => sphere(r),
            SystemKind::Cylinder { r, l } => cylinder(r, l),
            SystemKind::Torus { big_r, r } => torus(big_r, r),
        }
    }

    /// Cartesian field `B` in the frame of [`SystemSpec::chart`].
    pub fn field(&self) -> [f64; 3] {
        [self.b1, 0.0, self.b0]
    }

    /// Cartesian potential whose surface components are the closed forms
    /// used by the reference operators.
    pub fn cartesian_potential(&self) -> CartesianPotential {
        let gauge = match self.kind {
            SystemKind::Cylinder { .. } => Gauge::AxialSymmetric,
            _ => Gauge::Symmetric,
        };
        uniform_field_potential(self.field(), gauge)
    }

    /// Tangential potential of the generic pipeline.
    pub fn surface_potential(&self, grid: &Grid2D) -> Result<SurfacePotential> {
        normal_gauge_fix(&self.chart(), &self.cartesian_potential(), grid)
    }
}

/// Closed-form coefficient functions of one reference surface.
struct ClosedForm<'a> {
    measure: &'a dyn Fn(f64, f64) -> f64,
    inverse_metric: &'a dyn Fn(f64, f64) -> [f64; 2],
    /// `(A_1, A_2)`.
    potential: &'a dyn Fn(f64, f64) -> [f64; 2],
    /// Coefficients of `d_1`, `d_2` in the bracket, divided by `2 i Q hbar`.
    drift: &'a dyn Fn(f64, f64) -> [f64; 2],
    /// Bracketed `Q^2` term divided by `Q^2`.
    potential_square: &'a dyn Fn(f64, f64) -> f64,
    geometric: &'a dyn Fn(f64, f64) -> f64,
}

fn assemble_closed_form(grid: &Grid2D, cf: &ClosedForm<'_>, physics: Physics, scheme: MagneticScheme, provenance: Provenance) -> Result<HamiltonianOperator> {
    let n = grid.len();
    let mut c = StencilCoefficients {
        measure: Vec::with_capacity(n),
        inverse_metric: Vec::with_capacity(n),
        link_conductance: Vec::new(),
        corner_conductance: Vec::new(),
        node_potential: Vec::with_capacity(n),
        drift: Vec::with_capacity(n),
        link_potential: Vec::new(),
        potential_square: Vec::with_capacity(n),
        geometric: Vec::with_capacity(n),
        electric: alloc::vec![0.0; n],
    };
    for i in 0..n {
        let q = grid.coords(i);
        let (a, b) = (q[0], q[1]);
        let g = (cf.inverse_metric)(a, b);
        let pot = (cf.potential)(a, b);
        let u = (cf.drift)(a, b);
        c.measure.push((cf.measure)(a, b));
        c.inverse_metric.push([[g[0], 0.0, 0.0], [0.0, g[1], 0.0], [0.0; 3]]);
        c.node_potential.push([pot[0], pot[1], 0.0]);
        c.drift.push([u[0], u[1], 0.0]);
        c.potential_square.push((cf.potential_square)(a, b));
        c.geometric.push((cf.geometric)(a, b));
    }
    for axis in 0..2 {
        let mut kappa = Vec::with_capacity(grid.link_count(axis));
        let mut pot = Vec::with_capacity(grid.link_count(axis));
        for link in grid.links(axis) {
            let wall = link.lower.is_none() || link.upper.is_none();
            if wall && grid.axis(axis).boundary == Boundary::ZeroFlux {
                kappa.push(0.0);
                pot.push(0.0);
                continue;
            }
            let (a, b) = (link.coords[0], link.coords[1]);
            kappa.push((cf.measure)(a, b) * (cf.inverse_metric)(a, b)[axis]);
            pot.push((cf.potential)(a, b)[axis]);
        }
        c.link_conductance.push(kappa);
        c.link_potential.push(pot);
    }
    assemble_from_coefficients(grid, c, physics, scheme, provenance)
}

fn expect(spec: &SystemSpec, want: &str) -> Result<()> {
    spec.validate()?;
    let ok = matches!(
        (spec.kind, want),
        (SystemKind::Sphere { .. }, "sphere") | (SystemKind::Cylinder { .. }, "cylinder") | (SystemKind::Torus { .. }, "torus")
    );
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{:?} is not a {want}", spec.kind)))
    }
}

/// Sphere of radius `r` in a field `B` along the polar axis:
/// `-(hbar^2/2mr^2)[(1/sin)d_t(sin d_t) + (1/sin^2)d_p^2] + (i Q hbar B/2m) d_p
/// + (Q^2 B^2 r^2/8m) sin^2`.
pub fn reference_sphere_hamiltonian(spec: &SystemSpec, grid: &Grid2D, scheme: MagneticScheme) -> Result<HamiltonianOperator> {
    expect(spec, "sphere")?;
    let SystemKind::Sphere { r } = spec.kind else { unreachable!() };
    let b = spec.b0;
    let r2 = r * r;
    let cf = ClosedForm {
        measure: &|t, _| r2 * t.sin(),
        inverse_metric: &|t, _| [1.0 / r2, 1.0 / (r2 * t.sin() * t.sin())],
        potential: &|t, _| [0.0, 0.5 * b * r2 * t.sin() * t.sin()],
        // i Q hbar B d_phi
        drift: &|_, _| [0.0, 0.5 * b],
        // (1/4) B^2 r^2 sin^2
        potential_square: &|t, _| 0.25 * b * b * r2 * t.sin() * t.sin(),
        geometric: &|_, _| 0.0,
    };
    assemble_closed_form(grid, &cf, spec.physics, scheme, Provenance::ReferenceSphere)
}

/// Cylinder of radius `r` with axial `B0` and transverse `B1`:
/// `(1/2m)[-hbar^2((1/r^2)d_t^2 + d_y^2) + i Q hbar B0 d_t + 2 i Q hbar r B1 sin d_y
/// + Q^2 r^2 (B0^2/4 + B1^2 sin^2)] - hbar^2/(8 m r^2)`.
pub fn reference_cylinder_hamiltonian(spec: &SystemSpec, grid: &Grid2D, scheme: MagneticScheme) -> Result<HamiltonianOperator> {
    expect(spec, "cylinder")?;
    let SystemKind::Cylinder { r, .. } = spec.kind else { unreachable!() };
    let (b0, b1) = (spec.b0, spec.b1);
    let p = spec.physics;
    let cf = ClosedForm {
        measure: &|_, _| r,
        inverse_metric: &|_, _| [1.0 / (r * r), 1.0],
        potential: &|t, _| [0.5 * r * r * b0, r * b1 * t.sin()],
        // i Q hbar B0 d_t and 2 i Q hbar r B1 sin d_y
        drift: &|t, _| [0.5 * b0, r * b1 * t.sin()],
        potential_square: &|t, _| r * r * (0.25 * b0 * b0 + b1 * b1 * t.sin() * t.sin()),
        geometric: &|_, _| -p.hbar * p.hbar / (8.0 * p.mass * r * r),
    };
    assemble_closed_form(grid, &cf, p, scheme, Provenance::ReferenceCylinder)
}

/// Torus with tube radius `r`, centre-line radius `R`, axial `B0` and
/// in-plane `B1`, `W = R + r cos(theta)`.
pub fn reference_torus_hamiltonian(spec: &SystemSpec, grid: &Grid2D, scheme: MagneticScheme) -> Result<HamiltonianOperator> {
    expect(spec, "torus")?;
    let SystemKind::Torus { big_r, r } = spec.kind else { unreachable!() };
    let (b0, b1) = (spec.b0, spec.b1);
    let p = spec.physics;
    let w = move |t: f64| big_r + r * t.cos();
    let cf = ClosedForm {
        // -hbar^2/r^2 d_t^2 + hbar^2 sin/(r W) d_t - hbar^2/W^2 d_p^2 is the
        // divergence form with measure r W
        measure: &|t, _| r * w(t),
        inverse_metric: &|t, _| [1.0 / (r * r), 1.0 / (w(t) * w(t))],
        potential: &|t, ph| {
            [
                0.5 * b1 * r * ph.sin() * (big_r * t.cos() + r),
                0.5 * w(t) * (b0 * w(t) - b1 * r * t.sin() * ph.cos()),
            ]
        },
        // i Q hbar B1 sin(p)(R cos + r)/r d_t and
        // i Q hbar (B0 W - B1 r sin cos(p))/W d_p
        drift: &|t, ph| {
            [
                b1 * ph.sin() * (big_r * t.cos() + r) / (2.0 * r),
                (b0 * w(t) - b1 * r * t.sin() * ph.cos()) / (2.0 * w(t)),
            ]
        },
        potential_square: &|t, ph| {
            let (st, sp, cp) = (t.sin(), ph.sin(), ph.cos());
            0.25 * ((b1 * w(t) * sp).powi(2) + (b0 * w(t)).powi(2) + (b1 * r * st).powi(2)
                - 2.0 * b0 * b1 * r * w(t) * st * cp
                - (b1 * big_r * st * sp).powi(2))
        },
        geometric: &|t, _| -(p.hbar * big_r / (2.0 * r * w(t))).powi(2) / (2.0 * p.mass),
    };
    assemble_closed_form(grid, &cf, p, scheme, Provenance::ReferenceTorus)
}

/// Imaginary zero-order coefficient of the torus operator, divided by
/// `i Q hbar`: `-B1 sin(theta) sin(phi) (R^2 + 2 r R cos(theta)) / (2 r W)`.
pub fn torus_zero_order_coefficient(big_r: f64, r: f64, b1: f64, theta: f64, phi: f64) -> f64 {
    let w = big_r + r * theta.cos();
    -b1 * theta.sin() * phi.sin() * (big_r * big_r + 2.0 * r * big_r * theta.cos()) / (2.0 * r * w)
}

pub fn reference_hamiltonian(spec: &SystemSpec, grid: &Grid2D, scheme: MagneticScheme) -> Result<HamiltonianOperator> {
    match spec.kind {
        SystemKind::Sphere { .. } => reference_sphere_hamiltonian(spec, grid, scheme),
        SystemKind::Cylinder { .. } => reference_cylinder_hamiltonian(spec, grid, scheme),
        SystemKind::Torus { .. } => reference_torus_hamiltonian(spec, grid, scheme),
    }
}

/// `l(l+1) hbar^2 / 2 m r^2` with multiplicity `2l + 1`, ascending.
pub fn sphere_free_levels(r: f64, physics: Physics, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let unit = physics.hbar * physics.hbar / (2.0 * physics.mass * r * r);
    let mut l = 0usize;
    while out.len() < count {
        for _ in 0..(2 * l + 1) {
            if out.len() < count {
                out.push((l * (l + 1)) as f64 * unit);
            }
        }
        l += 1;
    }
    out
}

/// Flux through the cylinder cross-section in units of `2 pi hbar / Q`.
pub fn flux_ratio(r: f64, b0: f64, physics: Physics) -> f64 {
    physics.charge * b0 * r * r / (2.0 * physics.hbar)
}

/// Axial field giving the flux ratio `f`.
pub fn axial_field_for_flux(r: f64, f: f64, physics: Physics) -> f64 {
    2.0 * physics.hbar * f / (physics.charge * r * r)
}

/// `hbar^2 (n - f)^2 / 2 m r^2 + hbar^2 k^2 / 2 m - hbar^2 / 8 m r^2` with
/// `k = 2 pi j / L` (periodic) or `k = pi j / L`, `j >= 1` (hard walls).
pub fn cylinder_levels(r: f64, l: f64, b0: f64, periodic: bool, physics: Physics, count: usize) -> Vec<f64> {
    let f = flux_ratio(r, b0, physics);
    let c = physics.hbar * physics.hbar / (2.0 * physics.mass);
    let span = (count as f64).sqrt() as i64 + 4 + f.abs() as i64;
    let mut all = Vec::new();
    for n in (-span - f.abs() as i64)..=(span + f.abs() as i64) {
        let js: Vec<i64> = if periodic { (-4 * span..=4 * span).collect() } else { (1..=8 * span).collect() };
        for j in js {
            let k = if periodic { 2.0 * PI * j as f64 / l } else { PI * j as f64 / l };
            all.push(c * ((n as f64 - f).powi(2) / (r * r) + k * k) - c / (4.0 * r * r));
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// Levels of one azimuthal sector `m` of the axisymmetric torus (B1 = 0),
/// by a Fourier-Galerkin discretization of the reduced theta operator
/// `-(hbar^2/2M r^2)(1/W) d(W d) + hbar^2 (m - Q A_phi/hbar)^2/(2 M W^2) + V_S`,
/// `A_phi = B0 W^2 / 2`.
pub fn torus_sector_levels(big_r: f64, r: f64, b0: f64, m: i64, physics: Physics, modes: usize) -> Result<Vec<f64>> {
    let (hbar, mass, q) = (physics.hbar, physics.mass, physics.charge);
    let nb = 2 * modes + 1;
    let samples = 8 * nb.max(64);
    let w = |t: f64| big_r + r * t.cos();
    let u = |t: f64| {
        let a_phi = 0.5 * b0 * w(t) * w(t);
        let kin = hbar * hbar * (m as f64 - q * a_phi / hbar).powi(2) / (2.0 * mass * w(t) * w(t));
        let vs = -(hbar * big_r / (2.0 * r * w(t))).powi(2) / (2.0 * mass);
        kin + vs
    };
    // Fourier coefficients F(k) = int_0^{2pi} f e^{i k t} dt, by the
    // trapezoidal rule (spectrally accurate for periodic integrands).
    let coeffs = |f: &dyn Fn(f64) -> f64| -> Vec<C64> {
        let kmax = 2 * modes;
        let vals: Vec<f64> = (0..samples).map(|j| f(2.0 * PI * j as f64 / samples as f64)).collect();
        (0..=2 * kmax)
            .map(|kk| {
                let k = kk as f64 - kmax as f64;
                let s: C64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| C64::from_polar(*v, k * 2.0 * PI * j as f64 / samples as f64))
                    .sum();
                s * (2.0 * PI / samples as f64)
            })
            .collect()
    };
    let fw = coeffs(&w);
    let fwu = coeffs(&|t| w(t) * u(t));
    let kin = hbar * hbar / (2.0 * mass * r * r);
    let mut a = alloc::vec![C64::new(0.0, 0.0); nb * nb];
    let mut b = alloc::vec![C64::new(0.0, 0.0); nb * nb];
    let kmax = 2 * modes as i64;
    for row in 0..nb {
        let nr = row as i64 - modes as i64;
        for col in 0..nb {
            let nc = col as i64 - modes as i64;
            let k = (nc - nr + kmax) as usize;
            a[row * nb + col] = fw[k] * (kin * (nr * nc) as f64) + fwu[k];
            b[row * nb + col] = fw[k];
        }
    }
    Ok(hermitian_generalized_eigen(&a, &b, nb)?.values)
}

/// Lowest `count` levels of the axisymmetric torus, union over sectors `m`.
pub fn torus_axisymmetric_levels(big_r: f64, r: f64, b0: f64, physics: Physics, count: usize) -> Result<Vec<f64>> {
    let modes = 40;
    let mut all: Vec<f64> = Vec::new();
    let mut kth = f64::INFINITY;
    let center = (physics.charge * b0 * big_r * big_r / (2.0 * physics.hbar)).round() as i64;
    for dm in 0..400i64 {
        let mut lowest = f64::INFINITY;
        for m in if dm == 0 { alloc::vec![center] } else { alloc::vec![center - dm, center + dm] } {
            let levels = torus_sector_levels(big_r, r, b0, m, physics, modes)?;
            lowest = lowest.min(levels[0]);
            all.extend(levels.into_iter().take(count));
        }
        all.sort_by(f64::total_cmp);
        if all.len() >= count {
            kth = all[count - 1];
        }
        if dm > 2 && lowest > kth {
            all.truncate(count);
            return Ok(all);
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: 400,
        residual: kth,
    })
}

/// Closed-form or reduced spectra for the configurations that have one:
/// the free sphere, the cylinder with an axial field (periodic or hard-wall
/// ends) and the axisymmetric torus.
pub fn oracle_spectra(spec: &SystemSpec, count: usize, y_boundary: Boundary) -> Result<Vec<f64>> {
    spec.validate()?;
    match spec.kind {
        SystemKind::Sphere { r } if spec.b0 == 0.0 => Ok(sphere_free_levels(r, spec.physics, count)),
        SystemKind::Cylinder { r, l } if spec.b1 == 0.0 && y_boundary != Boundary::ZeroFlux => {
            Ok(cylinder_levels(r, l, spec.b0, y_boundary == Boundary::Periodic, spec.physics, count))
        }
        SystemKind::Torus { big_r, r } if spec.b1 == 0.0 => torus_axisymmetric_levels(big_r, r, spec.b0, spec.physics, count),
        _ => Err(Error::InvalidArgument(format!("no oracle spectrum for {:?} with B0={}, B1={}", spec.kind, spec.b0, spec.b1))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_surface_hamiltonian, hermiticity_defect, relative_operator_difference, sample_geometry};
    use crate::grid::build_grid;

    #[test]
    fn closed_form_levels() {
        let p = Physics::default();
        assert_eq!(sphere_free_levels(1.0, p, 9), alloc::vec![0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0]);
        let f0 = cylinder_levels(1.0, 10.0, 0.0, true, p, 12);
        let f1 = cylinder_levels(1.0, 10.0, axial_field_for_flux(1.0, 1.0, p), true, p, 12);
        for (a, b) in f0.iter().zip(&f1) {
            assert!((a - b).abs() < 1e-12);
        }
        let half = cylinder_levels(1.0, 10.0, axial_field_for_flux(1.0, 0.5, p), true, p, 2);
        assert!(half[0].abs() < 1e-15 && half[1].abs() < 1e-15);
    }

    #[test]
    fn torus_oracle_degenerates_to_cylinder() {
        // plain Fourier check: constant W (R >> r) gives the cylinder theta operator
        let p = Physics::default();
        let levels = torus_sector_levels(50.0, 1.0, 0.0, 0, p, 30).unwrap();
        let cyl = [-0.125, 0.375, 0.375, 1.875, 1.875];
        for (g, w) in levels.iter().zip(cyl) {
            assert!((g - w).abs() <= 0.01 * w.abs());
        }
    }

    #[test]
    fn torus_zero_order_term_is_drift_divergence() {
        let (big_r, r, b0, b1) = (2.0, 0.7, 0.4, 0.9);
        let w = |t: f64| big_r + r * t.cos();
        let u = |t: f64, ph: f64| {
            [
                b1 * ph.sin() * (big_r * t.cos() + r) / (2.0 * r),
                (b0 * w(t) - b1 * r * t.sin() * ph.cos()) / (2.0 * w(t)),
            ]
        };
        let s = |t: f64| r * w(t);
        let h = 1e-5;
        for (t, ph) in [(0.3, 0.4), (1.7, 2.9), (4.0, 5.5)] {
            let d_t = (s(t + h) * u(t + h, ph)[0] - s(t - h) * u(t - h, ph)[0]) / (2.0 * h);
            let d_p = (u(t, ph + h)[1] - u(t, ph - h)[1]) / (2.0 * h);
            let div = (d_t + s(t) * d_p) / s(t);
            assert!((div - torus_zero_order_coefficient(big_r, r, b1, t, ph)).abs() < 1e-8);
            // the bracketed Q^2 sum equals A_t^2 / r^2 + A_p^2 / W^2
            let a_t = 0.5 * b1 * r * ph.sin() * (big_r * t.cos() + r);
            let a_p = 0.5 * w(t) * (b0 * w(t) - b1 * r * t.sin() * ph.cos());
            let (st, sp, cp) = (t.sin(), ph.sin(), ph.cos());
            let bracket = 0.25
                * ((b1 * w(t) * sp).powi(2) + (b0 * w(t)).powi(2) + (b1 * r * st).powi(2)
                    - 2.0 * b0 * b1 * r * w(t) * st * cp
                    - (b1 * big_r * st * sp).powi(2));
            assert!((bracket - (a_t * a_t / (r * r) + a_p * a_p / (w(t) * w(t)))).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_matches_generic_entrywise() {
        let specs = [
            SystemSpec::sphere(1.3, 0.8),
            SystemSpec::cylinder(1.1, 4.0, 0.6, 0.5),
            SystemSpec::torus(2.0, 0.8, 0.7, 0.45),
        ];
        for spec in specs {
            for scheme in [MagneticScheme::Symmetrized, MagneticScheme::Peierls] {
                let chart = spec.chart();
                let grid = build_grid(&chart, 16, 16, [None, None]).unwrap();
                let geo = sample_geometry(&chart, &grid).unwrap();
                let sp = spec.surface_potential(&grid).unwrap();
                let generic = assemble_surface_hamiltonian(&grid, &geo, &sp, spec.physics, scheme).unwrap();
                let reference = reference_hamiltonian(&spec, &grid, scheme).unwrap();
                let d = relative_operator_difference(&generic, &reference);
                assert!(d <= 1e-10, "{:?} {scheme:?}: {d:e}", spec.kind);
                assert!(hermiticity_defect(&reference) <= 1e-12);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(SystemSpec::torus(1.0, 1.0, 0.0, 0.0).validate().is_err());
        assert!(SystemSpec::sphere(-1.0, 0.0).validate().is_err());
        let grid = build_grid(&sphere(1.0), 8, 8, [None, None]).unwrap();
        assert!(reference_cylinder_hamiltonian(&SystemSpec::sphere(1.0, 0.0), &grid, MagneticScheme::Symmetrized).is_err());
        assert!(oracle_spectra(&SystemSpec::sphere(1.0, 1.0), 4, Boundary::Periodic).is_err());
    }
}
