//! Parametrized surfaces `r(q1, q2)` and the built-in chart zoo.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)]
use crate::math::Float;
use crate::error::{Error, Result};
use crate::grid::Boundary;
use crate::math::{Vec3};

pub type MapFn = Box<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;
pub type JetFn = Box<dyn Fn(f64, f64) -> Jet + Send + Sync>;

/// Position and partial derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub point: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
    pub d11: Vec3,
    pub d12: Vec3,
    pub d22: Vec3,
}

/// Relative step for first derivatives when a chart only supplies its map.
pub const FD_STEP: f64 = 1e-5;
/// Relative step for second derivatives of map-only charts.
pub const FD_STEP_SECOND: f64 = 1e-4;

/// A regular parametrization of a surface patch.
pub struct SurfaceChart {
    name: String,
    map: MapFn,
    jet: Option<JetFn>,
    domain: [(f64, f64); 2],
    periodic: [bool; 2],
    natural_boundary: [Boundary; 2],
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("periodic", &self.periodic)
            .field("analytic", &self.jet.is_some())
            .finish()
    }
}

impl SurfaceChart {
    /// Chart defined by its position map only; derivatives come from
    /// central differences.
    pub fn from_map(
        name: impl Into<String>,
        map: impl Fn(f64, f64) -> Vec3 + Send + Sync + 'static,
        domain: [(f64, f64); 2],
        periodic: [bool; 2],
    ) -> Self {
        let natural_boundary = periodic.map(|p| if p { Boundary::Periodic } else { Boundary::Dirichlet });
        Self {
            name: name.into(),
            map: Box::new(map),
            jet: None,
            domain,
            periodic,
            natural_boundary,
        }
    }

    /// Attach analytic derivatives.
    pub fn with_jet(mut self, jet: impl Fn(f64, f64) -> Jet + Send + Sync + 'static) -> Self {
        self.jet = Some(Box::new(jet));
        self
    }

    pub fn with_natural_boundary(mut self, bc: [Boundary; 2]) -> Self {
        self.natural_boundary = bc;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> [(f64, f64); 2] {
        self.domain
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn natural_boundary(&self) -> [Boundary; 2] {
        self.natural_boundary
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.jet.is_some()
    }

    pub fn span(&self, axis: usize) -> f64 {
        self.domain[axis].1 - self.domain[axis].0
    }

    pub fn point(&self, q1: f64, q2: f64) -> Vec3 {
        (self.map)(q1, q2)
    }

    /// Rejects coordinates outside the closed domain of a non-periodic axis.
    pub fn check_domain(&self, q: [f64; 2]) -> Result<()> {
        for axis in 0..2 {
            if self.periodic[axis] {
                continue;
            }
            let (min, max) = self.domain[axis];
            let tol = 1e-12 * (max - min).abs().max(1.0);
            if !(q[axis] >= min - tol && q[axis] <= max + tol) {
                return Err(Error::OutOfDomain {
                    axis,
                    value: q[axis],
                    min,
                    max,
                });
            }
        }
        Ok(())
    }

    /// Analytic jet when available, finite differences otherwise.
    pub fn jet(&self, q1: f64, q2: f64) -> Jet {
        match &self.jet {
            Some(f) => f(q1, q2),
            None => self.finite_difference_jet(q1, q2),
        }
    }

    /// Central-difference derivatives of the position map, ignoring any
    /// analytic jet.
    pub fn finite_difference_jet(&self, q1: f64, q2: f64) -> Jet {
        let h1 = FD_STEP * self.span(0);
        let h2 = FD_STEP * self.span(1);
        let s1 = FD_STEP_SECOND * self.span(0);
        let s2 = FD_STEP_SECOND * self.span(1);
        let m = &self.map;
        let p = m(q1, q2);
        let mut jet = Jet {
            point: p,
            d1: [0.0; 3],
            d2: [0.0; 3],
            d11: [0.0; 3],
            d12: [0.0; 3],
            d22: [0.0; 3],
        };
        let (a1, b1) = (m(q1 + h1, q2), m(q1 - h1, q2));
        let (a2, b2) = (m(q1, q2 + h2), m(q1, q2 - h2));
        let (c1p, c1m) = (m(q1 + s1, q2), m(q1 - s1, q2));
        let (c2p, c2m) = (m(q1, q2 + s2), m(q1, q2 - s2));
        let pp = m(q1 + s1, q2 + s2);
        let pm = m(q1 + s1, q2 - s2);
        let mp = m(q1 - s1, q2 + s2);
        let mm = m(q1 - s1, q2 - s2);
        for k in 0..3 {
            jet.d1[k] = (a1[k] - b1[k]) / (2.0 * h1);
            jet.d2[k] = (a2[k] - b2[k]) / (2.0 * h2);
            jet.d11[k] = (c1p[k] - 2.0 * p[k] + c1m[k]) / (s1 * s1);
            jet.d22[k] = (c2p[k] - 2.0 * p[k] + c2m[k]) / (s2 * s2);
            jet.d12[k] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * s1 * s2);
        }
        jet
    }
}

/// Flat sheet `(q1, q2, 0)` on `[0, lx] x [0, ly]`.
pub fn plane(lx: f64, ly: f64) -> SurfaceChart {
    SurfaceChart::from_map("plane", |q1, q2| [q1, q2, 0.0], [(0.0, lx), (0.0, ly)], [false, false]).with_jet(
        |q1, q2| Jet {
            point: [q1, q2, 0.0],
            d1: [1.0, 0.0, 0.0],
            d2: [0.0, 1.0, 0.0],
            d11: [0.0; 3],
            d12: [0.0; 3],
            d22: [0.0; 3],
        },
    )
}

/// Sphere of radius `r` in `(theta, phi)` with the polar axis along z.
pub fn sphere(r: f64) -> SurfaceChart {
    let map = move |t: f64, p: f64| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()];
    SurfaceChart::from_map("sphere", map, [(0.0, PI), (0.0, 2.0 * PI)], [false, true])
        .with_jet(move |t, p| {
            let (st, ct) = (t.sin(), t.cos());
            let (sp, cp) = (p.sin(), p.cos());
            Jet {
                point: [r * st * cp, r * st * sp, r * ct],
                d1: [r * ct * cp, r * ct * sp, -r * st],
                d2: [-r * st * sp, r * st * cp, 0.0],
                d11: [-r * st * cp, -r * st * sp, -r * ct],
                d12: [-r * ct * sp, r * ct * cp, 0.0],
                d22: [-r * st * cp, -r * st * sp, 0.0],
            }
        })
        .with_natural_boundary([Boundary::ZeroFlux, Boundary::Periodic])
}

/// Cylinder of radius `r` and length `l` in `(theta, y)`, axis along z.
pub fn cylinder(r: f64, l: f64) -> SurfaceChart {
    let map = move |t: f64, y: f64| [r * t.cos(), r * t.sin(), y];
    SurfaceChart::from_map("cylinder", map, [(0.0, 2.0 * PI), (0.0, l)], [true, false]).with_jet(move |t, y| {
        let (st, ct) = (t.sin(), t.cos());
        Jet {
            point: [r * ct, r * st, y],
            d1: [-r * st, r * ct, 0.0],
            d2: [0.0, 0.0, 1.0],
            d11: [-r * ct, -r * st, 0.0],
            d12: [0.0; 3],
            d22: [0.0; 3],
        }
    })
}

/// Ring torus in `(theta, phi)`: `W(theta) = R + r cos(theta)` is the
/// distance from the symmetry axis (z).
pub fn torus(big_r: f64, r: f64) -> SurfaceChart {
    let map = move |t: f64, p: f64| {
        let w = big_r + r * t.cos();
        [w * p.cos(), w * p.sin(), r * t.sin()]
    };
    SurfaceChart::from_map("torus", map, [(0.0, 2.0 * PI), (0.0, 2.0 * PI)], [true, true]).with_jet(
        move |t, p| {
            let (st, ct) = (t.sin(), t.cos());
            let (sp, cp) = (p.sin(), p.cos());
            let w = big_r + r * ct;
            Jet {
                point: [w * cp, w * sp, r * st],
                d1: [-r * st * cp, -r * st * sp, r * ct],
                d2: [-w * sp, w * cp, 0.0],
                d11: [-r * ct * cp, -r * ct * sp, -r * st],
                d12: [r * st * sp, -r * st * cp, 0.0],
                d22: [-w * cp, -w * sp, 0.0],
            }
        },
    )
}

/// Flat sheet `[0, lx] x [0, ly]` rolled isometrically around a circle of
/// radius `bend` along q1. Same induced metric as [`plane`], nonzero curvature.
pub fn bent_sheet(lx: f64, ly: f64, bend: f64) -> SurfaceChart {
    let map = move |u: f64, v: f64| [bend * (u / bend).sin(), v, bend * (1.0 - (u / bend).cos())];
    SurfaceChart::from_map("bent-sheet", map, [(0.0, lx), (0.0, ly)], [false, false]).with_jet(move |u, v| {
        let (s, c) = ((u / bend).sin(), (u / bend).cos());
        Jet {
            point: [bend * s, v, bend * (1.0 - c)],
            d1: [c, 0.0, s],
            d2: [0.0, 1.0, 0.0],
            d11: [-s / bend, 0.0, c / bend],
            d12: [0.0; 3],
            d22: [0.0; 3],
        }
    })
}

/// Named built-in charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinSurface {
    Plane { lx: f64, ly: f64 },
    Sphere { r: f64 },
    Cylinder { r: f64, l: f64 },
    Torus { big_r: f64, r: f64 },
    BentSheet { lx: f64, ly: f64, bend: f64 },
}

impl BuiltinSurface {
    pub fn chart(&self) -> Result<SurfaceChart> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(alloc::format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            BuiltinSurface::Plane { lx, ly } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                Ok(plane(lx, ly))
            }
            BuiltinSurface::Sphere { r } => {
                positive("r", r)?;
                Ok(sphere(r))
            }
            BuiltinSurface::Cylinder { r, l } => {
                positive("r", r)?;
                positive("L", l)?;
                Ok(cylinder(r, l))
            }
            BuiltinSurface::Torus { big_r, r } => {
                positive("r", r)?;
                if !(big_r > r) {
                    return Err(Error::InvalidArgument("ring torus requires R > r > 0".to_string()));
                }
                Ok(torus(big_r, r))
            }
            BuiltinSurface::BentSheet { lx, ly, bend } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                positive("bend", bend)?;
                Ok(bent_sheet(lx, ly, bend))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{norm, sub};

    fn zoo() -> [SurfaceChart; 5] {
        [plane(2.0, 3.0), sphere(1.3), cylinder(0.7, 4.0), torus(2.0, 1.0), bent_sheet(2.0, 1.0, 0.8)]
    }

    #[test]
    fn analytic_jets_match_finite_differences() {
        for chart in zoo() {
            let [(a0, a1), (b0, b1)] = chart.domain();
            for k in 1..6 {
                let q1 = a0 + (a1 - a0) * (0.13 * k as f64 + 0.02);
                let q2 = b0 + (b1 - b0) * (0.17 * k as f64 + 0.01);
                let a = chart.jet(q1, q2);
                let f = chart.finite_difference_jet(q1, q2);
                for (x, y) in [(a.d1, f.d1), (a.d2, f.d2)] {
                    assert!(norm(sub(x, y)) <= 1e-6 * norm(x).max(1.0), "{}", chart.name());
                }
                for (x, y) in [(a.d11, f.d11), (a.d12, f.d12), (a.d22, f.d22)] {
                    assert!(norm(sub(x, y)) <= 1e-5 * norm(x).max(1.0), "{}", chart.name());
                }
            }
        }
    }

    #[test]
    fn periodic_axes_close_up() {
        for chart in zoo() {
            let dom = chart.domain();
            for axis in 0..2 {
                if !chart.periodic()[axis] {
                    continue;
                }
                for k in 0..7 {
                    let other = dom[1 - axis].0 + (dom[1 - axis].1 - dom[1 - axis].0) * k as f64 / 7.0;
                    let (lo, hi) = if axis == 0 {
                        (chart.point(dom[0].0, other), chart.point(dom[0].1, other))
                    } else {
                        (chart.point(other, dom[1].0), chart.point(other, dom[1].1))
                    };
                    assert!(norm(sub(lo, hi)) <= 1e-12 * 10.0, "{}", chart.name());
                }
            }
        }
    }

    #[test]
    fn domain_check_rejects_outside_points() {
        let c = cylinder(1.0, 2.0);
        assert!(c.check_domain([10.0, 1.0]).is_ok());
        assert!(matches!(c.check_domain([1.0, 2.5]), Err(Error::OutOfDomain { axis: 1, .. })));
    }

    #[test]
    fn torus_requires_ring_shape() {
        assert!(BuiltinSurface::Torus { big_r: 1.0, r: 2.0 }.chart().is_err());
        assert!(BuiltinSurface::Sphere { r: -1.0 }.chart().is_err());
    }
}
