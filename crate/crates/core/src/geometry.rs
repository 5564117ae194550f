//! Induced metric, Weingarten matrix, geometric potential and the adapted
//! metric of the thin shell around a surface.
//!
//! Conventions: the unit normal is `n = (d1 x d2) / |d1 x d2|` and the
//! Weingarten matrix is defined by `d_a n = alpha_a^c d_c r`, which in terms of
//! the second fundamental form `h_ab = n . d_a d_b r` reads
//! `alpha = -h g^{-1}`. With this sign the shell embedding
//! `R = r + q3 n` has metric `(I + q3 alpha) g (I + q3 alpha)^T`.

#[allow(unused_imports)]
use crate::math::Float;
use crate::chart::{Jet, SurfaceChart};
use crate::error::{Error, Result};
use crate::math::{cross, det2, dot, inv2, mul2, norm, scale, trace2, transpose2, Mat2, Vec3};

/// Metric part of the point data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub g: Mat2,
    pub g_inv: Mat2,
    pub sqrt_g: f64,
    pub normal: Vec3,
}

/// Full first- and second-order geometry at one chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPointData {
    pub g: Mat2,
    pub g_inv: Mat2,
    pub sqrt_g: f64,
    pub normal: Vec3,
    /// Weingarten matrix, `d_a n = alpha[a][c] d_c r`.
    pub alpha: Mat2,
    /// `Tr(alpha) / 2`.
    pub mean_curv: f64,
    /// `det(alpha)`.
    pub gauss_curv: f64,
    /// Geometric potential in units `hbar = m = 1`; see [`geometric_potential`].
    pub v_s: f64,
}

impl GeometryPointData {
    /// `M^2 - K = ((k1 - k2) / 2)^2`, clamped at zero.
    pub fn curvature_gap(&self) -> f64 {
        let a = self.alpha;
        let half_diff = 0.5 * (a[0][0] - a[1][1]);
        (half_diff * half_diff + a[0][1] * a[1][0]).max(0.0)
    }

    /// Principal curvatures (eigenvalues of `alpha`), ascending.
    pub fn principal_curvatures(&self) -> [f64; 2] {
        let d = self.curvature_gap().sqrt();
        [self.mean_curv - d, self.mean_curv + d]
    }

    /// Same point seen with the opposite normal.
    pub fn flipped(&self) -> Self {
        let alpha = [[-self.alpha[0][0], -self.alpha[0][1]], [-self.alpha[1][0], -self.alpha[1][1]]];
        let mut out = *self;
        out.normal = scale(-1.0, self.normal);
        out.alpha = alpha;
        out.mean_curv = 0.5 * trace2(alpha);
        out.gauss_curv = det2(alpha);
        out.v_s = -0.5 * out.curvature_gap();
        out
    }
}

/// Metric tensor of the 3D shell coordinates `(q1, q2, q3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedMetric3D {
    pub g: [[f64; 3]; 3],
    pub q3: f64,
    /// `|q3|` reaches a focal distance `1 / |k_i|`; the formula still holds
    /// algebraically but the shell coordinates are no longer valid.
    pub beyond_focal: bool,
}

pub(crate) fn metric_from_jet(jet: &Jet, q: [f64; 2]) -> Result<MetricData> {
    let c = cross(jet.d1, jet.d2);
    let area = norm(c);
    if !(area >= 1e-12 * norm(jet.d1) * norm(jet.d2)) || area == 0.0 {
        return Err(Error::DegenerateChart { q1: q[0], q2: q[1] });
    }
    let g = [
        [dot(jet.d1, jet.d1), dot(jet.d1, jet.d2)],
        [dot(jet.d2, jet.d1), dot(jet.d2, jet.d2)],
    ];
    let g_inv = inv2(g).ok_or(Error::DegenerateChart { q1: q[0], q2: q[1] })?;
    Ok(MetricData {
        g,
        g_inv,
        sqrt_g: area,
        normal: scale(1.0 / area, c),
    })
}

pub(crate) fn geometry_from_jet(jet: &Jet, q: [f64; 2]) -> Result<GeometryPointData> {
    let m = metric_from_jet(jet, q)?;
    let n = m.normal;
    let h = [
        [dot(n, jet.d11), dot(n, jet.d12)],
        [dot(n, jet.d12), dot(n, jet.d22)],
    ];
    let hg = mul2(h, m.g_inv);
    let alpha = [[-hg[0][0], -hg[0][1]], [-hg[1][0], -hg[1][1]]];
    let mut gp = GeometryPointData {
        g: m.g,
        g_inv: m.g_inv,
        sqrt_g: m.sqrt_g,
        normal: n,
        alpha,
        mean_curv: 0.5 * trace2(alpha),
        gauss_curv: det2(alpha),
        v_s: 0.0,
    };
    gp.v_s = -0.5 * gp.curvature_gap();
    Ok(gp)
}

/// Induced metric `g_ab = d_a r . d_b r`, its inverse, `sqrt(det g)` and the
/// unit normal.
pub fn metric_at(chart: &SurfaceChart, q: [f64; 2]) -> Result<MetricData> {
    chart.check_domain(q)?;
    metric_from_jet(&chart.jet(q[0], q[1]), q)
}

/// Complete point data including the Weingarten matrix and curvatures.
pub fn weingarten_at(chart: &SurfaceChart, q: [f64; 2]) -> Result<GeometryPointData> {
    chart.check_domain(q)?;
    geometry_from_jet(&chart.jet(q[0], q[1]), q)
}

/// `V_S = -(hbar^2 / 2m) [ (Tr(alpha)/2)^2 - det(alpha) ]`.
pub fn geometric_potential(gp: &GeometryPointData, mass: f64, hbar: f64) -> f64 {
    -(hbar * hbar / (2.0 * mass)) * gp.curvature_gap()
}

/// `G_ab = g + [alpha g + (alpha g)^T] q3 + (alpha g alpha^T) q3^2`,
/// `G_a3 = 0`, `G_33 = 1`.
pub fn adapted_metric_at(chart: &SurfaceChart, q: [f64; 2], q3: f64) -> Result<AdaptedMetric3D> {
    let gp = weingarten_at(chart, q)?;
    Ok(adapted_metric_from(&gp, q3))
}

pub fn adapted_metric_from(gp: &GeometryPointData, q3: f64) -> AdaptedMetric3D {
    let ag = mul2(gp.alpha, gp.g);
    let agat = mul2(ag, transpose2(gp.alpha));
    let mut g = [[0.0; 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b] = gp.g[a][b] + (ag[a][b] + ag[b][a]) * q3 + agat[a][b] * q3 * q3;
        }
    }
    g[2][2] = 1.0;
    let kmax = gp.principal_curvatures().iter().fold(0.0f64, |m, k| m.max(k.abs()));
    AdaptedMetric3D {
        g,
        q3,
        beyond_focal: kmax * q3.abs() >= 1.0,
    }
}

/// Norm-rescaling factor `f = 1 + Tr(alpha) q3 + det(alpha) q3^2` relating the
/// shell wavefunction to the rescaled one.
pub fn rescale_factor(gp: &GeometryPointData, q3: f64) -> Result<f64> {
    let f = 1.0 + trace2(gp.alpha) * q3 + det2(gp.alpha) * q3 * q3;
    if f > 0.0 {
        Ok(f)
    } else {
        Err(Error::NonPositiveFactor(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{bent_sheet, cylinder, plane, sphere, torus, SurfaceChart};
    use crate::math::add;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    /// Metric of an arbitrary embedding by 4th-order central differences.
    fn fd_metric(f: &dyn Fn(f64, f64) -> Vec3, q: [f64; 2], h: f64) -> Mat2 {
        let d = |axis: usize| {
            let at = |s: f64| if axis == 0 { f(q[0] + s, q[1]) } else { f(q[0], q[1] + s) };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            let mut out = [0.0; 3];
            for k in 0..3 {
                out[k] = (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h);
            }
            out
        };
        let (d1, d2) = (d(0), d(1));
        [[dot(d1, d1), dot(d1, d2)], [dot(d2, d1), dot(d2, d2)]]
    }

    /// Gaussian curvature from the metric alone (Brioschi formula).
    fn brioschi(chart: &SurfaceChart, q: [f64; 2], h: f64) -> f64 {
        let g = |a: f64, b: f64| metric_at(chart, [a, b]).unwrap().g;
        let (u, v) = (q[0], q[1]);
        let c = g(u, v);
        let (e, f, gg) = (c[0][0], c[0][1], c[1][1]);
        let du = |k: (usize, usize)| (g(u + h, v)[k.0][k.1] - g(u - h, v)[k.0][k.1]) / (2.0 * h);
        let dv = |k: (usize, usize)| (g(u, v + h)[k.0][k.1] - g(u, v - h)[k.0][k.1]) / (2.0 * h);
        let duu = |k: (usize, usize)| (g(u + h, v)[k.0][k.1] - 2.0 * c[k.0][k.1] + g(u - h, v)[k.0][k.1]) / (h * h);
        let dvv = |k: (usize, usize)| (g(u, v + h)[k.0][k.1] - 2.0 * c[k.0][k.1] + g(u, v - h)[k.0][k.1]) / (h * h);
        let duv = |k: (usize, usize)| {
            (g(u + h, v + h)[k.0][k.1] - g(u + h, v - h)[k.0][k.1] - g(u - h, v + h)[k.0][k.1]
                + g(u - h, v - h)[k.0][k.1])
                / (4.0 * h * h)
        };
        let (ee, ff, gk) = ((0, 0), (0, 1), (1, 1));
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m1 = [
            [-0.5 * dvv(ee) + duv(ff) - 0.5 * duu(gk), 0.5 * du(ee), du(ff) - 0.5 * dv(ee)],
            [dv(ff) - 0.5 * du(gk), e, f],
            [0.5 * dv(gk), f, gg],
        ];
        let m2 = [[0.0, 0.5 * dv(ee), 0.5 * du(gk)], [0.5 * dv(ee), e, f], [0.5 * du(gk), f, gg]];
        (det3(m1) - det3(m2)) / (e * gg - f * f).powi(2)
    }

    fn saddle() -> SurfaceChart {
        SurfaceChart::from_map(
            "saddle",
            |u, v| [u, v, 0.3 * u * u - 0.2 * v * v + 0.1 * u * v],
            [(-1.0, 1.0), (-1.0, 1.0)],
            [false, false],
        )
    }

    fn ellipsoid() -> SurfaceChart {
        SurfaceChart::from_map(
            "ellipsoid",
            |t, p| [1.5 * t.sin() * p.cos(), 1.0 * t.sin() * p.sin(), 0.8 * t.cos()],
            [(0.0, PI), (0.0, 2.0 * PI)],
            [false, true],
        )
    }

    #[test]
    fn metric_examples() {
        let m = metric_at(&plane(1.0, 1.0), [0.3, 0.4]).unwrap();
        assert_eq!(m.g, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.sqrt_g, 1.0);

        let s = sphere(1.0);
        let m = metric_at(&s, [PI / 2.0, 0.7]).unwrap();
        let fd = fd_metric(&|a, b| s.point(a, b), [PI / 2.0, 0.7], 1e-3);
        for a in 0..2 {
            for b in 0..2 {
                assert!((m.g[a][b] - fd[a][b]).abs() < 1e-9);
            }
        }
        assert!((m.g[0][0] - 1.0).abs() < 1e-14 && (m.g[1][1] - 1.0).abs() < 1e-14);
        assert!((m.sqrt_g - 1.0).abs() < 1e-14);

        let t = torus(2.0, 1.0);
        let m = metric_at(&t, [0.0, 1.1]).unwrap();
        let fd = fd_metric(&|a, b| t.point(a, b), [0.0, 1.1], 1e-3);
        assert!((fd[0][0] - 1.0).abs() < 1e-9 && (fd[1][1] - 9.0).abs() < 1e-9 && fd[0][1].abs() < 1e-9);
        assert!((m.g[0][0] - 1.0).abs() < 1e-14 && (m.g[1][1] - 9.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_and_out_of_domain() {
        let s = sphere(1.0);
        assert!(matches!(metric_at(&s, [0.0, 0.3]), Err(Error::DegenerateChart { .. })));
        assert!(matches!(metric_at(&s, [-0.5, 0.3]), Err(Error::OutOfDomain { axis: 0, .. })));
        // periodic axis accepts any value
        assert!(metric_at(&s, [1.0, 40.0]).is_ok());
    }

    #[test]
    fn weingarten_examples() {
        let p = weingarten_at(&plane(1.0, 1.0), [0.5, 0.5]).unwrap();
        assert_eq!((p.mean_curv, p.gauss_curv), (0.0, 0.0));
        assert_eq!(p.alpha, [[0.0; 2]; 2]);

        for r in [0.5, 1.0, 3.0] {
            let s = weingarten_at(&sphere(r), [1.1, 0.4]).unwrap();
            assert!((s.mean_curv.abs() - 1.0 / r).abs() < 1e-13);
            assert!((s.gauss_curv - 1.0 / (r * r)).abs() < 1e-13);
            assert!(s.curvature_gap().abs() < 1e-13);
            // outward normal: area grows with q3, so alpha = +I / r
            assert!(s.mean_curv > 0.0);

            let c = weingarten_at(&cylinder(r, 2.0), [0.4, 1.0]).unwrap();
            let k = c.principal_curvatures();
            assert!(k[0].abs() < 1e-14 && (k[1] - 1.0 / r).abs() < 1e-13);
            assert!((c.curvature_gap() - 1.0 / (4.0 * r * r)).abs() < 1e-13);
        }
    }

    #[test]
    fn geometric_potential_examples() {
        let s = weingarten_at(&sphere(2.0), [0.9, 2.0]).unwrap();
        assert_eq!(geometric_potential(&s, 1.0, 1.0), 0.0);
        for r in [0.5, 1.0, 2.0] {
            let c = weingarten_at(&cylinder(r, 1.0), [0.1, 0.5]).unwrap();
            assert!((geometric_potential(&c, 1.0, 1.0) + 1.0 / (8.0 * r * r)).abs() < 1e-14);
        }
        let t = weingarten_at(&torus(2.0, 1.0), [PI / 2.0, 0.3]).unwrap();
        assert!((geometric_potential(&t, 1.0, 1.0) + 0.125).abs() < 1e-14);
        // hbar^2 / m scaling
        assert!((geometric_potential(&t, 2.0, 3.0) + 0.125 * 9.0 / 2.0).abs() < 1e-13);
    }

    #[test]
    fn adapted_metric_examples() {
        let s = sphere(1.0);
        let gp = weingarten_at(&s, [PI / 2.0, 0.2]).unwrap();
        let g0 = adapted_metric_from(&gp, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(g0.g[a][b], gp.g[a][b]);
            }
            assert_eq!(g0.g[a][2], 0.0);
            assert_eq!(g0.g[2][a], 0.0);
        }
        assert_eq!(g0.g[2][2], 1.0);

        let flat = adapted_metric_at(&plane(1.0, 1.0), [0.2, 0.3], 0.37).unwrap();
        assert_eq!(flat.g, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

        let q = [PI / 2.0, 0.2];
        let shell = |a: f64, b: f64| {
            let gp = weingarten_at(&s, [a, b]).unwrap();
            add(s.point(a, b), scale(0.1, gp.normal))
        };
        let fd = fd_metric(&shell, q, 1e-3);
        let g = adapted_metric_at(&s, q, 0.1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((g.g[a][b] - fd[a][b]).abs() <= 1e-6 * fd[a][b].abs().max(1.0));
            }
        }
        assert!(!g.beyond_focal);
        assert!(adapted_metric_at(&s, q, -1.5).unwrap().beyond_focal);
    }

    #[test]
    fn rescale_factor_examples() {
        let s = weingarten_at(&sphere(2.0), [1.0, 1.0]).unwrap();
        assert_eq!(rescale_factor(&s, 0.0).unwrap(), 1.0);
        let p = weingarten_at(&plane(1.0, 1.0), [0.1, 0.1]).unwrap();
        assert_eq!(rescale_factor(&p, 0.7).unwrap(), 1.0);
        for q3 in [-0.3, 0.1, 0.5] {
            let f = rescale_factor(&s, q3).unwrap();
            assert!((f - (1.0 + q3 / 2.0).powi(2)).abs() < 1e-14);
            let g = adapted_metric_from(&s, q3);
            let det_g3 = g.g[0][0] * g.g[1][1] - g.g[0][1] * g.g[1][0];
            assert!((det_g3 / det2(s.g) - f * f).abs() < 1e-12);
        }
        // focal sphere of a radius-2 sphere sits at q3 = -2
        assert!(matches!(rescale_factor(&s, -2.0), Err(Error::NonPositiveFactor(_))));
        let c = weingarten_at(&cylinder(1.0, 1.0), [0.0, 0.5]).unwrap();
        assert!(matches!(rescale_factor(&c, -1.0), Err(Error::NonPositiveFactor(_))));
    }

    #[test]
    fn normal_flip_invariance() {
        for chart in [sphere(1.2), cylinder(0.5, 1.0), torus(3.0, 1.0), saddle(), ellipsoid()] {
            let gp = weingarten_at(&chart, [0.4, 0.6]).unwrap();
            let fl = gp.flipped();
            assert_eq!(fl.v_s, gp.v_s);
            assert_eq!(fl.gauss_curv, gp.gauss_curv);
            assert_eq!(fl.mean_curv, -gp.mean_curv);
            assert!(gp.v_s <= 0.0);
        }
    }

    #[test]
    fn theorema_egregium() {
        for chart in [torus(2.0, 1.0), ellipsoid(), saddle(), sphere(1.5), bent_sheet(1.0, 1.0, 0.5)] {
            for q in [[0.5, 0.3], [1.2, 2.0], [0.2, -0.4]] {
                if chart.check_domain(q).is_err() {
                    continue;
                }
                let k = weingarten_at(&chart, q).unwrap().gauss_curv;
                let kb = brioschi(&chart, q, 1e-3);
                assert!((k - kb).abs() < 1e-4, "{} {q:?}: {k} vs {kb}", chart.name());
            }
        }
    }

    #[test]
    fn analytic_and_fd_metric_agree_on_zoo() {
        for chart in [sphere(1.0), cylinder(1.0, 3.0), torus(2.0, 0.5), bent_sheet(1.0, 2.0, 0.3)] {
            let j = chart.jet(0.7, 0.9);
            let f = chart.finite_difference_jet(0.7, 0.9);
            let a = metric_from_jet(&j, [0.7, 0.9]).unwrap().g;
            let b = metric_from_jet(&f, [0.7, 0.9]).unwrap().g;
            for i in 0..2 {
                for k in 0..2 {
                    assert!((a[i][k] - b[i][k]).abs() <= 1e-6 * a[i][k].abs().max(1.0));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn shell_determinant_identity(t in 0.2f64..2.9, p in 0.0f64..6.28, frac in -0.1f64..0.1, which in 0usize..4) {
            let chart = match which { 0 => sphere(1.3), 1 => torus(2.0, 0.7), 2 => ellipsoid(), _ => cylinder(0.8, 3.0) };
            let q = [t, if which == 3 { p / 2.1 } else { p }];
            let gp = weingarten_at(&chart, q).unwrap();
            let kmax = gp.principal_curvatures().iter().fold(1e-12f64, |m, k| m.max(k.abs()));
            let q3 = frac / kmax;
            let g = adapted_metric_from(&gp, q3);
            let f = rescale_factor(&gp, q3).unwrap();
            let det_g3 = g.g[0][0] * g.g[1][1] - g.g[0][1] * g.g[1][0];
            prop_assert!((det_g3 - f * f * det2(gp.g)).abs() <= 1e-10 * det_g3.abs());
            prop_assert!(gp.v_s <= 0.0);
        }

        #[test]
        fn shell_metric_matches_embedding(t in 0.3f64..2.8, p in 0.0f64..6.28, frac in -0.05f64..0.05) {
            let chart = torus(2.0, 0.7);
            let q = [t, p];
            let gp = weingarten_at(&chart, q).unwrap();
            let kmax = gp.principal_curvatures().iter().fold(1e-12f64, |m, k| m.max(k.abs()));
            let q3 = frac / kmax;
            let shell = |a: f64, b: f64| {
                let n = weingarten_at(&chart, [a, b]).unwrap().normal;
                add(chart.point(a, b), scale(q3, n))
            };
            let fd = fd_metric(&shell, q, 1e-3);
            let g = adapted_metric_from(&gp, q3);
            for a in 0..2 { for b in 0..2 {
                prop_assert!((g.g[a][b] - fd[a][b]).abs() <= 1e-6 * fd[a][a].abs().max(fd[b][b].abs()));
            }}
        }
    }
}
