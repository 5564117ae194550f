//! Electromagnetic potentials: uniform-field gauges in Cartesian space,
//! pullback to shell coordinates, the normal gauge that removes the
//! transverse component, and gauge transformations on the surface.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::SurfaceChart;
use crate::error::{Error, Result};
use crate::geometry::metric_from_jet;
use crate::grid::Grid2D;
use crate::math::{add, dot, scale, Vec3, C64};
use crate::quadrature;

pub type VectorFn = Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;

/// Absolute tolerance of the normal-gauge quadrature.
pub const GAUGE_QUADRATURE_TOL: f64 = 1e-10;

/// Vector potential `A(x)` and scalar potential `V(x)` in Cartesian space.
#[derive(Clone)]
pub struct CartesianPotential {
    a_fn: VectorFn,
    v_fn: ScalarFn,
    b_label: Option<Vec3>,
}

impl fmt::Debug for CartesianPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CartesianPotential").field("b_label", &self.b_label).finish_non_exhaustive()
    }
}

impl CartesianPotential {
    pub fn new(a: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static, v: impl Fn(Vec3) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            a_fn: Arc::new(a),
            v_fn: Arc::new(v),
            b_label: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| [0.0; 3], |_| 0.0).labelled([0.0; 3])
    }

    /// Records the uniform field this potential encodes.
    pub fn labelled(mut self, b: Vec3) -> Self {
        self.b_label = Some(b);
        self
    }

    pub fn with_scalar(mut self, v: impl Fn(Vec3) -> f64 + Send + Sync + 'static) -> Self {
        self.v_fn = Arc::new(v);
        self
    }

    pub fn b_label(&self) -> Option<Vec3> {
        self.b_label
    }

    pub fn vector(&self, x: Vec3) -> Vec3 {
        (self.a_fn)(x)
    }

    pub fn scalar(&self, x: Vec3) -> f64 {
        (self.v_fn)(x)
    }

    /// Superposition of two potentials.
    pub fn sum(&self, other: &CartesianPotential) -> CartesianPotential {
        let (a1, a2) = (self.a_fn.clone(), other.a_fn.clone());
        let (v1, v2) = (self.v_fn.clone(), other.v_fn.clone());
        let b_label = match (self.b_label, other.b_label) {
            (Some(x), Some(y)) => Some(add(x, y)),
            _ => None,
        };
        CartesianPotential {
            a_fn: Arc::new(move |x| add(a1(x), a2(x))),
            v_fn: Arc::new(move |x| v1(x) + v2(x)),
            b_label,
        }
    }
}

/// Gauge of a uniform magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// `A = B x r / 2`.
    Symmetric,
    /// Linear gauge built on coordinate axis 0 (x), 1 (y) or 2 (z); for
    /// `B = B z` and axis x this is `A = (0, B x, 0)`.
    Landau(usize),
    /// Symmetric gauge for the z component; the transverse components are
    /// carried by `A_z = B_x y - B_y x`. Tangential to any cylinder about z.
    AxialSymmetric,
}

impl Gauge {
    pub fn label(&self) -> String {
        match self {
            Gauge::Symmetric => "symmetric".to_string(),
            Gauge::Landau(a) => format!("landau-{}", ["x", "y", "z"][*a % 3]),
            Gauge::AxialSymmetric => "axial-symmetric".to_string(),
        }
    }
}

/// Potential of a uniform field `b` in the requested gauge (no scalar part).
pub fn uniform_field_potential(b: Vec3, gauge: Gauge) -> CartesianPotential {
    let a: VectorFn = match gauge {
        Gauge::Symmetric => Arc::new(move |x: Vec3| {
            [
                0.5 * (b[1] * x[2] - b[2] * x[1]),
                0.5 * (b[2] * x[0] - b[0] * x[2]),
                0.5 * (b[0] * x[1] - b[1] * x[0]),
            ]
        }),
        Gauge::Landau(axis) => {
            // Pattern for axis i with (i, j, k) cyclic:
            // A_i = 0, A_j = B_k x_i, A_k = B_i x_j - B_j x_i.
            let i = axis % 3;
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            Arc::new(move |x: Vec3| {
                let mut out = [0.0; 3];
                out[j] = b[k] * x[i];
                out[k] = b[i] * x[j] - b[j] * x[i];
                out
            })
        }
        Gauge::AxialSymmetric => Arc::new(move |x: Vec3| {
            [-0.5 * b[2] * x[1], 0.5 * b[2] * x[0], b[0] * x[1] - b[1] * x[0]]
        }),
    };
    CartesianPotential {
        a_fn: a,
        v_fn: Arc::new(|_| 0.0),
        b_label: Some(b),
    }
}

/// Curl of the vector potential by 4th-order central differences.
pub fn numerical_curl(cp: &CartesianPotential, x: Vec3, h: f64) -> Vec3 {
    let d = |comp: usize, along: usize| {
        let at = |s: f64| {
            let mut y = x;
            y[along] += s;
            cp.vector(y)[comp]
        };
        (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
    };
    [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
}

fn pullback_unchecked(chart: &SurfaceChart, cp: &CartesianPotential, q: [f64; 2], q3: f64) -> Result<[f64; 3]> {
    let jet = chart.jet(q[0], q[1]);
    let m = metric_from_jet(&jet, q)?;
    let n = m.normal;
    let x = add(jet.point, scale(q3, n));
    let a = cp.vector(x);
    if q3 == 0.0 {
        return Ok([dot(a, jet.d1), dot(a, jet.d2), dot(a, n)]);
    }
    // d_a R = d_a r + q3 d_a n; the normal derivative comes from the
    // Weingarten relation.
    let gp = crate::geometry::geometry_from_jet(&jet, q)?;
    let dn = |row: usize| add(scale(gp.alpha[row][0], jet.d1), scale(gp.alpha[row][1], jet.d2));
    let t1 = add(jet.d1, scale(q3, dn(0)));
    let t2 = add(jet.d2, scale(q3, dn(1)));
    Ok([dot(a, t1), dot(a, t2), dot(a, n)])
}

/// Covariant components `(A_1, A_2, A_3)` at the shell point `R = r + q3 n`:
/// `A_a = A(R) . d_a R`, `A_3 = A(R) . n`.
pub fn pullback_potential(chart: &SurfaceChart, cp: &CartesianPotential, q: [f64; 2], q3: f64) -> Result<[f64; 3]> {
    chart.check_domain(q)?;
    pullback_unchecked(chart, cp, q, q3)
}

/// Gauge function and transformed potential of the normal gauge at one
/// shell point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalGaugePoint {
    /// `gamma(q, q3) = -int_0^q3 A_3(q, z) dz`.
    pub gamma: f64,
    /// `A' = A + grad gamma`; the third component vanishes identically.
    pub a: [f64; 3],
}

fn normal_gamma(chart: &SurfaceChart, cp: &CartesianPotential, q: [f64; 2], q3: f64) -> Result<f64> {
    let mut failure = None;
    let value = quadrature::integrate(
        |z| match pullback_unchecked(chart, cp, q, z) {
            Ok(a) => a[2],
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        0.0,
        q3,
        GAUGE_QUADRATURE_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-value?)
}

/// Normal gauge at `(q, q3)`: evaluates the gauge integral by quadrature and
/// the tangential gradient of `gamma` by central differences.
pub fn normal_gauge_at(chart: &SurfaceChart, cp: &CartesianPotential, q: [f64; 2], q3: f64) -> Result<NormalGaugePoint> {
    chart.check_domain(q)?;
    let raw = pullback_unchecked(chart, cp, q, q3)?;
    if !raw.iter().all(|v| v.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite potential at {q:?}")));
    }
    let gamma = normal_gamma(chart, cp, q, q3)?;
    let mut a = [raw[0], raw[1], 0.0];
    if q3 != 0.0 {
        for axis in 0..2 {
            let h = 1e-3 * chart.span(axis).min(1.0);
            let at = |s: f64| {
                let mut p = q;
                p[axis] += s;
                normal_gamma(chart, cp, p, q3)
            };
            let d = (8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h);
            a[axis] += d;
        }
    }
    Ok(NormalGaugePoint { gamma, a })
}

/// Covariant tangential potential and scalar potential sampled on a surface
/// grid, at the nodes and at the link midpoints used by the stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePotential {
    /// `A_a` at nodes, one array per surface axis.
    pub a: [Vec<f64>; 2],
    /// `A_a` at the links along axis `a` (grid link layout).
    pub link_a: [Vec<f64>; 2],
    /// `A_3 = A . n` at the nodes before gauge fixing (diagnostic).
    pub a3_residual: Vec<f64>,
    /// Scalar potential `V` at the nodes.
    pub v: Vec<f64>,
    pub gauge_tag: String,
}

impl SurfacePotential {
    pub fn zero(grid: &Grid2D) -> Self {
        let n = grid.len();
        Self {
            a: [alloc::vec![0.0; n], alloc::vec![0.0; n]],
            link_a: [alloc::vec![0.0; grid.link_count(0)], alloc::vec![0.0; grid.link_count(1)]],
            a3_residual: alloc::vec![0.0; n],
            v: alloc::vec![0.0; n],
            gauge_tag: "zero".to_string(),
        }
    }

    /// Potential given directly in chart components.
    pub fn from_components(
        grid: &Grid2D,
        a: impl Fn(f64, f64) -> [f64; 2],
        v: impl Fn(f64, f64) -> f64,
        tag: impl Into<String>,
    ) -> Self {
        let nodes: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.coords(i)).collect();
        let link = |axis: usize| grid.links(axis).iter().map(|l| a(l.coords[0], l.coords[1])[axis]).collect();
        Self {
            a: [
                nodes.iter().map(|c| a(c[0], c[1])[0]).collect(),
                nodes.iter().map(|c| a(c[0], c[1])[1]).collect(),
            ],
            link_a: [link(0), link(1)],
            a3_residual: alloc::vec![0.0; grid.len()],
            v: nodes.iter().map(|c| v(c[0], c[1])).collect(),
            gauge_tag: tag.into(),
        }
    }

    pub fn is_zero_vector(&self) -> bool {
        self.a.iter().chain(self.link_a.iter()).all(|v| v.iter().all(|x| *x == 0.0))
    }

    /// `A_a -> A_a + d_a gamma` with `gamma` a single-valued function of the
    /// chart coordinates. Link values use the node difference of `gamma`, so
    /// the discrete link phases shift exactly by the node phases.
    pub fn apply_surface_gauge(&self, grid: &Grid2D, gamma: impl Fn(f64, f64) -> f64) -> Result<SurfacePotential> {
        check_grid(grid, self)?;
        check_single_valued(grid, &gamma)?;
        let mut out = self.clone();
        let g = |c: [f64; 3]| gamma(c[0], c[1]);
        for axis in 0..2 {
            let h = grid.axis(axis).h();
            let step = 1e-2 * h;
            for (i, a) in out.a[axis].iter_mut().enumerate() {
                let c = grid.coords(i);
                let at = |s: f64| {
                    let mut p = c;
                    p[axis] += s;
                    g(p)
                };
                *a += (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
            }
            for link in grid.links(axis) {
                let d = match (link.lower, link.upper) {
                    (Some(lo), Some(hi)) => (g(grid.coords(hi)) - g(grid.coords(lo))) / h,
                    _ => {
                        let at = |s: f64| {
                            let mut p = link.coords;
                            p[axis] += s;
                            g(p)
                        };
                        (at(0.5 * h) - at(-0.5 * h)) / h
                    }
                };
                out.link_a[axis][link.id] += d;
            }
        }
        out.gauge_tag = format!("{}+gauge", self.gauge_tag);
        Ok(out)
    }
}

fn check_grid(grid: &Grid2D, sp: &SurfacePotential) -> Result<()> {
    if grid.dim() != 2 || sp.v.len() != grid.len() || sp.link_a[0].len() != grid.link_count(0) {
        return Err(Error::GridMismatch("surface potential was sampled on a different grid".into()));
    }
    Ok(())
}

fn check_single_valued(grid: &Grid2D, gamma: &impl Fn(f64, f64) -> f64) -> Result<()> {
    for axis in 0..2 {
        let ax = grid.axis(axis);
        if !ax.periodic() {
            continue;
        }
        let other = grid.axis(1 - axis);
        for j in 0..other.n {
            let o = other.coord(j);
            let (lo, hi) = if axis == 0 {
                (gamma(ax.min, o), gamma(ax.max, o))
            } else {
                (gamma(o, ax.min), gamma(o, ax.max))
            };
            let jump = (hi - lo).abs();
            if jump > 1e-9 * lo.abs().max(1.0) || !jump.is_finite() {
                return Err(Error::PeriodicityViolation { axis, jump });
            }
        }
    }
    Ok(())
}

/// Node phases `exp(i Q gamma / hbar)` pairing with
/// [`SurfacePotential::apply_surface_gauge`].
pub fn gauge_phase(grid: &Grid2D, gamma: impl Fn(f64, f64) -> f64, charge: f64, hbar: f64) -> Vec<C64> {
    (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            C64::from_polar(1.0, charge * gamma(c[0], c[1]) / hbar)
        })
        .collect()
}

/// `psi -> psi exp(i Q gamma / hbar)`.
pub fn transform_wavefunction(psi: &[C64], phase: &[C64]) -> Vec<C64> {
    psi.iter().zip(phase).map(|(p, f)| p * f).collect()
}

/// Samples the pullback of `cp` on the surface (`q3 = 0`) in the normal
/// gauge. The transverse component removed by the gauge is recorded in
/// `a3_residual`; the tangential components at `q3 = 0` are the raw pullback.
pub fn normal_gauge_fix(chart: &SurfaceChart, cp: &CartesianPotential, grid: &Grid2D) -> Result<SurfacePotential> {
    if grid.dim() != 2 {
        return Err(Error::GridMismatch("surface grids have two axes".into()));
    }
    let n = grid.len();
    let mut a = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut a3 = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let c = grid.coords(i);
        let q = [c[0], c[1]];
        let fixed = normal_gauge_at(chart, cp, q, 0.0)?;
        let raw = pullback_unchecked(chart, cp, q, 0.0)?;
        a[0].push(fixed.a[0]);
        a[1].push(fixed.a[1]);
        a3.push(raw[2]);
        let x = chart.point(q[0], q[1]);
        let vv = cp.scalar(x);
        if !vv.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite scalar potential at {q:?}")));
        }
        v.push(vv);
    }
    let mut link_a = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        for link in grid.links(axis) {
            let q = [link.coords[0], link.coords[1]];
            // walls of a zero-flux axis may sit on a coordinate singularity
            let val = match pullback_unchecked(chart, cp, q, 0.0) {
                Ok(p) => p[axis],
                Err(_) if link.lower.is_none() || link.upper.is_none() => 0.0,
                Err(e) => return Err(e),
            };
            link_a[axis].push(val);
        }
    }
    check_field_periodicity(chart, cp, grid)?;
    let scale_a = a[0].iter().chain(a[1].iter()).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let max_a3 = a3.iter().fold(0.0f64, |m: f64, x| m.max(x.abs()));
    let gauge_tag = if max_a3 <= 1e-12 * scale_a {
        "normal(identity)".to_string()
    } else {
        "normal".to_string()
    };
    Ok(SurfacePotential {
        a,
        link_a,
        a3_residual: a3,
        v,
        gauge_tag,
    })
}

/// Tangential components and `V` must agree across the seam of a periodic
/// grid axis.
fn check_field_periodicity(chart: &SurfaceChart, cp: &CartesianPotential, grid: &Grid2D) -> Result<()> {
    for axis in 0..2 {
        let ax = grid.axis(axis);
        if !ax.periodic() {
            continue;
        }
        let other = grid.axis(1 - axis);
        for j in 0..other.n {
            let o = other.coord(j);
            let (lo, hi) = if axis == 0 { ([ax.min, o], [ax.max, o]) } else { ([o, ax.min], [o, ax.max]) };
            let (pl, ph) = (pullback_unchecked(chart, cp, lo, 0.0)?, pullback_unchecked(chart, cp, hi, 0.0)?);
            let (vl, vh) = (cp.scalar(chart.point(lo[0], lo[1])), cp.scalar(chart.point(hi[0], hi[1])));
            let scale = pl[0].abs().max(pl[1].abs()).max(vl.abs()).max(1.0);
            let jump = (pl[0] - ph[0]).abs().max((pl[1] - ph[1]).abs()).max((vl - vh).abs());
            if jump > 1e-12 * scale * 10.0 {
                return Err(Error::PeriodicityViolation { axis, jump });
            }
        }
    }
    Ok(())
}
