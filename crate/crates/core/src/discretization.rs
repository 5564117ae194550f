//! Assembly of gauge-covariant Hamiltonians on structured grids.
//!
//! Every operator is built as the Hermitian matrix `K = W H` of a discrete
//! energy form, where `W = diag(sqrt(G) * cell volume)`; `H = W^{-1} K` is
//! then self-adjoint in the weighted inner product. All front-ends (surface
//! charts, generic metrics, closed-form reference coefficients) reduce to a
//! [`StencilCoefficients`] set and share one assembler.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::SurfaceChart;
use crate::error::{Error, Result};
use crate::fields::SurfacePotential;
use crate::geometry::{geometric_potential, geometry_from_jet, metric_from_jet, GeometryPointData, MetricData};
use crate::grid::{Boundary, Grid, Grid2D};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::C64;
use crate::sparse::CsrMatrix;

/// Hermiticity tolerance of the internal assembly check.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub mass: f64,
    pub charge: f64,
    pub hbar: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            mass: 1.0,
            charge: 1.0,
            hbar: 1.0,
        }
    }
}

impl Physics {
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

/// Discretization of the first-order magnetic terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagneticScheme {
    /// Central differences split equally between the two first-order terms,
    /// with the `Q^2 A^2` term on the diagonal.
    #[default]
    Symmetrized,
    /// Link phases `exp(-i Q A h / hbar)` on the kinetic stencil. Exactly
    /// covariant under discrete gauge transformations.
    Peierls,
}

impl MagneticScheme {
    pub fn label(&self) -> &'static str {
        match self {
            MagneticScheme::Symmetrized => "symmetrized",
            MagneticScheme::Peierls => "peierls",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GenericAssembled,
    SurfaceAssembled,
    ReferenceSphere,
    ReferenceCylinder,
    ReferenceTorus,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::GenericAssembled => "generic-assembled",
            Provenance::SurfaceAssembled => "surface-assembled",
            Provenance::ReferenceSphere => "reference-sphere",
            Provenance::ReferenceCylinder => "reference-cylinder",
            Provenance::ReferenceTorus => "reference-torus",
        }
    }
}

/// Pointwise coefficient fields consumed by the assembler.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilCoefficients {
    /// `sqrt(G)` at nodes.
    pub measure: Vec<f64>,
    /// `G^{ab}` at nodes (unused axes are zero).
    pub inverse_metric: Vec<[[f64; 3]; 3]>,
    /// `sqrt(G) G^{aa}` at the links of each axis; ignored on zero-flux walls.
    pub link_conductance: Vec<Vec<f64>>,
    /// `sqrt(G) G^{ab}` at the interior corners of each axis pair `a < b`,
    /// in [`Grid::corners`] order.
    pub corner_conductance: Vec<((usize, usize), Vec<f64>)>,
    /// Covariant `A_a` at nodes.
    pub node_potential: Vec<[f64; 3]>,
    /// `u^a = G^{ab} A_b` at nodes.
    pub drift: Vec<[f64; 3]>,
    /// `A_a` at the links of each axis.
    pub link_potential: Vec<Vec<f64>>,
    /// `G^{ab} A_a A_b` at nodes.
    pub potential_square: Vec<f64>,
    /// Geometric potential at nodes.
    pub geometric: Vec<f64>,
    /// Electric energy `Q V` at nodes.
    pub electric: Vec<f64>,
}

impl StencilCoefficients {
    fn check(&self, grid: &Grid) -> Result<()> {
        let n = grid.len();
        let d = grid.dim();
        let ok = self.measure.len() == n
            && self.inverse_metric.len() == n
            && self.node_potential.len() == n
            && self.drift.len() == n
            && self.potential_square.len() == n
            && self.geometric.len() == n
            && self.electric.len() == n
            && self.link_conductance.len() == d
            && self.link_potential.len() == d
            && (0..d).all(|a| self.link_conductance[a].len() == grid.link_count(a) && self.link_potential[a].len() == grid.link_count(a));
        if !ok {
            return Err(Error::GridMismatch("stencil coefficients do not match the grid".into()));
        }
        for (i, s) in self.measure.iter().enumerate() {
            if !(*s > 0.0) || !s.is_finite() {
                return Err(Error::NonPositiveMetric(i));
            }
        }
        Ok(())
    }
}

/// Assembled operator. `weighted` holds `K = W H`; `weights` holds `W`.
#[derive(Debug, Clone)]
pub struct HamiltonianOperator {
    weighted: CsrMatrix,
    weights: Vec<f64>,
    pub physics: Physics,
    pub scheme: MagneticScheme,
    pub provenance: Provenance,
    pub grid: Grid,
    pub coefficients: StencilCoefficients,
}

impl HamiltonianOperator {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `W H`, Hermitian.
    pub fn weighted_matrix(&self) -> &CsrMatrix {
        &self.weighted
    }

    /// Mutable access for fault-injection checks.
    pub fn weighted_matrix_mut(&mut self) -> &mut CsrMatrix {
        &mut self.weighted
    }

    /// Quadrature weights `sqrt(G) * cell volume`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sqrt(G)` at nodes.
    pub fn measure(&self) -> &[f64] {
        &self.coefficients.measure
    }

    /// Entry `H_ij`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.weighted.get(i, j) / self.weights[i]
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = alloc::vec![C64::new(0.0, 0.0); x.len()];
        self.weighted.mul_vec(x, &mut y);
        for (v, w) in y.iter_mut().zip(&self.weights) {
            *v /= *w;
        }
        y
    }

    /// `y = W H x`.
    pub fn apply_weighted(&self, x: &[C64]) -> Vec<C64> {
        let mut y = alloc::vec![C64::new(0.0, 0.0); x.len()];
        self.weighted.mul_vec(x, &mut y);
        y
    }
}

/// `max|WH - (WH)^H| / max|WH|`.
pub fn hermiticity_defect(h: &HamiltonianOperator) -> f64 {
    let scale = h.weighted.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    h.weighted.hermitian_defect_abs() / scale
}

/// Maximum entrywise difference of two operators relative to the larger
/// entry scale.
pub fn relative_operator_difference(a: &HamiltonianOperator, b: &HamiltonianOperator) -> f64 {
    let scale = a.weighted.max_abs().max(b.weighted.max_abs());
    if scale == 0.0 {
        return 0.0;
    }
    a.weighted.max_abs_difference(&b.weighted) / scale
}

fn peierls_phase(physics: &Physics, a_link: f64, h: f64) -> C64 {
    C64::from_polar(1.0, -physics.charge * a_link * h / physics.hbar)
}

/// Builds `K = W H` from coefficient fields.
pub fn assemble_from_coefficients(
    grid: &Grid,
    coefficients: StencilCoefficients,
    physics: Physics,
    scheme: MagneticScheme,
    provenance: Provenance,
) -> Result<HamiltonianOperator> {
    coefficients.check(grid)?;
    let n = grid.len();
    let d = grid.dim();
    let vol = grid.cell_volume();
    let c0 = physics.kinetic_prefactor();
    let one = C64::new(1.0, 0.0);
    let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(n * (2 * d + 1) * 2);
    let peierls = scheme == MagneticScheme::Peierls;

    for a in 0..d {
        let axis = grid.axis(a);
        let h = axis.h();
        let links = grid.links(a);
        for link in &links {
            let base = c0 * coefficients.link_conductance[a][link.id] * vol / (h * h);
            match (link.lower, link.upper) {
                (Some(i), Some(j)) => {
                    let tr = if peierls {
                        peierls_phase(&physics, coefficients.link_potential[a][link.id], h)
                    } else {
                        one
                    };
                    t.push((i, i, C64::new(base, 0.0)));
                    t.push((j, j, C64::new(base, 0.0)));
                    t.push((i, j, -tr * base));
                    t.push((j, i, -tr.conj() * base));
                }
                (Some(i), None) | (None, Some(i)) => {
                    if axis.boundary == Boundary::Dirichlet {
                        t.push((i, i, C64::new(2.0 * base, 0.0)));
                    }
                }
                (None, None) => {}
            }
        }
    }

    for ((a, b), kappa) in &coefficients.corner_conductance {
        let (a, b) = (*a, *b);
        let (ha, hb) = (grid.axis(a).h(), grid.axis(b).h());
        for (corner, k) in grid.corners(a, b).iter().zip(kappa) {
            if *k == 0.0 {
                continue;
            }
            let w = c0 * k * vol;
            // values transported to the frame of node 00
            let tr = |axis: usize, id: usize, h: f64| {
                if peierls {
                    peierls_phase(&physics, coefficients.link_potential[axis][id], h)
                } else {
                    one
                }
            };
            let t10 = tr(a, corner.links[0], ha);
            let t01 = tr(b, corner.links[3], hb);
            let t11 = t10 * tr(b, corner.links[1], hb);
            let nodes = corner.nodes;
            let alpha = [-one / (2.0 * ha), t10 / (2.0 * ha), -t01 / (2.0 * ha), t11 / (2.0 * ha)];
            let beta = [-one / (2.0 * hb), -t10 / (2.0 * hb), t01 / (2.0 * hb), t11 / (2.0 * hb)];
            for m in 0..4 {
                for l in 0..4 {
                    let v = (alpha[m].conj() * beta[l] + beta[m].conj() * alpha[l]) * w;
                    t.push((nodes[m], nodes[l], v));
                }
            }
        }
    }

    if !peierls {
        let pref = C64::new(0.0, physics.charge * physics.hbar / (2.0 * physics.mass)) * vol;
        for a in 0..d {
            let h = grid.axis(a).h();
            if coefficients.drift.iter().all(|u| u[a] == 0.0) {
                continue;
            }
            for i in 0..n {
                let Some(j) = grid.neighbor(i, a, 1) else { continue };
                let s = coefficients.measure[j] * coefficients.drift[j][a] + coefficients.measure[i] * coefficients.drift[i][a];
                t.push((i, j, pref * (s / (2.0 * h))));
                t.push((j, i, pref * (-s / (2.0 * h))));
            }
        }
    }

    for i in 0..n {
        let mut diag = coefficients.geometric[i] + coefficients.electric[i];
        if !peierls {
            diag += physics.charge * physics.charge * coefficients.potential_square[i] / (2.0 * physics.mass);
        }
        t.push((i, i, C64::new(vol * coefficients.measure[i] * diag, 0.0)));
    }

    let weighted = CsrMatrix::from_triplets(n, t);
    let weights: Vec<f64> = coefficients.measure.iter().map(|s| s * vol).collect();
    let op = HamiltonianOperator {
        weighted,
        weights,
        physics,
        scheme,
        provenance,
        grid: grid.clone(),
        coefficients,
    };
    let defect = hermiticity_defect(&op);
    if !(defect <= HERMITICITY_TOLERANCE) {
        return Err(Error::NonHermitianAssembly(defect));
    }
    Ok(op)
}

/// Geometry of a surface chart sampled where the stencils need it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySamples {
    pub nodes: Vec<GeometryPointData>,
    /// Metric at the links of each axis; `None` on zero-flux walls.
    pub links: [Vec<Option<MetricData>>; 2],
    /// Metric at the interior corners, in `grid.corners(0, 1)` order.
    pub corners: Vec<MetricData>,
}

fn is_closed_wall(grid: &Grid, axis: usize, lower: Option<usize>, upper: Option<usize>) -> bool {
    (lower.is_none() || upper.is_none()) && grid.axis(axis).boundary == Boundary::ZeroFlux
}

/// Evaluates the geometry at every node, every link midpoint and every
/// interior corner of `grid`.
pub fn sample_geometry(chart: &SurfaceChart, grid: &Grid2D) -> Result<GeometrySamples> {
    if grid.dim() != 2 {
        return Err(Error::GridMismatch(format!("surface grids have two axes, got {}", grid.dim())));
    }
    let nodes = (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            let q = [c[0], c[1]];
            geometry_from_jet(&chart.jet(q[0], q[1]), q)
        })
        .collect::<Result<Vec<_>>>()?;
    let metric = |c: [f64; 3]| metric_from_jet(&chart.jet(c[0], c[1]), [c[0], c[1]]);
    let mut links = [Vec::new(), Vec::new()];
    for (axis, out) in links.iter_mut().enumerate() {
        for link in grid.links(axis) {
            if is_closed_wall(grid, axis, link.lower, link.upper) {
                out.push(None);
            } else {
                out.push(Some(metric(link.coords)?));
            }
        }
    }
    let corners = grid.corners(0, 1).iter().map(|c| metric(c.coords)).collect::<Result<Vec<_>>>()?;
    Ok(GeometrySamples { nodes, links, corners })
}

fn embed2(m: [[f64; 2]; 2]) -> [[f64; 3]; 3] {
    [[m[0][0], m[0][1], 0.0], [m[1][0], m[1][1], 0.0], [0.0; 3]]
}

/// Surface Hamiltonian of a charged particle confined to the chart, with the
/// geometric potential and the tangential potential `sp`.
pub fn assemble_surface_hamiltonian(
    grid: &Grid2D,
    geometry: &GeometrySamples,
    sp: &SurfacePotential,
    physics: Physics,
    scheme: MagneticScheme,
) -> Result<HamiltonianOperator> {
    let n = grid.len();
    if geometry.nodes.len() != n || sp.v.len() != n || sp.link_a[0].len() != grid.link_count(0) || sp.link_a[1].len() != grid.link_count(1) {
        return Err(Error::GridMismatch("geometry and potential were sampled on different grids".into()));
    }
    let mut coefficients = StencilCoefficients {
        measure: Vec::with_capacity(n),
        inverse_metric: Vec::with_capacity(n),
        link_conductance: Vec::new(),
        corner_conductance: Vec::new(),
        node_potential: Vec::with_capacity(n),
        drift: Vec::with_capacity(n),
        link_potential: sp.link_a.to_vec(),
        potential_square: Vec::with_capacity(n),
        geometric: Vec::with_capacity(n),
        electric: Vec::with_capacity(n),
    };
    for (i, gp) in geometry.nodes.iter().enumerate() {
        let a = [sp.a[0][i], sp.a[1][i]];
        let gi = gp.g_inv;
        let u = [gi[0][0] * a[0] + gi[0][1] * a[1], gi[1][0] * a[0] + gi[1][1] * a[1]];
        coefficients.measure.push(gp.sqrt_g);
        coefficients.inverse_metric.push(embed2(gi));
        coefficients.node_potential.push([a[0], a[1], 0.0]);
        coefficients.drift.push([u[0], u[1], 0.0]);
        coefficients.potential_square.push(u[0] * a[0] + u[1] * a[1]);
        coefficients.geometric.push(geometric_potential(gp, physics.mass, physics.hbar));
        coefficients.electric.push(physics.charge * sp.v[i]);
    }
    for axis in 0..2 {
        coefficients
            .link_conductance
            .push(geometry.links[axis].iter().map(|m| m.map_or(0.0, |m| m.sqrt_g * m.g_inv[axis][axis])).collect());
    }
    if geometry.corners.iter().any(|m| m.g_inv[0][1] != 0.0) {
        coefficients
            .corner_conductance
            .push(((0, 1), geometry.corners.iter().map(|m| m.sqrt_g * m.g_inv[0][1]).collect()));
    }
    assemble_from_coefficients(grid, coefficients, physics, scheme, Provenance::SurfaceAssembled)
}

/// Metric, potentials and scalar potential of a generic coordinate system,
/// given as functions of the node coordinates.
pub struct GenericFields<'a> {
    /// Inverse metric `G^{ij}` and `sqrt(det G)`.
    pub metric: &'a dyn Fn([f64; 3]) -> Result<([[f64; 3]; 3], f64)>,
    /// Covariant `A_j`.
    pub potential: &'a dyn Fn([f64; 3]) -> [f64; 3],
    /// Scalar potential `V`.
    pub scalar: &'a dyn Fn([f64; 3]) -> f64,
}

fn check_positive(g: &[[f64; 3]; 3], sqrt_g: f64, d: usize) -> bool {
    if !(sqrt_g > 0.0) {
        return false;
    }
    let m1 = g[0][0];
    let m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let m3 = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    match d {
        1 => m1 > 0.0,
        2 => m1 > 0.0 && m2 > 0.0,
        _ => m1 > 0.0 && m2 > 0.0 && m3 > 0.0,
    }
}

/// Covariant magnetic Schroedinger operator for a generic metric on a grid
/// of dimension 2 or 3. No geometric potential is added.
pub fn assemble_generic_hamiltonian(grid: &Grid, fields: &GenericFields<'_>, physics: Physics, scheme: MagneticScheme) -> Result<HamiltonianOperator> {
    let d = grid.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::BadResolution(format!("generic assembly needs 2 or 3 axes, got {d}")));
    }
    let n = grid.len();
    let mut coefficients = StencilCoefficients {
        measure: Vec::with_capacity(n),
        inverse_metric: Vec::with_capacity(n),
        link_conductance: Vec::new(),
        corner_conductance: Vec::new(),
        node_potential: Vec::with_capacity(n),
        drift: Vec::with_capacity(n),
        link_potential: Vec::new(),
        potential_square: Vec::with_capacity(n),
        geometric: alloc::vec![0.0; n],
        electric: Vec::with_capacity(n),
    };
    for i in 0..n {
        let x = grid.coords(i);
        let (g, s) = (fields.metric)(x)?;
        if !check_positive(&g, s, d) {
            return Err(Error::NonPositiveMetric(i));
        }
        let mut a = (fields.potential)(x);
        for c in a.iter_mut().skip(d) {
            *c = 0.0;
        }
        let mut u = [0.0; 3];
        for (r, ur) in u.iter_mut().enumerate().take(d) {
            *ur = (0..d).map(|c| g[r][c] * a[c]).sum();
        }
        coefficients.measure.push(s);
        coefficients.inverse_metric.push(g);
        coefficients.node_potential.push(a);
        coefficients.drift.push(u);
        coefficients.potential_square.push((0..d).map(|c| u[c] * a[c]).sum());
        coefficients.electric.push(physics.charge * (fields.scalar)(x));
    }
    for axis in 0..d {
        let mut kappa = Vec::with_capacity(grid.link_count(axis));
        let mut pot = Vec::with_capacity(grid.link_count(axis));
        for link in grid.links(axis) {
            if is_closed_wall(grid, axis, link.lower, link.upper) {
                kappa.push(0.0);
                pot.push(0.0);
                continue;
            }
            let (g, s) = (fields.metric)(link.coords)?;
            kappa.push(s * g[axis][axis]);
            pot.push((fields.potential)(link.coords)[axis]);
        }
        coefficients.link_conductance.push(kappa);
        coefficients.link_potential.push(pot);
    }
    for a in 0..d {
        for b in a + 1..d {
            let kappa = grid
                .corners(a, b)
                .iter()
                .map(|c| (fields.metric)(c.coords).map(|(g, s)| s * g[a][b]))
                .collect::<Result<Vec<_>>>()?;
            if kappa.iter().any(|k| *k != 0.0) {
                coefficients.corner_conductance.push(((a, b), kappa));
            }
        }
    }
    assemble_from_coefficients(grid, coefficients, physics, scheme, Provenance::GenericAssembled)
}

/// Short human-readable operator summary.
pub fn describe(h: &HamiltonianOperator) -> String {
    format!(
        "{} operator, {} nodes, {} nonzeros, {} magnetic scheme",
        h.provenance.label(),
        h.len(),
        h.weighted.nnz(),
        h.scheme.label()
    )
}
