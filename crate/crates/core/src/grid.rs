//! Cell-centered structured grids on chart domains (1 to 3 axes).

use alloc::format;
use alloc::vec::Vec;

use crate::chart::SurfaceChart;
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::C64;

/// Boundary treatment of one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Wavefunction vanishes on the domain wall (half a cell beyond the
    /// outermost node).
    Dirichlet,
    /// No flux through the wall. Used at the sphere poles, where the
    /// area element vanishes.
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(n: usize, min: f64, max: f64, boundary: Boundary) -> Self {
        Self { n, min, max, boundary }
    }

    pub fn h(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Node coordinate `min + (i + 1/2) h`.
    pub fn coord(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.h()
    }

    /// Link coordinate `min + k h` (the face between nodes `k - 1` and `k`).
    pub fn link_coord(&self, k: usize) -> f64 {
        self.min + k as f64 * self.h()
    }

    /// Number of links along the axis, walls included.
    pub fn n_links(&self) -> usize {
        if self.periodic() {
            self.n
        } else {
            self.n + 1
        }
    }

    /// Node on the lower side of link `k`.
    pub fn link_lower(&self, k: usize) -> Option<usize> {
        if k > 0 {
            Some(k - 1)
        } else if self.periodic() {
            Some(self.n - 1)
        } else {
            None
        }
    }

    /// Node on the upper side of link `k`.
    pub fn link_upper(&self, k: usize) -> Option<usize> {
        if k < self.n {
            Some(k)
        } else {
            None
        }
    }
}

/// One face between two neighbouring nodes (or a node and a wall).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub axis: usize,
    /// Position in the per-axis link array.
    pub id: usize,
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub coords: [f64; 3],
}

/// Corner shared by four nodes in the plane of two axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub axes: (usize, usize),
    /// Nodes `[00, 10, 01, 11]`, first index along `axes.0`.
    pub nodes: [usize; 4],
    /// Link ids (in their per-axis arrays) of the square's sides:
    /// `[a-link at b=0, b-link at a=1, a-link at b=1, b-link at a=0]`.
    pub links: [usize; 4],
    pub coords: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

/// Two-axis grid on a surface chart.
pub type Grid2D = Grid;

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::BadResolution(format!("grid needs 1 to 3 axes, got {}", axes.len())));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.n < 4 {
                return Err(Error::BadResolution(format!("axis {i} has {} nodes, need at least 4", a.n)));
            }
            if !(a.max > a.min) || !a.min.is_finite() || !a.max.is_finite() {
                return Err(Error::BadResolution(format!("axis {i} has an empty range")));
            }
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::h).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::h).product()
    }

    /// Linear index, axis 0 fastest.
    pub fn index(&self, ix: [usize; 3]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (a, axis) in self.axes.iter().enumerate() {
            idx += ix[a] * stride;
            stride *= axis.n;
        }
        idx
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (a, axis) in self.axes.iter().enumerate() {
            out[a] = idx % axis.n;
            idx /= axis.n;
        }
        out
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let ix = self.multi_index(idx);
        let mut out = [0.0; 3];
        for (a, axis) in self.axes.iter().enumerate() {
            out[a] = axis.coord(ix[a]);
        }
        out
    }

    /// Neighbour along `axis` in direction `step` (+1 or -1), wrapping on
    /// periodic axes.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let mut ix = self.multi_index(idx);
        let ax = &self.axes[axis];
        let j = ix[axis] as isize + step;
        let j = if j < 0 || j >= ax.n as isize {
            if ax.periodic() {
                j.rem_euclid(ax.n as isize)
            } else {
                return None;
            }
        } else {
            j
        };
        ix[axis] = j as usize;
        Some(self.index(ix))
    }

    /// Number of entries in the link array of `axis`.
    pub fn link_count(&self, axis: usize) -> usize {
        self.axes
            .iter()
            .enumerate()
            .map(|(a, ax)| if a == axis { ax.n_links() } else { ax.n })
            .product()
    }

    /// All links along `axis`, in link-array order (link position fastest on
    /// axis 0 ordering, same layout as nodes with that axis extended).
    pub fn links(&self, axis: usize) -> Vec<Link> {
        let mut shape = [1usize; 3];
        for (a, ax) in self.axes.iter().enumerate() {
            shape[a] = if a == axis { ax.n_links() } else { ax.n };
        }
        let mut out = Vec::with_capacity(self.link_count(axis));
        let mut id = 0;
        for i2 in 0..shape[2] {
            for i1 in 0..shape[1] {
                for i0 in 0..shape[0] {
                    let k = [i0, i1, i2];
                    let ax = &self.axes[axis];
                    let mut coords = [0.0; 3];
                    for (a, axd) in self.axes.iter().enumerate() {
                        coords[a] = if a == axis { axd.link_coord(k[a]) } else { axd.coord(k[a]) };
                    }
                    let node = |j: Option<usize>| {
                        j.map(|j| {
                            let mut m = k;
                            m[axis] = j;
                            self.index(m)
                        })
                    };
                    out.push(Link {
                        axis,
                        id,
                        lower: node(ax.link_lower(k[axis])),
                        upper: node(ax.link_upper(k[axis])),
                        coords,
                    });
                    id += 1;
                }
            }
        }
        out
    }

    /// Link id along `axis` whose upper node is `idx`'s position `k` on that axis.
    fn link_id(&self, axis: usize, mut ix: [usize; 3], k: usize) -> usize {
        ix[axis] = k;
        let mut id = 0;
        let mut stride = 1;
        for (a, ax) in self.axes.iter().enumerate() {
            id += ix[a] * stride;
            stride *= if a == axis { ax.n_links() } else { ax.n };
        }
        id
    }

    /// Link between node `idx` and its `+1` neighbour along `axis`, if any.
    pub fn forward_link(&self, idx: usize, axis: usize) -> Option<usize> {
        let ix = self.multi_index(idx);
        let ax = &self.axes[axis];
        if ix[axis] + 1 < ax.n {
            Some(self.link_id(axis, ix, ix[axis] + 1))
        } else if ax.periodic() {
            Some(self.link_id(axis, ix, 0))
        } else {
            None
        }
    }

    /// Interior corners in the `(a, b)` plane, `a < b`.
    pub fn corners(&self, a: usize, b: usize) -> Vec<Corner> {
        let mut out = Vec::new();
        for idx in 0..self.len() {
            let Some(n10) = self.neighbor(idx, a, 1) else { continue };
            let Some(n01) = self.neighbor(idx, b, 1) else { continue };
            let Some(n11) = self.neighbor(n10, b, 1) else { continue };
            let mut coords = self.coords(idx);
            coords[a] += 0.5 * self.axes[a].h();
            coords[b] += 0.5 * self.axes[b].h();
            let (Some(la0), Some(lb1), Some(la1), Some(lb0)) = (
                self.forward_link(idx, a),
                self.forward_link(n10, b),
                self.forward_link(n01, a),
                self.forward_link(idx, b),
            ) else {
                continue;
            };
            out.push(Corner {
                axes: (a, b),
                nodes: [idx, n10, n01, n11],
                links: [la0, lb1, la1, lb0],
                coords,
            });
        }
        out
    }
}

/// Cell-centered grid on a chart. Periodic chart axes become periodic grid
/// axes; otherwise the chart's natural boundary applies unless overridden.
pub fn build_grid(chart: &SurfaceChart, n1: usize, n2: usize, overrides: [Option<Boundary>; 2]) -> Result<Grid2D> {
    let dom = chart.domain();
    let nat = chart.natural_boundary();
    let axes = [n1, n2]
        .iter()
        .enumerate()
        .map(|(a, &n)| Axis::new(n, dom[a].0, dom[a].1, overrides[a].unwrap_or(nat[a])))
        .collect();
    Grid::new(axes)
}

/// Complex nodal values of a surface wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub values: Vec<C64>,
}

impl WaveFunction {
    pub fn new(values: Vec<C64>) -> Self {
        Self { values }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> C64) -> Self {
        Self {
            values: (0..grid.len()).map(|i| f(grid.coords(i))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sqr(&self, weights: &[f64]) -> Result<f64> {
        Ok(weighted_inner_product(&self.values, &self.values, weights)?.re)
    }

    /// Scales to unit weighted norm.
    pub fn normalize(&mut self, weights: &[f64]) -> Result<()> {
        let n = self.norm_sqr(weights)?.sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero wavefunction".into()));
        }
        for v in &mut self.values {
            *v /= n;
        }
        Ok(())
    }
}

/// `sum conj(psi) phi w` with `w = sqrt(g) * cell volume` per node.
pub fn weighted_inner_product(psi: &[C64], phi: &[C64], weights: &[f64]) -> Result<C64> {
    if psi.len() != phi.len() || psi.len() != weights.len() {
        return Err(Error::GridMismatch(format!(
            "lengths {} / {} / {}",
            psi.len(),
            phi.len(),
            weights.len()
        )));
    }
    Ok(psi
        .iter()
        .zip(phi)
        .zip(weights)
        .fold(C64::new(0.0, 0.0), |acc, ((a, b), w)| acc + a.conj() * b * *w))
}
