//! Eigenpairs and time evolution of assembled operators.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::banded::{BandedLu, Ordering};
use crate::dense::hermitian_eigen;
use crate::discretization::{hermiticity_defect, HamiltonianOperator};
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{XorShift, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors, orthonormal in the weighted inner product.
    pub eigenvectors: Vec<WaveFunction>,
    /// `||H psi - E psi||_W` per pair.
    pub residuals: Vec<f64>,
    pub solver_tag: String,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative residual target, scaled by `max(1, |E|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Operators up to this size are diagonalized densely.
    pub dense_threshold: usize,
    /// Seed of the random starting block.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 2000,
            dense_threshold: 1024,
            seed: 0x5eed_cafe,
        }
    }
}

fn weighted_norm_of_residual(h: &HamiltonianOperator, x: &[C64], lambda: f64) -> f64 {
    let kx = h.apply_weighted(x);
    let w = h.weights();
    kx.iter()
        .zip(x)
        .zip(w)
        .map(|((k, xi), wi)| (k - xi * (lambda * wi)).norm_sqr() / wi)
        .sum::<f64>()
        .sqrt()
}

/// Gershgorin bounds of `W^{-1/2} K W^{-1/2}`.
pub fn spectral_bounds(h: &HamiltonianOperator) -> (f64, f64) {
    let w = h.weights();
    let k = h.weighted_matrix();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..h.len() {
        let mut diag = 0.0;
        let mut off = 0.0;
        for (j, v) in k.row(i) {
            let s = v / (w[i] * w[j]).sqrt();
            if i == j {
                diag = s.re;
            } else {
                off += s.norm();
            }
        }
        lo = lo.min(diag - off);
        hi = hi.max(diag + off);
    }
    (lo, hi)
}

/// The `k` lowest eigenpairs with default options.
pub fn eigensolve_lowest(h: &HamiltonianOperator, k: usize) -> Result<SpectrumResult> {
    eigensolve_lowest_with(h, k, &EigenOptions::default())
}

pub fn eigensolve_lowest_with(h: &HamiltonianOperator, k: usize, options: &EigenOptions) -> Result<SpectrumResult> {
    let n = h.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of an operator of size {n}")));
    }
    let defect = hermiticity_defect(h);
    if !(defect <= 1e-10) {
        return Err(Error::NonHermitianAssembly(defect));
    }
    if n <= options.dense_threshold {
        dense_lowest(h, k)
    } else {
        subspace_lowest(h, k, options)
    }
}

fn dense_lowest(h: &HamiltonianOperator, k: usize) -> Result<SpectrumResult> {
    let n = h.len();
    let w = h.weights();
    let mut a = alloc::vec![ZERO; n * n];
    for i in 0..n {
        for (j, v) in h.weighted_matrix().row(i) {
            a[i * n + j] = v / (w[i] * w[j]).sqrt();
        }
    }
    let eig = hermitian_eigen(&a, n)?;
    let mut result = SpectrumResult {
        eigenvalues: Vec::with_capacity(k),
        eigenvectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        solver_tag: "dense-householder-ql".to_string(),
        iterations: 1,
    };
    for j in 0..k {
        let x: Vec<C64> = eig.vector(j).iter().zip(w).map(|(y, wi)| y / wi.sqrt()).collect();
        result.residuals.push(weighted_norm_of_residual(h, &x, eig.values[j]));
        result.eigenvalues.push(eig.values[j]);
        result.eigenvectors.push(WaveFunction::new(x));
    }
    Ok(result)
}

/// Column-major block of `p` vectors of length `n`.
struct Block {
    n: usize,
    p: usize,
    data: Vec<C64>,
}

impl Block {
    fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }
}

/// Makes the block orthonormal in the `w` inner product by modified
/// Gram-Schmidt with one reorthogonalization pass.
fn orthonormalize(block: &mut Block, w: &[f64], rng: &mut XorShift) {
    for j in 0..block.p {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = block.data.split_at_mut(j * block.n);
                let qi = &head[i * block.n..(i + 1) * block.n];
                let v = &mut tail[..block.n];
                let s: C64 = qi.iter().zip(v.iter()).zip(w).map(|((a, b), wi)| a.conj() * b * *wi).sum();
                for (vv, a) in v.iter_mut().zip(qi) {
                    *vv -= a * s;
                }
            }
        }
        let norm = block.col(j).iter().zip(w).map(|(a, wi)| a.norm_sqr() * wi).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            // lost rank; refill with a random direction and retry once
            for v in block.col_mut(j) {
                *v = C64::new(rng.next_signed(), rng.next_signed());
            }
            for i in 0..j {
                let (head, tail) = block.data.split_at_mut(j * block.n);
                let qi = &head[i * block.n..(i + 1) * block.n];
                let v = &mut tail[..block.n];
                let s: C64 = qi.iter().zip(v.iter()).zip(w).map(|((a, b), wi)| a.conj() * b * *wi).sum();
                for (vv, a) in v.iter_mut().zip(qi) {
                    *vv -= a * s;
                }
            }
        }
        let norm = block.col(j).iter().zip(w).map(|(a, wi)| a.norm_sqr() * wi).sum::<f64>().sqrt();
        for v in block.col_mut(j) {
            *v /= norm;
        }
    }
}

struct ShiftedSolver {
    sigma: f64,
    lu: BandedLu,
}

fn factor_shift(h: &HamiltonianOperator, ordering: &Ordering, sigma: f64) -> Result<ShiftedSolver> {
    let shift: Vec<C64> = h.weights().iter().map(|w| C64::new(-sigma * w, 0.0)).collect();
    let lu = BandedLu::factor(h.weighted_matrix(), C64::new(1.0, 0.0), &shift, ordering)?;
    Ok(ShiftedSolver { sigma, lu })
}

/// Places the shift just below the lowest eigenvalue: bisection between the
/// Gershgorin lower bound and a Rayleigh-quotient upper bound, with the
/// pivot inertia counting the eigenvalues below each trial shift.
fn bracket_lowest(h: &HamiltonianOperator, ordering: &Ordering, lo: f64, hi: f64) -> Result<ShiftedSolver> {
    let w = h.weights();
    let diag = h.weighted_matrix().diagonal();
    let mut upper = (0..h.len()).map(|i| diag[i].re / w[i]).fold(f64::INFINITY, f64::min);
    let ones = alloc::vec![C64::new(1.0, 0.0); h.len()];
    let k1: C64 = h.apply_weighted(&ones).iter().sum();
    upper = upper.min(k1.re / w.iter().sum::<f64>());
    let span = (hi - lo).abs().max(upper.abs()).max(1e-300);
    let mut below = lo - 1e-9 * span;
    let mut best = factor_shift(h, ordering, below)?;
    if best.lu.negative_pivots() != 0 {
        return Err(Error::ConvergenceFailure { iterations: 0, residual: f64::NAN });
    }
    let mut above = upper;
    for _ in 0..8 {
        if above - below <= 1e-3 * (above.abs() + 1e-6 * span) {
            break;
        }
        let mid = 0.5 * (below + above);
        match factor_shift(h, ordering, mid) {
            Ok(trial) if trial.lu.negative_pivots() == 0 => {
                below = mid;
                best = trial;
            }
            _ => above = mid,
        }
    }
    Ok(best)
}

/// Shift-invert subspace iteration with Rayleigh-Ritz extraction. The shift
/// is kept below the spectrum, which the pivot inertia certifies, so the
/// dominant invariant subspace of `(K - sigma W)^{-1} W` is the lowest one.
fn subspace_lowest(h: &HamiltonianOperator, k: usize, options: &EigenOptions) -> Result<SpectrumResult> {
    let n = h.len();
    let w = h.weights();
    let p = (2 * k).max(k + 8).min(n);
    let ordering = Ordering::for_grid(&h.grid, h.weighted_matrix());
    let (lo, hi) = spectral_bounds(h);
    let norm_estimate = lo.abs().max(hi.abs());
    let solver = bracket_lowest(h, &ordering, lo, hi)?;
    let mut rng = XorShift::new(options.seed);
    let mut x = Block {
        n,
        p,
        data: (0..n * p).map(|_| C64::new(rng.next_signed(), rng.next_signed())).collect(),
    };
    orthonormalize(&mut x, w, &mut rng);
    let floor = 64.0 * f64::EPSILON * norm_estimate;
    let mut theta = alloc::vec![0.0; p];
    let mut residuals = alloc::vec![f64::INFINITY; k];
    for iteration in 1..=options.max_iterations {
        // Y = (K - sigma W)^{-1} W X
        let mut y = Block {
            n,
            p,
            data: alloc::vec![ZERO; n * p],
        };
        let rhs: Vec<Vec<C64>> = (0..p).map(|j| x.col(j).iter().zip(w).map(|(a, wi)| a * *wi).collect()).collect();
        for (j, sol) in solver.lu.solve_many(&rhs).into_iter().enumerate() {
            y.col_mut(j).copy_from_slice(&sol);
        }
        orthonormalize(&mut y, w, &mut rng);
        // Rayleigh-Ritz on span(Y)
        let ky: Vec<Vec<C64>> = (0..p).map(|j| h.apply_weighted(y.col(j))).collect();
        let mut t = alloc::vec![ZERO; p * p];
        for r in 0..p {
            for c in 0..=r {
                let v: C64 = y.col(r).iter().zip(&ky[c]).map(|(a, b)| a.conj() * b).sum();
                t[r * p + c] = v;
                t[c * p + r] = v.conj();
            }
        }
        let eig = hermitian_eigen(&t, p)?;
        for j in 0..p {
            let z = eig.vector(j);
            let col = x.col_mut(j);
            col.fill(ZERO);
            for (r, zr) in z.iter().enumerate() {
                for (c, yv) in col.iter_mut().zip(y.col(r)) {
                    *c += yv * zr;
                }
            }
        }
        theta.copy_from_slice(&eig.values);
        let mut converged = true;
        for j in 0..k {
            residuals[j] = weighted_norm_of_residual(h, x.col(j), theta[j]);
            let tol = (options.tolerance * theta[j].abs().max(1.0)).max(floor);
            if !(residuals[j] <= tol) {
                converged = false;
            }
        }
        if converged {
            return Ok(SpectrumResult {
                eigenvalues: theta[..k].to_vec(),
                eigenvectors: (0..k).map(|j| WaveFunction::new(x.col(j).to_vec())).collect(),
                residuals,
                solver_tag: format!("shift-invert-subspace(p={p}, bandwidth={}, sigma={:.6e})", solver.lu.bandwidth(), solver.sigma),
                iterations: iteration,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: options.max_iterations,
        residual: residuals.iter().fold(0.0, |m: f64, r| m.max(*r)),
    })
}

/// Quantities whose expectation values can be traced.
pub enum Observable {
    Norm,
    Energy,
    /// A function of the grid coordinates.
    Position(String, Box<dyn Fn([f64; 3]) -> f64 + Send + Sync>),
    /// Canonical momentum `-i hbar d_a`.
    Momentum(usize),
    /// Integrated probability current `int j^a sqrt(G)`.
    Current(usize),
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Observable {
    pub fn label(&self) -> String {
        match self {
            Observable::Norm => "norm".to_string(),
            Observable::Energy => "energy".to_string(),
            Observable::Position(name, _) => name.clone(),
            Observable::Momentum(a) => format!("momentum_{}", a + 1),
            Observable::Current(a) => format!("current_{}", a + 1),
        }
    }
}

/// Spectral differentiation matrix on a periodic line of `n` points and
/// period `l` (row-major, real).
fn periodic_derivative_matrix(n: usize, l: f64) -> Vec<f64> {
    let mut d = alloc::vec![0.0; n * n];
    let step = 2.0 * core::f64::consts::PI / n as f64;
    let scale = 2.0 * core::f64::consts::PI / l;
    for j in 0..n {
        for m in 0..n {
            if j == m {
                continue;
            }
            let k = j as isize - m as isize;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let x = k as f64 * step / 2.0;
            let v = if n % 2 == 0 { 0.5 * sign / x.tan() } else { 0.5 * sign / x.sin() };
            d[j * n + m] = scale * v;
        }
    }
    d
}

/// `d_a psi`: spectral on periodic axes, central differences with zero
/// exterior values otherwise.
pub fn derivative(grid: &Grid, psi: &[C64], axis: usize) -> Vec<C64> {
    let ax = grid.axis(axis);
    let n = ax.n;
    let mut out = alloc::vec![ZERO; psi.len()];
    if ax.periodic() {
        let d = periodic_derivative_matrix(n, ax.max - ax.min);
        let mut line = alloc::vec![0usize; n];
        for idx in 0..grid.len() {
            if grid.multi_index(idx)[axis] != 0 {
                continue;
            }
            let mut cur = idx;
            for slot in line.iter_mut() {
                *slot = cur;
                cur = grid.neighbor(cur, axis, 1).unwrap_or(cur);
            }
            for j in 0..n {
                let row = &d[j * n..(j + 1) * n];
                out[line[j]] = row.iter().zip(&line).map(|(c, &m)| psi[m] * *c).sum();
            }
        }
    } else {
        let h = ax.h();
        for (idx, o) in out.iter_mut().enumerate() {
            let up = grid.neighbor(idx, axis, 1).map_or(ZERO, |j| psi[j]);
            let dn = grid.neighbor(idx, axis, -1).map_or(ZERO, |j| psi[j]);
            *o = (up - dn) / (2.0 * h);
        }
    }
    out
}

/// `<psi|O|psi>_W / <psi|psi>_W`.
pub fn expectation_value(h: &HamiltonianOperator, psi: &[C64], observable: &Observable) -> Result<C64> {
    if psi.len() != h.len() {
        return Err(Error::GridMismatch(format!("state of length {} for operator of size {}", psi.len(), h.len())));
    }
    let w = h.weights();
    let norm: f64 = psi.iter().zip(w).map(|(p, wi)| p.norm_sqr() * wi).sum();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("zero state".into()));
    }
    let grid = &h.grid;
    let hbar = h.physics.hbar;
    let value = match observable {
        Observable::Norm => C64::new(norm, 0.0),
        Observable::Energy => {
            let kp = h.apply_weighted(psi);
            psi.iter().zip(&kp).map(|(a, b)| a.conj() * b).sum::<C64>() / norm
        }
        Observable::Position(_, f) => {
            C64::new((0..psi.len()).map(|i| psi[i].norm_sqr() * w[i] * f(grid.coords(i))).sum::<f64>() / norm, 0.0)
        }
        Observable::Momentum(axis) => {
            if *axis >= grid.dim() {
                return Err(Error::InvalidArgument(format!("no axis {axis}")));
            }
            let d = derivative(grid, psi, *axis);
            psi.iter().zip(&d).zip(w).map(|((a, b), wi)| a.conj() * b * C64::new(0.0, -hbar) * *wi).sum::<C64>() / norm
        }
        Observable::Current(axis) => {
            if *axis >= grid.dim() {
                return Err(Error::InvalidArgument(format!("no axis {axis}")));
            }
            let c = &h.coefficients;
            let (q, m) = (h.physics.charge, h.physics.mass);
            let derivs: Vec<Vec<C64>> = (0..grid.dim()).map(|b| derivative(grid, psi, b)).collect();
            let mut total = 0.0;
            for i in 0..psi.len() {
                let mut j = 0.0;
                for b in 0..grid.dim() {
                    let gab = c.inverse_metric[i][*axis][b];
                    if gab == 0.0 {
                        continue;
                    }
                    j += gab * (hbar * (psi[i].conj() * derivs[b][i]).im - q * c.node_potential[i][b] * psi[i].norm_sqr());
                }
                total += j / m * w[i];
            }
            C64::new(total / norm, 0.0)
        }
    };
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// `||psi(t)||_W`.
    pub norms: Vec<f64>,
    /// `<H>(t)`.
    pub energies: Vec<f64>,
    /// Real parts of the requested observables, one series per observable.
    pub observables: Vec<(String, Vec<f64>)>,
    /// `(step, state)` pairs at the configured stride.
    pub snapshots: Vec<(usize, WaveFunction)>,
    /// `dt` times the Gershgorin bound of the spectral radius.
    pub stiffness: f64,
}

impl EvolutionTrace {
    /// `dt * rho(H) > 2`: phases of the high modes are strongly distorted.
    pub fn stiff(&self) -> bool {
        self.stiffness > 2.0
    }
}

/// Crank-Nicolson propagation `(W + i dt K / 2 hbar) psi' = (W - i dt K / 2 hbar) psi`.
pub fn propagate_cn(
    h: &HamiltonianOperator,
    psi0: &WaveFunction,
    dt: f64,
    steps: usize,
    observables: &[Observable],
    snapshot_stride: usize,
) -> Result<EvolutionTrace> {
    let n = h.len();
    if psi0.len() != n {
        return Err(Error::GridMismatch(format!("state of length {} for operator of size {n}", psi0.len())));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt}")));
    }
    let w = h.weights();
    let norm0 = psi0.norm_sqr(w)?.sqrt();
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("initial state has norm {norm0}, expected 1")));
    }
    let tau = dt / (2.0 * h.physics.hbar);
    let shift: Vec<C64> = w.iter().map(|x| C64::new(*x, 0.0)).collect();
    let ordering = Ordering::for_grid(&h.grid, h.weighted_matrix());
    let lu = BandedLu::factor(h.weighted_matrix(), C64::new(0.0, tau), &shift, &ordering)?;
    let (lo, hi) = spectral_bounds(h);
    let mut trace = EvolutionTrace {
        times: Vec::with_capacity(steps + 1),
        norms: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        observables: observables.iter().map(|o| (o.label(), Vec::with_capacity(steps + 1))).collect(),
        snapshots: Vec::new(),
        stiffness: dt * lo.abs().max(hi.abs()),
    };
    let mut psi = psi0.values.clone();
    let record = |trace: &mut EvolutionTrace, step: usize, psi: &[C64]| -> Result<()> {
        trace.times.push(step as f64 * dt);
        trace.norms.push(psi.iter().zip(w).map(|(p, wi)| p.norm_sqr() * wi).sum::<f64>().sqrt());
        trace.energies.push(expectation_value(h, psi, &Observable::Energy)?.re);
        for (o, (_, series)) in observables.iter().zip(trace.observables.iter_mut()) {
            series.push(expectation_value(h, psi, o)?.re);
        }
        if snapshot_stride > 0 && step % snapshot_stride == 0 {
            trace.snapshots.push((step, WaveFunction::new(psi.to_vec())));
        }
        Ok(())
    };
    record(&mut trace, 0, &psi)?;
    let i_tau = C64::new(0.0, tau);
    for step in 1..=steps {
        let kpsi = h.apply_weighted(&psi);
        let rhs: Vec<C64> = psi.iter().zip(&kpsi).zip(w).map(|((p, k), wi)| p * *wi - i_tau * k).collect();
        let mut next = lu.solve(&rhs);
        // one step of iterative refinement
        let rnorm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        for pass in 0..3 {
            let kn = h.apply_weighted(&next);
            let res: Vec<C64> = rhs.iter().zip(&next).zip(&kn).zip(w).map(|(((r, x), k), wi)| r - x * *wi - i_tau * k).collect();
            let rel = res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / rnorm;
            if rel <= 1e-14 {
                break;
            }
            if pass == 2 && rel > 1e-12 {
                return Err(Error::LinearSolveFailure(format!("relative residual {rel:e} at step {step}")));
            }
            let corr = lu.solve(&res);
            for (x, c) in next.iter_mut().zip(corr) {
                *x += c;
            }
        }
        psi = next;
        record(&mut trace, step, &psi)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{plane, torus};
    use crate::discretization::{assemble_surface_hamiltonian, sample_geometry, MagneticScheme, Physics};
    use crate::fields::SurfacePotential;
    use crate::grid::{build_grid, Boundary};
    use core::f64::consts::PI;

    fn periodic_plane(n: usize) -> HamiltonianOperator {
        let p = plane(2.0 * PI, 2.0 * PI);
        let grid = build_grid(&p, n, n, [Some(Boundary::Periodic), Some(Boundary::Periodic)]).unwrap();
        let geo = sample_geometry(&p, &grid).unwrap();
        assemble_surface_hamiltonian(&grid, &geo, &SurfacePotential::zero(&grid), Physics::default(), MagneticScheme::Symmetrized).unwrap()
    }

    fn discrete_plane_levels(n: usize, count: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        let one = |k: i64| (1.0 - (k as f64 * h).cos()) / (h * h);
        let mut all = Vec::new();
        for a in -(n as i64 / 2)..(n as i64 / 2) {
            for b in -(n as i64 / 2)..(n as i64 / 2) {
                all.push(one(a) + one(b));
            }
        }
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        all
    }

    #[test]
    fn plane_free_dense_and_iterative_agree() {
        let h = periodic_plane(16);
        let want = discrete_plane_levels(16, 9);
        let dense = eigensolve_lowest(&h, 9).unwrap();
        let opts = EigenOptions {
            dense_threshold: 0,
            ..EigenOptions::default()
        };
        let iter = eigensolve_lowest_with(&h, 9, &opts).unwrap();
        for r in [&dense, &iter] {
            for (g, w) in r.eigenvalues.iter().zip(&want) {
                assert!((g - w).abs() < 1e-8, "{g} vs {w}");
            }
            assert!(r.residuals.iter().all(|x| *x < 1e-8));
            for a in 0..9 {
                for b in 0..9 {
                    let ip = crate::grid::weighted_inner_product(&r.eigenvectors[a].values, &r.eigenvectors[b].values, h.weights()).unwrap();
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - e).norm() < 1e-10);
                }
            }
        }
        // continuum pattern: 0, then 0.5 x 4
        assert!(dense.eigenvalues[0].abs() < 1e-10);
        for v in &dense.eigenvalues[1..5] {
            assert!((v - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn preconditions() {
        let h = periodic_plane(4);
        assert!(matches!(eigensolve_lowest(&h, 16), Err(Error::InvalidArgument(_))));
        let mut bad = h.clone();
        *bad.weighted_matrix_mut().get_mut(0, 1).unwrap() += C64::new(0.5, 0.0);
        assert!(matches!(eigensolve_lowest(&bad, 2), Err(Error::NonHermitianAssembly(_))));
    }

    #[test]
    fn spectral_derivative_of_fourier_mode() {
        let t = torus(2.0, 1.0);
        let grid = build_grid(&t, 8, 12, [None, None]).unwrap();
        let m = 3.0;
        let psi: Vec<C64> = (0..grid.len()).map(|i| C64::from_polar(1.0, m * grid.coords(i)[1])).collect();
        let d = derivative(&grid, &psi, 1);
        for (a, b) in d.iter().zip(&psi) {
            assert!((a - b * C64::new(0.0, m)).norm() < 1e-12);
        }
        let geo = sample_geometry(&t, &grid).unwrap();
        let h = assemble_surface_hamiltonian(&grid, &geo, &SurfacePotential::zero(&grid), Physics::default(), MagneticScheme::Symmetrized).unwrap();
        let p = expectation_value(&h, &psi, &Observable::Momentum(1)).unwrap();
        assert!((p - C64::new(m, 0.0)).norm() < 1e-10);
        let norm = expectation_value(&h, &psi, &Observable::Norm).unwrap();
        let mut unit = WaveFunction::new(psi.clone());
        unit.normalize(h.weights()).unwrap();
        assert!((expectation_value(&h, &unit.values, &Observable::Norm).unwrap().re - 1.0).abs() < 1e-12);
        assert!(norm.re > 0.0);
    }

    #[test]
    fn stationary_state_and_free_gaussian() {
        let h = periodic_plane(16);
        let spec = eigensolve_lowest(&h, 2).unwrap();
        let psi0 = spec.eigenvectors[1].clone();
        let e = expectation_value(&h, &psi0.values, &Observable::Energy).unwrap();
        assert!((e.re - spec.eigenvalues[1]).abs() < 1e-10);
        let trace = propagate_cn(&h, &psi0, 0.05, 40, &[], 10).unwrap();
        assert_eq!(trace.snapshots.len(), 5);
        for (_, s) in &trace.snapshots {
            let ov = crate::grid::weighted_inner_product(&psi0.values, &s.values, h.weights()).unwrap();
            assert!((ov.norm() - 1.0).abs() < 1e-8);
        }

        let grid = h.grid.clone();
        let mut g = WaveFunction::from_fn(&grid, |c| {
            let r2 = (c[0] - PI).powi(2) + (c[1] - PI).powi(2);
            C64::new((-r2).exp(), 0.0)
        });
        g.normalize(h.weights()).unwrap();
        let x = Observable::Position("x".into(), Box::new(|c| c[0]));
        let var = Observable::Position("x2".into(), Box::new(|c| (c[0] - PI).powi(2)));
        let trace = propagate_cn(&h, &g, 0.01, 100, &[x, var], 0).unwrap();
        let xs = &trace.observables[0].1;
        let vs = &trace.observables[1].1;
        assert!(xs.iter().all(|v| (v - PI).abs() < 1e-9));
        assert!(vs.last().unwrap() > &vs[0]);
        assert!(trace.norms.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}
