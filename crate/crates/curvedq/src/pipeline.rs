//! Config-driven geometry, spectrum and evolution tasks.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use curvedq_core::chart::{BuiltinSurface, SurfaceChart};
use curvedq_core::discretization::{
    assemble_surface_hamiltonian, hermiticity_defect, sample_geometry, GeometrySamples, HamiltonianOperator, MagneticScheme, Physics,
};
use curvedq_core::fields::{normal_gauge_fix, uniform_field_potential, CartesianPotential, Gauge};
use curvedq_core::geometry::geometric_potential;
use curvedq_core::grid::{build_grid, Boundary, Grid2D, WaveFunction};
use curvedq_core::solvers::{eigensolve_lowest_with, propagate_cn, EigenOptions, Observable, SpectrumResult};
use curvedq_core::C64;
use log::info;
use serde_json::{json, Value};

use crate::config::{
    BoundaryChoice, Format, GaugeChoice, InitialState, RunConfig, ScalarBuiltin, ScalarChoice, SchemeChoice, SurfaceKind, SurfaceSection, Task,
};
use crate::error::{CliResult, ConfigError};
use crate::expr::Expr;
use crate::output::{ensure_dir, format_f64, json_array, json_f64, write_json, Table};

/// Names accepted in `evolve.observables`.
pub const OBSERVABLES: &[&str] = &["q1", "q2", "x", "y", "z", "p1", "p2", "j1", "j2"];

/// Where and how a run writes its artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl OutputOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            dir: cfg.output.dir.clone(),
            formats: cfg.output.formats.clone(),
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Outcome of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// False when a validation suite had failing checks.
    pub passed: bool,
}

/// Chart of a custom surface given by three expressions in `q1`, `q2` and
/// the user parameters. Derivatives come from finite differences.
pub fn custom_chart(s: &SurfaceSection) -> Result<SurfaceChart, ConfigError> {
    let mut names: Vec<&str> = vec!["q1", "q2"];
    names.extend(s.params.keys().map(String::as_str));
    let values: Vec<f64> = s.params.values().copied().collect();
    let compile = |key: &str, src: &Option<String>| -> Result<Expr, ConfigError> {
        let src = src.as_deref().ok_or_else(|| ConfigError::invalid(key, "missing expression"))?;
        Expr::parse(src, &names).map_err(|source| ConfigError::Expression { key: key.to_string(), source })
    };
    let xyz = [compile("surface.x", &s.x)?, compile("surface.y", &s.y)?, compile("surface.z", &s.z)?];
    let q1 = s.q1.ok_or_else(|| ConfigError::invalid("surface.q1", "missing range"))?;
    let q2 = s.q2.ok_or_else(|| ConfigError::invalid("surface.q2", "missing range"))?;
    let periodic = s.periodic.unwrap_or([false, false]);
    let map = move |a: f64, b: f64| {
        let mut vars = Vec::with_capacity(2 + values.len());
        vars.push(a);
        vars.push(b);
        vars.extend_from_slice(&values);
        [xyz[0].eval(&vars), xyz[1].eval(&vars), xyz[2].eval(&vars)]
    };
    // the embedding must close up across a periodic seam
    for axis in 0..2 {
        if !periodic[axis] {
            continue;
        }
        let (other, ends) = if axis == 0 { (q2, q1) } else { (q1, q2) };
        for j in 0..=8 {
            let o = other[0] + (other[1] - other[0]) * j as f64 / 8.0;
            let (lo, hi) = if axis == 0 { (map(ends[0], o), map(ends[1], o)) } else { (map(o, ends[0]), map(o, ends[1])) };
            let scale = lo.iter().chain(&hi).fold(1.0f64, |m, x| m.max(x.abs()));
            let gap = (0..3).fold(0.0f64, |m, k| m.max((lo[k] - hi[k]).abs()));
            if !(gap <= 1e-9 * scale) {
                return Err(ConfigError::invalid("surface.periodic", format!("embedding does not close across the seam of q{}", axis + 1)));
            }
        }
    }
    for j in 0..=4 {
        for i in 0..=4 {
            let p = map(q1[0] + (q1[1] - q1[0]) * i as f64 / 4.0, q2[0] + (q2[1] - q2[0]) * j as f64 / 4.0);
            if !p.iter().all(|x| x.is_finite()) {
                return Err(ConfigError::invalid("surface", "embedding is not finite on the coordinate range"));
            }
        }
    }
    Ok(SurfaceChart::from_map("custom", map, [(q1[0], q1[1]), (q2[0], q2[1])], periodic))
}

pub fn build_chart(s: &SurfaceSection) -> CliResult<SurfaceChart> {
    let builtin = match s.kind {
        SurfaceKind::Plane => BuiltinSurface::Plane {
            lx: s.lx.unwrap_or(1.0),
            ly: s.ly.unwrap_or(1.0),
        },
        SurfaceKind::Sphere => BuiltinSurface::Sphere { r: s.r.unwrap_or(1.0) },
        SurfaceKind::Cylinder => BuiltinSurface::Cylinder {
            r: s.r.unwrap_or(1.0),
            l: s.l.unwrap_or(10.0),
        },
        SurfaceKind::Torus => BuiltinSurface::Torus {
            big_r: s.big_r.unwrap_or(2.0),
            r: s.r.unwrap_or(1.0),
        },
        SurfaceKind::BentSheet => BuiltinSurface::BentSheet {
            lx: s.lx.unwrap_or(1.0),
            ly: s.ly.unwrap_or(1.0),
            bend: s.bend.unwrap_or(1.0),
        },
        SurfaceKind::Custom => return Ok(custom_chart(s)?),
    };
    Ok(builtin.chart()?)
}

fn boundary(choice: BoundaryChoice) -> Option<Boundary> {
    match choice {
        BoundaryChoice::Natural => None,
        BoundaryChoice::Periodic => Some(Boundary::Periodic),
        BoundaryChoice::Dirichlet => Some(Boundary::Dirichlet),
        BoundaryChoice::ZeroFlux => Some(Boundary::ZeroFlux),
    }
}

pub fn physics(cfg: &RunConfig) -> Physics {
    Physics {
        mass: cfg.physics.m,
        charge: cfg.physics.q,
        hbar: cfg.physics.hbar,
    }
}

pub fn scheme(choice: SchemeChoice) -> MagneticScheme {
    match choice {
        SchemeChoice::Symmetrized => MagneticScheme::Symmetrized,
        SchemeChoice::Peierls => MagneticScheme::Peierls,
    }
}

pub fn gauge(choice: GaugeChoice) -> Gauge {
    match choice {
        GaugeChoice::Symmetric => Gauge::Symmetric,
        GaugeChoice::AxialSymmetric => Gauge::AxialSymmetric,
        GaugeChoice::LandauX => Gauge::Landau(0),
        GaugeChoice::LandauY => Gauge::Landau(1),
        GaugeChoice::LandauZ => Gauge::Landau(2),
    }
}

/// Uniform field in the configured gauge plus the scalar potential.
pub fn cartesian_potential(cfg: &RunConfig) -> CartesianPotential {
    let cp = uniform_field_potential(cfg.field.b, gauge(cfg.field.gauge));
    match cfg.field.v {
        ScalarChoice::Constant(v) => cp.with_scalar(move |_| v),
        ScalarChoice::Builtin {
            builtin: ScalarBuiltin::AxialElectric,
            e,
        } => cp.with_scalar(move |x| -e * x[1]),
    }
}

/// Everything a task needs about the discretized surface.
pub struct Problem {
    pub chart: Arc<SurfaceChart>,
    pub grid: Grid2D,
    pub geometry: GeometrySamples,
    pub physics: Physics,
}

impl Problem {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let chart = build_chart(&cfg.surface)?;
        let grid = build_grid(&chart, cfg.grid.n1, cfg.grid.n2, [boundary(cfg.grid.bc1), boundary(cfg.grid.bc2)])?;
        let geometry = sample_geometry(&chart, &grid)?;
        Ok(Self {
            chart: Arc::new(chart),
            grid,
            geometry,
            physics: physics(cfg),
        })
    }

    pub fn hamiltonian(&self, cfg: &RunConfig) -> CliResult<HamiltonianOperator> {
        let sp = normal_gauge_fix(&self.chart, &cartesian_potential(cfg), &self.grid)?;
        info!("gauge: {} (max |A.n| removed {:.3e})", sp.gauge_tag, sp.a3_residual.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        Ok(assemble_surface_hamiltonian(&self.grid, &self.geometry, &sp, self.physics, scheme(cfg.solver.scheme))?)
    }
}

pub fn eigen_options(cfg: &RunConfig) -> EigenOptions {
    EigenOptions {
        tolerance: cfg.solver.tolerance,
        max_iterations: cfg.solver.max_iterations,
        dense_threshold: cfg.solver.dense_threshold,
        seed: cfg.seed ^ 0x5eed_cafe,
    }
}

fn metadata(cfg: &RunConfig, problem: &Problem) -> Value {
    let g = &problem.grid;
    json!({
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "surface": problem.chart.name(),
        "grid": [g.axis(0).n, g.axis(1).n],
        "boundary": [format!("{:?}", g.axis(0).boundary).to_lowercase(), format!("{:?}", g.axis(1).boundary).to_lowercase()],
        "physics": {"m": json_f64(problem.physics.mass), "Q": json_f64(problem.physics.charge), "hbar": json_f64(problem.physics.hbar)},
        "B": json_array(&cfg.field.b),
        "gauge": gauge(cfg.field.gauge).label(),
        "scheme": scheme(cfg.solver.scheme).label(),
    })
}

/// Runs the configured task and writes its artifacts.
pub fn run(cfg: &RunConfig, out: &OutputOptions) -> CliResult<RunSummary> {
    ensure_dir(&out.dir)?;
    match cfg.task {
        Task::Geometry => run_geometry(cfg, out),
        Task::Spectrum => run_spectrum(cfg, out),
        Task::Evolve => run_evolve(cfg, out),
        Task::Validate => crate::validate::run_validation(&cfg.validate.suite, cfg.seed, out),
    }
}

fn run_geometry(cfg: &RunConfig, out: &OutputOptions) -> CliResult<RunSummary> {
    let problem = Problem::new(cfg)?;
    let mut table = Table::new(&["q1", "q2", "V_S", "K", "M", "sqrt_g"]);
    for (i, gp) in problem.geometry.nodes.iter().enumerate() {
        let q = problem.grid.coords(i);
        let vs = geometric_potential(gp, problem.physics.mass, problem.physics.hbar);
        table.push_numbers(&[q[0], q[1], vs, gp.gauss_curv, gp.mean_curv, gp.sqrt_g]);
    }
    let path = table.write(&out.dir, "geometry.csv", &cfg.hash())?;
    Ok(RunSummary { files: vec![path], passed: true })
}

fn wavefunction_table(problem: &Problem, psi: &[C64]) -> Table {
    let mut table = Table::new(&["q1", "q2", "re", "im", "abs2", "sqrt_g"]);
    for (i, (p, gp)) in psi.iter().zip(&problem.geometry.nodes).enumerate() {
        let q = problem.grid.coords(i);
        table.push_numbers(&[q[0], q[1], p.re, p.im, p.norm_sqr(), gp.sqrt_g]);
    }
    table
}

/// Fixes the arbitrary global phase: the largest component is made real and
/// positive (first index wins ties).
pub fn canonical_phase(psi: &mut [C64]) {
    let mut best = 0;
    for (i, p) in psi.iter().enumerate() {
        if p.norm_sqr() > psi[best].norm_sqr() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let p = psi[best];
    if p.norm() > 0.0 {
        let phase = p.conj() / p.norm();
        for x in psi.iter_mut() {
            *x *= phase;
        }
    }
}

pub fn solve_spectrum(cfg: &RunConfig, problem: &Problem, k: usize) -> CliResult<(HamiltonianOperator, SpectrumResult)> {
    let h = problem.hamiltonian(cfg)?;
    info!("assembled {} nodes, Hermiticity defect {:.3e}", h.len(), hermiticity_defect(&h));
    let spec = eigensolve_lowest_with(&h, k, &eigen_options(cfg))?;
    info!("{} after {} iterations", spec.solver_tag, spec.iterations);
    Ok((h, spec))
}

fn run_spectrum(cfg: &RunConfig, out: &OutputOptions) -> CliResult<RunSummary> {
    let problem = Problem::new(cfg)?;
    let (h, mut spec) = solve_spectrum(cfg, &problem, cfg.spectrum.k)?;
    let hash = cfg.hash();
    let mut files = Vec::new();
    if out.wants(Format::Json) {
        let mut meta = metadata(cfg, &problem);
        meta["solver"] = json!(spec.solver_tag);
        meta["iterations"] = json!(spec.iterations);
        meta["hermiticity_defect"] = json_f64(hermiticity_defect(&h));
        let doc = json!({
            "metadata": meta,
            "eigenvalues": json_array(&spec.eigenvalues),
            "residuals": json_array(&spec.residuals),
        });
        files.push(write_json(&out.dir, "spectrum.json", &doc)?);
    }
    if out.wants(Format::Csv) {
        let mut table = Table::new(&["index", "eigenvalue", "residual"]);
        for (i, (e, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
            table.push(vec![i.to_string(), format_f64(*e), format_f64(*r)]);
        }
        files.push(table.write(&out.dir, "spectrum.csv", &hash)?);
    }
    let count = cfg.spectrum.wavefunctions.unwrap_or(cfg.spectrum.k);
    for (k, v) in spec.eigenvectors.iter_mut().enumerate().take(count) {
        canonical_phase(&mut v.values);
        files.push(wavefunction_table(&problem, &v.values).write(&out.dir, &format!("wavefunction_{k}.csv"), &hash)?);
    }
    Ok(RunSummary { files, passed: true })
}

fn wrapped(d: f64, span: f64, periodic: bool) -> f64 {
    if periodic {
        d - span * (d / span).round()
    } else {
        d
    }
}

fn initial_state(cfg: &RunConfig, problem: &Problem, h: &HamiltonianOperator) -> CliResult<WaveFunction> {
    let grid = &problem.grid;
    let mut psi = match &cfg.evolve.initial {
        InitialState::Gaussian { center, width, momentum } => {
            let ax = [grid.axis(0), grid.axis(1)];
            let span = [ax[0].max - ax[0].min, ax[1].max - ax[1].min];
            let periodic = [ax[0].periodic(), ax[1].periodic()];
            for a in 0..2 {
                // e^{i p q} must be single-valued around a closed coordinate
                let turns = momentum[a] * span[a] / (2.0 * PI);
                if periodic[a] && (turns - turns.round()).abs() > 1e-9 {
                    return Err(ConfigError::invalid("evolve.initial.momentum", format!("must be a multiple of 2 pi / {} on periodic axis q{}", span[a], a + 1)).into());
                }
            }
            let c = center.unwrap_or([0.5 * (ax[0].min + ax[0].max), 0.5 * (ax[1].min + ax[1].max)]);
            let w = width.unwrap_or([span[0] / 8.0, span[1] / 8.0]);
            let m = *momentum;
            WaveFunction::from_fn(grid, |q| {
                let d = [wrapped(q[0] - c[0], span[0], periodic[0]), wrapped(q[1] - c[1], span[1], periodic[1])];
                let amp = (-0.5 * ((d[0] / w[0]).powi(2) + (d[1] / w[1]).powi(2))).exp();
                C64::from_polar(amp, m[0] * q[0] + m[1] * q[1])
            })
        }
        InitialState::Eigenstate { index } => {
            let spec = eigensolve_lowest_with(h, index + 1, &eigen_options(cfg))?;
            spec.eigenvectors[*index].clone()
        }
    };
    psi.normalize(h.weights())?;
    Ok(psi)
}

fn observable(name: &str, chart: &Arc<SurfaceChart>) -> Observable {
    let embed = |k: usize| {
        let c = Arc::clone(chart);
        Observable::Position(name.to_string(), Box::new(move |q: [f64; 3]| c.point(q[0], q[1])[k]))
    };
    match name {
        "q1" => Observable::Position(name.to_string(), Box::new(|q: [f64; 3]| q[0])),
        "q2" => Observable::Position(name.to_string(), Box::new(|q: [f64; 3]| q[1])),
        "x" => embed(0),
        "y" => embed(1),
        "z" => embed(2),
        "p1" => Observable::Momentum(0),
        "p2" => Observable::Momentum(1),
        "j1" => Observable::Current(0),
        _ => Observable::Current(1),
    }
}

fn run_evolve(cfg: &RunConfig, out: &OutputOptions) -> CliResult<RunSummary> {
    let problem = Problem::new(cfg)?;
    let h = problem.hamiltonian(cfg)?;
    let psi0 = initial_state(cfg, &problem, &h)?;
    let observables: Vec<Observable> = cfg.evolve.observables.iter().map(|o| observable(o, &problem.chart)).collect();
    let trace = propagate_cn(&h, &psi0, cfg.evolve.dt, cfg.evolve.steps, &observables, cfg.evolve.snapshot_stride)?;
    if trace.stiff() {
        log::warn!("dt times the spectral radius is {:.3}: high modes are strongly phase-distorted", trace.stiffness);
    }
    let hash = cfg.hash();
    let mut header = vec!["t".to_string(), "norm".to_string(), "energy".to_string()];
    header.extend(cfg.evolve.observables.iter().cloned());
    let mut table = Table::new(&header);
    for i in 0..trace.times.len() {
        let mut row = vec![trace.times[i], trace.norms[i], trace.energies[i]];
        row.extend(trace.observables.iter().map(|(_, s)| s[i]));
        table.push_numbers(&row);
    }
    let mut files = vec![table.write(&out.dir, "trace.csv", &hash)?];
    for (step, psi) in &trace.snapshots {
        files.push(wavefunction_table(&problem, &psi.values).write(&out.dir, &format!("snapshot_{step}.csv"), &hash)?);
    }
    if out.wants(Format::Json) {
        let first = trace.energies[0];
        let drift_e = trace.energies.iter().fold(0.0f64, |m, e| m.max((e - first).abs()));
        let drift_n = trace.norms.iter().fold(0.0f64, |m, n| m.max((n - 1.0).abs()));
        let mut meta = metadata(cfg, &problem);
        meta["dt"] = json_f64(cfg.evolve.dt);
        meta["steps"] = json!(cfg.evolve.steps);
        meta["stiffness"] = json_f64(trace.stiffness);
        let doc = json!({
            "metadata": meta,
            "max_norm_drift": json_f64(drift_n),
            "max_energy_drift": json_f64(drift_e),
        });
        files.push(write_json(&out.dir, "evolution.json", &doc)?);
    }
    Ok(RunSummary { files, passed: true })
}

/// Reads a config from disk, applies command-line overrides and runs it.
pub fn run_path(path: &Path, dir: Option<PathBuf>, formats: Option<Vec<Format>>, seed: Option<u64>) -> CliResult<RunSummary> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let mut out = OutputOptions::from_config(&cfg);
    if let Some(dir) = dir {
        out.dir = dir;
    }
    if let Some(f) = formats {
        out.formats = f;
    }
    run(&cfg, &out)
}
