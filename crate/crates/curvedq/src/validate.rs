//! Built-in validation suites: analytic spectra, operator identities,
//! gauge covariance and conservation laws.

use std::time::Instant;

use curvedq_core::chart::{bent_sheet, cylinder, plane, sphere, torus, SurfaceChart};
use curvedq_core::discretization::{
    assemble_surface_hamiltonian, hermiticity_defect, relative_operator_difference, sample_geometry, HamiltonianOperator, MagneticScheme, Physics,
};
use curvedq_core::fields::{gauge_phase, normal_gauge_fix, transform_wavefunction, uniform_field_potential, Gauge, SurfacePotential};
use curvedq_core::geometry::{adapted_metric_from, geometric_potential, metric_at, rescale_factor, weingarten_at};
use curvedq_core::grid::{build_grid, weighted_inner_product, Boundary, WaveFunction};
use curvedq_core::solvers::{eigensolve_lowest_with, propagate_cn, EigenOptions, Observable};
use curvedq_core::systems::{axial_field_for_flux, cylinder_levels, reference_hamiltonian, sphere_free_levels, torus_axisymmetric_levels, SystemSpec};
use curvedq_core::C64;
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, format_f64, json_array, json_f64, write_json, Table};
use crate::pipeline::{OutputOptions, RunSummary};

/// Suite names accepted by `validate --suite`.
pub const SUITES: &[&str] = &[
    "all",
    "quick",
    "sphere",
    "aharonov-bohm",
    "reference",
    "gauge",
    "geometric-potential",
    "adapted-metric",
    "no-coupling",
    "unitarity",
    "torus",
];

/// Criterion ids run by a suite.
pub fn suite_criteria(name: &str) -> Option<Vec<u32>> {
    Some(match name {
        "all" => (1..=9).collect(),
        "quick" => vec![3, 5, 6, 7, 8],
        "sphere" => vec![1],
        "aharonov-bohm" => vec![2],
        "reference" => vec![3],
        "gauge" => vec![4],
        "geometric-potential" => vec![5],
        "adapted-metric" => vec![6],
        "no-coupling" => vec![7],
        "unitarity" => vec![8],
        "torus" => vec![9],
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
    Equals,
}

impl Bound {
    fn label(self) -> &'static str {
        match self {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
            Bound::Equals => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound, limit: f64) -> Self {
        let passed = match bound {
            Bound::AtMost => value <= limit,
            Bound::AtLeast => value >= limit,
            Bound::Equals => value == limit,
        };
        Self {
            name: name.into(),
            value,
            bound,
            limit,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub checks: Vec<Check>,
    /// Named series for plotting and diagnosis.
    pub data: Vec<(String, Vec<f64>)>,
    /// Set when the computation itself failed.
    pub error: Option<String>,
}

impl CriterionReport {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            checks: Vec::new(),
            data: Vec::new(),
            error: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: impl Into<String>, value: f64, bound: Bound, limit: f64) {
        self.checks.push(Check::new(name, value, bound, limit));
    }

    fn series(&mut self, name: impl Into<String>, values: &[f64]) {
        self.data.push((name.into(), values.to_vec()));
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "sphere free spectrum",
        2 => "cylinder Aharonov-Bohm spectrum",
        3 => "closed-form operators equal generic assembly",
        4 => "gauge covariance on the cylinder",
        5 => "geometric potential",
        6 => "adapted shell metric",
        7 => "no magnetic-curvature coupling",
        8 => "Hermiticity and unitarity",
        9 => "axisymmetric torus spectrum",
        _ => "unknown",
    }
}

fn options(seed: u64) -> EigenOptions {
    EigenOptions {
        seed: seed ^ 0x5eed_cafe,
        ..EigenOptions::default()
    }
}

/// `|a - b| / max(|b|, floor)`, largest over the pairs.
pub fn max_relative_error(got: &[f64], want: &[f64], floor: f64) -> f64 {
    got.iter().zip(want).fold(0.0f64, |m, (g, w)| m.max((g - w).abs() / w.abs().max(floor)))
}

fn generic_operator(chart: &SurfaceChart, grid: &curvedq_core::grid::Grid2D, sp: &SurfacePotential, scheme: MagneticScheme) -> curvedq_core::Result<HamiltonianOperator> {
    let geo = sample_geometry(chart, grid)?;
    assemble_surface_hamiltonian(grid, &geo, sp, Physics::default(), scheme)
}

fn system_operator(spec: &SystemSpec, n: [usize; 2], y: Option<Boundary>, scheme: MagneticScheme) -> curvedq_core::Result<HamiltonianOperator> {
    let chart = spec.chart();
    let grid = build_grid(&chart, n[0], n[1], [None, y])?;
    let sp = spec.surface_potential(&grid)?;
    generic_operator(&chart, &grid, &sp, scheme)
}

fn sphere_spectrum(r: &mut CriterionReport, seed: u64) -> curvedq_core::Result<()> {
    let h = system_operator(&SystemSpec::sphere(1.0, 0.0), [64, 128], None, MagneticScheme::Symmetrized)?;
    // one level beyond l = 3 shows the l = 3 multiplet is complete
    let got = eigensolve_lowest_with(&h, 17, &options(seed))?.eigenvalues;
    let want = sphere_free_levels(1.0, Physics::default(), 16);
    r.check("ground level |E0|", got[0].abs(), Bound::AtMost, 1e-3);
    r.check("max relative error l = 1..3", max_relative_error(&got[1..16], &want[1..16], 0.0), Bound::AtMost, 0.01);
    let mut counts = [0.0f64; 5];
    for e in &got {
        let l = (0..5).min_by(|a, b| {
            let la = (a * (a + 1)) as f64 / 2.0;
            let lb = (b * (b + 1)) as f64 / 2.0;
            (e - la).abs().total_cmp(&(e - lb).abs())
        });
        counts[l.unwrap_or(0)] += 1.0;
    }
    for l in 0..4 {
        r.check(format!("degeneracy l = {l}"), counts[l], Bound::Equals, (2 * l + 1) as f64);
    }
    r.series("eigenvalues", &got);
    r.series("oracle", &want);
    Ok(())
}

fn aharonov_bohm(r: &mut CriterionReport, seed: u64) -> curvedq_core::Result<()> {
    let p = Physics::default();
    let mut zero = Vec::new();
    for f in [0.0, 0.25, 0.5, 1.0] {
        let b0 = axial_field_for_flux(1.0, f, p);
        let h = system_operator(&SystemSpec::cylinder(1.0, 10.0, b0, 0.0), [64, 64], Some(Boundary::Periodic), MagneticScheme::Peierls)?;
        let got = eigensolve_lowest_with(&h, 8, &options(seed))?.eigenvalues;
        let want = cylinder_levels(1.0, 10.0, b0, true, p, 8);
        // levels cross zero near half flux; errors are measured against hbar^2 / 2 m r^2 there
        r.check(format!("flux {f}: max relative error"), max_relative_error(&got, &want, 0.5), Bound::AtMost, 5e-3);
        if f == 0.0 {
            zero = got.clone();
        }
        if f == 1.0 {
            let d = got.iter().zip(&zero).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            r.check("integer flux equals zero flux", d, Bound::AtMost, 1e-8);
        }
        r.series(format!("flux {f} eigenvalues"), &got);
        r.series(format!("flux {f} oracle"), &want);
    }
    Ok(())
}

fn reference_systems() -> [(&'static str, SystemSpec); 3] {
    [
        ("sphere", SystemSpec::sphere(1.0, 0.7)),
        ("cylinder", SystemSpec::cylinder(1.0, 4.0, 0.6, 0.4)),
        ("torus", SystemSpec::torus(2.0, 1.0, 0.5, 0.3)),
    ]
}

fn reference_equality(r: &mut CriterionReport) -> curvedq_core::Result<()> {
    for (name, spec) in reference_systems() {
        for scheme in [MagneticScheme::Symmetrized, MagneticScheme::Peierls] {
            let grid = build_grid(&spec.chart(), 32, 32, [None, None])?;
            let closed = reference_hamiltonian(&spec, &grid, scheme)?;
            let generic = system_operator(&spec, [32, 32], None, scheme)?;
            r.check(
                format!("{name} ({}) max relative difference", scheme.label()),
                relative_operator_difference(&closed, &generic),
                Bound::AtMost,
                1e-10,
            );
        }
    }
    Ok(())
}

fn gauge_covariance(r: &mut CriterionReport, seed: u64) -> curvedq_core::Result<()> {
    let (l, b1, k) = (3.0, 0.8, 6);
    let chart = cylinder(1.0, l);
    let mut diffs = Vec::new();
    let mut overlap = 0.0;
    for n in [32, 64, 128] {
        let grid = build_grid(&chart, n, n, [None, Some(Boundary::Dirichlet)])?;
        let sp1 = normal_gauge_fix(&chart, &uniform_field_potential([b1, 0.0, 0.0], Gauge::AxialSymmetric), &grid)?;
        let sp2 = normal_gauge_fix(&chart, &uniform_field_potential([b1, 0.0, 0.0], Gauge::Symmetric), &grid)?;
        let h1 = generic_operator(&chart, &grid, &sp1, MagneticScheme::Symmetrized)?;
        let h2 = generic_operator(&chart, &grid, &sp2, MagneticScheme::Symmetrized)?;
        let s1 = eigensolve_lowest_with(&h1, k, &options(seed))?;
        let s2 = eigensolve_lowest_with(&h2, k, &options(seed))?;
        diffs.push(s1.eigenvalues.iter().zip(&s2.eigenvalues).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        if n == 128 {
            // A_symmetric = A_axial + grad gamma
            let phase = gauge_phase(&grid, |t, y| -0.5 * b1 * t.sin() * y, 1.0, 1.0);
            let mapped = transform_wavefunction(&s1.eigenvectors[0].values, &phase);
            overlap = weighted_inner_product(&s2.eigenvectors[0].values, &mapped, h1.weights())?.norm();
            r.series("eigenvalues 128 axial gauge", &s1.eigenvalues);
            r.series("eigenvalues 128 symmetric gauge", &s2.eigenvalues);
        }
    }
    r.check("order 32 -> 64", (diffs[0] / diffs[1]).log2(), Bound::AtLeast, 1.7);
    r.check("order 64 -> 128", (diffs[1] / diffs[2]).log2(), Bound::AtLeast, 1.7);
    r.check("ground-state overlap at 128", overlap, Bound::AtLeast, 1.0 - 1e-6);
    r.series("max eigenvalue difference", &diffs);
    Ok(())
}

fn geometric_potential_check(r: &mut CriterionReport) -> curvedq_core::Result<()> {
    let (big_r, rr) = (2.0, 1.0);
    let cases: [(&str, SurfaceChart, [usize; 2], Box<dyn Fn([f64; 3]) -> f64>); 3] = [
        ("sphere", sphere(rr), [32, 64], Box::new(|_| 0.0)),
        ("cylinder", cylinder(rr, 10.0), [32, 32], Box::new(move |_| -1.0 / (8.0 * rr * rr))),
        (
            "torus",
            torus(big_r, rr),
            [32, 32],
            Box::new(move |q: [f64; 3]| {
                let w = big_r + rr * q[0].cos();
                -0.5 * (big_r / (2.0 * rr * w)).powi(2)
            }),
        ),
    ];
    for (name, chart, n, want) in cases {
        let grid = build_grid(&chart, n[0], n[1], [None, None])?;
        let geo = sample_geometry(&chart, &grid)?;
        let err = geo
            .nodes
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, gp)| m.max((geometric_potential(gp, 1.0, 1.0) - want(grid.coords(i))).abs()));
        r.check(format!("{name} max |V_S - closed form|"), err, Bound::AtMost, 1e-12);
    }
    Ok(())
}

/// Metric of `R(q, q3) = r(q) + q3 n(q)` by central differences of the
/// embedding.
pub fn finite_difference_shell_metric(chart: &SurfaceChart, q: [f64; 2], q3: f64, step: f64) -> curvedq_core::Result<[[f64; 3]; 3]> {
    let embed = |a: f64, b: f64, c: f64| -> curvedq_core::Result<[f64; 3]> {
        let p = chart.point(a, b);
        let n = metric_at(chart, [a, b])?.normal;
        Ok([p[0] + c * n[0], p[1] + c * n[1], p[2] + c * n[2]])
    };
    let mut d = [[0.0; 3]; 3];
    for (axis, row) in d.iter_mut().enumerate() {
        let mut lo = [q[0], q[1], q3];
        let mut hi = lo;
        lo[axis] -= step;
        hi[axis] += step;
        let (pl, ph) = (embed(lo[0], lo[1], lo[2])?, embed(hi[0], hi[1], hi[2])?);
        for k in 0..3 {
            row[k] = (ph[k] - pl[k]) / (2.0 * step);
        }
    }
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = (0..3).map(|k| d[i][k] * d[j][k]).sum();
        }
    }
    Ok(g)
}

fn adapted_metric_check(r: &mut CriterionReport, seed: u64) -> curvedq_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let charts = [sphere(1.3), cylinder(0.7, 4.0), torus(2.0, 0.8), bent_sheet(2.0, 1.0, 0.6)];
    for chart in charts {
        let mut metric_err = 0.0f64;
        let mut det_err = 0.0f64;
        let [(a0, a1), (b0, b1)] = chart.domain();
        for _ in 0..200 {
            // stay clear of coordinate singularities at the domain ends
            let q = [a0 + (a1 - a0) * rng.gen_range(0.1..0.9), b0 + (b1 - b0) * rng.gen_range(0.1..0.9)];
            let gp = weingarten_at(&chart, q)?;
            let kmax = gp.principal_curvatures().iter().fold(0.0f64, |m, k| m.max(k.abs()));
            let q3 = rng.gen_range(-1.0..1.0) * 0.05 / kmax.max(1e-12);
            let adapted = adapted_metric_from(&gp, q3).g;
            let fd = finite_difference_shell_metric(&chart, q, q3, 1e-5)?;
            let scale = adapted.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let diff = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max((adapted[i][j] - fd[i][j]).abs()));
            metric_err = metric_err.max(diff / scale);
            let f = rescale_factor(&gp, q3)?;
            let det_big = adapted[0][0] * adapted[1][1] - adapted[0][1] * adapted[1][0];
            let det_g = gp.g[0][0] * gp.g[1][1] - gp.g[0][1] * gp.g[1][0];
            det_err = det_err.max((det_big - f * f * det_g).abs() / (f * f * det_g));
        }
        r.check(format!("{} metric vs finite differences", chart.name()), metric_err, Bound::AtMost, 1e-6);
        r.check(format!("{} det G = f^2 det g", chart.name()), det_err, Bound::AtMost, 1e-10);
    }
    Ok(())
}

fn no_coupling(r: &mut CriterionReport) -> curvedq_core::Result<()> {
    let (lx, ly) = (2.0, 1.0);
    let flat = plane(lx, ly);
    let bent = bent_sheet(lx, ly, 0.6);
    let grid = build_grid(&flat, 24, 16, [None, None])?;
    let a = |q1: f64, q2: f64| [0.4 * q2 + 0.2 * (3.0 * q1).sin(), -0.7 * q1 + 0.3 * q2 * q2];
    let with_field = SurfacePotential::from_components(&grid, a, |_, _| 0.0, "chart");
    let without = SurfacePotential::zero(&grid);
    for scheme in [MagneticScheme::Symmetrized, MagneticScheme::Peierls] {
        let mut d = Vec::new();
        for chart in [&flat, &bent] {
            let h_a = generic_operator(chart, &grid, &with_field, scheme)?;
            let h_0 = generic_operator(chart, &grid, &without, scheme)?;
            let n = h_a.len();
            let mut out = vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = h_a.entry(i, j) - h_0.entry(i, j);
                }
            }
            d.push(out);
        }
        let scale = d[0].iter().fold(0.0f64, |m, x| m.max(x.norm()));
        let diff = d[0].iter().zip(&d[1]).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        r.check(format!("{}: max |dH_plane - dH_bent| / max |dH|", scheme.label()), diff / scale, Bound::AtMost, 1e-12);
    }
    Ok(())
}

fn unitarity(r: &mut CriterionReport) -> curvedq_core::Result<()> {
    let mut worst = 0.0f64;
    for (_, spec) in reference_systems() {
        let grid = build_grid(&spec.chart(), 32, 32, [None, None])?;
        for scheme in [MagneticScheme::Symmetrized, MagneticScheme::Peierls] {
            worst = worst.max(hermiticity_defect(&reference_hamiltonian(&spec, &grid, scheme)?));
            worst = worst.max(hermiticity_defect(&system_operator(&spec, [32, 32], None, scheme)?));
        }
    }
    worst = worst.max(hermiticity_defect(&system_operator(&SystemSpec::sphere(1.0, 0.0), [64, 128], None, MagneticScheme::Symmetrized)?));
    r.check("max Hermiticity defect", worst, Bound::AtMost, 1e-12);

    let spec = SystemSpec::torus(2.0, 1.0, 0.7, 0.4);
    let h = system_operator(&spec, [32, 32], None, MagneticScheme::Symmetrized)?;
    let mut psi = WaveFunction::from_fn(&h.grid, |q| {
        let (dt, dp) = (q[0] - 1.0, q[1] - 3.0);
        C64::from_polar((-(dt * dt + dp * dp) / 0.5).exp(), 2.0 * q[1])
    });
    psi.normalize(h.weights())?;
    let trace = propagate_cn(&h, &psi, 0.01, 1000, &[Observable::Momentum(1)], 0)?;
    let n_drift = trace.norms.iter().fold(0.0f64, |m, n| m.max((n - 1.0).abs()));
    let e0 = trace.energies[0];
    let e_drift = trace.energies.iter().fold(0.0f64, |m, e| m.max((e - e0).abs())) / e0.abs();
    r.check("norm drift over 1000 steps", n_drift, Bound::AtMost, 1e-10);
    r.check("relative energy drift over 1000 steps", e_drift, Bound::AtMost, 1e-8);
    let stride = 50;
    r.series("t", &trace.times.iter().step_by(stride).copied().collect::<Vec<_>>());
    r.series("energy", &trace.energies.iter().step_by(stride).copied().collect::<Vec<_>>());
    Ok(())
}

fn torus_spectrum(r: &mut CriterionReport, seed: u64) -> curvedq_core::Result<()> {
    // B0 = 0.25 threads half a flux quantum through the centre-line circle
    for b0 in [0.0, 0.25] {
        let spec = SystemSpec::torus(2.0, 1.0, b0, 0.0);
        let h = system_operator(&spec, [64, 64], None, MagneticScheme::Symmetrized)?;
        let got = eigensolve_lowest_with(&h, 10, &options(seed))?.eigenvalues;
        let want = torus_axisymmetric_levels(2.0, 1.0, b0, Physics::default(), 10)?;
        r.check(format!("B0 = {b0}: max relative error"), max_relative_error(&got, &want, 0.5), Bound::AtMost, 5e-3);
        r.series(format!("B0 = {b0} eigenvalues"), &got);
        r.series(format!("B0 = {b0} oracle"), &want);
    }
    Ok(())
}

/// Runs one criterion; computation errors are recorded in the report.
pub fn run_criterion(id: u32, seed: u64) -> CriterionReport {
    let mut r = CriterionReport::new(id, criterion_name(id));
    let start = Instant::now();
    let outcome = match id {
        1 => sphere_spectrum(&mut r, seed),
        2 => aharonov_bohm(&mut r, seed),
        3 => reference_equality(&mut r),
        4 => gauge_covariance(&mut r, seed),
        5 => geometric_potential_check(&mut r),
        6 => adapted_metric_check(&mut r, seed),
        7 => no_coupling(&mut r),
        8 => unitarity(&mut r),
        9 => torus_spectrum(&mut r, seed),
        _ => Err(curvedq_core::Error::InvalidArgument(format!("no criterion {id}"))),
    };
    if let Err(e) = outcome {
        r.error = Some(e.to_string());
    }
    info!("criterion {id} ({}) {} in {:.2?}", r.name, if r.passed() { "passed" } else { "FAILED" }, start.elapsed());
    r
}

pub fn run_suite(name: &str, seed: u64) -> CliResult<Vec<CriterionReport>> {
    let ids = suite_criteria(name).ok_or_else(|| crate::error::ConfigError::invalid("suite", format!("unknown suite `{name}` (known: {})", SUITES.join(", "))))?;
    Ok(ids.par_iter().map(|id| run_criterion(*id, seed)).collect())
}

fn suite_hash(name: &str, seed: u64) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(format!("validate suite={name} seed={seed}").as_bytes()))
}

pub fn report_json(name: &str, seed: u64, reports: &[CriterionReport]) -> Value {
    let criteria: Vec<Value> = reports
        .iter()
        .map(|r| {
            let checks: Vec<Value> = r
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "value": json_f64(c.value), "bound": c.bound.label(), "limit": json_f64(c.limit), "passed": c.passed}))
                .collect();
            let mut data = Map::new();
            for (k, v) in &r.data {
                data.insert(k.clone(), json_array(v));
            }
            json!({"id": r.id, "name": r.name, "passed": r.passed(), "error": r.error, "checks": checks, "data": data})
        })
        .collect();
    json!({
        "metadata": {"config_hash": suite_hash(name, seed), "suite": name, "seed": seed},
        "passed": reports.iter().all(|r| r.passed()),
        "criteria": criteria,
    })
}

pub fn report_table(reports: &[CriterionReport]) -> Table {
    let mut t = Table::new(&["criterion", "name", "check", "value", "bound", "limit", "passed"]);
    for r in reports {
        if let Some(e) = &r.error {
            t.push(vec![r.id.to_string(), r.name.into(), format!("error: {e}"), "nan".into(), "".into(), "nan".into(), "false".into()]);
        }
        for c in &r.checks {
            t.push(vec![
                r.id.to_string(),
                r.name.into(),
                c.name.clone(),
                format_f64(c.value),
                c.bound.label().into(),
                format_f64(c.limit),
                c.passed.to_string(),
            ]);
        }
    }
    t
}

/// Runs a suite, writes `validation.json` / `validation.csv` and prints one
/// line per criterion on stdout.
pub fn run_validation(name: &str, seed: u64, out: &OutputOptions) -> CliResult<RunSummary> {
    ensure_dir(&out.dir)?;
    let reports = run_suite(name, seed)?;
    let mut files = Vec::new();
    if out.formats.contains(&Format::Json) {
        files.push(write_json(&out.dir, "validation.json", &report_json(name, seed, &reports))?);
    }
    if out.formats.contains(&Format::Csv) {
        files.push(report_table(&reports).write(&out.dir, "validation.csv", &suite_hash(name, seed))?);
    }
    for r in &reports {
        println!("criterion {:>2} {:<46} {}", r.id, r.name, if r.passed() { "PASS" } else { "FAIL" });
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("    {}: {} (need {} {})", c.name, format_f64(c.value), c.bound.label(), format_f64(c.limit));
        }
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
    }
    let passed = reports.iter().all(|r| r.passed());
    Ok(RunSummary { files, passed })
}

/// Convenience for callers that want an error on failure.
pub fn require_pass(summary: &RunSummary) -> CliResult<()> {
    if summary.passed {
        Ok(())
    } else {
        Err(CliError::ValidationFailed("one or more criteria failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_resolve() {
        for s in SUITES {
            assert!(suite_criteria(s).is_some(), "{s}");
        }
        assert!(suite_criteria("nope").is_none());
    }

    #[test]
    fn check_bounds() {
        assert!(Check::new("a", 1.0, Bound::AtMost, 1.0).passed);
        assert!(!Check::new("a", f64::NAN, Bound::AtMost, 1.0).passed);
        assert!(!Check::new("a", f64::NAN, Bound::AtLeast, 1.0).passed);
        assert!(Check::new("a", 3.0, Bound::Equals, 3.0).passed);
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [5, 6, 7] {
            let r = run_criterion(id, 3);
            assert!(r.passed(), "{r:?}");
        }
    }
}
