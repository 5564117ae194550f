//! Declarative run configuration (TOML).
//!
//! Only `surface.kind` and `task` are required:
//!
//! ```toml
//! task = "spectrum"          # geometry | spectrum | evolve | validate
//! seed = 0
//!
//! [surface]
//! kind = "torus"             # plane | sphere | cylinder | torus | bent-sheet | custom
//! R = 2.0
//! r = 1.0
//!
//! [grid]
//! n1 = 64
//! n2 = 64
//! bc1 = "natural"            # natural | periodic | dirichlet | zero-flux
//! bc2 = "natural"
//!
//! [field]
//! B = [0.0, 0.0, 0.5]
//! gauge = "symmetric"        # symmetric | axial-symmetric | landau-x | landau-y | landau-z
//! V = 0.0                    # or { builtin = "axial-electric", E = 0.1 }
//!
//! [physics]
//! units = "dimensionless"    # dimensionless (m = Q = hbar = 1) | custom
//!
//! [spectrum]
//! k = 10
//! ```
//!
//! See the README for the full key list.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Geometry,
    Spectrum,
    Evolve,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Plane,
    Sphere,
    Cylinder,
    Torus,
    BentSheet,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub kind: SurfaceKind,
    /// Radius of sphere and cylinder, tube radius of the torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Torus centre-line radius.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    /// Cylinder length.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ly: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bend: Option<f64>,
    /// Components of a custom embedding `r(q1, q2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<[bool; 2]>,
    /// Named constants usable inside custom expressions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl SurfaceSection {
    pub fn builtin(kind: SurfaceKind) -> Self {
        Self {
            kind,
            r: None,
            big_r: None,
            l: None,
            lx: None,
            ly: None,
            bend: None,
            x: None,
            y: None,
            z: None,
            q1: None,
            q2: None,
            periodic: None,
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryChoice {
    /// Periodic on closed coordinates, zero flux at sphere poles, hard
    /// walls otherwise.
    #[default]
    Natural,
    Periodic,
    Dirichlet,
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
    pub bc1: BoundaryChoice,
    pub bc2: BoundaryChoice,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n1: 64,
            n2: 64,
            bc1: BoundaryChoice::Natural,
            bc2: BoundaryChoice::Natural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeChoice {
    #[default]
    Symmetric,
    AxialSymmetric,
    LandauX,
    LandauY,
    LandauZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarBuiltin {
    /// `V = -E y`: uniform electric field `E` along Cartesian y.
    AxialElectric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarChoice {
    Constant(f64),
    Builtin {
        builtin: ScalarBuiltin,
        #[serde(rename = "E")]
        e: f64,
    },
}

impl Default for ScalarChoice {
    fn default() -> Self {
        ScalarChoice::Constant(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    #[serde(rename = "B")]
    pub b: [f64; 3],
    pub gauge: GaugeChoice,
    #[serde(rename = "V")]
    pub v: ScalarChoice,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            b: [0.0; 3],
            gauge: GaugeChoice::Symmetric,
            v: ScalarChoice::Constant(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// `m = Q = hbar = 1`.
    #[default]
    Dimensionless,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub units: Units,
    pub m: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub hbar: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            units: Units::Dimensionless,
            m: 1.0,
            q: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    #[default]
    Symmetrized,
    Peierls,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub scheme: SchemeChoice,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub dense_threshold: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            scheme: SchemeChoice::Symmetrized,
            tolerance: 1e-9,
            max_iterations: 2000,
            dense_threshold: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub k: usize,
    /// Number of `wavefunction_<k>.csv` files; all `k` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefunctions: Option<usize>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { k: 10, wavefunctions: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// `exp(-|d|^2 / 2 w^2 + i p . q)` in chart coordinates; centre and
    /// width default to the domain centre and an eighth of the spans.
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<[f64; 2]>,
        #[serde(default)]
        momentum: [f64; 2],
    },
    /// The `index`-th eigenstate (0 = ground state).
    Eigenstate {
        #[serde(default)]
        index: usize,
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Gaussian {
            center: None,
            width: None,
            momentum: [0.0; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub dt: f64,
    pub steps: usize,
    /// Any of `q1 q2 x y z p1 p2 j1 j2`.
    pub observables: Vec<String>,
    /// Write `snapshot_<step>.csv` every this many steps (0 = never).
    pub snapshot_stride: usize,
    pub initial: InitialState,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 1000,
            observables: vec!["x".into(), "y".into(), "z".into()],
            snapshot_stride: 0,
            initial: InitialState::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub suite: String,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { suite: "all".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("curvedq-out"),
            formats: vec![Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    pub surface: SurfaceSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, "must be finite"))
    }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError::Parse {
            line: e.span().map(|s| line_of(src, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&src)
    }

    pub fn new(task: Task, surface: SurfaceSection) -> Self {
        Self {
            task,
            seed: 0,
            surface,
            grid: GridSection::default(),
            field: FieldSection::default(),
            physics: PhysicsSection::default(),
            solver: SolverSection::default(),
            spectrum: SpectrumSection::default(),
            evolve: EvolveSection::default(),
            validate: ValidateSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Range and consistency checks that serde cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.surface;
        let custom_keys = [("surface.x", s.x.is_some()), ("surface.y", s.y.is_some()), ("surface.z", s.z.is_some())];
        let geometric = [("surface.r", s.r), ("surface.R", s.big_r), ("surface.L", s.l), ("surface.lx", s.lx), ("surface.ly", s.ly), ("surface.bend", s.bend)];
        let allowed: &[&str] = match s.kind {
            SurfaceKind::Plane => &["surface.lx", "surface.ly"],
            SurfaceKind::Sphere => &["surface.r"],
            SurfaceKind::Cylinder => &["surface.r", "surface.L"],
            SurfaceKind::Torus => &["surface.r", "surface.R"],
            SurfaceKind::BentSheet => &["surface.lx", "surface.ly", "surface.bend"],
            SurfaceKind::Custom => &[],
        };
        for (key, v) in geometric {
            if let Some(v) = v {
                if !allowed.contains(&key) {
                    return Err(ConfigError::invalid(key, format!("not a parameter of {:?} surfaces", s.kind)));
                }
                positive(key, v)?;
            }
        }
        if s.kind == SurfaceKind::Custom {
            for (key, present) in custom_keys {
                if !present {
                    return Err(ConfigError::invalid(key, "custom surfaces need x, y and z expressions"));
                }
            }
            for (key, range) in [("surface.q1", s.q1), ("surface.q2", s.q2)] {
                match range {
                    Some([a, b]) if a.is_finite() && b.is_finite() && a < b => {}
                    Some(_) => return Err(ConfigError::invalid(key, "range must be finite and increasing")),
                    None => return Err(ConfigError::invalid(key, "custom surfaces need a coordinate range")),
                }
            }
            for (name, v) in &s.params {
                if !crate::expr::is_free_identifier(name) {
                    return Err(ConfigError::invalid(&format!("surface.params.{name}"), "reserved or not an identifier"));
                }
                finite(&format!("surface.params.{name}"), &[*v])?;
            }
        } else {
            for (key, present) in custom_keys.into_iter().chain([
                ("surface.q1", s.q1.is_some()),
                ("surface.q2", s.q2.is_some()),
                ("surface.periodic", s.periodic.is_some()),
                ("surface.params", !s.params.is_empty()),
            ]) {
                if present {
                    return Err(ConfigError::invalid(key, "only custom surfaces take expressions and ranges"));
                }
            }
        }
        if s.kind == SurfaceKind::Torus {
            let (big_r, r) = (s.big_r.unwrap_or(2.0), s.r.unwrap_or(1.0));
            if big_r <= r {
                return Err(ConfigError::invalid("surface.R", format!("ring torus needs R > r, got R = {big_r}, r = {r}")));
            }
        }
        for (key, n) in [("grid.n1", self.grid.n1), ("grid.n2", self.grid.n2)] {
            if n < 3 {
                return Err(ConfigError::invalid(key, format!("need at least 3 nodes, got {n}")));
            }
        }
        finite("field.B", &self.field.b)?;
        match self.field.v {
            ScalarChoice::Constant(v) => finite("field.V", &[v])?,
            ScalarChoice::Builtin { e, .. } => finite("field.V.E", &[e])?,
        }
        let p = &self.physics;
        positive("physics.m", p.m)?;
        positive("physics.hbar", p.hbar)?;
        finite("physics.Q", &[p.q])?;
        if p.units == Units::Dimensionless && (p.m != 1.0 || p.q != 1.0 || p.hbar != 1.0) {
            return Err(ConfigError::invalid("physics.units", "set units = \"custom\" to change m, Q or hbar"));
        }
        positive("solver.tolerance", self.solver.tolerance)?;
        if self.solver.max_iterations == 0 {
            return Err(ConfigError::invalid("solver.max_iterations", "must be at least 1"));
        }
        let n = self.grid.n1 * self.grid.n2;
        if self.spectrum.k == 0 || self.spectrum.k >= n {
            return Err(ConfigError::invalid("spectrum.k", format!("must lie in 1..{n}")));
        }
        if let Some(w) = self.spectrum.wavefunctions {
            if w > self.spectrum.k {
                return Err(ConfigError::invalid("spectrum.wavefunctions", "cannot exceed spectrum.k"));
            }
        }
        positive("evolve.dt", self.evolve.dt)?;
        for o in &self.evolve.observables {
            if !crate::pipeline::OBSERVABLES.contains(&o.as_str()) {
                return Err(ConfigError::invalid("evolve.observables", format!("unknown observable `{o}`")));
            }
        }
        match &self.evolve.initial {
            InitialState::Gaussian { center, width, momentum } => {
                if let Some(c) = center {
                    finite("evolve.initial.center", c)?;
                }
                if let Some([a, b]) = width {
                    positive("evolve.initial.width", *a)?;
                    positive("evolve.initial.width", *b)?;
                }
                finite("evolve.initial.momentum", momentum)?;
            }
            InitialState::Eigenstate { index } => {
                if *index + 1 >= n {
                    return Err(ConfigError::invalid("evolve.initial.index", "beyond the grid size"));
                }
            }
        }
        if !crate::validate::SUITES.contains(&self.validate.suite.as_str()) {
            return Err(ConfigError::invalid(
                "validate.suite",
                format!("unknown suite `{}` (known: {})", self.validate.suite, crate::validate::SUITES.join(", ")),
            ));
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::invalid("output.formats", "need at least one format"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of everything except the output
    /// section.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.output = OutputSection::default();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_toml("task = \"spectrum\"\n[surface]\nkind = \"sphere\"\n").unwrap();
        assert_eq!(cfg.grid, GridSection::default());
        assert_eq!(cfg.spectrum.k, 10);
        assert_eq!(cfg.field.v, ScalarChoice::Constant(0.0));
        assert_eq!(cfg.output.formats, vec![Format::Json]);
    }

    #[test]
    fn full_config_parses() {
        let src = r#"
task = "evolve"
seed = 7

[surface]
kind = "custom"
x = "(a + cos(q1)) * cos(q2)"
y = "(a + cos(q1)) * sin(q2)"
z = "sin(q1)"
q1 = [0.0, 6.283185307179586]
q2 = [0.0, 6.283185307179586]
periodic = [true, true]
params = { a = 2.5 }

[grid]
n1 = 16
n2 = 24
bc1 = "periodic"

[field]
B = [0.1, 0.0, 0.5]
gauge = "landau-x"
V = { builtin = "axial-electric", E = 0.2 }

[physics]
units = "custom"
m = 2.0
Q = -1.0

[solver]
scheme = "peierls"

[evolve]
dt = 0.005
steps = 10
observables = ["q1", "p2"]
initial = { kind = "eigenstate", index = 2 }

[output]
dir = "out"
formats = ["json", "csv"]
"#;
        let cfg = RunConfig::from_toml(src).unwrap();
        assert_eq!(cfg.surface.params["a"], 2.5);
        assert_eq!(cfg.field.v, ScalarChoice::Builtin { builtin: ScalarBuiltin::AxialElectric, e: 0.2 });
        assert_eq!(cfg.evolve.initial, InitialState::Eigenstate { index: 2 });
        assert_eq!(cfg.solver.scheme, SchemeChoice::Peierls);
    }

    #[test]
    fn errors_name_line_or_key() {
        let e = RunConfig::from_toml("task = \"spectrum\"\n[surface]\nkind = \"sphere\"\nradius = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: Some(4), .. }), "{e}");
        let e = RunConfig::from_toml("[surface]\nkind = \"sphere\"\n").unwrap_err();
        assert!(e.to_string().contains("task"), "{e}");
        let e = RunConfig::from_toml("task = \"spectrum\"\n[surface]\nkind = \"sphere\"\nr = -1\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "surface.r"), "{e}");
        let e = RunConfig::from_toml("task = \"spectrum\"\n[surface]\nkind = \"torus\"\nR = 1\nr = 2\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "surface.R"), "{e}");
        let e = RunConfig::from_toml("task = \"spectrum\"\n[surface]\nkind = \"sphere\"\n[physics]\nm = 2\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "physics.units"), "{e}");
    }

    #[test]
    fn hash_ignores_output_section() {
        let mut a = RunConfig::new(Task::Spectrum, SurfaceSection::builtin(SurfaceKind::Sphere));
        let h = a.hash();
        a.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), h);
        a.seed = 1;
        assert_ne!(a.hash(), h);
        assert_eq!(h.len(), 64);
    }
}
