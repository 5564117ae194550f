use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvedq::config::{Format, GaugeChoice, RunConfig, SchemeChoice, SurfaceKind, SurfaceSection, Task};
use curvedq::pipeline::{self, OutputOptions, RunSummary};
use curvedq::{validate, CliError};

#[derive(Parser, Debug)]
#[command(name = "curvedq", version, about = "Charged quantum particles on curved surfaces in magnetic fields")]
struct Cli {
    /// Directory for result files.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Summary format (spectrum and validation tables).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized checks and solver start vectors.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a TOML run configuration.
    Run { config: PathBuf },
    /// Run a validation suite.
    Validate {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Lowest eigenvalues of a built-in surface.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long, value_enum)]
    surface: SurfaceArg,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    /// Cartesian field, `Bx,By,Bz`.
    #[arg(long = "B", value_parser = parse_vec3, allow_hyphen_values = true)]
    b: Option<[f64; 3]>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Grid as `N1xN2`.
    #[arg(long, value_parser = parse_grid, default_value = "64x64")]
    n: (usize, usize),
    #[arg(long, value_enum, default_value = "symmetric")]
    gauge: GaugeArg,
    #[arg(long, value_enum, default_value = "symmetrized")]
    scheme: SchemeArg,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum SurfaceArg {
    Plane,
    Sphere,
    Cylinder,
    Torus,
    BentSheet,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum GaugeArg {
    Symmetric,
    AxialSymmetric,
    LandauX,
    LandauY,
    LandauZ,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Symmetrized,
    Peierls,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected N1xN2, got `{s}`"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a grid size"));
    Ok((n(a)?, n(b)?))
}

fn spectrum_config(a: &SpectrumArgs) -> RunConfig {
    let kind = match a.surface {
        SurfaceArg::Plane => SurfaceKind::Plane,
        SurfaceArg::Sphere => SurfaceKind::Sphere,
        SurfaceArg::Cylinder => SurfaceKind::Cylinder,
        SurfaceArg::Torus => SurfaceKind::Torus,
        SurfaceArg::BentSheet => SurfaceKind::BentSheet,
    };
    let mut surface = SurfaceSection::builtin(kind);
    surface.r = a.r;
    surface.big_r = a.big_r;
    surface.l = a.l;
    let mut cfg = RunConfig::new(Task::Spectrum, surface);
    cfg.grid.n1 = a.n.0;
    cfg.grid.n2 = a.n.1;
    cfg.field.b = a.b.unwrap_or([0.0; 3]);
    cfg.field.gauge = match a.gauge {
        GaugeArg::Symmetric => GaugeChoice::Symmetric,
        GaugeArg::AxialSymmetric => GaugeChoice::AxialSymmetric,
        GaugeArg::LandauX => GaugeChoice::LandauX,
        GaugeArg::LandauY => GaugeChoice::LandauY,
        GaugeArg::LandauZ => GaugeChoice::LandauZ,
    };
    cfg.solver.scheme = match a.scheme {
        SchemeArg::Symmetrized => SchemeChoice::Symmetrized,
        SchemeArg::Peierls => SchemeChoice::Peierls,
    };
    cfg.spectrum.k = a.k;
    cfg
}

fn execute(cli: Cli) -> Result<RunSummary, CliError> {
    let formats = cli.format.map(|f| vec![f]);
    match &cli.command {
        Command::Run { config } => pipeline::run_path(config, cli.output_dir.clone(), formats, cli.seed),
        Command::Validate { suite } => {
            let out = OutputOptions {
                dir: cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("curvedq-out")),
                formats: formats.unwrap_or_else(|| vec![Format::Json]),
            };
            validate::run_validation(suite, cli.seed.unwrap_or(0), &out)
        }
        Command::Spectrum(args) => {
            let mut cfg = spectrum_config(args);
            cfg.seed = cli.seed.unwrap_or(0);
            cfg.validate()?;
            let out = OutputOptions {
                dir: cli.output_dir.clone().unwrap_or_else(|| cfg.output.dir.clone()),
                formats: formats.unwrap_or_else(|| cfg.output.formats.clone()),
            };
            pipeline::run(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    if let Some(n) = curvedq::init_threads() {
        log::info!("using {n} worker threads");
    }
    match execute(cli) {
        Ok(summary) => {
            for f in &summary.files {
                log::info!("wrote {}", f.display());
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
