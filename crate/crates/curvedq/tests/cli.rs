use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn curvedq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvedq")).args(args).arg("--output-dir").arg(dir).output().unwrap()
}

/// Data rows of a CSV written by curvedq (comment line and header skipped).
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash: "));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn eigenvalues(dir: &Path) -> Vec<f64> {
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("spectrum.json")).unwrap()).unwrap();
    doc["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn spectrum_command_writes_deterministic_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["spectrum", "--surface", "sphere", "--r", "1.0", "--B", "0,0,1", "--k", "4", "--n", "16x32", "--seed", "3"];
    for d in [&a, &b] {
        let out = curvedq(&args, d);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["spectrum.json", "wavefunction_0.csv", "wavefunction_3.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(doc["residuals"].as_array().unwrap().len(), 4);
    let (header, rows) = csv_rows(&a.join("wavefunction_0.csv"));
    assert_eq!(header, ["q1", "q2", "re", "im", "abs2", "sqrt_g"]);
    assert_eq!(rows.len(), 16 * 32);
    // eigenvectors are normalized in the area measure
    let cell = (std::f64::consts::PI / 16.0) * (2.0 * std::f64::consts::PI / 32.0);
    let norm: f64 = rows.iter().map(|r| r[4] * r[5] * cell).sum();
    assert!((norm - 1.0).abs() < 1e-9, "{norm}");
    // 17 significant digits
    let text = fs::read_to_string(a.join("wavefunction_0.csv")).unwrap();
    let first = text.lines().nth(2).unwrap().split(',').next().unwrap().to_string();
    assert_eq!(first.split('e').next().unwrap().replace(['-', '.'], "").len(), 17, "{first}");
}

#[test]
fn geometry_task_reports_torus_curvature() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "task = \"geometry\"\n[surface]\nkind = \"torus\"\nR = 3.0\nr = 1.0\n[grid]\nn1 = 12\nn2 = 8\n");
    let out = curvedq(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("geometry.csv"));
    assert_eq!(header, ["q1", "q2", "V_S", "K", "M", "sqrt_g"]);
    assert_eq!(rows.len(), 96);
    for r in rows {
        let w = 3.0 + r[0].cos();
        assert!((r[2] + 0.5 * (3.0 / (2.0 * w)).powi(2)).abs() < 1e-12);
        assert!((r[3] - r[0].cos() / w).abs() < 1e-12);
        assert!((r[5] - w).abs() < 1e-12);
    }
}

#[test]
fn custom_torus_matches_builtin() {
    let tmp = tempfile::tempdir().unwrap();
    let common = "task = \"spectrum\"\n[grid]\nn1 = 16\nn2 = 16\n[field]\nB = [0.2, 0.0, 0.4]\n[spectrum]\nk = 6\nwavefunctions = 0\n";
    let builtin = write_config(tmp.path(), &format!("{common}[surface]\nkind = \"torus\"\nR = 2.0\nr = 1.0\n"));
    assert!(curvedq(&["run", &builtin], &tmp.path().join("builtin")).status.success());
    let custom = format!(
        "{common}[surface]\nkind = \"custom\"\nx = \"(R + r * cos(q1)) * cos(q2)\"\ny = \"(R + r * cos(q1)) * sin(q2)\"\nz = \"r * sin(q1)\"\n\
         q1 = [0.0, 6.283185307179586]\nq2 = [0.0, 6.283185307179586]\nperiodic = [true, true]\nparams = {{ R = 2.0, r = 1.0 }}\n"
    );
    let custom = write_config(tmp.path(), &custom);
    let out = curvedq(&["run", &custom], &tmp.path().join("custom"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (a, b) = (eigenvalues(&tmp.path().join("builtin")), eigenvalues(&tmp.path().join("custom")));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
    }
    assert!(!tmp.path().join("custom").join("wavefunction_0.csv").exists());
}

#[test]
fn evolve_task_traces_norm_and_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "task = \"evolve\"\n[surface]\nkind = \"sphere\"\n[grid]\nn1 = 12\nn2 = 24\n[field]\nB = [0.0, 0.0, 1.0]\nV = { builtin = \"axial-electric\", E = 0.3 }\n\
         [evolve]\ndt = 0.02\nsteps = 50\nsnapshot_stride = 25\nobservables = [\"z\", \"p2\"]\ninitial = { kind = \"gaussian\", center = [1.0, 3.0], momentum = [0.0, 2.0] }\n",
    );
    let out = curvedq(&["run", &cfg, "--format", "csv"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("trace.csv"));
    assert_eq!(header, ["t", "norm", "energy", "z", "p2"]);
    assert_eq!(rows.len(), 51);
    let e0 = rows[0][2];
    for r in &rows {
        assert!((r[1] - 1.0).abs() < 1e-10);
        assert!((r[2] - e0).abs() < 1e-8 * e0.abs());
    }
    for s in [0, 25, 50] {
        assert!(tmp.path().join(format!("snapshot_{s}.csv")).exists());
    }
    assert!(!tmp.path().join("evolution.json").exists());
}

#[test]
fn config_errors_are_reported_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "task = \"spectrum\"\n[surface]\nkind = \"sphere\"\nradius = 1.0\n");
    let out = curvedq(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = write_config(tmp.path(), "task = \"spectrum\"\n[surface]\nkind = \"custom\"\nx = \"q1 +\"\ny = \"q2\"\nz = \"0\"\nq1 = [0, 1]\nq2 = [0, 1]\n");
    let out = curvedq(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface.x"));

    let cfg = write_config(tmp.path(), "task = \"spectrum\"\n[surface]\nkind = \"custom\"\nx = \"q1\"\ny = \"q2\"\nz = \"0\"\nq1 = [0, 1]\nq2 = [0, 1]\nperiodic = [true, false]\n");
    let out = curvedq(&["run", &cfg], tmp.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface.periodic"));
}

#[test]
fn validate_writes_csv_and_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out = curvedq(&["validate", "--suite", "geometric-potential", "--format", "csv"], tmp.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("criterion  5"));
    let text = fs::read_to_string(tmp.path().join("validation.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("criterion,name,check"));
    let bad = curvedq(&["validate", "--suite", "nonsense"], tmp.path());
    assert_eq!(bad.status.code(), Some(2));
}
