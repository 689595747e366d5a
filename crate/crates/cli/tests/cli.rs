use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

const DISC: &str = r#"{"kind":"polar-fourier","symmetry":1,"base_radius":1.0,"cosines":[],"nodes":256}"#;
const PEANUT: &str = r#"{"kind":"polar-fourier","symmetry":2,"base_radius":1.0,"cosines":[0.6],"nodes":256}"#;
const ELLIPSE: &str = r#"{"kind":"complex-fourier","coefficients":[[0.5,0.0],[0.0,0.0],[1.5,0.0]],"k_min":-1,"k_max":1,"nodes":256}"#;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_vpatch"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("VPATCH_THREADS")
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr has an error document");
    serde_json::from_str(line).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{schema}.schema.json"));
    let schema_doc = read_json(&path);
    let compiled = JSONSchema::compile(&schema_doc).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{schema} document invalid: {msgs:#?}");
}

fn sup_norm(doc: &Value) -> f64 {
    doc["payload"]["sup_norm"].as_f64().unwrap()
}

#[test]
fn disc_residual_passes() {
    let s = Sandbox::new();
    let disc = s.file("disc.json", DISC);
    let o = s.run(&["residual", "--contour", &disc, "--omega", "-1"]);
    assert_eq!(code(&o), 0);
    let doc = stdout_json(&o);
    assert_valid("residual", &doc);
    assert!(sup_norm(&doc) < 1e-12, "{}", sup_norm(&doc));
    assert_eq!(doc["payload"]["nodes"], 256);
}

#[test]
fn residual_tolerance_failure_exits_two() {
    let s = Sandbox::new();
    let e = s.file("ellipse.json", ELLIPSE);
    let out = s.path("r.json");
    let o = s.run(&[
        "residual",
        "--contour",
        &e,
        "--omega",
        "0.1",
        "--tolerance",
        "1e-8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let doc = read_json(&out);
    assert_valid("residual", &doc);
    assert!(sup_norm(&doc) > 1e-3);
    assert_eq!(doc["manifest"]["tolerances"]["residual"], 1e-8);

    let kirchhoff = 2.0 / 9.0;
    let o = s.run(&["residual", "--contour", &e, "--omega", &kirchhoff.to_string(), "--tolerance", "1e-10"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn peanut_fails_sigma_check_with_witnesses() {
    let s = Sandbox::new();
    let p = s.file("peanut.json", PEANUT);
    let o = s.run(&["sigma-check", "--contour", &p, "--alpha", "1.1071", "--interior-samples", "4000"]);
    assert_eq!(code(&o), 2);
    let doc = stdout_json(&o);
    assert_valid("sigma-report", &doc);
    let r = &doc["payload"];
    assert_eq!(r["verdict"], false);
    assert_eq!(r["condition2"]["pass"], false);
    assert!(r["condition2"]["max_dot"].as_f64().unwrap() > r["condition2"]["threshold"].as_f64().unwrap());
    assert_eq!(r["condition3"]["pass"], false);
    assert!(r["condition3"]["worst"].is_object());
}

#[test]
fn disc_passes_sigma_check_with_symbolic_alpha() {
    let s = Sandbox::new();
    let d = s.file("disc.json", DISC);
    let o = s.run(&["sigma-check", "--contour", &d, "--alpha", "acos(1/sqrt5)", "--interior-samples", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_valid("sigma-report", &doc);
    let alpha = doc["payload"]["alpha"].as_f64().unwrap();
    assert!((alpha - (1.0 / 5f64.sqrt()).acos()).abs() < 1e-15);
}

#[test]
fn bifurcation_scan_brackets_one_third() {
    let s = Sandbox::new();
    let o = s.run(&["bifurcation-scan", "--m", "3", "--omega", "0.30:0.36:0.005"]);
    assert_eq!(code(&o), 0);
    let doc = stdout_json(&o);
    assert_valid("bifurcation-scan", &doc);
    let p = &doc["payload"];
    assert_eq!(p["samples"].as_array().unwrap().len(), 13);
    let grid_min = p["grid_minimum"]["omega"].as_f64().unwrap();
    assert!((grid_min - 0.335).abs() <= 0.005 + 1e-12, "{grid_min}");
    let refined = p["refined"]["omega"].as_f64().unwrap();
    assert!((refined - 1.0 / 3.0).abs() < 5e-4, "{refined}");
}

#[test]
fn solve_from_disc_perturbation() {
    let s = Sandbox::new();
    let o = s.run(&["solve", "--m", "3", "--omega", "0.32", "--amp0", "0.05", "--tol", "1e-10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_valid("solution", &doc);
    let p = &doc["payload"];
    assert!(p["residual_norm"].as_f64().unwrap() <= 1e-10);
    assert_eq!(p["omega"], 0.32);
    assert_eq!(p["shape"]["symmetry"], 3);
    assert_eq!(p["contour"]["kind"], "polar-fourier");
}

#[test]
fn solve_from_contour_with_free_omega() {
    let s = Sandbox::new();
    let c = s.file(
        "start.json",
        r#"{"kind":"polar-fourier","symmetry":3,"base_radius":1.0,"cosines":[0.02],"nodes":256}"#,
    );
    let o = s.run(&[
        "solve",
        "--contour",
        &c,
        "--omega",
        "0.333",
        "--free-omega",
        "--harmonics",
        "12",
        "--nodes",
        "256",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_valid("solution", &doc);
    let omega = doc["payload"]["omega"].as_f64().unwrap();
    assert!(omega > 0.0 && omega < 0.5 && (omega - 1.0 / 3.0).abs() < 1e-3, "{omega}");
    assert_eq!(doc["payload"]["shape"]["cosines"][0], 0.02);
}

#[test]
fn solve_rejects_conflicting_inputs() {
    let s = Sandbox::new();
    let d = s.file("disc.json", DISC);
    let o = s.run(&["solve", "--contour", &d, "--m", "3", "--amp0", "0.1", "--omega", "0.3"]);
    assert_eq!(code(&o), 1);
    let o = s.run(&["solve", "--omega", "0.3"]);
    assert_eq!(code(&o), 1);
    assert_valid("error", &stderr_json(&o));
    let e = s.file("ellipse.json", ELLIPSE);
    let o = s.run(&["solve", "--contour", &e, "--omega", "0.3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn divergence_reports_last_iterate() {
    let s = Sandbox::new();
    let o = s.run(&["solve", "--m", "3", "--omega", "0.4", "--amp0", "0.3", "--max-iter", "2"]);
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_valid("error", &err);
    assert_eq!(err["error"], "divergence");
    assert_eq!(err["data"]["iterations"], 2);
    assert!(err["data"]["last"]["shape"]["cosines"].is_array());
}

#[test]
fn branch_tracks_toward_one_third() {
    let s = Sandbox::new();
    let out = s.path("branch.json");
    let o = s.run(&[
        "branch",
        "--m",
        "3",
        "--amps",
        "0.01:0.03:0.01",
        "--harmonics",
        "12",
        "--nodes",
        "256",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    assert_valid("branch", &doc);
    let sols = doc["payload"]["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 3);
    for sol in sols {
        let omega = sol["omega"].as_f64().unwrap();
        assert!(omega > 0.0 && omega < 0.5);
        assert!(sol["residual_norm"].as_f64().unwrap() <= 1e-11);
    }
    let ext = doc["payload"]["extrapolated_omega"].as_f64().unwrap();
    assert!((ext - 1.0 / 3.0).abs() < 1e-4, "{ext}");
}

#[test]
fn every_probe_kind_passes_on_the_disc() {
    let s = Sandbox::new();
    let d = s.file("disc.json", DISC);
    for kind in [
        "phi-sign",
        "g-mono",
        "normal-bound",
        "moving-plane",
        "radial",
        "half-omega",
        "laplacian",
    ] {
        let out = s.path(&format!("{kind}.json"));
        let o = s.run(&[
            "probe",
            "--kind",
            kind,
            "--contour",
            &d,
            "--omega",
            "-1",
            "--grid",
            "40",
            "--interior-samples",
            "2000",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let doc = read_json(&out);
        assert_valid("probe-report", &doc);
        assert_eq!(doc["payload"]["verdict"], true, "{kind}");
    }
}

#[test]
fn probe_on_a_non_vstate_is_an_error() {
    let s = Sandbox::new();
    let e = s.file("ellipse.json", ELLIPSE);
    let o = s.run(&["probe", "--kind", "phi-sign", "--contour", &e, "--omega", "0.1", "--grid", "20"]);
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_valid("error", &err);
    assert_eq!(err["error"], "not-a-vstate");
    assert!(err["data"]["residual"].as_f64().unwrap() > err["data"]["threshold"].as_f64().unwrap());
}

#[test]
fn probe_fails_on_the_peanut() {
    let s = Sandbox::new();
    let p = s.file("peanut.json", PEANUT);
    let o = s.run(&["probe", "--kind", "half-omega", "--contour", &p, "--interior-samples", "2000"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_valid("probe-report", &doc);
    assert_eq!(doc["payload"]["verdict"], false);
    assert!(!doc["payload"]["witness"].as_array().unwrap().is_empty());
}

#[test]
fn evolve_writes_snapshots_and_manifest() {
    let s = Sandbox::new();
    let e = s.file("ellipse.json", ELLIPSE);
    let frames = s.path("frames");
    let o = s.run(&[
        "evolve",
        "--contour",
        &e,
        "--dt",
        "0.01",
        "--steps",
        "30",
        "--snapshot-every",
        "10",
        "--out-dir",
        frames.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = read_json(&frames.join("run.json"));
    assert_valid("evolution", &run);
    assert_eq!(run["payload"]["steps"], 30);
    assert!(run["payload"]["relative_area_drift"].as_f64().unwrap() < 1e-10);
    let names: Vec<&str> = run["payload"]["snapshots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["snapshot_000000.json", "snapshot_000010.json", "snapshot_000020.json", "snapshot_000030.json"]
    );
    for n in &names {
        let snap = read_json(&frames.join(n));
        assert_valid("contour", &snap);
    }
    let csv = std::fs::read_to_string(frames.join("manifest.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,time,area,barycenter_x,barycenter_y");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(last[0], 30.0);
    assert!((last[1] - 0.3).abs() < 1e-12);
    assert!((last[2] - 2.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn field_csv_on_a_grid() {
    let s = Sandbox::new();
    let d = s.file("disc.json", DISC);
    let out = s.path("field.csv");
    let o = s.run(&[
        "field",
        "--contour",
        &d,
        "--omega",
        "0.5",
        "--grid",
        "5",
        "--bounds",
        "-2:2:-2:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_valid("field", &doc);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,psi,vx,vy,phi,re_C,im_C"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    let mu = doc["payload"]["mu"].as_f64().unwrap();
    for r in &rows {
        let z2 = r[0] * r[0] + r[1] * r[1];
        let psi = if z2 <= 1.0 {
            0.25 * (z2 - 1.0)
        } else {
            0.25 * z2.ln()
        };
        assert!((r[2] - psi).abs() < 1e-12, "{r:?}");
        assert!((r[5] - (mu + 0.25 * z2 - r[2])).abs() < 1e-12);
        // outside the disc C = -1/z, inside -conj z
        let (cr, ci) = if z2 <= 1.0 { (-r[0], r[1]) } else { (-r[0] / z2, r[1] / z2) };
        assert!((r[6] - cr).abs() < 1e-12 && (r[7] - ci).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn payloads_are_reproducible() {
    let s = Sandbox::new();
    let p = s.file("peanut.json", PEANUT);
    let args = ["sigma-check", "--contour", p.as_str(), "--interior-samples", "2000"];
    let mut a = stdout_json(&s.run(&args));
    let mut b = stdout_json(&s.run(&args));
    for d in [&mut a, &mut b] {
        d["manifest"].as_object_mut().unwrap().remove("wall_time_seconds");
    }
    assert_eq!(a, b);
    let digest = a["manifest"]["input_digests"][&p].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn usage_errors_exit_one() {
    let s = Sandbox::new();
    assert_eq!(code(&s.run(&["no-such-command"])), 1);
    assert_eq!(code(&s.run(&[])), 1);
    assert_eq!(code(&s.run(&["--help"])), 0);
    assert_eq!(code(&s.run(&["--version"])), 0);
    assert_eq!(code(&s.run(&["residual", "--omega", "0"])), 1);
    assert_eq!(code(&s.run(&["bifurcation-scan", "--m", "3", "--omega", "0.4:0.3:0.01"])), 1);

    let missing = s.run(&["residual", "--contour", "absent.json", "--omega", "0"]);
    assert_eq!(code(&missing), 1);
    let err = stderr_json(&missing);
    assert_valid("error", &err);
    assert_eq!(err["error"], "usage");
}

#[test]
fn malformed_and_invalid_contours_exit_one() {
    let s = Sandbox::new();
    let bad = s.file("bad.json", "{not json");
    let o = s.run(&["residual", "--contour", &bad, "--omega", "0"]);
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_valid("error", &err);
    assert_eq!(err["error"], "malformed-json");

    let unknown = s.file("unknown.json", r#"{"kind":"spline","nodes":8}"#);
    let o = s.run(&["residual", "--contour", &unknown, "--omega", "0"]);
    assert_eq!(code(&o), 1);

    let figure_eight = s.file(
        "eight.json",
        r#"{"kind":"polyline","points":[[0,0],[1,1],[1,-1],[0,0.0001],[-1,1],[-1,-1]],"nodes":256}"#,
    );
    let o = s.run(&["residual", "--contour", &figure_eight, "--omega", "0"]);
    assert_eq!(code(&o), 1);
    assert_valid("error", &stderr_json(&o));
}

#[test]
fn thread_cap_is_recorded() {
    let s = Sandbox::new();
    let d = s.file("disc.json", DISC);
    let o = s.run(&["--threads", "1", "residual", "--contour", &d, "--omega", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["manifest"]["threads"], 1);

    let o = Command::new(env!("CARGO_BIN_EXE_vpatch"))
        .args(["residual", "--contour", &d, "--omega", "0"])
        .env("VPATCH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["manifest"]["threads"], 1);

    assert_eq!(code(&s.run(&["--threads", "0", "residual", "--contour", &d, "--omega", "0"])), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_vpatch"))
        .args(["residual", "--contour", &d, "--omega", "0"])
        .env("VPATCH_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
