//! `vpatch`: command-line front end for the V-state laboratory.
//!
//! Exit codes: 0 when the command ran and its check passed, 2 when it ran and
//! the mathematical check failed (the report is still written), 1 when it
//! could not run.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod parse;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use vpatch_core::dynamics::{self, EvolutionState, TimeStepConfig};
use vpatch_core::io::{parse_contour, ContourSpec};
use vpatch_core::potential::{self, PatchField};
use vpatch_core::probes::{self, ProbeReport};
use vpatch_core::vstate::{self, OmegaMode, VStateProblem, VStateSolution};
use vpatch_core::{sigma, Complex64, Contour, Error, PolarShape};

use output::Run;

const THREADS_ENV: &str = "VPATCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "vpatch", version, about = "Rotating vortex patch (V-state) laboratory")]
struct Cli {
    /// Worker thread cap (overrides VPATCH_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sup-norm of the V-state boundary residual.
    Residual {
        #[arg(long)]
        contour: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Override the node count of the contour file.
        #[arg(long)]
        nodes: Option<usize>,
        /// Exit 2 when the sup-norm exceeds this value.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Newton solve for an m-fold V-state, from a polar-fourier contour or a
    /// first-harmonic perturbation of the disc.
    Solve {
        #[arg(long, conflicts_with_all = ["m", "amp0"])]
        contour: Option<PathBuf>,
        /// Symmetry of the disc perturbation (used without --contour).
        #[arg(long, requires = "amp0")]
        m: Option<usize>,
        /// First cosine of the disc perturbation.
        #[arg(long, requires = "m", allow_hyphen_values = true)]
        amp0: Option<f64>,
        /// Fixed angular velocity, or the initial guess with --free-omega.
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Treat Omega as unknown and pin the first cosine.
        #[arg(long)]
        free_omega: bool,
        /// Number of cosine unknowns (input cosines are zero-padded).
        #[arg(long)]
        harmonics: Option<usize>,
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 40)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuation along the m-fold branch with the first cosine as parameter.
    Branch {
        #[arg(long)]
        m: usize,
        /// Amplitudes as start:stop:step.
        #[arg(long, visible_alias = "amps")]
        amplitudes: String,
        #[arg(long, default_value_t = 24)]
        harmonics: usize,
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        /// Initial Omega guess (default (m-1)/(2m)).
        #[arg(long)]
        omega_initial: Option<f64>,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = 40)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled Sigma_alpha classification.
    SigmaCheck {
        #[arg(long)]
        contour: PathBuf,
        /// Angle expression, e.g. 1.1071, "acos(1/sqrt5)", "pi/2".
        #[arg(long, default_value = "acos(1/sqrt5)")]
        alpha: String,
        #[arg(long, default_value_t = sigma::DEFAULT_INTERIOR_SAMPLES)]
        interior_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rigidity probes.
    Probe {
        #[arg(long, value_enum)]
        kind: ProbeKind,
        #[arg(long)]
        contour: PathBuf,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        omega: f64,
        /// Side of the square sample grid.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value = "0.1:2:0.1")]
        lambdas: String,
        #[arg(long, default_value = "0:3:0.1")]
        t_grid: String,
        #[arg(long, default_value_t = sigma::DEFAULT_INTERIOR_SAMPLES)]
        interior_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contour-dynamics time stepping with snapshots.
    Evolve {
        #[arg(long)]
        contour: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        snapshot_every: usize,
        #[arg(long, default_value_t = 20)]
        renode_every: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Field values on a grid as CSV: x,y,psi,vx,vy,phi,re_C,im_C.
    Field {
        #[arg(long)]
        contour: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Sample box xmin:xmax:ymin:ymax (default: bounding box padded by 50%).
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smallest singular value of the linearization at the disc over an Omega grid.
    BifurcationScan {
        #[arg(long)]
        m: usize,
        /// Omega grid as start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long, default_value_t = 1)]
        harmonics: usize,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbeKind {
    PhiSign,
    GMono,
    NormalBound,
    MovingPlane,
    Radial,
    HalfOmega,
    Laplacian,
}

/// Failure to run: message plus the inner module's witness data.
struct Failure {
    kind: &'static str,
    message: String,
    data: Value,
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure {
            kind: "usage",
            message,
            data: Value::Null,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (kind, data) = match e {
            Error::InvalidContour(_) => ("invalid-contour", Value::Null),
            Error::DegenerateTangent { theta, speed } => {
                ("degenerate-tangent", json!({"theta": theta, "speed": speed}))
            }
            Error::SelfIntersection {
                first,
                second,
                x,
                y,
            } => (
                "self-intersection",
                json!({"first": first, "second": second, "x": x, "y": y}),
            ),
            Error::Orientation { area } => ("orientation", json!({ "area": area })),
            Error::BoundaryAmbiguity {
                x,
                y,
                distance,
                delta,
            } => (
                "boundary-ambiguity",
                json!({"x": x, "y": y, "distance": distance, "delta": delta}),
            ),
            Error::Domain(_) => ("domain", Value::Null),
            Error::LemmaViolation { x, y, phi, inside } => (
                "lemma-violation",
                json!({"x": x, "y": y, "phi": phi, "inside": inside}),
            ),
            Error::BarycenterNotCentered { exponent } => {
                ("barycenter-not-centered", json!({ "exponent": exponent }))
            }
            Error::Divergence {
                iterations,
                residual,
                last,
            } => (
                "divergence",
                json!({"iterations": iterations, "residual": residual, "last": *last}),
            ),
            Error::SingularSystem { ratio } => ("singular-system", json!({ "ratio": ratio })),
            Error::NotAVState {
                omega,
                residual,
                threshold,
            } => (
                "not-a-vstate",
                json!({"omega": omega, "residual": residual, "threshold": threshold}),
            ),
            Error::NotInClass { report } => ("not-in-class", json!({ "report": *report })),
            Error::EvolutionBreakdown { step, reason, last } => (
                "evolution-breakdown",
                json!({
                    "step": step,
                    "reason": reason,
                    "time": last.time,
                    "contour": ContourSpec::from_contour(&last.contour),
                }),
            ),
            Error::BranchAborted { partial, source } => (
                "branch-aborted",
                json!({"partial": partial, "source": source.to_string()}),
            ),
            Error::Json(_) => ("malformed-json", Value::Null),
        };
        Failure {
            kind,
            message,
            data,
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn verdict_code(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn load_contour(run: &mut Run, path: &Path) -> Result<ContourSpec, Failure> {
    let text = run.read_input(path)?;
    Ok(parse_contour(&text)?)
}

fn emit<T: Serialize>(run: &mut Run, schema: &str, payload: &T, out: Option<&Path>) -> Result<(), Failure> {
    let doc = run.document(schema, payload, out);
    run.emit(&doc, out)?;
    Ok(())
}

fn residual(
    run: &mut Run,
    contour: &Path,
    omega: f64,
    nodes: Option<usize>,
    tolerance: Option<f64>,
    out: Option<&Path>,
) -> CmdResult {
    let mut spec = load_contour(run, contour)?;
    if let Some(n) = nodes {
        spec = spec.with_nodes(n);
    }
    let c = spec.to_contour()?;
    let r = vstate::boundary_residual(&c, omega);
    let sup = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(t) = tolerance {
        run.tolerance("residual", t);
    }
    let payload = json!({
        "omega": omega,
        "nodes": c.node_count(),
        "sup_norm": sup,
        "residual": r,
    });
    emit(run, "residual", &payload, out)?;
    if out.is_some() {
        println!("residual sup-norm {sup:.17e}");
    }
    Ok(verdict_code(tolerance.is_none_or(|t| sup <= t)))
}

#[derive(Serialize)]
struct SolvePayload {
    #[serde(flatten)]
    solution: VStateSolution,
    nodes: usize,
    contour: ContourSpec,
}

enum SolveStart {
    Contour(PathBuf),
    Disc { m: usize, amp0: f64 },
}

/// Cosine unknowns for `solve --m --amp0` when --harmonics is absent.
const DISC_HARMONICS: usize = 16;

#[allow(clippy::too_many_arguments)]
fn solve(
    run: &mut Run,
    start: SolveStart,
    omega: f64,
    free_omega: bool,
    harmonics: Option<usize>,
    nodes: usize,
    tol: f64,
    max_iter: usize,
    out: Option<&Path>,
) -> CmdResult {
    let (shape, default_harmonics) = match start {
        SolveStart::Contour(path) => {
            let spec = load_contour(run, &path)?;
            let shape = spec
                .polar_shape()
                .ok_or_else(|| "solve needs a polar-fourier contour".to_string())??;
            let j = shape.cosines().len();
            (shape, j)
        }
        SolveStart::Disc { m, amp0 } => (PolarShape::new(m, 1.0, vec![amp0])?, DISC_HARMONICS),
    };
    let mut cosines = shape.cosines().to_vec();
    cosines.resize(harmonics.unwrap_or(default_harmonics).max(1), 0.0);
    let shape = PolarShape::new(shape.symmetry(), shape.base_radius(), cosines)?;
    let mode = if free_omega {
        let amplitude = *shape
            .cosines()
            .first()
            .ok_or_else(|| "free Omega needs at least one cosine".to_string())?;
        OmegaMode::Free {
            initial: omega,
            amplitude,
        }
    } else {
        OmegaMode::Fixed { omega }
    };
    run.tolerance("newton", tol);
    run.tolerance("fd_step", vstate::FD_STEP);
    let problem = VStateProblem::new(shape, mode, nodes)?;
    let solution = vstate::newton_solve(&problem, tol, max_iter)?;
    let payload = SolvePayload {
        contour: ContourSpec::from_polar(&solution.shape, nodes),
        nodes,
        solution,
    };
    emit(run, "solution", &payload, out)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn branch(
    run: &mut Run,
    m: usize,
    amplitudes: &str,
    harmonics: usize,
    nodes: usize,
    omega_initial: Option<f64>,
    tol: f64,
    max_iter: usize,
    out: Option<&Path>,
) -> CmdResult {
    let amps = parse::range(amplitudes)?;
    let initial = match omega_initial {
        Some(o) => o,
        None => vstate::bifurcation_omega(m)?,
    };
    let start = VStateProblem::near_disc(
        m,
        harmonics,
        amps[0],
        OmegaMode::Free {
            initial,
            amplitude: amps[0],
        },
        nodes,
    )?;
    run.tolerance("newton", tol);
    let solutions = vstate::continuation(&start, &amps, tol, max_iter)?;
    let payload = json!({
        "symmetry": m,
        "nodes": nodes,
        "harmonics": harmonics,
        "bifurcation_omega": vstate::bifurcation_omega(m).ok(),
        "extrapolated_omega": vstate::extrapolate_branch_omega(&solutions),
        "solutions": solutions,
    });
    emit(run, "branch", &payload, out)?;
    Ok(ExitCode::SUCCESS)
}

fn sigma_check(run: &mut Run, contour: &Path, alpha: &str, samples: usize, out: Option<&Path>) -> CmdResult {
    let alpha = parse::angle(alpha)?;
    let c = load_contour(run, contour)?.to_contour()?;
    let report = sigma::classify(&c, alpha, samples)?;
    run.tolerance("tol_geom", report.tol_geom);
    run.tolerance("exclusion_flag_fraction", sigma::EXCLUSION_FLAG_FRACTION);
    emit(run, "sigma-report", &report, out)?;
    Ok(verdict_code(report.verdict))
}

#[allow(clippy::too_many_arguments)]
fn probe(
    run: &mut Run,
    kind: ProbeKind,
    contour: &Path,
    omega: f64,
    grid: usize,
    lambdas: &str,
    t_grid: &str,
    samples: usize,
    out: Option<&Path>,
) -> CmdResult {
    let c = load_contour(run, contour)?.to_contour()?;
    let field = || PatchField::new(c.clone(), omega);
    let report = match kind {
        ProbeKind::PhiSign => probes::phi_sign_probe(&field(), grid)?,
        ProbeKind::GMono => probes::g_monotonicity_probe(&field(), &parse::range(t_grid)?),
        ProbeKind::NormalBound => {
            probes::normal_derivative_bound_probe(&field(), &parse::range(t_grid)?, samples)?
        }
        ProbeKind::MovingPlane => probes::moving_plane_probe(&field(), &parse::range(lambdas)?, grid)?,
        ProbeKind::Radial => radial_report(&field()),
        ProbeKind::HalfOmega => probes::half_omega_identity_probe(&c, samples)?,
        ProbeKind::Laplacian => probes::laplacian_dichotomy_probe(&field(), grid),
    };
    for (k, v) in &report.tolerances {
        run.tolerance(k, *v);
    }
    emit(run, "probe-report", &report, out)?;
    Ok(verdict_code(report.verdict))
}

fn radial_report(field: &PatchField) -> ProbeReport {
    let m = probes::radial_symmetry_measure(field);
    let mut r = ProbeReport {
        name: "radial-symmetry".into(),
        margin: m.measure,
        witness: vec![Complex64::new(m.worst_radius, 0.0)],
        samples: 30 * 64,
        tolerances: [("measure".to_string(), m.tolerance)].into_iter().collect(),
        details: [("worst_radius".to_string(), m.worst_radius)].into_iter().collect(),
        notes: Vec::new(),
        verdict: m.measure < m.tolerance && m.radially_decreasing == Some(true),
    };
    match m.radially_decreasing {
        Some(true) => r.notes.push("radial derivative negative on all sampled radii".into()),
        Some(false) => r.notes.push("radial derivative is not negative on every sampled radius".into()),
        None => r.notes.push("field is not radial; radial derivative not checked".into()),
    }
    r
}

fn evolve(
    run: &mut Run,
    contour: &Path,
    dt: f64,
    steps: usize,
    snapshot_every: usize,
    renode_every: usize,
    out_dir: &Path,
) -> CmdResult {
    let c = load_contour(run, contour)?.to_contour()?;
    let cfg = TimeStepConfig::new(dt, steps)?.with_renode_every(renode_every);
    run.tolerance("dt", dt);
    std::fs::create_dir_all(out_dir).map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let area0 = c.signed_area();
    let mut csv = String::from("step,time,area,barycenter_x,barycenter_y\n");
    let mut snapshots = Vec::new();
    let end = dynamics::evolve(EvolutionState::new(c.clone()), &cfg, snapshot_every, |s| {
        let (area, b) = s.contour.area_and_barycenter()?;
        let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{:.16e}", s.steps, s.time, area, b.re, b.im);
        let name = format!("snapshot_{:06}.json", s.steps);
        let path = out_dir.join(&name);
        output::write_file(&path, &output::to_json_string(&ContourSpec::from_contour(&s.contour)))
            .map_err(Error::Domain)?;
        snapshots.push(name);
        Ok(())
    })?;
    let manifest_csv = out_dir.join("manifest.csv");
    output::write_file(&manifest_csv, &csv)?;
    run.output(&manifest_csv);
    for s in &snapshots {
        run.output(&out_dir.join(s));
    }
    let payload = json!({
        "steps": end.steps,
        "time": end.time,
        "initial_area": area0,
        "final_area": end.contour.signed_area(),
        "relative_area_drift": (end.contour.signed_area() - area0).abs() / area0,
        "snapshots": snapshots,
        "manifest_csv": "manifest.csv",
    });
    let run_json = out_dir.join("run.json");
    emit(run, "evolution", &payload, Some(&run_json))?;
    println!("{}", run_json.display());
    Ok(ExitCode::SUCCESS)
}

fn default_bounds(c: &Contour) -> [f64; 4] {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in c.nodes() {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let (px, py) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    [x0 - px, x1 + px, y0 - py, y1 + py]
}

fn field(run: &mut Run, contour: &Path, omega: f64, grid: usize, bounds: Option<&str>, out: &Path) -> CmdResult {
    let c = load_contour(run, contour)?.to_contour()?;
    let b = match bounds {
        Some(text) => {
            let v: Vec<f64> = text
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("bad --bounds {text:?}: {e}"))?;
            if v.len() != 4 || !(v[1] > v[0] && v[3] > v[2]) {
                return Err(format!("--bounds needs xmin:xmax:ymin:ymax, got {text:?}").into());
            }
            [v[0], v[1], v[2], v[3]]
        }
        None => default_bounds(&c),
    };
    if grid < 2 {
        return Err("--grid must be at least 2".to_string().into());
    }
    let pf = PatchField::new(c.clone(), omega);
    let points: Vec<Complex64> = (0..grid)
        .flat_map(|j| {
            (0..grid).map(move |i| {
                Complex64::new(
                    b[0] + (b[1] - b[0]) * i as f64 / (grid - 1) as f64,
                    b[2] + (b[3] - b[2]) * j as f64 / (grid - 1) as f64,
                )
            })
        })
        .collect();
    let rows = vpatch_core::par::map(&points, |&x| {
        let s = potential::field_sample(&c, x);
        let phi = pf.mu() + 0.5 * omega * x.norm_sqr() - s.psi;
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            x.re, x.im, s.psi, s.velocity.re, s.velocity.im, phi, s.cauchy.re, s.cauchy.im
        )
    });
    let mut csv = String::from("x,y,psi,vx,vy,phi,re_C,im_C\n");
    csv.extend(rows);
    output::write_file(out, &csv)?;
    run.output(out);
    let payload = json!({
        "omega": omega,
        "mu": pf.mu(),
        "rows": points.len(),
        "bounds": b,
        "columns": ["x", "y", "psi", "vx", "vy", "phi", "re_C", "im_C"],
        "csv": out.display().to_string(),
    });
    emit(run, "field", &payload, None)?;
    Ok(ExitCode::SUCCESS)
}

fn bifurcation_scan(
    run: &mut Run,
    m: usize,
    omega: &str,
    harmonics: usize,
    nodes: usize,
    out: Option<&Path>,
) -> CmdResult {
    let grid = parse::range(omega)?;
    run.tolerance("fd_step", vstate::FD_STEP);
    let scan = vstate::bifurcation_scan(m, &grid, harmonics, nodes)?;
    emit(run, "bifurcation-scan", &scan, out)?;
    Ok(ExitCode::SUCCESS)
}

fn configure_threads(flag: Option<usize>) -> Result<usize, Failure> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("{THREADS_ENV}={v:?} is not a thread count: {e}"))?,
            ),
            Err(_) => None,
        },
    };
    if requested == Some(0) {
        return Err("thread count must be positive".to_string().into());
    }
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("cannot configure threads: {e}"))?;
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(requested.map_or(1, |_| 1))
    }
}

fn dispatch(argv: Vec<String>) -> CmdResult {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            });
        }
    };
    let threads = configure_threads(cli.threads)?;
    let mut run = Run::new(argv, threads);
    let r = &mut run;
    match cli.command {
        Command::Residual {
            contour,
            omega,
            nodes,
            tolerance,
            out,
        } => residual(r, &contour, omega, nodes, tolerance, out.as_deref()),
        Command::Solve {
            contour,
            m,
            amp0,
            omega,
            free_omega,
            harmonics,
            nodes,
            tol,
            max_iter,
            out,
        } => {
            let start = match (contour, m, amp0) {
                (Some(p), _, _) => SolveStart::Contour(p),
                (None, Some(m), Some(amp0)) => SolveStart::Disc { m, amp0 },
                _ => return Err("solve needs --contour or --m with --amp0".to_string().into()),
            };
            solve(r, start, omega, free_omega, harmonics, nodes, tol, max_iter, out.as_deref())
        }
        Command::Branch {
            m,
            amplitudes,
            harmonics,
            nodes,
            omega_initial,
            tol,
            max_iter,
            out,
        } => branch(r, m, &amplitudes, harmonics, nodes, omega_initial, tol, max_iter, out.as_deref()),
        Command::SigmaCheck {
            contour,
            alpha,
            interior_samples,
            out,
        } => sigma_check(r, &contour, &alpha, interior_samples, out.as_deref()),
        Command::Probe {
            kind,
            contour,
            omega,
            grid,
            lambdas,
            t_grid,
            interior_samples,
            out,
        } => probe(r, kind, &contour, omega, grid, &lambdas, &t_grid, interior_samples, out.as_deref()),
        Command::Evolve {
            contour,
            dt,
            steps,
            snapshot_every,
            renode_every,
            out_dir,
        } => evolve(r, &contour, dt, steps, snapshot_every, renode_every, &out_dir),
        Command::Field {
            contour,
            omega,
            grid,
            bounds,
            out,
        } => field(r, &contour, omega, grid, bounds.as_deref(), &out),
        Command::BifurcationScan {
            m,
            omega,
            harmonics,
            nodes,
            out,
        } => bifurcation_scan(r, m, &omega, harmonics, nodes, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(std::env::args().collect()) {
        Ok(code) => code,
        Err(f) => {
            let doc = json!({
                "schema": "error",
                "version": output::SCHEMA_VERSION,
                "error": f.kind,
                "message": f.message,
                "data": f.data,
            });
            eprintln!("{}", output::to_json_string(&doc));
            ExitCode::from(1)
        }
    }
}
