//! Numerical probes of the rigidity argument: the sign of `phi`, monotonicity
//! along normal rays, moving-plane positivity, radial symmetry, the
//! `Omega = 1/2` Cauchy-transform identity, and the Laplacian of `phi`.
//!
//! Every probe is deterministic. Reductions keep the first index on ties.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Contour, MembershipTester};
use crate::potential::{self, PatchField};
use crate::sigma::{self, SectorSpec};
use crate::vstate::residual_sup_norm;
use crate::{par, Complex64, Point};

/// Slack for strict inequalities.
pub const EPS_STRICT: f64 = 1e-10;
/// Residual above which the sign probe refuses to run.
pub const VSTATE_RESIDUAL_LIMIT: f64 = 1e-6;
/// Step of the five-point Laplacian.
pub const LAPLACIAN_STEP: f64 = 1e-3;
/// Step of first-derivative finite differences.
pub const SLOPE_STEP: f64 = 1e-5;

/// Half-plane `H_lambda = {x_1 < lambda}` with boundary line `T_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneFrame {
    lambda: f64,
}

impl HalfPlaneFrame {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn in_half_plane(&self, x: Point) -> bool {
        x.re < self.lambda
    }

    /// `x_lambda = (2 lambda - x_1, x_2)`.
    pub fn reflect(&self, x: Point) -> Point {
        Point::new(2.0 * self.lambda - x.re, x.im)
    }

    /// `phi_lambda(x) = phi(x) - phi(x_lambda)`.
    pub fn phi_lambda(&self, field: &PatchField, x: Point) -> f64 {
        field.relative_stream(x) - field.relative_stream(self.reflect(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub name: String,
    /// Worst sampled value of the probe's quantity; its sense is given by the probe.
    pub margin: f64,
    pub witness: Vec<Point>,
    pub samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub verdict: bool,
}

impl ProbeReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            margin: 0.0,
            witness: Vec::new(),
            samples: 0,
            tolerances: BTreeMap::new(),
            details: BTreeMap::new(),
            notes: Vec::new(),
            verdict: false,
        }
    }

    fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }
}

/// Cell-centred `n x n` grid on the square of half-width `half` about `center`.
pub fn box_grid(center: Point, half: f64, n: usize) -> Vec<Point> {
    let h = 2.0 * half / n as f64;
    (0..n)
        .flat_map(|j| {
            (0..n).map(move |i| {
                center + Point::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h)
            })
        })
        .collect()
}

/// Grid points split into interior and exterior, dropping a collar around the boundary.
#[derive(Debug, Clone, Default)]
pub struct SplitSamples {
    pub interior: Vec<Point>,
    pub exterior: Vec<Point>,
    pub dropped: usize,
}

pub fn split_samples(contour: &Contour, points: &[Point], collar: f64) -> SplitSamples {
    let tester = MembershipTester::new(contour, None);
    let tags = par::map(points, |&x| {
        if contour.nearest_boundary_point(x).2 < collar {
            return None;
        }
        tester.contains(x).ok()
    });
    let mut out = SplitSamples::default();
    for (x, tag) in points.iter().zip(tags) {
        match tag {
            Some(true) => out.interior.push(*x),
            Some(false) => out.exterior.push(*x),
            None => out.dropped += 1,
        }
    }
    out
}

fn default_collar(contour: &Contour) -> f64 {
    3.0 * contour.max_node_spacing()
}

/// Square of half-width one diameter about the barycenter of the nodes.
fn probe_box(contour: &Contour) -> (Point, f64) {
    let n = contour.node_count() as f64;
    let center = contour.nodes().iter().sum::<Point>() / n;
    (center, contour.diameter())
}

/// First index attaining the minimum of `values`.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v < values[b]) {
            best = Some(i);
        }
    }
    best
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// `phi > 0` on interior samples and `phi < 0` on exterior samples of an
/// `n x n` grid. The margin is `min(min_D phi, -max_ext phi)`.
pub fn phi_sign_probe(field: &PatchField, grid: usize) -> Result<ProbeReport> {
    let contour = field.contour();
    let residual = residual_sup_norm(contour, field.omega());
    if residual > VSTATE_RESIDUAL_LIMIT {
        return Err(Error::NotAVState {
            omega: field.omega(),
            residual,
            threshold: VSTATE_RESIDUAL_LIMIT,
        });
    }
    let collar = default_collar(contour);
    let (center, half) = probe_box(contour);
    let split = split_samples(contour, &box_grid(center, half, grid), collar);
    let phi_in = par::map(&split.interior, |&x| field.relative_stream(x));
    let phi_out = par::map(&split.exterior, |&x| field.relative_stream(x));
    let mut r = ProbeReport::new("phi-sign")
        .tolerance("collar", collar)
        .tolerance("eps_strict", EPS_STRICT);
    r.samples = phi_in.len() + phi_out.len();
    let min_in = argmin(&phi_in).map(|i| (phi_in[i], split.interior[i]));
    let max_out = argmax(&phi_out).map(|i| (phi_out[i], split.exterior[i]));
    let mut margin = f64::INFINITY;
    if let Some((v, x)) = min_in {
        r.details.insert("min_interior_phi".into(), v);
        r.witness.push(x);
        margin = margin.min(v);
    }
    if let Some((v, x)) = max_out {
        r.details.insert("max_exterior_phi".into(), v);
        r.witness.push(x);
        margin = margin.min(-v);
    }
    r.details.insert("boundary_residual".into(), residual);
    r.details.insert("dropped_samples".into(), split.dropped as f64);
    r.margin = margin;
    r.verdict = margin > EPS_STRICT;
    if field.omega() >= 0.0 {
        r.notes.push("sign dichotomy is only asserted for negative Omega".into());
    }
    Ok(r)
}

/// Central-difference slope of `g(t) = phi(x0 + t nu(x0))` at every node and
/// every `t`. The margin is the largest slope; it must be `<= -eps_strict`.
pub fn g_monotonicity_probe(field: &PatchField, t_grid: &[f64]) -> ProbeReport {
    let contour = field.contour();
    let rows = par::map_range(contour.node_count(), |j| {
        let x0 = contour.nodes()[j];
        let nu = contour.node_normal(j);
        t_grid
            .iter()
            .map(|&t| {
                let a = field.relative_stream(x0 + nu * (t + SLOPE_STEP));
                let b = field.relative_stream(x0 + nu * (t - SLOPE_STEP));
                ((a - b) / (2.0 * SLOPE_STEP), x0 + nu * t)
            })
            .collect::<Vec<_>>()
    });
    let flat: Vec<(f64, Point)> = rows.into_iter().flatten().collect();
    let slopes: Vec<f64> = flat.iter().map(|s| s.0).collect();
    let mut r = ProbeReport::new("g-monotonicity")
        .tolerance("eps_strict", EPS_STRICT)
        .tolerance("fd_step", SLOPE_STEP);
    r.samples = flat.len();
    if let Some(i) = argmax(&slopes) {
        r.margin = slopes[i];
        r.witness.push(flat[i].1);
    }
    r.verdict = !flat.is_empty() && r.margin <= -EPS_STRICT;
    r
}

/// `grad psi . nu(x0) >= -tol` along outward normal rays. Refuses contours
/// outside `Sigma_{arccos(1/sqrt 5)}`.
pub fn normal_derivative_bound_probe(
    field: &PatchField,
    t_grid: &[f64],
    interior_samples: usize,
) -> Result<ProbeReport> {
    let contour = field.contour();
    let report = sigma::classify(contour, SectorSpec::critical().alpha, interior_samples)?;
    if !report.verdict {
        return Err(Error::NotInClass {
            report: Box::new(report),
        });
    }
    let tol = 1e-8;
    let rows = par::map_range(contour.node_count(), |j| {
        let x0 = contour.nodes()[j];
        let nu = contour.node_normal(j);
        t_grid
            .iter()
            .map(|&t| {
                let x = x0 + nu * t;
                (dot(potential::stream_gradient(contour, x), nu), x)
            })
            .collect::<Vec<_>>()
    });
    let flat: Vec<(f64, Point)> = rows.into_iter().flatten().collect();
    let values: Vec<f64> = flat.iter().map(|s| s.0).collect();
    let mut r = ProbeReport::new("normal-derivative-bound").tolerance("tol", tol);
    r.samples = flat.len();
    if let Some(i) = argmin(&values) {
        r.margin = values[i];
        r.witness.push(flat[i].1);
    }
    r.verdict = !flat.is_empty() && r.margin >= -tol;
    Ok(r)
}

/// For each `lambda`: `phi_lambda > 0` on an `n x n` cell-centred grid of
/// `H_lambda` and `d/dx_1 phi_lambda < 0` on `n` points of `T_lambda`. The
/// margin is the minimum of `phi_lambda` and `-d/dx_1 phi_lambda` over all samples.
pub fn moving_plane_probe(field: &PatchField, lambdas: &[f64], grid: usize) -> Result<ProbeReport> {
    let contour = field.contour();
    let w = contour.diameter();
    let frames = lambdas
        .iter()
        .map(|&l| HalfPlaneFrame::new(l))
        .collect::<Result<Vec<_>>>()?;
    let mut r = ProbeReport::new("moving-plane")
        .tolerance("eps_strict", EPS_STRICT)
        .tolerance("fd_step", SLOPE_STEP);
    let mut worst = f64::INFINITY;
    let mut worst_phi = f64::INFINITY;
    let mut worst_slope = f64::INFINITY;
    for frame in frames {
        let lam = frame.lambda();
        let hx = (lam + w) / grid as f64;
        let hy = 2.0 * w / grid as f64;
        let points: Vec<Point> = (0..grid)
            .flat_map(|j| {
                (0..grid).map(move |i| {
                    Point::new(-w + (i as f64 + 0.5) * hx, -w + (j as f64 + 0.5) * hy)
                })
            })
            .collect();
        let values = par::map(&points, |&x| frame.phi_lambda(field, x));
        let line: Vec<Point> = (0..grid)
            .map(|j| Point::new(lam, -w + (j as f64 + 0.5) * hy))
            .collect();
        let neg_slopes = par::map(&line, |&x| {
            let e = Point::new(SLOPE_STEP, 0.0);
            -(frame.phi_lambda(field, x + e) - frame.phi_lambda(field, x - e)) / (2.0 * SLOPE_STEP)
        });
        r.samples += points.len() + line.len();
        if let Some(i) = argmin(&values) {
            worst_phi = worst_phi.min(values[i]);
            if values[i] < worst {
                worst = values[i];
                r.witness = vec![points[i], frame.reflect(points[i])];
            }
        }
        if let Some(i) = argmin(&neg_slopes) {
            worst_slope = worst_slope.min(neg_slopes[i]);
            if neg_slopes[i] < worst {
                worst = neg_slopes[i];
                r.witness = vec![line[i]];
            }
        }
    }
    r.details.insert("min_phi_lambda".into(), worst_phi);
    r.details.insert("min_neg_slope_on_t_lambda".into(), worst_slope);
    r.margin = worst;
    r.verdict = r.samples > 0 && worst > EPS_STRICT;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSymmetry {
    /// Max over circles about the node centroid of the angular standard deviation of `phi`.
    pub measure: f64,
    pub worst_radius: f64,
    /// Sign check of the radial derivative, run only when `measure` is below `tolerance`.
    pub radially_decreasing: Option<bool>,
    pub tolerance: f64,
}

pub fn radial_symmetry_measure(field: &PatchField) -> RadialSymmetry {
    const RADII: usize = 30;
    const ANGLES: usize = 64;
    let tolerance = 1e-8;
    let contour = field.contour();
    let (center, _) = probe_box(contour);
    let rmax = 3.0 * contour.nodes().iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let radii: Vec<f64> = (0..RADII)
        .map(|k| rmax * (k as f64 + 0.5) / RADII as f64)
        .collect();
    let circle = |r: f64| -> Vec<f64> {
        (0..ANGLES)
            .map(|a| {
                let t = std::f64::consts::TAU * a as f64 / ANGLES as f64;
                field.relative_stream(center + Complex64::from_polar(r, t))
            })
            .collect()
    };
    let stats = par::map(&radii, |&r| {
        let v = circle(r);
        let mean = v.iter().sum::<f64>() / ANGLES as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / ANGLES as f64;
        (var.sqrt(), mean)
    });
    let sds: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let i = argmax(&sds).unwrap_or(0);
    let measure = sds[i];
    let radially_decreasing = (measure < tolerance).then(|| {
        par::map(&radii, |&r| {
            let e = SLOPE_STEP;
            let a = circle(r + e).iter().sum::<f64>();
            let b = circle(r - e).iter().sum::<f64>();
            (a - b) / (2.0 * e * ANGLES as f64) < 0.0
        })
        .into_iter()
        .all(|d| d)
    });
    RadialSymmetry {
        measure,
        worst_radius: radii[i],
        radially_decreasing,
        tolerance,
    }
}

/// Sup of `|C(z) + conj z|` over the closed recentered domain (interior grid
/// plus nodes), with `sup |Im(z C(z))|` over an exterior annulus and the
/// boundary variance of `|z|^2` as details.
pub fn half_omega_identity_probe(contour: &Contour, interior_samples: usize) -> Result<ProbeReport> {
    let tol = 1e-10;
    let c = contour.recentered();
    let mut r = ProbeReport::new("half-omega-identity").tolerance("identity", tol);
    let residual = residual_sup_norm(&c, 0.5);
    r.details.insert("boundary_residual".into(), residual);
    if residual > VSTATE_RESIDUAL_LIMIT {
        r.notes
            .push("not an Omega=1/2 V-state; identity margin is diagnostic only".into());
    }
    let mut points = c.nodes().to_vec();
    let mut defects: Vec<f64> = potential::boundary_cauchy(&c)
        .iter()
        .zip(c.nodes())
        .map(|(cz, z)| (cz + z.conj()).norm())
        .collect();
    let interior = sigma::interior_samples(&c, interior_samples)?;
    defects.extend(par::map(&interior, |&z| {
        (potential::cauchy_transform(&c, z) + z.conj()).norm()
    }));
    points.extend(interior);
    let i = argmax(&defects).unwrap_or(0);
    r.margin = defects[i];
    r.witness.push(points[i]);
    r.samples = points.len();

    let rmax = c.nodes().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ring: Vec<Point> = (0..8)
        .flat_map(|k| {
            (0..64).map(move |a| {
                Complex64::from_polar(
                    rmax * (1.5 + 0.25 * k as f64),
                    std::f64::consts::TAU * a as f64 / 64.0,
                )
            })
        })
        .collect();
    let im_g = par::map(&ring, |&z| (z * potential::cauchy_transform(&c, z)).im.abs());
    r.details
        .insert("max_exterior_im_g".into(), im_g.iter().copied().fold(0.0, f64::max));
    let moduli: Vec<f64> = c.nodes().iter().map(|z| z.norm_sqr()).collect();
    let stats = potential::weighted_stats(&c, &moduli);
    r.details.insert("boundary_variance_abs_z2".into(), stats.std_dev.powi(2));
    r.samples += ring.len();
    r.verdict = r.margin < tol;
    Ok(r)
}

/// Five-point Laplacian of `phi` against `2 Omega - chi_D` on an `n x n`
/// grid; stencils reaching into the boundary collar are skipped.
pub fn laplacian_dichotomy_probe(field: &PatchField, grid: usize) -> ProbeReport {
    let tol = 1e-5;
    let h = LAPLACIAN_STEP;
    let contour = field.contour();
    let collar = default_collar(contour).max(4.0 * h);
    let (center, half) = probe_box(contour);
    let split = split_samples(contour, &box_grid(center, half, grid), collar);
    let om = field.omega();
    let lap = |x: Point| {
        let f = |d: Point| field.relative_stream(x + d);
        (f(Point::new(h, 0.0)) + f(Point::new(-h, 0.0)) + f(Point::new(0.0, h))
            + f(Point::new(0.0, -h))
            - 4.0 * f(Point::new(0.0, 0.0)))
            / (h * h)
    };
    let dev_in = par::map(&split.interior, |&x| (lap(x) - (2.0 * om - 1.0)).abs());
    let dev_out = par::map(&split.exterior, |&x| (lap(x) - 2.0 * om).abs());
    let mut r = ProbeReport::new("laplacian-dichotomy")
        .tolerance("deviation", tol)
        .tolerance("fd_step", h)
        .tolerance("collar", collar);
    r.samples = dev_in.len() + dev_out.len();
    let all: Vec<f64> = dev_in.iter().chain(&dev_out).copied().collect();
    let pts: Vec<Point> = split.interior.iter().chain(&split.exterior).copied().collect();
    if let Some(i) = argmax(&all) {
        r.margin = all[i];
        r.witness.push(pts[i]);
    }
    r.details
        .insert("max_interior_deviation".into(), dev_in.iter().copied().fold(0.0, f64::max));
    r.details
        .insert("max_exterior_deviation".into(), dev_out.iter().copied().fold(0.0, f64::max));
    r.verdict = r.samples > 0 && r.margin <= tol;
    r
}
