//! Potential theory of a vortex patch, reduced to boundary integrals.
//!
//! * `psi(x) = (1/2 pi) \int_D log|x - y| dA(y)`, evaluated as
//!   `(1/8 pi) \oint (2 log|x - y| - 1) (y - x) . nu(y) ds(y)`.
//! * `C(z) = (1/pi) \int_D dA(xi) / (xi - z) = (1/2 pi i) \oint (conj xi - conj z) / (xi - z) dxi`.
//! * `v = grad^perp psi = -(i/2) conj(C)`, `grad psi = -conj(C) / 2`.
//!
//! Evaluation points are classified by their distance to the boundary: far
//! points use the trapezoidal rule on the nodes, points within five node
//! spacings use adaptive Gauss-Legendre panels, and points on the curve use
//! the removable-singularity limit (Cauchy kernel) or log-splitting weights
//! (log kernel) on a node grid anchored at the point.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Contour;
use crate::{par, quadrature, Point};

/// Relative distance (times diameter) below which a point counts as on the curve.
const ON_CURVE: f64 = 1e-13;
/// Near-boundary threshold in units of the largest node spacing.
const NEAR_SPACINGS: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
enum Placement {
    OnCurve(f64),
    Near(f64),
    Far,
}

fn placement(contour: &Contour, x: Point) -> Placement {
    let (theta, _, dist) = contour.nearest_boundary_point(x);
    if dist <= ON_CURVE * contour.diameter() {
        Placement::OnCurve(theta)
    } else if dist < NEAR_SPACINGS * contour.max_node_spacing() {
        Placement::Near(theta)
    } else {
        Placement::Far
    }
}

/// Node grid `theta + 2 pi j / N`, reusing the stored nodes when `theta` is a node.
struct AnchoredGrid<'a> {
    contour: &'a Contour,
    start: usize,
    shifted: Option<(Vec<Point>, Vec<Complex64>)>,
}

impl<'a> AnchoredGrid<'a> {
    fn new(contour: &'a Contour, theta: f64) -> Self {
        let n = contour.node_count();
        let h = TAU / n as f64;
        let j = (theta / h).round();
        if (theta - j * h).abs() < 1e-14 {
            return Self {
                contour,
                start: (j as usize) % n,
                shifted: None,
            };
        }
        let (z, dz) = (0..n)
            .map(|k| {
                let [z, dz, _] = contour.series(theta + h * k as f64);
                (z, dz)
            })
            .unzip();
        Self {
            contour,
            start: 0,
            shifted: Some((z, dz)),
        }
    }

    fn at_node(contour: &'a Contour, j: usize) -> Self {
        Self {
            contour,
            start: j,
            shifted: None,
        }
    }

    /// `(z, z')` at grid index `j` (index 0 is the anchor).
    fn get(&self, j: usize) -> (Point, Complex64) {
        match &self.shifted {
            Some((z, dz)) => (z[j], dz[j]),
            None => {
                let n = self.contour.node_count();
                let k = (self.start + j) % n;
                (self.contour.nodes()[k], self.contour.node_derivatives()[k])
            }
        }
    }

    fn len(&self) -> usize {
        self.contour.node_count()
    }
}

fn cauchy_far(contour: &Contour, z: Point) -> Complex64 {
    let n = contour.node_count() as f64;
    let s: Complex64 = contour
        .nodes()
        .iter()
        .zip(contour.node_derivatives())
        .map(|(xi, dxi)| (xi.conj() - z.conj()) * dxi / (xi - z))
        .sum();
    s / (Complex64::i() * n)
}

fn cauchy_on_grid(grid: &AnchoredGrid) -> Complex64 {
    let n = grid.len();
    let (z, dz0) = grid.get(0);
    // Removable singularity: (conj xi - conj z)/(xi - z) -> conj(z')/z' as xi -> z.
    let mut s = dz0.conj();
    for j in 1..n {
        let (xi, dxi) = grid.get(j);
        s += (xi.conj() - z.conj()) * dxi / (xi - z);
    }
    s / (Complex64::i() * n as f64)
}

fn cauchy_near(contour: &Contour, z: Point, theta: f64) -> Complex64 {
    let f = |t: f64| {
        let [xi, dxi, _] = contour.series(t);
        (xi.conj() - z.conj()) * dxi / (xi - z)
    };
    let tol = 1e-14 * TAU * contour.diameter().max(1.0);
    quadrature::adaptive(&f, theta - PI, theta + PI, tol, 32) / (TAU * Complex64::i())
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

fn psi_far(contour: &Contour, x: Point) -> f64 {
    let n = contour.node_count() as f64;
    let s: f64 = contour
        .nodes()
        .iter()
        .zip(contour.node_derivatives())
        .map(|(y, dy)| {
            let d = y - x;
            (2.0 * d.norm().ln() - 1.0) * cross(d, *dy)
        })
        .sum();
    s / (4.0 * n)
}

fn psi_on_grid(grid: &AnchoredGrid) -> f64 {
    let n = grid.len();
    let weights = quadrature::log_split_weights(n);
    let (x, _) = grid.get(0);
    let h = TAU / n as f64;
    let mut s = 0.0;
    for j in 1..n {
        let (y, dy) = grid.get(j);
        let d = y - x;
        let w = cross(d, dy) / (8.0 * PI);
        let half = 0.5 * h * j as f64;
        let smooth = (d.norm_sqr() / (4.0 * half.sin().powi(2))).ln();
        s += weights[j] * w + h * (smooth - 1.0) * w;
    }
    s
}

fn psi_near(contour: &Contour, x: Point, theta: f64) -> f64 {
    let f = |t: f64| {
        let [y, dy, _] = contour.series(t);
        let d = y - x;
        Complex64::new((2.0 * d.norm().ln() - 1.0) * cross(d, dy), 0.0)
    };
    let scale = contour.diameter().max(1.0);
    let tol = 1e-14 * scale * scale;
    quadrature::adaptive(&f, theta - PI, theta + PI, tol, 32).re / (8.0 * PI)
}

/// Newtonian stream function `psi` at any point of the plane.
pub fn stream_function(contour: &Contour, x: Point) -> f64 {
    match placement(contour, x) {
        Placement::Far => psi_far(contour, x),
        Placement::Near(theta) => psi_near(contour, x, theta),
        Placement::OnCurve(theta) => psi_on_grid(&AnchoredGrid::new(contour, theta)),
    }
}

/// Cauchy transform `C(chi_D)(z)`; `-conj(z)` on the closed unit disc.
pub fn cauchy_transform(contour: &Contour, z: Point) -> Complex64 {
    match placement(contour, z) {
        Placement::Far => cauchy_far(contour, z),
        Placement::Near(theta) => cauchy_near(contour, z, theta),
        Placement::OnCurve(theta) => cauchy_on_grid(&AnchoredGrid::new(contour, theta)),
    }
}

/// Induced velocity `v = grad^perp psi` as the complex number `v_x + i v_y`.
pub fn velocity(contour: &Contour, z: Point) -> Complex64 {
    velocity_from_cauchy(cauchy_transform(contour, z))
}

/// `grad psi` as `psi_x + i psi_y`.
pub fn stream_gradient(contour: &Contour, z: Point) -> Complex64 {
    -0.5 * cauchy_transform(contour, z).conj()
}

pub(crate) fn velocity_from_cauchy(c: Complex64) -> Complex64 {
    Complex64::new(0.0, -0.5) * c.conj()
}

/// Cauchy transform at every node (on-curve limit).
pub fn boundary_cauchy(contour: &Contour) -> Vec<Complex64> {
    par::map_range(contour.node_count(), |j| {
        cauchy_on_grid(&AnchoredGrid::at_node(contour, j))
    })
}

/// Stream function at every node (log-splitting quadrature).
pub fn boundary_stream(contour: &Contour) -> Vec<f64> {
    par::map_range(contour.node_count(), |j| {
        psi_on_grid(&AnchoredGrid::at_node(contour, j))
    })
}

/// Velocity at every node.
pub fn boundary_velocity(contour: &Contour) -> Vec<Complex64> {
    boundary_cauchy(contour)
        .into_iter()
        .map(velocity_from_cauchy)
        .collect()
}

/// All field quantities at one point; one placement decision for both kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub psi: f64,
    pub velocity: Complex64,
    pub cauchy: Complex64,
}

pub fn field_sample(contour: &Contour, x: Point) -> FieldSample {
    let (psi, cauchy) = match placement(contour, x) {
        Placement::Far => (psi_far(contour, x), cauchy_far(contour, x)),
        Placement::Near(t) => (psi_near(contour, x, t), cauchy_near(contour, x, t)),
        Placement::OnCurve(t) => {
            let grid = AnchoredGrid::new(contour, t);
            (psi_on_grid(&grid), cauchy_on_grid(&grid))
        }
    };
    FieldSample {
        psi,
        velocity: velocity_from_cauchy(cauchy),
        cauchy,
    }
}

/// Arc-length weighted mean and standard deviation of a node quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    pub mean: f64,
    pub std_dev: f64,
}

/// Statistics of the Bernoulli quantity `psi - Omega |x|^2 / 2` on the boundary.
/// For an exact V-state the standard deviation vanishes and the mean is `mu`.
pub fn bernoulli_boundary_stats(contour: &Contour, omega: f64) -> BoundaryStats {
    let psi = boundary_stream(contour);
    let values: Vec<f64> = psi
        .iter()
        .zip(contour.nodes())
        .map(|(p, z)| p - 0.5 * omega * z.norm_sqr())
        .collect();
    weighted_stats(contour, &values)
}

pub(crate) fn weighted_stats(contour: &Contour, values: &[f64]) -> BoundaryStats {
    let weights: Vec<f64> = contour.node_derivatives().iter().map(|d| d.norm()).collect();
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(&weights)
        .map(|(v, w)| w * (v - mean).powi(2))
        .sum::<f64>()
        / total;
    BoundaryStats {
        mean,
        std_dev: var.sqrt(),
    }
}

/// Lagrange constant `mu`: arc-length mean of `psi - Omega |x|^2 / 2` on the boundary.
pub fn compute_mu(contour: &Contour, omega: f64) -> f64 {
    bernoulli_boundary_stats(contour, omega).mean
}

/// Relative stream function data `phi = mu + Omega |x|^2 / 2 - psi`.
#[derive(Debug, Clone)]
pub struct PatchField {
    contour: Contour,
    omega: f64,
    mu: f64,
}

impl PatchField {
    /// Field with the canonical `mu` of the contour.
    pub fn new(contour: Contour, omega: f64) -> Self {
        let mu = compute_mu(&contour, omega);
        Self { contour, omega, mu }
    }

    /// Field with an explicitly chosen `mu`.
    pub fn with_mu(contour: Contour, omega: f64, mu: f64) -> Self {
        Self { contour, omega, mu }
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn relative_stream(&self, x: Point) -> f64 {
        self.phi_from_psi(x, stream_function(&self.contour, x))
    }

    pub(crate) fn phi_from_psi(&self, x: Point, psi: f64) -> f64 {
        self.mu + 0.5 * self.omega * x.norm_sqr() - psi
    }

    /// `grad phi = Omega x - grad psi`.
    pub fn relative_stream_gradient(&self, x: Point) -> Complex64 {
        self.omega * x - stream_gradient(&self.contour, x)
    }
}

/// Defect of the fixed-point form
/// `phi(x) = mu + Omega|x|^2/2 - (1/2 pi) \int log|x - y| H(phi(y)) dy`.
///
/// The set `{phi > 0}` built from the canonical `mu` is first checked against
/// `chi_D` (computed by winding number) on every sample; a mismatch is
/// reported with its witness. `psi` of `{phi > 0}` is then the contour's own
/// stream function, and the defect is the sup over samples of
/// `|phi_field(x) - (mu_c + Omega |x|^2/2 - psi(x))|`. Samples inside the
/// `collar` around the boundary (default three node spacings) are skipped.
pub fn integral_equation_residual(
    field: &PatchField,
    samples: &[Point],
    collar: Option<f64>,
) -> Result<f64> {
    let contour = field.contour();
    let collar = collar.unwrap_or(3.0 * contour.max_node_spacing());
    let canonical = PatchField::new(contour.clone(), field.omega());
    let rows = par::map(samples, |&x| -> Result<Option<f64>> {
        let (_, _, dist) = contour.nearest_boundary_point(x);
        if dist < collar {
            return Ok(None);
        }
        let psi = stream_function(contour, x);
        let phi_c = canonical.phi_from_psi(x, psi);
        let inside = contour.contains(x, Some(collar.min(contour.default_delta())))?;
        if (phi_c > 0.0) != inside {
            return Err(Error::LemmaViolation {
                x: x.re,
                y: x.im,
                phi: phi_c,
                inside,
            });
        }
        Ok(Some((field.phi_from_psi(x, psi) - phi_c).abs()))
    });
    let mut worst: f64 = 0.0;
    for r in rows {
        if let Some(v) = r? {
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

/// Far-field asymptotics `psi(x) = (|D| / 2 pi) log|x| + h(x)` with `|h| <= C |x|^-2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldModel {
    pub area: f64,
    pub omega: f64,
    pub mu: f64,
    /// Fitted `C` in `|h(x)| <= C |x|^-2`.
    pub remainder_bound: f64,
    /// Fitted decay exponent of `max |h|` between successive radii.
    pub decay_exponent: f64,
    pub radii: Vec<f64>,
    pub max_remainder: Vec<f64>,
}

impl FarFieldModel {
    /// Leading asymptotics of `phi`: `mu + Omega |x|^2/2 - (|D|/2 pi) log|x|`.
    pub fn phi_asymptotic(&self, x: Point) -> f64 {
        self.mu + 0.5 * self.omega * x.norm_sqr() - self.area / TAU * x.norm().ln()
    }
}

/// Samples of the remainder `h(x) = psi(x) - (|D|/2 pi) log|x|` on one circle.
pub fn far_field_remainder(contour: &Contour, radius: f64, angles: usize) -> f64 {
    let (area, _) = contour
        .area_and_barycenter()
        .unwrap_or((contour.signed_area(), Complex64::new(0.0, 0.0)));
    (0..angles)
        .map(|i| {
            let x = Complex64::from_polar(radius, TAU * i as f64 / angles as f64);
            (stream_function(contour, x) - area / TAU * radius.ln()).abs()
        })
        .fold(0.0, f64::max)
}

/// Fits the far-field model on circles of radius `R, 2R, 4R` with
/// `R = 3 * diameter`. Fails when the remainder decays slower than `|x|^-1.8`,
/// which signals a dipole term, i.e. a barycenter away from the origin.
pub fn far_field_fit(contour: &Contour, omega: f64) -> Result<FarFieldModel> {
    let (area, _) = contour.area_and_barycenter()?;
    let base = 3.0 * contour.diameter();
    let radii = vec![base, 2.0 * base, 4.0 * base];
    let max_remainder: Vec<f64> = radii
        .iter()
        .map(|&r| far_field_remainder(contour, r, 96))
        .collect();
    // Below this the remainder is at round-off level relative to psi itself.
    let floor = 1e-13 * (area / TAU) * radii[2].ln().abs().max(1.0);
    let exponent = if max_remainder[0] <= floor {
        f64::INFINITY
    } else {
        let mut e = f64::INFINITY;
        for w in max_remainder.windows(2) {
            if w[1] > floor {
                e = e.min((w[0] / w[1]).log2());
            }
        }
        e
    };
    if exponent < 1.8 {
        return Err(Error::BarycenterNotCentered { exponent });
    }
    let remainder_bound = radii
        .iter()
        .zip(&max_remainder)
        .map(|(r, h)| h * r * r)
        .fold(0.0, f64::max);
    Ok(FarFieldModel {
        area,
        omega,
        mu: compute_mu(contour, omega),
        remainder_bound,
        decay_exponent: exponent,
        radii,
        max_remainder,
    })
}
