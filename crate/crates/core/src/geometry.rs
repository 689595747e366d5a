//! Spectral closed-curve representation of patch boundaries.
//!
//! A [`Contour`] is a truncated Fourier series `z(theta) = sum_k c_k e^{ik theta}`
//! sampled on `N` equispaced nodes. Construction normalizes the orientation
//! to counterclockwise and rejects degenerate or self-intersecting curves.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::Point;

/// Boundary point with unit tangent and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub tangent: Complex64,
    pub normal: Complex64,
}

/// Closed `C^1` patch boundary as a truncated Fourier series.
#[derive(Debug, Clone)]
pub struct Contour {
    k_min: i64,
    coefficients: Vec<Complex64>,
    nodes: Vec<Point>,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
    diameter: f64,
    max_spacing: f64,
}

impl Contour {
    /// Builds a contour from coefficients `c_{k_min}, ..., c_{k_min + len - 1}`
    /// sampled on `node_count` nodes. Clockwise input is reversed.
    pub fn new(k_min: i64, coefficients: Vec<Complex64>, node_count: usize) -> Result<Self> {
        let c = Self::build(k_min, coefficients, node_count)?;
        c.check_nondegenerate()?;
        c.check_simple()?;
        Ok(c)
    }

    /// Same as [`Contour::new`] without the `O(N^2)` simplicity check.
    pub(crate) fn new_unchecked(
        k_min: i64,
        coefficients: Vec<Complex64>,
        node_count: usize,
    ) -> Result<Self> {
        let c = Self::build(k_min, coefficients, node_count)?;
        c.check_nondegenerate()?;
        Ok(c)
    }

    fn build(k_min: i64, coefficients: Vec<Complex64>, node_count: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidContour("no Fourier coefficients".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidContour("non-finite coefficient".into()));
        }
        let k_max = k_min + coefficients.len() as i64 - 1;
        let band = k_min.abs().max(k_max.abs()) as usize;
        if node_count < 8 || node_count <= 2 * band {
            return Err(Error::InvalidContour(format!(
                "{node_count} nodes cannot resolve harmonics up to |k| = {band}"
            )));
        }
        if !node_count.is_multiple_of(2) {
            return Err(Error::InvalidContour("node count must be even".into()));
        }
        let (mut k_min, mut coefficients) = (k_min, coefficients);
        if signed_area_of(k_min, &coefficients) < 0.0 {
            // z(theta) -> z(-theta): c_k -> c_{-k}
            coefficients.reverse();
            k_min = -k_max;
        }
        let area = signed_area_of(k_min, &coefficients);
        if area <= 0.0 {
            return Err(Error::Orientation { area });
        }
        let samples: Vec<[Complex64; 3]> = (0..node_count)
            .map(|j| eval_series(k_min, &coefficients, TAU * j as f64 / node_count as f64))
            .collect();
        let nodes: Vec<Point> = samples.iter().map(|s| s[0]).collect();
        let d1: Vec<Complex64> = samples.iter().map(|s| s[1]).collect();
        let d2: Vec<Complex64> = samples.iter().map(|s| s[2]).collect();
        let max_speed = d1.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let mut diameter: f64 = 0.0;
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                diameter = diameter.max((a - b).norm());
            }
        }
        Ok(Self {
            k_min,
            coefficients,
            nodes,
            d1,
            d2,
            diameter,
            max_spacing: max_speed * TAU / node_count as f64,
        })
    }

    /// Circle of radius `radius` centred at `center`.
    pub fn circle(center: Point, radius: f64, node_count: usize) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Domain(format!("circle radius {radius} must be positive")));
        }
        Self::new(
            -1,
            vec![Complex64::new(0.0, 0.0), center, Complex64::new(radius, 0.0)],
            node_count,
        )
    }

    /// Axis-aligned ellipse `a cos(theta) + i b sin(theta)` centred at the origin.
    pub fn ellipse(a: f64, b: f64, node_count: usize) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Domain(format!("semi-axes ({a}, {b}) must be positive")));
        }
        Self::new(
            -1,
            vec![
                Complex64::new(0.5 * (a - b), 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5 * (a + b), 0.0),
            ],
            node_count,
        )
    }

    /// Trigonometric interpolant of equispaced samples; the Nyquist mode is
    /// dropped, so the result carries harmonics `|k| < N/2`.
    pub fn from_nodes(nodes: &[Point]) -> Result<Self> {
        let (k_min, coeffs) = interpolate_nodes(nodes, nodes.len() / 2 - 1);
        Self::new(k_min, coeffs, nodes.len())
    }

    /// [`Contour::from_nodes`] keeping only wavenumbers `|k| <= band`.
    pub fn from_nodes_with_band(nodes: &[Point], band: usize) -> Result<Self> {
        let (k_min, coeffs) = interpolate_nodes(nodes, band);
        Self::new(k_min, coeffs, nodes.len())
    }

    pub(crate) fn from_nodes_unchecked(nodes: &[Point], band: usize) -> Result<Self> {
        let (k_min, coeffs) = interpolate_nodes(nodes, band);
        Self::new_unchecked(k_min, coeffs, nodes.len())
    }

    /// Least-squares Fourier fit of a closed polyline parametrized by
    /// normalized chord length.
    pub fn fit_polyline(points: &[Point], harmonics: usize, node_count: usize) -> Result<Self> {
        let p = points.len();
        if p < 3 {
            return Err(Error::InvalidContour("polyline needs at least 3 points".into()));
        }
        if 2 * harmonics + 1 > p {
            return Err(Error::InvalidContour(format!(
                "{harmonics} harmonics overfit {p} polyline points"
            )));
        }
        let mut cumulative = Vec::with_capacity(p);
        let mut length = 0.0;
        for i in 0..p {
            cumulative.push(length);
            length += (points[(i + 1) % p] - points[i]).norm();
        }
        if length <= 0.0 {
            return Err(Error::InvalidContour("polyline has zero length".into()));
        }
        let k_min = -(harmonics as i64);
        let cols = 2 * harmonics + 1;
        // Real system over (Re c_k, Im c_k).
        let mut a = nalgebra::DMatrix::<f64>::zeros(2 * p, 2 * cols);
        let mut rhs = nalgebra::DVector::<f64>::zeros(2 * p);
        for (i, s) in cumulative.iter().enumerate() {
            let theta = TAU * s / length;
            for c in 0..cols {
                let e = Complex64::from_polar(1.0, (k_min + c as i64) as f64 * theta);
                a[(2 * i, 2 * c)] = e.re;
                a[(2 * i, 2 * c + 1)] = -e.im;
                a[(2 * i + 1, 2 * c)] = e.im;
                a[(2 * i + 1, 2 * c + 1)] = e.re;
            }
            rhs[2 * i] = points[i].re;
            rhs[2 * i + 1] = points[i].im;
        }
        let sol = a
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::InvalidContour(format!("polyline fit failed: {e}")))?;
        let coeffs = (0..cols).map(|c| Complex64::new(sol[2 * c], sol[2 * c + 1])).collect();
        Self::new(k_min, coeffs, node_count)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coefficients.len() as i64 - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient `c_k`, zero outside the stored band.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        if k < self.k_min || k > self.k_max() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(k - self.k_min) as usize]
        }
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// `z'(theta_j)` at the nodes.
    pub fn node_derivatives(&self) -> &[Complex64] {
        &self.d1
    }

    pub fn node_second_derivatives(&self) -> &[Complex64] {
        &self.d2
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.nodes.len() as f64
    }

    /// Largest distance between nodes.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `max |z'| * 2 pi / N`, an upper bound on adjacent-node distance.
    pub fn max_node_spacing(&self) -> f64 {
        self.max_spacing
    }

    /// `(z, z', z'')` at an arbitrary parameter.
    pub fn series(&self, theta: f64) -> [Complex64; 3] {
        eval_series(self.k_min, &self.coefficients, theta)
    }

    /// Point, unit tangent and outward unit normal at `theta`.
    pub fn evaluate(&self, theta: f64) -> Result<BoundaryPoint> {
        let [z, dz, _] = self.series(theta);
        let speed = dz.norm();
        if speed <= self.degeneracy_tolerance() {
            return Err(Error::DegenerateTangent { theta, speed });
        }
        let tangent = dz / speed;
        Ok(BoundaryPoint {
            point: z,
            tangent,
            normal: -Complex64::i() * tangent,
        })
    }

    /// Outward unit normal at node `j`.
    pub fn node_normal(&self, j: usize) -> Complex64 {
        let d = self.d1[j];
        -Complex64::i() * d / d.norm()
    }

    pub fn node_tangent(&self, j: usize) -> Complex64 {
        let d = self.d1[j];
        d / d.norm()
    }

    /// Signed area `(1/2) \oint (x dy - y dx)` by trapezoidal quadrature on the nodes.
    pub fn signed_area(&self) -> f64 {
        let n = self.nodes.len() as f64;
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.d1)
            .map(|(z, dz)| (z.conj() * dz).im)
            .sum();
        0.5 * s * TAU / n
    }

    /// Area and barycenter from the boundary integrals
    /// `|D| = (1/2i) \oint conj(z) dz` and `\int_D z dA = (1/2i) \oint z conj(z) dz`.
    pub fn area_and_barycenter(&self) -> Result<(f64, Point)> {
        let n = self.nodes.len() as f64;
        let mut area = Complex64::new(0.0, 0.0);
        let mut moment = Complex64::new(0.0, 0.0);
        for (z, dz) in self.nodes.iter().zip(&self.d1) {
            area += z.conj() * dz;
            moment += z * z.conj() * dz;
        }
        let scale = TAU / n / Complex64::new(0.0, 2.0);
        let area = (area * scale).re;
        if area <= 0.0 {
            return Err(Error::Orientation { area });
        }
        Ok((area, moment * scale / area))
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let r = Complex64::from_polar(1.0, angle);
        self.mapped(|c| c * r, Complex64::new(0.0, 0.0))
    }

    pub fn translated(&self, offset: Point) -> Self {
        self.mapped(|c| c, offset)
    }

    /// Dilation about the origin by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        self.mapped(|c| c * factor, Complex64::new(0.0, 0.0))
    }

    /// Translate so that the barycenter sits at the origin.
    pub fn recentered(&self) -> Self {
        match self.area_and_barycenter() {
            Ok((_, b)) => self.translated(-b),
            Err(_) => self.clone(),
        }
    }

    fn mapped(&self, f: impl Fn(Complex64) -> Complex64, offset: Point) -> Self {
        let mut k_min = self.k_min;
        let mut coeffs: Vec<Complex64> = self.coefficients.iter().map(|&c| f(c)).collect();
        if offset != Complex64::new(0.0, 0.0) {
            if k_min > 0 {
                let pad = k_min as usize;
                let mut v = vec![Complex64::new(0.0, 0.0); pad];
                v.extend(coeffs);
                coeffs = v;
                k_min = 0;
            }
            let k_max = k_min + coeffs.len() as i64 - 1;
            if k_max < 0 {
                coeffs.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), (-k_max) as usize));
            }
            coeffs[(-k_min) as usize] += offset;
        }
        let n = self.nodes.len();
        let samples: Vec<[Complex64; 3]> = (0..n)
            .map(|j| eval_series(k_min, &coeffs, TAU * j as f64 / n as f64))
            .collect();
        let max_speed = samples.iter().map(|s| s[1].norm()).fold(0.0, f64::max);
        Self {
            k_min,
            coefficients: coeffs,
            nodes: samples.iter().map(|s| s[0]).collect(),
            d1: samples.iter().map(|s| s[1]).collect(),
            d2: samples.iter().map(|s| s[2]).collect(),
            diameter: self.diameter * f(Complex64::new(1.0, 0.0)).norm(),
            max_spacing: max_speed * TAU / n as f64,
        }
    }

    /// Same curve sampled on a different number of nodes.
    pub fn with_node_count(&self, node_count: usize) -> Result<Self> {
        Self::new(self.k_min, self.coefficients.clone(), node_count)
    }

    /// Nearest boundary point: `(theta, z(theta), distance)`. Node scan
    /// followed by Newton refinement of `Re(conj(z - x) z') = 0`.
    pub fn nearest_boundary_point(&self, x: Point) -> (f64, Point, f64) {
        let (j, _) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(j, z)| (j, (z - x).norm_sqr()))
            .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        let h = TAU / self.nodes.len() as f64;
        let theta0 = self.theta(j);
        let mut theta = theta0;
        for _ in 0..30 {
            let [z, dz, d2z] = self.series(theta);
            let g = ((z - x).conj() * dz).re;
            let dg = dz.norm_sqr() + ((z - x).conj() * d2z).re;
            if dg <= 0.0 {
                break;
            }
            let step = (g / dg).clamp(-h, h);
            theta -= step;
            if (theta - theta0).abs() > 1.5 * h {
                theta = theta0;
                break;
            }
            if step.abs() < 1e-15 {
                break;
            }
        }
        let z = self.series(theta)[0];
        let dn = (self.nodes[j] - x).norm();
        if (z - x).norm() <= dn {
            (theta.rem_euclid(TAU), z, (z - x).norm())
        } else {
            (theta0, self.nodes[j], dn)
        }
    }

    /// Default boundary-proximity tolerance for [`Contour::contains`].
    pub fn default_delta(&self) -> f64 {
        1e-8 * self.diameter
    }

    /// Point membership via the winding number. `delta` defaults to
    /// `1e-8 * diameter`; points closer than `delta` to the boundary are
    /// rejected as ambiguous.
    pub fn contains(&self, x: Point, delta: Option<f64>) -> Result<bool> {
        let delta = delta.unwrap_or_else(|| self.default_delta());
        let (_, _, dist) = self.nearest_boundary_point(x);
        if dist < delta {
            return Err(Error::BoundaryAmbiguity {
                x: x.re,
                y: x.im,
                distance: dist,
                delta,
            });
        }
        let w = self.winding_number_near(x, dist);
        if (w - w.round()).abs() > 0.25 {
            return Err(Error::BoundaryAmbiguity {
                x: x.re,
                y: x.im,
                distance: dist,
                delta,
            });
        }
        Ok(w.round() as i64 == 1)
    }

    /// Winding number `(1/2 pi i) \oint dz / (z - x)`.
    pub fn winding_number(&self, x: Point) -> f64 {
        let (_, _, dist) = self.nearest_boundary_point(x);
        self.winding_number_near(x, dist)
    }

    fn winding_number_near(&self, x: Point, dist: f64) -> f64 {
        let n = self.nodes.len() as f64;
        if dist >= 5.0 * self.max_spacing {
            let s: Complex64 = self
                .nodes
                .iter()
                .zip(&self.d1)
                .map(|(z, dz)| dz / (z - x))
                .sum();
            (s / (n * Complex64::i())).re
        } else {
            let (theta, _, _) = self.nearest_boundary_point(x);
            let f = |t: f64| {
                let [z, dz, _] = self.series(t);
                dz / (z - x)
            };
            let s = quadrature::adaptive(&f, theta - PI, theta + PI, 1e-9, 16);
            (s / (TAU * Complex64::i())).re
        }
    }

    fn degeneracy_tolerance(&self) -> f64 {
        let max_speed = self.d1.iter().map(|d| d.norm()).fold(0.0, f64::max);
        1e-9 * max_speed.max(f64::MIN_POSITIVE)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        let tol = self.degeneracy_tolerance();
        for (j, d) in self.d1.iter().enumerate() {
            if d.norm() <= tol {
                return Err(Error::DegenerateTangent {
                    theta: self.theta(j),
                    speed: d.norm(),
                });
            }
        }
        Ok(())
    }

    /// Pairwise test of the `N` node segments for crossings.
    pub fn check_simple(&self) -> Result<()> {
        let n = self.nodes.len();
        for i in 0..n {
            let (a, b) = (self.nodes[i], self.nodes[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (self.nodes[j], self.nodes[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    let p = 0.25 * (a + b + c + d);
                    return Err(Error::SelfIntersection {
                        first: i,
                        second: j,
                        x: p.re,
                        y: p.im,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Symmetric Hausdorff distance between the node sets of two contours, each
/// node projected onto the other curve by local Newton refinement.
pub fn hausdorff_distance(a: &Contour, b: &Contour) -> f64 {
    let one_sided = |p: &Contour, q: &Contour| {
        crate::par::map(p.nodes(), |&x| q.nearest_boundary_point(x).2)
            .into_iter()
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| ((q - p).conj() * (r - p)).im;
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

fn signed_area_of(k_min: i64, coefficients: &[Complex64]) -> f64 {
    // |D| = pi * sum_k k |c_k|^2 for z = sum c_k e^{ik theta}.
    coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| (k_min + i as i64) as f64 * c.norm_sqr())
        .sum::<f64>()
        * PI
}

fn eval_series(k_min: i64, coefficients: &[Complex64], theta: f64) -> [Complex64; 3] {
    let step = Complex64::from_polar(1.0, theta);
    let mut e = Complex64::from_polar(1.0, k_min as f64 * theta);
    let mut z = Complex64::new(0.0, 0.0);
    let mut dz = Complex64::new(0.0, 0.0);
    let mut d2z = Complex64::new(0.0, 0.0);
    for (i, c) in coefficients.iter().enumerate() {
        let k = (k_min + i as i64) as f64;
        let term = c * e;
        z += term;
        dz += term * Complex64::new(0.0, k);
        d2z -= term * (k * k);
        e *= step;
    }
    [z, dz, d2z]
}

fn interpolate_nodes(nodes: &[Point], band: usize) -> (i64, Vec<Complex64>) {
    let n = nodes.len();
    let mut buf = nodes.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let band = band.min(n / 2 - 1);
    let scale = 1.0 / n as f64;
    let coeffs = (-(band as i64)..=band as i64)
        .map(|k| buf[k.rem_euclid(n as i64) as usize] * scale)
        .collect();
    (-(band as i64), coeffs)
}

/// `m`-fold symmetric polar graph `R(theta) = r0 + sum_j a_j cos(j m theta)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolarShape {
    symmetry: usize,
    base_radius: f64,
    cosines: Vec<f64>,
}

impl PolarShape {
    pub fn new(symmetry: usize, base_radius: f64, cosines: Vec<f64>) -> Result<Self> {
        if symmetry < 1 {
            return Err(Error::Domain("symmetry must be at least 1".into()));
        }
        if !(base_radius > 0.0) {
            return Err(Error::Domain(format!("base radius {base_radius} must be positive")));
        }
        if cosines.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("non-finite cosine coefficient".into()));
        }
        Ok(Self {
            symmetry,
            base_radius,
            cosines,
        })
    }

    /// The unperturbed disc of radius `base_radius` with `harmonics` zero cosines.
    pub fn disc(symmetry: usize, base_radius: f64, harmonics: usize) -> Result<Self> {
        Self::new(symmetry, base_radius, vec![0.0; harmonics])
    }

    /// Polar representation of the ellipse `x^2/a^2 + y^2/b^2 = 1`, whose
    /// radius `ab / sqrt(b^2 cos^2 + a^2 sin^2)` is expanded in `cos(2 j theta)`.
    pub fn ellipse(a: f64, b: f64, harmonics: usize) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Domain(format!("semi-axes ({a}, {b}) must be positive")));
        }
        let samples = 4096;
        let radius = |t: f64| a * b / (b * b * t.cos().powi(2) + a * a * t.sin().powi(2)).sqrt();
        let mean = (0..samples)
            .map(|i| radius(TAU * i as f64 / samples as f64))
            .sum::<f64>()
            / samples as f64;
        let cosines = (1..=harmonics)
            .map(|j| {
                (0..samples)
                    .map(|i| {
                        let t = TAU * i as f64 / samples as f64;
                        radius(t) * (2.0 * j as f64 * t).cos()
                    })
                    .sum::<f64>()
                    * 2.0
                    / samples as f64
            })
            .collect();
        Self::new(2, mean, cosines)
    }

    pub fn symmetry(&self) -> usize {
        self.symmetry
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn cosines(&self) -> &[f64] {
        &self.cosines
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        let m = self.symmetry as f64;
        self.base_radius
            + self
                .cosines
                .iter()
                .enumerate()
                .map(|(j, a)| a * ((j + 1) as f64 * m * theta).cos())
                .sum::<f64>()
    }

    /// Highest Fourier index of `R(theta) e^{i theta}`.
    pub fn band(&self) -> usize {
        self.cosines.len() * self.symmetry + 1
    }

    /// Exact Fourier coefficients of `R(theta) e^{i theta}`:
    /// `c_1 = r0`, `c_{1 +- j m} += a_j / 2`.
    pub fn to_contour(&self, node_count: usize) -> Result<Contour> {
        self.check_positive(node_count)?;
        let (k_min, coeffs) = self.coefficients();
        Contour::new(k_min, coeffs, node_count)
    }

    pub(crate) fn to_contour_unchecked(&self, node_count: usize) -> Result<Contour> {
        self.check_positive(node_count)?;
        let (k_min, coeffs) = self.coefficients();
        Contour::new_unchecked(k_min, coeffs, node_count)
    }

    fn coefficients(&self) -> (i64, Vec<Complex64>) {
        let jm = (self.cosines.len() * self.symmetry) as i64;
        let k_min = 1 - jm;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (2 * jm + 1) as usize];
        coeffs[(1 - k_min) as usize] += self.base_radius;
        for (j, a) in self.cosines.iter().enumerate() {
            let q = (j + 1) as i64 * self.symmetry as i64;
            coeffs[(1 + q - k_min) as usize] += 0.5 * a;
            coeffs[(1 - q - k_min) as usize] += 0.5 * a;
        }
        (k_min, coeffs)
    }

    fn check_positive(&self, node_count: usize) -> Result<()> {
        let samples = node_count.max(64) * 2;
        for i in 0..samples {
            let t = TAU * i as f64 / samples as f64;
            let r = self.radius_at(t);
            if r <= 0.0 {
                return Err(Error::InvalidContour(format!(
                    "polar radius {r} is nonpositive at theta = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Tangent-line reflection frame at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFrame {
    base_point: Point,
    normal: Complex64,
}

impl ReflectionFrame {
    /// `normal` is normalized; it must be nonzero.
    pub fn new(base_point: Point, normal: Complex64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) {
            return Err(Error::Domain("reflection normal must be nonzero".into()));
        }
        Ok(Self {
            base_point,
            normal: normal / len,
        })
    }

    /// Frame at node `j` of a contour, with the outward normal.
    pub fn at_node(contour: &Contour, j: usize) -> Self {
        Self {
            base_point: contour.nodes()[j],
            normal: contour.node_normal(j),
        }
    }

    pub fn base_point(&self) -> Point {
        self.base_point
    }

    pub fn normal(&self) -> Complex64 {
        self.normal
    }

    /// Signed height `(y - x0) . nu` above the tangent line.
    pub fn height(&self, y: Point) -> f64 {
        dot(y - self.base_point, self.normal)
    }

    /// `y - 2 [(y - x0) . nu] nu`.
    pub fn reflect(&self, y: Point) -> Point {
        y - self.normal * (2.0 * self.height(y))
    }
}

/// Euclidean dot product of two plane vectors.
pub fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Batch membership: a crossing-number test on the node polygon, deferring
/// to [`Contour::contains`] for points inside the polygon's chord-sag band.
#[derive(Debug, Clone, Copy)]
pub struct MembershipTester<'a> {
    contour: &'a Contour,
    band: f64,
    delta: f64,
}

impl<'a> MembershipTester<'a> {
    pub fn new(contour: &'a Contour, delta: Option<f64>) -> Self {
        let h = TAU / contour.node_count() as f64;
        let curvature = contour.d2.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let sag = curvature * h * h / 8.0;
        let delta = delta.unwrap_or_else(|| contour.default_delta());
        Self {
            contour,
            band: 2.0 * sag + 4.0 * delta + 1e-12 * contour.diameter,
            delta,
        }
    }

    pub fn contour(&self) -> &Contour {
        self.contour
    }

    pub fn contains(&self, x: Point) -> Result<bool> {
        let nodes = &self.contour.nodes;
        let n = nodes.len();
        let mut inside = false;
        let mut d2min = f64::INFINITY;
        for i in 0..n {
            let a = nodes[i];
            let b = nodes[(i + 1) % n];
            if (a.im > x.im) != (b.im > x.im) {
                let t = (x.im - a.im) / (b.im - a.im);
                if x.re < a.re + t * (b.re - a.re) {
                    inside = !inside;
                }
            }
            let ab = b - a;
            let t = (dot(x - a, ab) / ab.norm_sqr()).clamp(0.0, 1.0);
            d2min = d2min.min((a + ab * t - x).norm_sqr());
        }
        if d2min.sqrt() > self.band {
            Ok(inside)
        } else {
            self.contour.contains(x, Some(self.delta))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_circle_evaluation() {
        let circle = Contour::circle(c(0.0, 0.0), 1.0, 64).unwrap();
        let p = circle.evaluate(0.0).unwrap();
        assert!((p.point - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.tangent - c(0.0, 1.0)).norm() < 1e-15);
        assert!((p.normal - c(1.0, 0.0)).norm() < 1e-15);
        let q = circle.evaluate(PI / 2.0).unwrap();
        assert!((q.point - c(0.0, 1.0)).norm() < 1e-15);
        assert!((q.normal - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn ellipse_evaluation_matches_parametrization() {
        let e = Contour::ellipse(2.0, 1.0, 64).unwrap();
        let p = e.evaluate(0.0).unwrap();
        assert!((p.point - c(2.0, 0.0)).norm() < 1e-15);
        assert!((p.normal - c(1.0, 0.0)).norm() < 1e-15);
        // z'(t) = -2 sin t + i cos t
        let t = 0.7;
        let [_, dz, _] = e.series(t);
        assert!((dz - c(-2.0 * t.sin(), t.cos())).norm() < 1e-14);
    }

    #[test]
    fn clockwise_input_is_reversed() {
        // z = e^{-i theta}: clockwise unit circle.
        let cw = Contour::new(-1, vec![c(1.0, 0.0)], 32).unwrap();
        assert!(cw.signed_area() > 0.0);
        assert_eq!(cw.k_min(), 1);
        assert!((cw.signed_area() - PI).abs() < 1e-13);
    }

    #[test]
    fn degenerate_and_invalid_inputs_are_rejected() {
        assert!(matches!(
            Contour::new(0, vec![c(1.0, 0.0)], 32),
            Err(Error::Orientation { .. })
        ));
        assert!(Contour::new(-1, vec![c(0.0, 0.0); 3], 2).is_err());
        assert!(Contour::circle(c(0.0, 0.0), -1.0, 32).is_err());
        // Cusp: z = e^{it} + e^{2it}/2 has z'(pi) = 0.
        let cusp = Contour::new(1, vec![c(1.0, 0.0), c(0.5, 0.0)], 64);
        assert!(matches!(cusp, Err(Error::DegenerateTangent { .. })));
    }

    #[test]
    fn self_intersection_is_detected() {
        // Limacon-like loop with an inner loop: z = e^{it} + 2 e^{2it}.
        let r = Contour::new(1, vec![c(1.0, 0.0), c(2.0, 0.0)], 128);
        assert!(matches!(r, Err(Error::SelfIntersection { .. })), "{r:?}");
    }

    #[test]
    fn area_and_barycenter_examples() {
        let (a, b) = Contour::circle(c(0.0, 0.0), 1.0, 64)
            .unwrap()
            .area_and_barycenter()
            .unwrap();
        assert!((a - PI).abs() < 1e-13 && b.norm() < 1e-15);
        let (a, b) = Contour::ellipse(2.0, 1.0, 64).unwrap().area_and_barycenter().unwrap();
        assert!((a - TAU).abs() < 1e-13 && b.norm() < 1e-15);
        let (_, b) = Contour::circle(c(1.0, 0.0), 1.0, 64)
            .unwrap()
            .area_and_barycenter()
            .unwrap();
        assert!((b - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn contains_examples() {
        let circle = Contour::circle(c(0.0, 0.0), 1.0, 128).unwrap();
        assert!(circle.contains(c(0.0, 0.0), None).unwrap());
        assert!(!circle.contains(c(2.0, 0.0), None).unwrap());
        assert!(circle.contains(c(0.999, 0.0), None).unwrap());
        assert!(!circle.contains(c(1.0 + 1e-6, 0.0), None).unwrap());
        assert!(matches!(
            circle.contains(c(1.0, 0.0), None),
            Err(Error::BoundaryAmbiguity { .. })
        ));
        let ellipse = Contour::ellipse(2.0, 1.0, 128).unwrap();
        assert!(ellipse.contains(c(1.5, 0.5), None).unwrap());
    }

    #[test]
    fn membership_tester_agrees_with_winding_number() {
        let peanut = PolarShape::new(2, 1.0, vec![0.6]).unwrap().to_contour(128).unwrap();
        let tester = MembershipTester::new(&peanut, None);
        for i in 0..40 {
            for j in 0..40 {
                let x = c(-1.7 + 3.4 * i as f64 / 39.0, -1.0 + 2.0 * j as f64 / 39.0);
                match peanut.contains(x, None) {
                    Ok(v) => assert_eq!(tester.contains(x).unwrap(), v, "{x}"),
                    Err(_) => assert!(tester.contains(x).is_err()),
                }
            }
        }
    }

    #[test]
    fn reflection_examples() {
        let f = ReflectionFrame::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((f.reflect(c(1.5, 2.0)) - c(0.5, 2.0)).norm() < 1e-15);
        assert_eq!(f.reflect(c(1.0, 0.0)), c(1.0, 0.0));
        let g = ReflectionFrame::new(c(0.0, 1.0), c(0.0, 1.0)).unwrap();
        assert!((g.reflect(c(3.0, 1.2)) - c(3.0, 0.8)).norm() < 1e-15);
        assert!(ReflectionFrame::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = Contour::circle(c(0.0, 0.0), 1.0, 128).unwrap();
        let b = Contour::circle(c(0.0, 0.0), 1.1, 128).unwrap();
        assert!(hausdorff_distance(&a, &a) < 1e-15);
        assert!((hausdorff_distance(&a, &b) - 0.1).abs() < 1e-12);
        assert!(hausdorff_distance(&a, &a.rotated(0.123)) < 1e-12);
    }

    #[test]
    fn polar_shape_coefficients_reproduce_radius() {
        let shape = PolarShape::new(3, 1.0, vec![0.1, -0.02]).unwrap();
        let contour = shape.to_contour(128).unwrap();
        for t in [0.0, 0.3, 1.7, 4.0] {
            let z = contour.series(t)[0];
            let expected = Complex64::from_polar(shape.radius_at(t), t);
            assert!((z - expected).norm() < 1e-14);
        }
        // m-fold symmetry: rotating by 2 pi / m maps the curve onto itself.
        let rotated = contour.rotated(TAU / 3.0);
        assert!(hausdorff_distance(&contour, &rotated) < 1e-12);
        assert!(PolarShape::new(2, 1.0, vec![1.5]).unwrap().to_contour(64).is_err());
    }

    #[test]
    fn polar_ellipse_matches_exact_ellipse() {
        let polar = PolarShape::ellipse(2.0, 1.0, 40).unwrap().to_contour(512).unwrap();
        let exact = Contour::ellipse(2.0, 1.0, 512).unwrap();
        assert!(hausdorff_distance(&polar, &exact) < 1e-12);
    }

    #[test]
    fn polyline_fit_recovers_circle() {
        let pts: Vec<Point> = (0..200)
            .map(|i| Complex64::from_polar(1.0, TAU * i as f64 / 200.0))
            .collect();
        let fit = Contour::fit_polyline(&pts, 8, 64).unwrap();
        let circle = Contour::circle(c(0.0, 0.0), 1.0, 64).unwrap();
        assert!(hausdorff_distance(&fit, &circle) < 1e-3);
    }

    #[test]
    fn from_nodes_interpolates() {
        let e = Contour::ellipse(2.0, 1.0, 64).unwrap().translated(c(0.5, -0.25));
        let back = Contour::from_nodes(e.nodes()).unwrap();
        for (a, b) in e.nodes().iter().zip(back.nodes()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((back.coefficient(1) - c(1.5, 0.0)).norm() < 1e-14);
    }
}
