//! Quadrature kernels shared by the boundary-integral evaluators.
//!
//! * Gauss-Legendre rules and an adaptive panel integrator for nearly
//!   singular integrands (evaluation points close to the contour).
//! * Log-splitting weights for `\int log(4 sin^2((t - s)/2)) f(s) ds`, which
//!   integrate the on-boundary logarithmic kernel with spectral accuracy.
//! * Golden-section minimization, used by scans over `Omega`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Panel integral and the integral of `|f|` over the panel.
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        let v = f(mid + half * xi);
        sum += v * wi;
        abs += v.norm() * wi;
    }
    (sum * half, abs * half.abs())
}

/// Adaptive Gauss-Legendre integration of a complex integrand on `[a, b]`.
///
/// The interval is cut into `panels` equal pieces, each refined by bisection
/// until the two-halves estimate agrees with the whole-panel estimate to
/// within `tol / panels`, or to round-off relative to `\int |f|`.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> Complex64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + h * p as f64;
            let hi = lo + h;
            let (whole, _) = panel(f, lo, hi);
            refine(f, lo, hi, whole, tol / panels as f64, 0)
        })
        .sum()
}

fn refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let (left, abs_left) = panel(f, a, mid);
    let (right, abs_right) = panel(f, mid, b);
    let split = left + right;
    let floor = 64.0 * f64::EPSILON * (abs_left + abs_right);
    let unresolved = (b - a) <= 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    if depth >= 48 || unresolved || (split - whole).norm() <= tol.max(floor) {
        return split;
    }
    refine(f, a, mid, left, tol, depth + 1) + refine(f, mid, b, right, tol, depth + 1)
}

/// Weights `R_j` such that for a `2 pi`-periodic smooth `f` sampled at
/// `s_j = t + 2 pi j / n` (`n` even),
/// `\int_0^{2pi} log(4 sin^2((t - s)/2)) f(s) ds ~ sum_j R_j f(s_j)`.
/// Exact for trigonometric polynomials of degree `< n/2`.
pub fn log_split_weights(n: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().unwrap().get(&n) {
        return Arc::clone(w);
    }
    assert!(n >= 2 && n.is_multiple_of(2), "log-split weights need an even node count");
    let half = n / 2;
    let nf = n as f64;
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let mut sum = 0.0;
            for m in 1..half {
                sum += (2.0 * PI * (m * j) as f64 / nf).cos() / m as f64;
            }
            let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
            -4.0 * PI / nf * sum - 4.0 * PI / (nf * nf) * parity
        })
        .collect();
    let weights = Arc::new(weights);
    cache.lock().unwrap().insert(n, Arc::clone(&weights));
    weights
}

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // \int_{-1}^1 x^30 dx = 2/31
        let m: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_near_singular_integrand() {
        // \int_0^1 1/(x^2 + e^2) dx = atan(1/e)/e
        let e = 1e-6;
        let f = |x: f64| Complex64::new(1.0 / (x * x + e * e), 0.0);
        let got = adaptive(&f, 0.0, 1.0, 1e-8, 4).re;
        let exact = (1.0 / e).atan() / e;
        assert!((got - exact).abs() / exact < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn log_split_weights_reproduce_known_integrals() {
        // \int_0^{2pi} log(4 sin^2(s/2)) ds = 0 and
        // \int_0^{2pi} log(4 sin^2(s/2)) cos(k s) ds = -2 pi / k.
        let n = 64;
        let w = log_split_weights(n);
        let total: f64 = w.iter().sum();
        assert!(total.abs() < 1e-13);
        for k in 1..10 {
            let s: f64 = (0..n)
                .map(|j| w[j] * (2.0 * PI * (k * j) as f64 / n as f64).cos())
                .sum();
            assert!((s + 2.0 * PI / k as f64).abs() < 1e-12, "k={k}: {s}");
        }
    }

    #[test]
    fn golden_section_finds_vertex_of_abs() {
        let x = golden_section(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-10);
    }
}
