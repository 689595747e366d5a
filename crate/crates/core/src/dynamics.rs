//! Lagrangian contour dynamics: boundary nodes advected by the self-induced
//! velocity with classical RK4, band-limited re-fitting after every stage and
//! periodic arc-length renodalization.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, Contour};
use crate::{potential, Point};

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub contour: Contour,
    pub time: f64,
    pub steps: usize,
}

impl EvolutionState {
    pub fn new(contour: Contour) -> Self {
        Self {
            contour,
            time: 0.0,
            steps: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepConfig {
    pub dt: f64,
    pub steps: usize,
    /// Arc-length renodalization period; `0` disables it.
    pub renode_every: usize,
}

impl TimeStepConfig {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        Ok(Self {
            dt,
            steps,
            renode_every: 20,
        })
    }

    pub fn with_renode_every(mut self, every: usize) -> Self {
        self.renode_every = every;
        self
    }
}

/// Velocity at every node.
pub fn boundary_velocity(contour: &Contour) -> Vec<Complex64> {
    potential::boundary_velocity(contour)
}

/// Retained wavenumbers `|k| <= N/3`.
fn dealiased_band(n: usize) -> usize {
    n / 3
}

fn refit(nodes: &[Point]) -> Result<Contour> {
    Contour::from_nodes_with_band(nodes, dealiased_band(nodes.len()))
}

fn stage(contour: &Contour, k: &[Complex64], h: f64) -> Result<Contour> {
    let nodes: Vec<Point> = contour.nodes().iter().zip(k).map(|(z, v)| z + v * h).collect();
    Contour::from_nodes_unchecked(&nodes, dealiased_band(nodes.len()))
}

fn breakdown(state: &EvolutionState, reason: Error) -> Error {
    Error::EvolutionBreakdown {
        step: state.steps + 1,
        reason: reason.to_string(),
        last: Box::new(state.clone()),
    }
}

/// One RK4 step of size `config.dt`. The new contour is validated for
/// simplicity and nondegeneracy; a renodalization follows when the step
/// count reaches a multiple of `config.renode_every`.
pub fn step(state: &EvolutionState, config: &TimeStepConfig) -> Result<EvolutionState> {
    let dt = config.dt;
    let c0 = &state.contour;
    let k1 = boundary_velocity(c0);
    let run = || -> Result<Contour> {
        let c2 = stage(c0, &k1, 0.5 * dt)?;
        let k2 = boundary_velocity(&c2);
        let c3 = stage(c0, &k2, 0.5 * dt)?;
        let k3 = boundary_velocity(&c3);
        let c4 = stage(c0, &k3, dt)?;
        let k4 = boundary_velocity(&c4);
        let nodes: Vec<Point> = (0..c0.node_count())
            .map(|j| c0.nodes()[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0))
            .collect();
        let next = refit(&nodes)?;
        let steps = state.steps + 1;
        if config.renode_every > 0 && steps.is_multiple_of(config.renode_every) {
            renode_arc_length(&next)
        } else {
            Ok(next)
        }
    };
    let contour = run().map_err(|e| breakdown(state, e))?;
    Ok(EvolutionState {
        contour,
        time: state.time + dt,
        steps: state.steps + 1,
    })
}

/// Runs `config.steps` steps, calling `snapshot` on the initial state and
/// then every `snapshot_every` steps (`0` disables snapshots after the first).
pub fn evolve<F: FnMut(&EvolutionState) -> Result<()>>(
    initial: EvolutionState,
    config: &TimeStepConfig,
    snapshot_every: usize,
    mut snapshot: F,
) -> Result<EvolutionState> {
    let mut state = initial;
    snapshot(&state)?;
    for _ in 0..config.steps {
        state = step(&state, config)?;
        if snapshot_every > 0 && state.steps.is_multiple_of(snapshot_every) {
            snapshot(&state)?;
        }
    }
    Ok(state)
}

/// Hausdorff distance between `evolved` and `initial` rotated by `omega t` about the origin.
pub fn rigid_rotation_error(initial: &Contour, evolved: &Contour, omega: f64, t: f64) -> f64 {
    hausdorff_distance(evolved, &initial.rotated(omega * t))
}

/// Resamples the contour at equal arc-length spacing, re-fits the band-limited
/// series and dilates about the barycenter to restore the area.
pub fn renode_arc_length(contour: &Contour) -> Result<Contour> {
    let n = contour.node_count();
    let mut speed: Vec<Complex64> = contour
        .node_derivatives()
        .iter()
        .map(|d| Complex64::new(d.norm(), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut speed);
    let half = n as i64 / 2 - 1;
    let coeffs: Vec<(f64, Complex64)> = (-half..=half)
        .map(|k| (k as f64, speed[k.rem_euclid(n as i64) as usize] / n as f64))
        .collect();
    let a0 = coeffs[half as usize].1.re;
    let length = std::f64::consts::TAU * a0;
    // s(theta) = a0 theta + sum_{k != 0} a_k (e^{ik theta} - 1) / (ik)
    let arc = |theta: f64| -> (f64, f64) {
        let mut s = a0 * theta;
        let mut ds = a0;
        for &(k, a) in &coeffs {
            if k != 0.0 {
                let e = Complex64::from_polar(1.0, k * theta);
                s += (a * (e - 1.0) / Complex64::new(0.0, k)).re;
                ds += (a * e).re;
            }
        }
        (s, ds)
    };
    let mut theta = 0.0;
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        let target = length * j as f64 / n as f64;
        for _ in 0..50 {
            let (s, ds) = arc(theta);
            let d = (s - target) / ds;
            theta -= d;
            if d.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(contour.series(theta)[0]);
        theta += std::f64::consts::TAU / n as f64;
    }
    let fitted = refit(&nodes)?;
    let (area0, _) = contour.area_and_barycenter()?;
    let (area1, center) = fitted.area_and_barycenter()?;
    Ok(fitted
        .translated(-center)
        .scaled((area0 / area1).sqrt())
        .translated(center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dot;

    #[test]
    fn disc_velocity_is_tangential_half() {
        let d = Contour::circle(Point::new(0.0, 0.0), 1.0, 64).unwrap();
        for (j, v) in boundary_velocity(&d).iter().enumerate() {
            assert!((v.norm() - 0.5).abs() < 1e-13);
            assert!(dot(*v, d.node_normal(j)).abs() < 1e-13);
        }
    }

    #[test]
    fn ellipse_velocity_at_tip_is_vertical() {
        let e = Contour::ellipse(2.0, 1.0, 128).unwrap();
        let v = boundary_velocity(&e)[0];
        assert_eq!(e.nodes()[0], Point::new(2.0, 0.0));
        // Relative to the rotating frame the normal component vanishes.
        let rel = v - Complex64::new(0.0, 2.0 / 9.0) * e.nodes()[0];
        assert!(dot(rel, e.node_normal(0)).abs() < 1e-8);
        assert!(v.re.abs() < 1e-12);
    }

    #[test]
    fn disc_is_stationary() {
        let d = Contour::circle(Point::new(0.0, 0.0), 1.0, 64).unwrap();
        let cfg = TimeStepConfig::new(0.01, 10).unwrap().with_renode_every(5);
        let end = evolve(EvolutionState::new(d.clone()), &cfg, 0, |_| Ok(())).unwrap();
        let hd = hausdorff_distance(&d, &end.contour);
        assert!(hd < 1e-12, "{hd:e}");
        assert!((end.time - 0.1).abs() < 1e-15 && end.steps == 10);
    }

    #[test]
    fn renode_equalizes_spacing_and_keeps_area() {
        let e = Contour::ellipse(2.0, 1.0, 256).unwrap();
        let r = renode_arc_length(&e).unwrap();
        let gaps: Vec<f64> = (0..256)
            .map(|j| (r.nodes()[(j + 1) % 256] - r.nodes()[j]).norm())
            .collect();
        let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |a, g| (a.0.min(*g), a.1.max(*g)));
        assert!((hi - lo) / hi < 1e-3, "{lo} {hi}");
        assert!((r.signed_area() - e.signed_area()).abs() < 1e-12);
        let hd = hausdorff_distance(&r, &e);
        assert!(hd < 1e-10, "{hd:e}");
    }

    #[test]
    fn rejects_bad_time_step() {
        assert!(TimeStepConfig::new(0.0, 1).is_err());
        assert!(TimeStepConfig::new(f64::NAN, 1).is_err());
    }
}
