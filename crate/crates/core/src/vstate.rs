//! Rotating-patch boundary equation, bifurcation detection from the disc, and
//! Newton solves for `m`-fold symmetric V-states.
//!
//! The node residual is
//! `r(z) = (1/2) Re{ (2 Omega conj(z) + (1/2 i pi) \oint (conj xi - conj z)/(xi - z) dxi) tau(z) }`,
//! which equals the normal relative velocity `(v - Omega x^perp) . nu` node by
//! node. For a polar graph symmetric under `theta -> -theta` the residual is odd
//! and `m`-periodic, so it expands in `sin(j m theta)`; those harmonics are the
//! Newton equations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Contour, PolarShape};
use crate::potential::{self, bernoulli_boundary_stats};
use crate::{par, quadrature};

/// Finite-difference step on shape coefficients.
pub const FD_STEP: f64 = 1e-6;
/// Smallest damping factor tried before a step is accepted anyway.
pub const DAMPING_FLOOR: f64 = 1.0 / 1024.0;
/// `sigma_min / sigma_max` below which the Newton system counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// Node residual of the V-state equation at angular velocity `omega`.
pub fn boundary_residual(contour: &Contour, omega: f64) -> Vec<f64> {
    let cauchy = potential::boundary_cauchy(contour);
    contour
        .nodes()
        .iter()
        .zip(contour.node_derivatives())
        .zip(cauchy)
        .map(|((z, dz), c)| {
            let tau = dz / dz.norm();
            0.5 * ((2.0 * omega * z.conj() + c) * tau).re
        })
        .collect()
}

/// `max_j |r(z_j)|`.
pub fn residual_sup_norm(contour: &Contour, omega: f64) -> f64 {
    sup_norm(&boundary_residual(contour, omega))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, r| acc.max(r.abs()))
}

/// Kirchhoff's angular velocity `ab / (a + b)^2` of the ellipse with semi-axes `a`, `b`.
pub fn kirchhoff_omega(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("semi-axes ({a}, {b}) must be positive")));
    }
    Ok(a * b / (a + b).powi(2))
}

/// Angular velocity `(m - 1) / (2m)` at which the `m`-fold branch leaves the disc.
pub fn bifurcation_omega(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("symmetry m = {m} must be at least 2")));
    }
    Ok((m as f64 - 1.0) / (2.0 * m as f64))
}

/// Treatment of the angular velocity in a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum OmegaMode {
    Fixed { omega: f64 },
    /// `Omega` is an unknown; the first cosine is pinned to `amplitude`.
    Free { initial: f64, amplitude: f64 },
}

/// Unknowns and discretization of an `m`-fold V-state solve.
#[derive(Debug, Clone, PartialEq)]
pub struct VStateProblem {
    pub shape: PolarShape,
    pub omega: OmegaMode,
    pub nodes: usize,
}

impl VStateProblem {
    pub fn new(shape: PolarShape, omega: OmegaMode, nodes: usize) -> Result<Self> {
        let j = shape.cosines().len();
        let m = shape.symmetry();
        if j == 0 {
            return Err(Error::Domain("at least one cosine unknown is required".into()));
        }
        if 2 * m * j >= nodes {
            return Err(Error::Domain(format!(
                "{j} harmonics of symmetry {m} alias on {nodes} nodes (need J < N/(2m))"
            )));
        }
        shape.to_contour_unchecked(nodes)?;
        Ok(Self { shape, omega, nodes })
    }

    /// Disc of unit radius perturbed by `amplitude cos(m theta)`, with `harmonics` unknowns.
    pub fn near_disc(
        m: usize,
        harmonics: usize,
        amplitude: f64,
        omega: OmegaMode,
        nodes: usize,
    ) -> Result<Self> {
        let mut cosines = vec![0.0; harmonics];
        if let Some(a) = cosines.first_mut() {
            *a = amplitude;
        }
        Self::new(PolarShape::new(m, 1.0, cosines)?, omega, nodes)
    }

    fn harmonics(&self) -> usize {
        self.shape.cosines().len()
    }

    fn initial_omega(&self) -> f64 {
        match self.omega {
            OmegaMode::Fixed { omega } => omega,
            OmegaMode::Free { initial, .. } => initial,
        }
    }
}

/// Converged (or last) Newton iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VStateSolution {
    pub shape: PolarShape,
    pub omega: f64,
    pub residual_norm: f64,
    pub branch_parameter: f64,
    pub iterations: usize,
}

impl VStateSolution {
    pub fn contour(&self, nodes: usize) -> Result<Contour> {
        self.shape.to_contour(nodes)
    }
}

/// `b_j = (2/N) sum_i r_i sin(j m theta_i)`, `j = 1..count`.
pub fn sine_harmonics(residual: &[f64], m: usize, count: usize) -> Vec<f64> {
    let n = residual.len();
    (1..=count)
        .map(|j| {
            let q = (j * m) as f64;
            2.0 / n as f64
                * residual
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r * (q * TAU * i as f64 / n as f64).sin())
                    .sum::<f64>()
        })
        .collect()
}

/// Maps between the unknown vector and `(shape, Omega)`.
struct Unknowns<'a> {
    problem: &'a VStateProblem,
}

impl Unknowns<'_> {
    fn pack(&self, shape: &PolarShape, omega: f64) -> Vec<f64> {
        match self.problem.omega {
            OmegaMode::Fixed { .. } => shape.cosines().to_vec(),
            OmegaMode::Free { .. } => {
                let mut u: Vec<f64> = shape.cosines()[1..].to_vec();
                u.push(omega);
                u
            }
        }
    }

    fn unpack(&self, u: &[f64]) -> Result<(PolarShape, f64)> {
        let base = &self.problem.shape;
        match self.problem.omega {
            OmegaMode::Fixed { omega } => Ok((
                PolarShape::new(base.symmetry(), base.base_radius(), u.to_vec())?,
                omega,
            )),
            OmegaMode::Free { amplitude, .. } => {
                let mut cosines = vec![amplitude];
                cosines.extend_from_slice(&u[..u.len() - 1]);
                Ok((
                    PolarShape::new(base.symmetry(), base.base_radius(), cosines)?,
                    u[u.len() - 1],
                ))
            }
        }
    }

    /// Harmonic equations and node sup-norm at `u`.
    fn equations(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (shape, omega) = self.unpack(u)?;
        let contour = shape.to_contour_unchecked(self.problem.nodes)?;
        let r = boundary_residual(&contour, omega);
        let eqs = sine_harmonics(&r, shape.symmetry(), self.problem.harmonics());
        Ok((eqs, sup_norm(&r)))
    }

    fn jacobian(&self, u: &[f64], f0: &[f64]) -> Result<DMatrix<f64>> {
        let n = u.len();
        let cols = par::map_range(n, |c| {
            let mut up = u.to_vec();
            up[c] += FD_STEP;
            self.equations(&up)
                .map(|(f, _)| f.iter().zip(f0).map(|(a, b)| (a - b) / FD_STEP).collect::<Vec<_>>())
        });
        let mut jac = DMatrix::zeros(f0.len(), n);
        for (c, col) in cols.into_iter().enumerate() {
            for (r, v) in col?.into_iter().enumerate() {
                jac[(r, c)] = v;
            }
        }
        Ok(jac)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Gauss-Newton on the first `J` sine harmonics of the residual.
/// Converged when the node sup-norm of the residual is at most `tolerance`.
pub fn newton_solve(
    problem: &VStateProblem,
    tolerance: f64,
    max_iter: usize,
) -> Result<VStateSolution> {
    let unknowns = Unknowns { problem };
    let mut u = unknowns.pack(&problem.shape, problem.initial_omega());
    let (mut f, mut sup) = unknowns.equations(&u)?;
    let solution = |u: &[f64], sup: f64, iterations: usize| -> Result<VStateSolution> {
        let (shape, omega) = unknowns.unpack(u)?;
        let branch_parameter = shape.cosines()[0];
        Ok(VStateSolution {
            shape,
            omega,
            residual_norm: sup,
            branch_parameter,
            iterations,
        })
    };
    for iter in 0..=max_iter {
        if sup <= tolerance {
            return solution(&u, sup, iter);
        }
        if iter == max_iter {
            break;
        }
        let jac = unknowns.jacobian(&u, &f)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smax > 0.0) || smin / smax < SINGULAR_RATIO {
            return Err(Error::SingularSystem {
                ratio: if smax > 0.0 { smin / smax } else { 0.0 },
            });
        }
        let rhs = -DVector::from_vec(f.clone());
        let delta = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Domain(format!("Newton solve failed: {e}")))?;
        let norm0 = l2(&f);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            match unknowns.equations(&trial) {
                Ok((ft, st)) if l2(&ft) < norm0 || lambda <= DAMPING_FLOOR => {
                    u = trial;
                    f = ft;
                    sup = st;
                    break;
                }
                Err(e) if lambda <= DAMPING_FLOOR => return Err(e),
                _ => lambda *= 0.5,
            }
        }
    }
    Err(Error::Divergence {
        iterations: max_iter,
        residual: sup,
        last: Box::new(solution(&u, sup, max_iter)?),
    })
}

/// Smallest singular value of the finite-difference Jacobian of the sine
/// harmonics `sin(j m theta)` with respect to the cosines `cos(j m theta)`,
/// `j = 1..J`, at the problem's shape and (fixed or initial) `Omega`.
///
/// At the unit disc the Jacobian is diagonal with entries
/// `-j m (Omega - (jm - 1)/(2jm))`; with `J = 1` it vanishes only at the
/// mode-`m` bifurcation point.
pub fn linearization_smallest_singular_value(problem: &VStateProblem) -> Result<f64> {
    let fixed = VStateProblem {
        omega: OmegaMode::Fixed {
            omega: problem.initial_omega(),
        },
        ..problem.clone()
    };
    let unknowns = Unknowns { problem: &fixed };
    let u = unknowns.pack(&fixed.shape, fixed.initial_omega());
    let (f0, _) = unknowns.equations(&u)?;
    let jac = unknowns.jacobian(&u, &f0)?;
    Ok(jac.singular_values().min())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega: f64,
    pub sigma_min: f64,
}

/// Smallest-singular-value scan over `Omega` from the unit disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub symmetry: usize,
    pub harmonics: usize,
    pub nodes: usize,
    pub samples: Vec<ScanPoint>,
    /// Grid point with the smallest `sigma_min`.
    pub grid_minimum: ScanPoint,
    /// Golden-section refinement between the grid neighbours of the minimum.
    pub refined: ScanPoint,
}

pub fn bifurcation_scan(
    m: usize,
    omegas: &[f64],
    harmonics: usize,
    nodes: usize,
) -> Result<BifurcationScan> {
    if omegas.is_empty() {
        return Err(Error::Domain("empty Omega grid".into()));
    }
    let sigma = |omega: f64| -> Result<f64> {
        let p = VStateProblem::near_disc(m, harmonics, 0.0, OmegaMode::Fixed { omega }, nodes)?;
        linearization_smallest_singular_value(&p)
    };
    let samples = omegas
        .iter()
        .map(|&omega| Ok(ScanPoint { omega, sigma_min: sigma(omega)? }))
        .collect::<Result<Vec<_>>>()?;
    let (imin, grid_minimum) = samples
        .iter()
        .copied()
        .enumerate()
        .fold((0, samples[0]), |acc, (i, s)| if s.sigma_min < acc.1.sigma_min { (i, s) } else { acc });
    let lo = samples[imin.saturating_sub(1)].omega;
    let hi = samples[(imin + 1).min(samples.len() - 1)].omega;
    let refined = if hi > lo {
        let mut err = None;
        let omega = quadrature::golden_section(
            |w| match sigma(w) {
                Ok(s) => s,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            },
            lo.min(hi),
            lo.max(hi),
            1e-9,
        );
        if let Some(e) = err {
            return Err(e);
        }
        ScanPoint {
            omega,
            sigma_min: sigma(omega)?,
        }
    } else {
        grid_minimum
    };
    Ok(BifurcationScan {
        symmetry: m,
        harmonics,
        nodes,
        samples,
        grid_minimum,
        refined,
    })
}

/// Follows the `m`-fold branch by pinning `a_1 = s` for each `s` in
/// `amplitudes`, with `Omega` free. Each step starts from the previous
/// solution; the first from the problem's shape and `Omega` guess.
pub fn continuation(
    problem: &VStateProblem,
    amplitudes: &[f64],
    tolerance: f64,
    max_iter: usize,
) -> Result<Vec<VStateSolution>> {
    let m = problem.shape.symmetry();
    let mut omega_guess = match problem.omega {
        OmegaMode::Free { initial, .. } => initial,
        OmegaMode::Fixed { .. } => bifurcation_omega(m).unwrap_or(problem.initial_omega()),
    };
    let mut shape = problem.shape.clone();
    let mut out: Vec<VStateSolution> = Vec::with_capacity(amplitudes.len());
    for &s in amplitudes {
        let mut cosines = shape.cosines().to_vec();
        cosines[0] = s;
        let step = VStateProblem {
            shape: PolarShape::new(m, shape.base_radius(), cosines)?,
            omega: OmegaMode::Free {
                initial: omega_guess,
                amplitude: s,
            },
            nodes: problem.nodes,
        };
        match newton_solve(&step, tolerance, max_iter) {
            Ok(sol) => {
                omega_guess = sol.omega;
                shape = sol.shape.clone();
                out.push(sol);
            }
            Err(e) => {
                return Err(Error::BranchAborted {
                    partial: out,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

/// Least-squares fit `Omega(s) = Omega_0 + beta s^2` on a branch; returns `Omega_0`.
pub fn extrapolate_branch_omega(branch: &[VStateSolution]) -> Option<f64> {
    if branch.len() < 2 {
        return None;
    }
    let n = branch.len() as f64;
    let xs: Vec<f64> = branch.iter().map(|s| s.branch_parameter.powi(2)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = branch.iter().map(|s| s.omega).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(branch).map(|(x, s)| (x - mx) * (s.omega - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(my - sxy / sxx * mx)
}

/// Standard deviation of `psi - Omega |x|^2 / 2` over the boundary of a solution.
pub fn bernoulli_defect(contour: &Contour, omega: f64) -> f64 {
    bernoulli_boundary_stats(contour, omega).std_dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn disc_residual_vanishes_for_any_omega() {
        let d = Contour::circle(Complex64::new(0.0, 0.0), 1.0, 256).unwrap();
        for omega in [-1.0, 0.0, 0.25, 0.5] {
            assert!(residual_sup_norm(&d, omega) < 1e-12);
        }
    }

    #[test]
    fn kirchhoff_residuals() {
        let e = Contour::ellipse(2.0, 1.0, 256).unwrap();
        assert!(residual_sup_norm(&e, 2.0 / 9.0) < 1e-8);
        assert!(residual_sup_norm(&e, 0.3) > 1e-2);
    }

    #[test]
    fn closed_form_omegas() {
        assert!((kirchhoff_omega(2.0, 1.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((kirchhoff_omega(1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((kirchhoff_omega(3.0, 1.0).unwrap() - 3.0 / 16.0).abs() < 1e-15);
        assert!(kirchhoff_omega(0.0, 1.0).is_err());
        assert_eq!(bifurcation_omega(2).unwrap(), 0.25);
        assert!((bifurcation_omega(3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(bifurcation_omega(4).unwrap(), 0.375);
        assert!(bifurcation_omega(1).is_err());
    }

    #[test]
    fn residual_matches_normal_relative_velocity() {
        let shape = PolarShape::new(3, 1.0, vec![0.07, 0.01]).unwrap();
        let c = shape.to_contour(256).unwrap();
        let omega = 0.3;
        let r = boundary_residual(&c, omega);
        let v = potential::boundary_velocity(&c);
        for (j, (rj, vj)) in r.iter().zip(&v).enumerate() {
            let z = c.nodes()[j];
            let rel = vj - Complex64::new(0.0, omega) * z;
            let normal = crate::geometry::dot(rel, c.node_normal(j));
            assert!((rj - normal).abs() < 1e-10);
        }
    }

    #[test]
    fn disc_linearization_matches_analytic_eigenvalue() {
        // sigma = m |Omega - (m - 1)/(2m)| for a single mode-m unknown.
        for (m, omega) in [(3usize, 0.2), (2, 0.1), (4, 0.45)] {
            let p = VStateProblem::near_disc(m, 1, 0.0, OmegaMode::Fixed { omega }, 256).unwrap();
            let s = linearization_smallest_singular_value(&p).unwrap();
            let expected = m as f64 * (omega - bifurcation_omega(m).unwrap()).abs();
            assert!((s - expected).abs() < 1e-6, "m={m}: {s} vs {expected}");
        }
        let p = VStateProblem::near_disc(3, 1, 0.0, OmegaMode::Fixed { omega: 1.0 / 3.0 }, 256)
            .unwrap();
        assert!(linearization_smallest_singular_value(&p).unwrap() < 1e-5);
    }

    #[test]
    fn aliasing_guard() {
        assert!(VStateProblem::near_disc(3, 50, 0.0, OmegaMode::Fixed { omega: 0.0 }, 256).is_err());
    }
}
