//! Sampled membership test for the class `Sigma_alpha` of slightly convex
//! domains.
//!
//! The three conditions quantify over every boundary point and every point of
//! the domain; here they are evaluated on the contour nodes and a
//! quasi-uniform interior grid. A pass is evidence at the reported resolution,
//! not a certificate.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Contour, MembershipTester, ReflectionFrame};
use crate::{par, Point};

/// Default number of interior samples.
pub const DEFAULT_INTERIOR_SAMPLES: usize = 10_000;
/// Fraction of excluded reflections above which condition 3 is flagged.
pub const EXCLUSION_FLAG_FRACTION: f64 = 0.01;

/// Exterior sector `{x : cos(alpha) <= (x - x0)/|x - x0| . nu(x0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub alpha: f64,
    pub threshold: f64,
}

impl SectorSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::Domain(format!("sector angle {alpha} outside [0, pi/2]")));
        }
        Ok(Self {
            alpha,
            threshold: alpha.cos(),
        })
    }

    /// `alpha = arccos(1/sqrt(5))`.
    pub fn critical() -> Self {
        let threshold = 1.0 / 5f64.sqrt();
        Self {
            alpha: threshold.acos(),
            threshold,
        }
    }
}

/// `min_{x0} x0 . nu(x0)` with the barycenter at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition1 {
    pub pass: bool,
    pub min_support: f64,
    pub argmin: Point,
}

/// `max_{x0, y} (y - x0)/|y - x0| . nu(x0)` over interior samples `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition2 {
    pub pass: bool,
    pub max_dot: f64,
    pub threshold: f64,
    pub boundary_point: Point,
    pub sample: Point,
}

/// Reflections across tangent lines of the samples above them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition3 {
    pub pass: bool,
    pub outside_count: usize,
    pub tested: usize,
    pub excluded: usize,
    pub exclusion_flag: bool,
    pub worst: Option<ReflectionWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionWitness {
    pub boundary_point: Point,
    pub sample: Point,
    pub image: Point,
    /// Distance from the image to the boundary.
    pub exit_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub alpha: f64,
    pub threshold: f64,
    pub tol_geom: f64,
    pub boundary_nodes: usize,
    pub interior_samples: usize,
    pub condition1: Condition1,
    pub condition2: Condition2,
    pub condition3: Condition3,
    pub verdict: bool,
    /// `arccos(max_dot)` when conditions 1 and 3 pass: the largest sampled
    /// `alpha` for which condition 2 still holds. An estimate, not a bound.
    pub max_alpha_estimate: Option<f64>,
}

/// `1e-9 * diameter`.
pub fn tol_geom(contour: &Contour) -> f64 {
    1e-9 * contour.diameter()
}

/// Bounding-box grid with about `target` points inside the contour.
pub fn interior_samples(contour: &Contour, target: usize) -> Result<Vec<Point>> {
    let target = target.max(1);
    let area = contour.signed_area();
    let h = (area / target as f64).sqrt();
    let nodes = contour.nodes();
    let (mut lo, mut hi) = (nodes[0], nodes[0]);
    for z in nodes {
        lo = Point::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Point::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let nx = ((hi.re - lo.re) / h).ceil() as usize;
    let ny = ((hi.im - lo.im) / h).ceil() as usize;
    let tester = MembershipTester::new(contour, None);
    let rows = par::map_range(ny, |j| {
        (0..nx)
            .filter_map(|i| {
                let x = Point::new(
                    lo.re + (i as f64 + 0.5) * (hi.re - lo.re) / nx as f64,
                    lo.im + (j as f64 + 0.5) * (hi.im - lo.im) / ny as f64,
                );
                matches!(tester.contains(x), Ok(true)).then_some(x)
            })
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}

/// Condition 1 on the recentered contour.
pub fn check_condition1(contour: &Contour) -> Condition1 {
    let c = contour.recentered();
    let tol = tol_geom(&c);
    let (min_support, argmin) = (0..c.node_count())
        .map(|j| (dot(c.nodes()[j], c.node_normal(j)), c.nodes()[j]))
        .fold((f64::INFINITY, Point::new(0.0, 0.0)), |acc, v| if v.0 < acc.0 { v } else { acc });
    Condition1 {
        pass: min_support >= -tol,
        min_support,
        argmin,
    }
}

pub fn check_condition2(contour: &Contour, sector: SectorSpec, samples: &[Point]) -> Condition2 {
    let tol = tol_geom(contour);
    let per_node = par::map_range(contour.node_count(), |j| {
        let x0 = contour.nodes()[j];
        let nu = contour.node_normal(j);
        samples
            .iter()
            .map(|&y| {
                let d = y - x0;
                (dot(d, nu) / d.norm(), y)
            })
            .fold((f64::NEG_INFINITY, x0), |acc, v| if v.0 > acc.0 { v } else { acc })
    });
    let (j, (max_dot, sample)) = per_node
        .into_iter()
        .enumerate()
        .fold((0, (f64::NEG_INFINITY, Point::new(0.0, 0.0))), |acc, v| {
            if v.1 .0 > acc.1 .0 {
                v
            } else {
                acc
            }
        });
    Condition2 {
        pass: max_dot < sector.threshold - tol,
        max_dot,
        threshold: sector.threshold,
        boundary_point: contour.nodes()[j],
        sample,
    }
}

pub fn check_condition3(contour: &Contour, samples: &[Point]) -> Condition3 {
    let tester = MembershipTester::new(contour, Some(tol_geom(contour)));
    let per_node = par::map_range(contour.node_count(), |j| {
        let frame = ReflectionFrame::at_node(contour, j);
        let mut tested = 0;
        let mut excluded = 0;
        let mut outside = 0;
        let mut worst: Option<ReflectionWitness> = None;
        for &y in samples {
            if frame.height(y) < 0.0 {
                continue;
            }
            tested += 1;
            let image = frame.reflect(y);
            match tester.contains(image) {
                Ok(true) => {}
                Ok(false) => {
                    outside += 1;
                    let exit_distance = contour.nearest_boundary_point(image).2;
                    if worst.is_none_or(|w| exit_distance > w.exit_distance) {
                        worst = Some(ReflectionWitness {
                            boundary_point: frame.base_point(),
                            sample: y,
                            image,
                            exit_distance,
                        });
                    }
                }
                Err(_) => excluded += 1,
            }
        }
        (tested, excluded, outside, worst)
    });
    let mut c = Condition3 {
        pass: true,
        outside_count: 0,
        tested: 0,
        excluded: 0,
        exclusion_flag: false,
        worst: None,
    };
    for (tested, excluded, outside, worst) in per_node {
        c.tested += tested;
        c.excluded += excluded;
        c.outside_count += outside;
        if let Some(w) = worst {
            if c.worst.is_none_or(|cw| w.exit_distance > cw.exit_distance) {
                c.worst = Some(w);
            }
        }
    }
    c.pass = c.outside_count == 0;
    c.exclusion_flag = c.excluded as f64 > EXCLUSION_FLAG_FRACTION * c.tested as f64;
    c
}

/// Runs the three conditions on the recentered contour with `samples`
/// interior grid points.
pub fn classify(contour: &Contour, alpha: f64, samples: usize) -> Result<SigmaReport> {
    let sector = SectorSpec::new(alpha)?;
    let c = contour.recentered();
    let interior = interior_samples(&c, samples)?;
    let condition1 = check_condition1(&c);
    let condition2 = check_condition2(&c, sector, &interior);
    let condition3 = check_condition3(&c, &interior);
    let verdict = condition1.pass && condition2.pass && condition3.pass;
    let max_alpha_estimate = (condition1.pass && condition3.pass && condition2.max_dot < 1.0)
        .then(|| condition2.max_dot.max(0.0).acos());
    Ok(SigmaReport {
        alpha,
        threshold: sector.threshold,
        tol_geom: tol_geom(&c),
        boundary_nodes: c.node_count(),
        interior_samples: interior.len(),
        condition1,
        condition2,
        condition3,
        verdict,
        max_alpha_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolarShape;

    fn peanut(n: usize) -> Contour {
        PolarShape::new(2, 1.0, vec![0.6]).unwrap().to_contour(n).unwrap()
    }

    #[test]
    fn sector_spec() {
        let s = SectorSpec::critical();
        assert!((s.threshold - 0.4472135955).abs() < 1e-10);
        assert!((SectorSpec::new(s.alpha).unwrap().threshold - s.threshold).abs() < 1e-15);
        assert!(SectorSpec::new(2.0).is_err());
    }

    #[test]
    fn disc_condition1_and_vacuous_condition3() {
        let d = Contour::circle(Point::new(0.3, -0.1), 1.0, 128).unwrap();
        let c1 = check_condition1(&d);
        assert!(c1.pass && (c1.min_support - 1.0).abs() < 1e-12);
        let s = interior_samples(&d.recentered(), 2000).unwrap();
        let c3 = check_condition3(&d.recentered(), &s);
        assert!(c3.pass && c3.tested == 0);
    }

    #[test]
    fn ellipse_passes_convex_class() {
        let e = Contour::ellipse(2.0, 1.0, 128).unwrap();
        let r = classify(&e, FRAC_PI_2, 2000).unwrap();
        assert!(r.verdict, "{r:?}");
        assert!(r.condition1.min_support > 0.0);
    }

    #[test]
    fn peanut_fails_sector_and_reflection() {
        let r = classify(&peanut(128), SectorSpec::critical().alpha, 3000).unwrap();
        assert!(!r.verdict);
        assert!(r.condition1.pass);
        assert!(!r.condition2.pass && r.condition2.max_dot > r.threshold);
        assert!(!r.condition3.pass);
        let w = r.condition3.worst.unwrap();
        assert!(w.exit_distance > r.tol_geom);
    }
}
