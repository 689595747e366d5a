//! Contour JSON: complex Fourier coefficients, `m`-fold polar series, or a
//! closed polyline converted by least-squares Fourier fit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Contour, PolarShape};
use crate::{Complex64, Point};

pub const DEFAULT_NODES: usize = 256;

fn default_nodes() -> usize {
    DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContourSpec {
    ComplexFourier {
        coefficients: Vec<[f64; 2]>,
        k_min: i64,
        k_max: i64,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    PolarFourier {
        symmetry: usize,
        base_radius: f64,
        cosines: Vec<f64>,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    Polyline {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        harmonics: Option<usize>,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

impl ContourSpec {
    pub fn from_contour(contour: &Contour) -> Self {
        ContourSpec::ComplexFourier {
            coefficients: contour.coefficients().iter().map(|c| [c.re, c.im]).collect(),
            k_min: contour.k_min(),
            k_max: contour.k_max(),
            nodes: contour.node_count(),
        }
    }

    pub fn from_polar(shape: &PolarShape, nodes: usize) -> Self {
        ContourSpec::PolarFourier {
            symmetry: shape.symmetry(),
            base_radius: shape.base_radius(),
            cosines: shape.cosines().to_vec(),
            nodes,
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            ContourSpec::ComplexFourier { nodes, .. }
            | ContourSpec::PolarFourier { nodes, .. }
            | ContourSpec::Polyline { nodes, .. } => *nodes,
        }
    }

    /// Same geometry sampled on `nodes` points.
    pub fn with_nodes(mut self, n: usize) -> Self {
        match &mut self {
            ContourSpec::ComplexFourier { nodes, .. }
            | ContourSpec::PolarFourier { nodes, .. }
            | ContourSpec::Polyline { nodes, .. } => *nodes = n,
        }
        self
    }

    pub fn polar_shape(&self) -> Option<Result<PolarShape>> {
        match self {
            ContourSpec::PolarFourier {
                symmetry,
                base_radius,
                cosines,
                ..
            } => Some(PolarShape::new(*symmetry, *base_radius, cosines.clone())),
            _ => None,
        }
    }

    pub fn to_contour(&self) -> Result<Contour> {
        match self {
            ContourSpec::ComplexFourier {
                coefficients,
                k_min,
                k_max,
                nodes,
            } => {
                if *k_max - *k_min + 1 != coefficients.len() as i64 {
                    return Err(Error::InvalidContour(format!(
                        "k_min..k_max = {k_min}..{k_max} does not match {} coefficients",
                        coefficients.len()
                    )));
                }
                let coeffs = coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                Contour::new(*k_min, coeffs, *nodes)
            }
            ContourSpec::PolarFourier { nodes, .. } => {
                self.polar_shape().expect("polar variant")?.to_contour(*nodes)
            }
            ContourSpec::Polyline {
                points,
                harmonics,
                nodes,
            } => {
                let pts: Vec<Point> = points.iter().map(|p| Point::new(p[0], p[1])).collect();
                let h = harmonics.unwrap_or_else(|| {
                    (pts.len().saturating_sub(1) / 2).min(nodes / 2 - 1).min(64)
                });
                Contour::fit_polyline(&pts, h, *nodes)
            }
        }
    }
}

pub fn parse_contour(text: &str) -> Result<ContourSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_contour(path: &Path) -> Result<ContourSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    parse_contour(&text)
}
