//! A convex body as either an exact polytope or a sampled star body, plus
//! the JSON file format shared with the command-line tool.

use crate::error::{Error, Result};
use crate::polytope::{Moments, PolytopeV};
use crate::sphere::SphereGrid;
use crate::star::StarBody;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polytope(PolytopeV),
    Star(StarBody),
}

impl From<PolytopeV> for ConvexBody {
    fn from(p: PolytopeV) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<StarBody> for ConvexBody {
    fn from(s: StarBody) -> Self {
        ConvexBody::Star(s)
    }
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Star(s) => s.dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.volume(),
            ConvexBody::Star(s) => s.volume(),
        }
    }

    pub fn moments(&self) -> Moments {
        match self {
            ConvexBody::Polytope(p) => p.moments(),
            ConvexBody::Star(s) => s.moments(),
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.moments().centroid()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.support(u),
            ConvexBody::Star(s) => s.support(u),
        }
    }

    /// Gauge with respect to the origin (which must be interior).
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p
                .facets()
                .expect("validated")
                .iter()
                .map(|f| crate::vector::dot(&f.normal, x) / f.offset)
                .fold(0.0, f64::max),
            ConvexBody::Star(s) => s.gauge(x),
        }
    }

    /// Radial function around the origin (which must be interior).
    pub fn radial(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.radial(&vec![0.0; p.dim()], u),
            ConvexBody::Star(s) => s.radial_at(u),
        }
    }

    pub fn contains_origin_strictly(&self) -> bool {
        match self {
            ConvexBody::Polytope(p) => p.depth(&vec![0.0; p.dim()]) > 1e-12 * p.diameter(),
            ConvexBody::Star(_) => true,
        }
    }

    pub fn diameter_bound(&self) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.diameter(),
            ConvexBody::Star(s) => 2.0 * s.radial().iter().fold(0.0f64, |m, r| m.max(*r)),
        }
    }

    /// Sample the radial function around the origin on `grid`.
    pub fn to_star(&self, grid: Arc<SphereGrid>) -> Result<StarBody> {
        match self {
            ConvexBody::Polytope(p) => {
                let o = vec![0.0; p.dim()];
                if p.depth(&o) <= 0.0 {
                    return Err(Error::CenterOutside);
                }
                StarBody::from_fn(grid, |u| p.radial(&o, u))
            }
            ConvexBody::Star(s) if Arc::ptr_eq(s.grid(), &grid) || **s.grid() == *grid => Ok(s.clone()),
            ConvexBody::Star(s) => StarBody::from_fn(grid, |u| s.radial_at(u)),
        }
    }

    pub fn translate(&self, t: &[f64]) -> Result<ConvexBody> {
        match self {
            ConvexBody::Polytope(p) => Ok(p.translate(t)?.into()),
            ConvexBody::Star(s) => {
                let neg: Vec<f64> = t.iter().map(|x| -x).collect();
                Ok(s.recenter(&neg)?.into())
            }
        }
    }

    /// Image under the linear map with matrix rows `t`.
    pub fn linear_image(&self, t: &[Vec<f64>]) -> Result<ConvexBody> {
        match self {
            ConvexBody::Polytope(p) => Ok(p
                .map_vertices(|v| t.iter().map(|row| crate::vector::dot(row, v)).collect())?
                .into()),
            ConvexBody::Star(s) => Ok(s.linear_image(t)?.into()),
        }
    }

    pub fn to_file(&self) -> BodyFile {
        match self {
            ConvexBody::Polytope(p) => BodyFile::PolytopeV {
                dim: p.dim(),
                vertices: p.vertices().to_vec(),
            },
            ConvexBody::Star(s) => BodyFile::Starbody {
                dim: s.dim(),
                grid_size: s.grid().size_parameter(),
                radial: s.radial().to_vec(),
            },
        }
    }
}

/// On-disk body format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BodyFile {
    #[serde(rename = "polytopeV")]
    PolytopeV { dim: usize, vertices: Vec<Vec<f64>> },
    #[serde(rename = "starbody")]
    Starbody { dim: usize, grid_size: usize, radial: Vec<f64> },
}

impl BodyFile {
    pub fn into_body(self) -> Result<ConvexBody> {
        match self {
            BodyFile::PolytopeV { dim, vertices } => {
                if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                }
                Ok(PolytopeV::new(vertices)?.into())
            }
            BodyFile::Starbody { dim, grid_size, radial } => {
                let grid = Arc::new(SphereGrid::new(dim, grid_size)?);
                Ok(StarBody::new(grid, radial)?.into())
            }
        }
    }
}

/// Built-in bodies by name.
pub fn named(name: &str) -> Result<ConvexBody> {
    let ball = |n: usize| -> Result<ConvexBody> {
        Ok(StarBody::ball(Arc::new(SphereGrid::default_for(n)), 1.0)?.into())
    };
    Ok(match name {
        "segment" => PolytopeV::cube(1).into(),
        "square" | "cube2" => PolytopeV::cube(2).into(),
        "cube3" => PolytopeV::cube(3).into(),
        "cube4" => PolytopeV::cube(4).into(),
        "cross2" | "diamond" => PolytopeV::cross_polytope(2).into(),
        "cross3" | "octahedron" => PolytopeV::cross_polytope(3).into(),
        "cross4" => PolytopeV::cross_polytope(4).into(),
        "triangle" => PolytopeV::regular_polygon(3, 1.0, std::f64::consts::FRAC_PI_2)?.into(),
        "hexagon" => PolytopeV::regular_polygon(6, 1.0, 0.0)?.into(),
        "simplex2" => PolytopeV::standard_simplex(2).into(),
        "simplex3" => PolytopeV::standard_simplex(3).into(),
        "ball2" | "disc" => ball(2)?,
        "ball3" => ball(3)?,
        "ball4" => ball(4)?,
        other => return Err(Error::InvalidInput(format!("unknown body name '{other}'"))),
    })
}
