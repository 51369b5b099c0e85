//! Star bodies given by radial samples on a sphere grid. The boundary is the
//! piecewise-linear surface through the samples `r_i u_i`.

use crate::error::{Error, Result};
use crate::sphere::SphereGrid;
use crate::vector::{self, cross, dot, sub, unit_ball_volume};
use rand::Rng;
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone)]
pub struct StarBody {
    grid: Arc<SphereGrid>,
    radial: Vec<f64>,
    diag: Vec<bool>,
    supports: OnceLock<Vec<f64>>,
}

impl PartialEq for StarBody {
    fn eq(&self, o: &Self) -> bool {
        self.grid == o.grid && self.radial == o.radial
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub convex: bool,
    /// Largest gauge seen at a chord point; at most `1 + 1e-6` when convex.
    pub worst_gauge: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub chords_tested: usize,
}

impl StarBody {
    pub fn new(grid: Arc<SphereGrid>, radial: Vec<f64>) -> Result<Self> {
        if radial.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "radial table has {} entries for a grid of {}",
                radial.len(),
                grid.len()
            )));
        }
        if let Some(i) = radial.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::DegenerateBody(format!(
                "radial function must be positive and finite (node {i}: {})",
                radial[i]
            )));
        }
        let mut body = StarBody { grid, radial, diag: Vec::new(), supports: OnceLock::new() };
        body.diag = body.fold_diagonals();
        Ok(body)
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<SphereGrid>, f: F) -> Result<Self> {
        let radial = grid.nodes().iter().map(|u| f(u)).collect();
        StarBody::new(grid, radial)
    }

    pub fn ball(grid: Arc<SphereGrid>, r: f64) -> Result<Self> {
        StarBody::from_fn(grid, |_| r)
    }

    /// Centered ellipsoid `{x : sum (x_k / a_k)^2 <= 1}`.
    pub fn ellipsoid(grid: Arc<SphereGrid>, semi_axes: &[f64]) -> Result<Self> {
        crate::error::check_dim(grid.dim(), semi_axes.len())?;
        StarBody::from_fn(grid, |u| {
            1.0 / u
                .iter()
                .zip(semi_axes)
                .map(|(x, a)| (x / a) * (x / a))
                .sum::<f64>()
                .sqrt()
        })
    }

    fn fold_diagonals(&self) -> Vec<bool> {
        let g = &self.grid;
        (0..g.cell_count())
            .map(|c| {
                let [a, b, cc, d] = g.cell_corners(c).map(|i| self.boundary_point(i));
                let nrm = cross(&[sub(&b, &a), sub(&cc, &a)], 3);
                let s = dot(&nrm, &a).signum();
                // Split along 00-11 unless corner 01 pokes out of plane(00,10,11).
                s * (dot(&nrm, &d) - dot(&nrm, &a)) > 0.0
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn boundary_point(&self, i: usize) -> Vec<f64> {
        vector::scale(self.grid.node(i), self.radial[i])
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim() as i32;
        unit_ball_volume(self.dim())
            * self
                .radial
                .iter()
                .zip(self.grid.weights())
                .map(|(r, w)| w * r.powi(n))
                .sum::<f64>()
    }

    pub fn moments(&self) -> crate::polytope::Moments {
        let n = self.dim();
        let c = n as f64 * unit_ball_volume(n);
        let mut first = vec![0.0; n];
        let mut second = vec![vec![0.0; n]; n];
        for ((u, r), w) in self.grid.nodes().iter().zip(&self.radial).zip(self.grid.weights()) {
            let a = c * w * r.powi(n as i32 + 1) / (n + 1) as f64;
            let b = c * w * r.powi(n as i32 + 2) / (n + 2) as f64;
            for i in 0..n {
                first[i] += a * u[i];
                for j in 0..n {
                    second[i][j] += b * u[i] * u[j];
                }
            }
        }
        crate::polytope::Moments { volume: self.volume(), first, second }
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.moments().centroid()
    }

    /// Minkowski gauge of the interpolated body.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        if n == 1 {
            return if x[0] >= 0.0 { x[0] / self.radial[0] } else { -x[0] / self.radial[1] };
        }
        if x.iter().all(|t| *t == 0.0) {
            return 0.0;
        }
        let s = self.grid.simplex(x, &self.diag);
        let pts: Vec<Vec<f64>> = s.iter().map(|&i| self.boundary_point(i)).collect();
        let span: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
        let nrm = cross(&span, n);
        dot(&nrm, x) / dot(&nrm, &pts[0])
    }

    /// Radial function of the interpolated body in direction `u`.
    pub fn radial_at(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.radial)
            .map(|(v, r)| r * dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Support values at every grid node (cached).
    pub fn supports(&self) -> &[f64] {
        self.supports.get_or_init(|| {
            let pts: Vec<Vec<f64>> = (0..self.radial.len()).map(|i| self.boundary_point(i)).collect();
            self.grid
                .nodes()
                .iter()
                .map(|u| pts.iter().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max))
                .collect()
        })
    }

    /// `(K - z)^\circ` sampled on the same grid.
    pub fn polar(&self, z: &[f64]) -> Result<StarBody> {
        crate::error::check_dim(self.dim(), z.len())?;
        if self.gauge(z) >= 1.0 {
            return Err(Error::CenterOutside);
        }
        let h = self.supports();
        let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let radial: Result<Vec<f64>> = self
            .grid
            .nodes()
            .iter()
            .zip(h)
            .map(|(u, hv)| {
                let d = hv - dot(z, u);
                if d > 1e-12 * scale {
                    Ok(1.0 / d)
                } else {
                    Err(Error::CenterOutside)
                }
            })
            .collect();
        StarBody::new(self.grid.clone(), radial?)
    }

    /// The same body with radial function taken from the new origin `c`.
    pub fn recenter(&self, c: &[f64]) -> Result<StarBody> {
        crate::error::check_dim(self.dim(), c.len())?;
        if self.gauge(c) >= 1.0 {
            return Err(Error::CenterOutside);
        }
        let rmax = self.radial.iter().fold(0.0f64, |m, r| m.max(*r));
        let reach = 2.0 * (rmax + vector::norm(c));
        let radial = self
            .grid
            .nodes()
            .iter()
            .map(|u| {
                crate::optim::bisect(
                    |t| self.gauge(&vector::axpy(c, t, u)) - 1.0,
                    0.0,
                    reach,
                    1e-15 * reach,
                    200,
                )
            })
            .collect();
        StarBody::new(self.grid.clone(), radial)
    }

    /// Image under the invertible linear map with matrix `t` (rows).
    pub fn linear_image(&self, t: &[Vec<f64>]) -> Result<StarBody> {
        let n = self.dim();
        let inv = invert(t, n)?;
        StarBody::from_fn(self.grid.clone(), |u| {
            let v: Vec<f64> = inv.iter().map(|row| dot(row, u)).collect();
            1.0 / self.gauge(&v)
        })
    }

    /// Largest relative gap `|r(u) - r(-u)| / r(u)` over the grid.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.grid.nodes().iter().enumerate() {
            let neg = vector::scale(u, -1.0);
            let g = self.gauge(&vector::scale(&neg, self.radial[i]));
            worst = worst.max((g - 1.0).abs());
        }
        worst
    }

    /// Sampled convexity test: points on chords between boundary samples must
    /// have gauge at most `1 + 1e-6`.
    pub fn certify_convex(&self, samples: usize, seed: u64) -> ConvexityCertificate {
        let n = self.dim();
        let len = self.radial.len();
        let mut cert = ConvexityCertificate {
            convex: true,
            worst_gauge: 0.0,
            witness: None,
            chords_tested: 0,
        };
        if n == 1 {
            return cert;
        }
        let test = |a: &[f64], b: &[f64], lam: f64, cert: &mut ConvexityCertificate| {
            let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
            let g = self.gauge(&p);
            cert.chords_tested += 1;
            if g > cert.worst_gauge {
                cert.worst_gauge = g;
                if g > 1.0 + 1e-6 {
                    cert.convex = false;
                    cert.witness = Some((a.to_vec(), b.to_vec()));
                }
            }
        };
        if n == 2 {
            for i in 0..len {
                let a = self.boundary_point((i + len - 1) % len);
                let b = self.boundary_point((i + 1) % len);
                test(&a, &b, 0.5, &mut cert);
            }
        }
        let mut rng = crate::rng::stream(seed, 0);
        let spacing = (4.0 * std::f64::consts::PI / len as f64).powf(1.0 / (n - 1) as f64);
        for k in 0..samples {
            let i = rng.gen_range(0..len);
            let a = self.boundary_point(i);
            let j = if k % 2 == 0 {
                rng.gen_range(0..len)
            } else {
                // Nearby partner: perturb the direction by a few cell widths.
                let width = spacing * (1 << rng.gen_range(0..4)) as f64;
                let d = crate::rng::unit_vector(&mut rng, n);
                let q = vector::axpy(self.grid.node(i), width, &d);
                self.grid.nearest(&q)
            };
            if i == j {
                continue;
            }
            let b = self.boundary_point(j);
            let lam: f64 = rng.gen_range(0.05..0.95);
            test(&a, &b, lam, &mut cert);
        }
        cert
    }
}

/// Inverse of a small square matrix.
pub fn invert(t: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    if t.len() != n || t.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: t.len() });
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| t[i][j]);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("linear map is singular".into()))?;
    Ok((0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::PolytopeV;

    fn square_star(size: usize) -> StarBody {
        let sq = PolytopeV::cube(2);
        let g = Arc::new(SphereGrid::new(2, size).unwrap());
        StarBody::from_fn(g, |u| sq.radial(&[0.0, 0.0], u)).unwrap()
    }

    #[test]
    fn square_gauge_is_exact() {
        let s = square_star(64);
        for x in [[0.3f64, 0.9], [-1.0, 0.2], [0.5, -0.5], [2.0, 1.0]] {
            let exact = x[0].abs().max(x[1].abs());
            assert!((s.gauge(&x) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn square_polar_volume() {
        let s = square_star(4096);
        let p = s.polar(&[0.0, 0.0]).unwrap();
        assert!((p.volume() - 2.0).abs() < 2e-3);
        assert!((s.volume() - 4.0).abs() < 2e-3);
    }

    #[test]
    fn cube_supports_exact() {
        let c = PolytopeV::cube(3);
        let g = Arc::new(SphereGrid::new(3, 2000).unwrap());
        let s = StarBody::from_fn(g.clone(), |u| c.radial(&[0.0; 3], u)).unwrap();
        for (u, h) in g.nodes().iter().zip(s.supports()).step_by(11) {
            let exact: f64 = u.iter().map(|x| x.abs()).sum();
            assert!((h - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn convexity_certificate() {
        let g = Arc::new(SphereGrid::new(2, 1024).unwrap());
        let ball = StarBody::ball(g.clone(), 1.0).unwrap();
        assert!(ball.certify_convex(2000, 1).convex);
        // Union of two discs: not convex.
        let two = StarBody::from_fn(g, |u| {
            let t = u[0].abs();
            // Ray from the waist point through two unit discs centred at (+-0.9, 0).
            let b = 0.9 * t;
            b + (b * b - 0.81 + 1.0).sqrt()
        })
        .unwrap();
        let c = two.certify_convex(2000, 1);
        assert!(!c.convex);
        assert!(c.witness.is_some());
    }

    #[test]
    fn recenter_preserves_shape() {
        let s = square_star(512);
        let t = s.recenter(&[0.25, -0.5]).unwrap();
        // Boundary point of the shifted body must lie on the original boundary.
        for i in (0..t.radial().len()).step_by(37) {
            let p = vector::add(&t.boundary_point(i), &[0.25, -0.5]);
            assert!((p[0].abs().max(p[1].abs()) - 1.0).abs() < 1e-12);
        }
    }
}
