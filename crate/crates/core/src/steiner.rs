//! Steiner symmetrization and the second-moment ellipsoid test.
//!
//! Polytopes in dimension 2 and 3 are symmetrized exactly: the chord-length
//! function is piecewise linear over the overlay of the projected upper and
//! lower boundaries, so its values at projected vertices and projected edge
//! crossings determine the symmetral. Other bodies go through a sampled star
//! body on the same direction grid.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::polar::volume_product;
use crate::polytope::PolytopeV;
use crate::report::{Relation, Report};
use crate::sphere::SphereGrid;
use crate::star::StarBody;
use crate::vector::{self, complement_basis, dot};
use std::sync::Arc;

pub const TAG_STEINER: &str = "steiner-vp";
pub const TAG_ELLIPSOID: &str = "ellipsoid-moment";

pub fn steiner_symmetrize(body: &ConvexBody, u: &[f64]) -> Result<ConvexBody> {
    crate::error::check_dim(body.dim(), u.len())?;
    let u = vector::normalized(u)
        .ok_or_else(|| Error::InvalidInput("symmetrization direction must be nonzero".into()))?;
    match body {
        ConvexBody::Polytope(p) if p.dim() <= 3 => Ok(symmetrize_polytope(p, &u)?.into()),
        ConvexBody::Polytope(p) => {
            let grid = Arc::new(SphereGrid::default_for(p.dim()));
            let s = ConvexBody::Polytope(p.clone()).to_star(grid)?;
            Ok(symmetrize_star(&s, &u)?.into())
        }
        ConvexBody::Star(s) => Ok(symmetrize_star(s, &u)?.into()),
    }
}

fn symmetrize_polytope(p: &PolytopeV, u: &[f64]) -> Result<PolytopeV> {
    let n = p.dim();
    let basis = complement_basis(u);
    let verts = p.vertices();
    let project = |x: &[f64]| -> Vec<f64> { basis.iter().map(|b| dot(b, x)).collect() };
    let mut shadows: Vec<Vec<f64>> = verts.iter().map(|v| project(v)).collect();
    if n == 3 {
        let facets = p.facets()?;
        let mut edges = Vec::new();
        for i in 0..verts.len() {
            for j in 0..i {
                let shared = facets
                    .iter()
                    .filter(|f| f.points.contains(&i) && f.points.contains(&j))
                    .count();
                if shared >= 2 {
                    edges.push((i, j));
                }
            }
        }
        let proj: Vec<Vec<f64>> = shadows.clone();
        for a in 0..edges.len() {
            for b in 0..a {
                if let Some(x) = segment_crossing(
                    &proj[edges[a].0],
                    &proj[edges[a].1],
                    &proj[edges[b].0],
                    &proj[edges[b].1],
                ) {
                    shadows.push(x);
                }
            }
        }
    }
    let lift = |s: &[f64]| -> Vec<f64> { (0..n).map(|k| basis.iter().zip(s).map(|(b, c)| b[k] * c).sum()).collect() };
    let mut out = Vec::with_capacity(2 * shadows.len());
    for (i, s) in shadows.iter().enumerate() {
        let base = lift(s);
        // A vertex lies on its own chord, so its parameter 0 bounds the
        // interval even where rounding makes a tangent line miss.
        let chord = if i < verts.len() {
            let (lo, hi) = p.clip_line(&verts[i], u).unwrap_or((0.0, 0.0));
            Some((lo.min(0.0), hi.max(0.0)))
        } else {
            p.clip_line(&base, u)
        };
        if let Some((lo, hi)) = chord {
            let half = 0.5 * (hi - lo).max(0.0);
            out.push(vector::axpy(&base, half, u));
            out.push(vector::axpy(&base, -half, u));
        }
    }
    PolytopeV::from_points(out)
}

/// Intersection of 2D segments `ab` and `cd` when they cross at one point.
fn segment_crossing(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Option<Vec<f64>> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    let scale = (r[0].abs() + r[1].abs()) * (s[0].abs() + s[1].abs());
    if den.abs() <= 1e-14 * scale {
        return None;
    }
    let q = [c[0] - a[0], c[1] - a[1]];
    let t = (q[0] * s[1] - q[1] * s[0]) / den;
    let v = (q[0] * r[1] - q[1] * r[0]) / den;
    let inside = |x: f64| (-1e-12..=1.0 + 1e-12).contains(&x);
    (inside(t) && inside(v)).then(|| vec![a[0] + t * r[0], a[1] + t * r[1]])
}

/// Length of `{t : q + t u in K}` for a star body `K` whose gauge is convex.
fn chord_length(k: &StarBody, q: &[f64], u: &[f64], reach: f64) -> f64 {
    let g = |t: f64| k.gauge(&vector::axpy(q, t, u));
    let (t0, g0) = crate::optim::golden_min(g, -reach, reach, 1e-13 * reach, 200);
    if g0 > 1.0 {
        return 0.0;
    }
    let f = |t: f64| g(t) - 1.0;
    let lo = crate::optim::bisect(f, -reach, t0, 1e-15 * reach, 200);
    let hi = crate::optim::bisect(f, t0, reach, 1e-15 * reach, 200);
    (hi - lo).max(0.0)
}

fn symmetrize_star(k: &StarBody, u: &[f64]) -> Result<StarBody> {
    let rmax = k.radial().iter().fold(0.0f64, |m, r| m.max(*r));
    let reach = 2.0 * rmax;
    let radial = k
        .grid()
        .nodes()
        .iter()
        .map(|w| {
            let a = dot(w, u).abs();
            let q = vector::axpy(w, -dot(w, u), u);
            let inside = |lam: f64| {
                let l = chord_length(k, &vector::scale(&q, lam), u, reach);
                l > 0.0 && lam * a <= 0.5 * l
            };
            // Membership of lam * w in the symmetral is monotone in lam.
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    StarBody::new(k.grid().clone(), radial)
}

/// Central symmetry within a relative tolerance.
pub fn is_centrally_symmetric(body: &ConvexBody, tol: f64) -> bool {
    match body {
        ConvexBody::Polytope(p) => {
            let scale = p.diameter();
            p.vertices()
                .iter()
                .all(|v| p.contains(&vector::scale(v, -1.0), tol * scale))
        }
        ConvexBody::Star(s) => s.symmetry_defect() <= tol,
    }
}

/// Volume-product monotonicity under one symmetrization of a symmetric body.
pub fn vp_monotonicity(body: &ConvexBody, u: &[f64], tol: f64) -> Result<(ConvexBody, Report)> {
    if !is_centrally_symmetric(body, 1e-9) {
        return Err(Error::HypothesisFail("body is not centrally symmetric".into()));
    }
    let n = body.dim();
    let o = vec![0.0; n];
    let sym = steiner_symmetrize(body, u)?;
    let before = volume_product(body, &o)?;
    let after = volume_product(&sym, &o)?;
    let exact = matches!(sym, ConvexBody::Polytope(_));
    let mut r = Report::new("steiner");
    r.value("volume_before", body.volume())
        .value("volume_after", sym.volume())
        .value("vp_before", before)
        .value("vp_after", after)
        .vector("direction", u)
        .flag("exact", exact);
    r.check("volume_preserved", TAG_STEINER, Relation::Close, sym.volume(), body.volume(), if exact { 1e-9 } else { 1e-3 });
    r.check("vp_nondecreasing", TAG_STEINER, Relation::Ge, after, before, tol);
    Ok((sym, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidTest {
    /// `max_u |h(u)^2 - (n+2)/|K| u^T M u| / h(u)^2`.
    pub defect: f64,
    pub is_ellipsoid: bool,
    /// Second-moment matrix `int_K x x^T dx`.
    pub moment: Vec<Vec<f64>>,
}

/// A centered ellipsoid satisfies `h(u)^2 = (n+2)/|K| * u^T M u` for all `u`.
pub fn ellipsoid_test(body: &ConvexBody) -> Result<EllipsoidTest> {
    let n = body.dim();
    let m = body.moments();
    let c = (n as f64 + 2.0) / m.volume;
    let quad = |u: &[f64]| -> f64 {
        c * (0..n)
            .map(|i| (0..n).map(|j| u[i] * m.second[i][j] * u[j]).sum::<f64>())
            .sum::<f64>()
    };
    let mut defect: f64 = 0.0;
    match body {
        ConvexBody::Star(s) => {
            for (u, h) in s.grid().nodes().iter().zip(s.supports()) {
                defect = defect.max((h * h - quad(u)).abs() / (h * h));
            }
        }
        ConvexBody::Polytope(p) => {
            let g = SphereGrid::new(n, 2000)?;
            for u in g.nodes() {
                let h = p.support(u);
                if h <= 0.0 {
                    return Err(Error::CenterOutside);
                }
                defect = defect.max((h * h - quad(u)).abs() / (h * h));
            }
        }
    }
    Ok(EllipsoidTest { defect, is_ellipsoid: defect <= 1e-2, moment: m.second })
}

pub fn ellipsoid_report(body: &ConvexBody) -> Result<Report> {
    let e = ellipsoid_test(body)?;
    let mut r = Report::new("ellipsoid-test");
    r.value("defect", e.defect).flag("is_ellipsoid", e.is_ellipsoid);
    for (i, row) in e.moment.iter().enumerate() {
        r.vector(&format!("moment_row_{i}"), row);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::named;

    #[test]
    fn square_defect_one_third() {
        let e = ellipsoid_test(&named("square").unwrap()).unwrap();
        assert!((e.defect - 1.0 / 3.0).abs() < 1e-9, "{}", e.defect);
        assert!(!e.is_ellipsoid);
    }

    #[test]
    fn ellipse_is_detected() {
        let g = Arc::new(SphereGrid::new(2, 4096).unwrap());
        let e = StarBody::ellipsoid(g, &[2.0, 0.5]).unwrap();
        let t = ellipsoid_test(&e.into()).unwrap();
        assert!(t.defect < 1e-4, "{}", t.defect);
    }

    #[test]
    fn triangle_symmetral_area() {
        let t: ConvexBody = PolytopeV::standard_simplex(2).into();
        let s = steiner_symmetrize(&t, &[0.0, 1.0]).unwrap();
        assert!((s.volume() - 0.5).abs() < 1e-15);
        // Symmetric about the line x_2 = 0.
        if let ConvexBody::Polytope(p) = &s {
            for v in p.vertices() {
                assert!(p.contains(&[v[0], -v[1]], 1e-12));
            }
        }
    }

    #[test]
    fn repeated_oblique_symmetrals_keep_area() {
        let p = PolytopeV::new(vec![vec![2.0, 0.5], vec![0.5, 1.0], vec![-2.0, -0.5], vec![-0.5, -1.0]]).unwrap();
        let mut b: ConvexBody = p.into();
        for u in [[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]] {
            b = steiner_symmetrize(&b, &u).unwrap();
            assert!((b.volume() - 3.5).abs() < 1e-12, "{}", b.volume());
        }
    }

    #[test]
    fn cube_symmetral_exact_volume() {
        let s = steiner_symmetrize(&named("cube3").unwrap(), &[1.0, 2.0, 3.0]).unwrap();
        assert!((s.volume() - 8.0).abs() < 1e-12, "{}", s.volume());
    }
}
