//! V-represented convex polytopes with exact facet structure.
//!
//! Volumes and moments come from a cone decomposition: each facet is split
//! recursively into simplices and coned to the vertex mean. Simplex
//! determinants are accumulated before the single division by `n!`, so
//! polytopes with small integer coordinates get exactly rounded volumes.

use crate::error::{Error, Result};
use crate::vector::{self, complement_basis, cross, det, dot, sub};
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Unit outward normal.
    pub normal: Vec<f64>,
    /// `normal . x <= offset` on the polytope.
    pub offset: f64,
    /// Indices of all points lying on the facet hyperplane.
    pub points: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PolytopeV {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: OnceLock<Vec<Facet>>,
}

impl PartialEq for PolytopeV {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.vertices == o.vertices
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub volume: f64,
    /// Integral of `x` over the body.
    pub first: Vec<f64>,
    /// Integral of `x x^T` over the body.
    pub second: Vec<Vec<f64>>,
}

impl Moments {
    pub fn centroid(&self) -> Vec<f64> {
        vector::scale(&self.first, 1.0 / self.volume)
    }
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| vector::max_abs(p)).fold(0.0, f64::max).max(1e-300)
}

/// Number of affinely independent points among `points` (affine rank + 1).
pub fn affine_rank(points: &[Vec<f64>], tol: f64) -> usize {
    if points.is_empty() {
        return 0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut v = sub(p, &points[0]);
        for b in &basis {
            let t = dot(&v, b);
            v = vector::axpy(&v, -t, b);
        }
        let l = vector::norm(&v);
        if l > tol {
            basis.push(vector::scale(&v, 1.0 / l));
        }
    }
    basis.len() + 1
}

/// Facets of the convex hull of full-dimensional `points` in R^k.
pub fn hull_facets(points: &[Vec<f64>], k: usize) -> Result<Vec<Facet>> {
    let eps = 1e-9 * scale_of(points);
    if points.len() < k + 1 || affine_rank(points, eps) < k + 1 {
        return Err(Error::DegenerateBody(format!(
            "points do not span {k} dimensions"
        )));
    }
    match k {
        1 => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in points {
                lo = lo.min(p[0]);
                hi = hi.max(p[0]);
            }
            let on = |t: f64| -> Vec<usize> {
                (0..points.len()).filter(|&i| (points[i][0] - t).abs() <= eps).collect()
            };
            Ok(vec![
                Facet { normal: vec![-1.0], offset: -lo, points: on(lo) },
                Facet { normal: vec![1.0], offset: hi, points: on(hi) },
            ])
        }
        2 => {
            let ring = monotone_chain(points, eps);
            let mut out = Vec::with_capacity(ring.len());
            for i in 0..ring.len() {
                let a = &points[ring[i]];
                let b = &points[ring[(i + 1) % ring.len()]];
                let e = sub(b, a);
                let l = vector::norm(&e);
                let normal = vec![e[1] / l, -e[0] / l];
                let offset = dot(&normal, a);
                let on = (0..points.len())
                    .filter(|&j| (dot(&normal, &points[j]) - offset).abs() <= eps)
                    .collect();
                out.push(Facet { normal, offset, points: on });
            }
            Ok(out)
        }
        _ => Ok(brute_force_facets(points, k, eps)),
    }
}

/// Counter-clockwise hull ring without collinear points.
pub fn monotone_chain(points: &[Vec<f64>], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
    });
    let turn = |o: usize, a: usize, b: usize| -> f64 {
        let (o, a, b) = (&points[o], &points[a], &points[b]);
        let c = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        let l = vector::dist(a, o).max(vector::dist(b, o)).max(1e-300);
        c / l
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn brute_force_facets(points: &[Vec<f64>], k: usize, eps: f64) -> Vec<Facet> {
    let m = points.len();
    let mut facets: Vec<Facet> = Vec::new();
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        let base = &points[comb[0]];
        let span: Vec<Vec<f64>> = comb[1..].iter().map(|&i| sub(&points[i], base)).collect();
        let nrm = cross(&span, k);
        let l = vector::norm(&nrm);
        let spread = span.iter().map(|v| vector::norm(v)).fold(0.0, f64::max);
        if l > 1e-12 * spread.powi(k as i32 - 1) && l > 0.0 {
            let normal = vector::scale(&nrm, 1.0 / l);
            let offset = dot(&normal, base);
            let known = facets.iter().any(|f| {
                (dot(&f.normal, &normal).abs() > 1.0 - 1e-12)
                    && (f.offset - offset * dot(&f.normal, &normal).signum()).abs() <= eps
            });
            if !known {
                let (mut above, mut below) = (false, false);
                for p in points {
                    let s = dot(&normal, p) - offset;
                    if s > eps {
                        above = true;
                    } else if s < -eps {
                        below = true;
                    }
                    if above && below {
                        break;
                    }
                }
                if !(above && below) {
                    let sign = if above { -1.0 } else { 1.0 };
                    let normal = vector::scale(&normal, sign);
                    let offset = sign * offset;
                    let on = (0..m)
                        .filter(|&j| (dot(&normal, &points[j]) - offset).abs() <= eps)
                        .collect();
                    facets.push(Facet { normal, offset, points: on });
                }
            }
        }
        // Next k-combination of 0..m.
        let mut i = k;
        loop {
            if i == 0 {
                return facets;
            }
            i -= 1;
            if comb[i] < m - k + i {
                comb[i] += 1;
                for j in i + 1..k {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Split the hull of `ambient` points (whose coordinates inside their
/// `k`-dimensional affine span are `local`) into `k`-simplices.
fn decompose(ambient: &[Vec<f64>], local: &[Vec<f64>], k: usize, out: &mut Vec<Vec<Vec<f64>>>) {
    if ambient.len() == k + 1 {
        out.push(ambient.to_vec());
        return;
    }
    if k == 1 {
        let lo = (0..local.len()).min_by(|&i, &j| local[i][0].total_cmp(&local[j][0])).unwrap();
        let hi = (0..local.len()).max_by(|&i, &j| local[i][0].total_cmp(&local[j][0])).unwrap();
        out.push(vec![ambient[lo].clone(), ambient[hi].clone()]);
        return;
    }
    let facets = match hull_facets(local, k) {
        Ok(f) => f,
        Err(_) => return,
    };
    let apex = mean(ambient);
    decompose_facets(ambient, local, &facets, &apex, k, out);
}

fn decompose_facets(
    ambient: &[Vec<f64>],
    local: &[Vec<f64>],
    facets: &[Facet],
    apex: &[f64],
    k: usize,
    out: &mut Vec<Vec<Vec<f64>>>,
) {
    for f in facets {
        let sub_amb: Vec<Vec<f64>> = f.points.iter().map(|&i| ambient[i].clone()).collect();
        let basis = complement_basis(&f.normal);
        let sub_loc: Vec<Vec<f64>> = f
            .points
            .iter()
            .map(|&i| basis.iter().map(|b| dot(b, &local[i])).collect())
            .collect();
        let mut pieces = Vec::new();
        decompose(&sub_amb, &sub_loc, k - 1, &mut pieces);
        for mut s in pieces {
            s.push(apex.to_vec());
            out.push(s);
        }
    }
}

fn mean(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for p in points {
        for k in 0..n {
            c[k] += p[k];
        }
    }
    vector::scale(&c, 1.0 / points.len() as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Volume and moments of a union of `n`-simplices with disjoint interiors.
pub fn simplex_moments(simplices: &[Vec<Vec<f64>>], n: usize) -> Moments {
    let mut dsum = 0.0;
    let mut first = vec![0.0; n];
    let mut second = vec![vec![0.0; n]; n];
    let mut rows = vec![vec![0.0; n]; n];
    for s in simplices {
        for i in 0..n {
            for k in 0..n {
                rows[i][k] = s[i + 1][k] - s[0][k];
            }
        }
        let d = det(&rows).abs();
        dsum += d;
        let mut tot = vec![0.0; n];
        for v in s {
            for k in 0..n {
                tot[k] += v[k];
            }
        }
        for k in 0..n {
            first[k] += d * tot[k] / (n + 1) as f64;
        }
        let c = d / ((n + 1) * (n + 2)) as f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = tot[i] * tot[j];
                for v in s {
                    acc += v[i] * v[j];
                }
                second[i][j] += c * acc;
            }
        }
    }
    let nf = factorial(n);
    Moments {
        volume: dsum / nf,
        first: first.iter().map(|x| x / nf).collect(),
        second: second
            .iter()
            .map(|r| r.iter().map(|x| x / nf).collect())
            .collect(),
    }
}

impl PolytopeV {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidInput("polytope needs vertices".into()));
        }
        for v in &vertices {
            crate::error::check_dim(dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite vertex coordinate".into()));
            }
        }
        let eps = 1e-12 * scale_of(&vertices);
        for i in 0..vertices.len() {
            for j in 0..i {
                if vector::dist(&vertices[i], &vertices[j]) <= eps {
                    return Err(Error::InvalidInput(format!("duplicate vertices {j} and {i}")));
                }
            }
        }
        let p = PolytopeV { dim, vertices, facets: OnceLock::new() };
        p.facets()?;
        Ok(p)
    }

    /// Keep only extreme points, dropping near-duplicates first.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidInput("polytope needs points".into()));
        }
        let eps = 1e-11 * scale_of(&points);
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !uniq.iter().any(|q| vector::dist(q, &p) <= eps) {
                uniq.push(p);
            }
        }
        let facets = hull_facets(&uniq, dim)?;
        let mut keep = vec![false; uniq.len()];
        if dim == 2 {
            for i in monotone_chain(&uniq, 1e-9 * scale_of(&uniq)) {
                keep[i] = true;
            }
        } else {
            for (i, k) in keep.iter_mut().enumerate() {
                let inc: Vec<&Facet> = facets.iter().filter(|f| f.points.contains(&i)).collect();
                if inc.len() >= dim {
                    let normals: Vec<Vec<f64>> = inc.iter().map(|f| f.normal.clone()).collect();
                    let mut with0 = normals.clone();
                    with0.push(vec![0.0; dim]);
                    *k = affine_rank(&with0, 1e-9) > dim;
                }
            }
        }
        let verts: Vec<Vec<f64>> = uniq
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        PolytopeV::new(verts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> Result<&[Facet]> {
        if let Some(f) = self.facets.get() {
            return Ok(f);
        }
        let f = hull_facets(&self.vertices, self.dim)?;
        Ok(self.facets.get_or_init(|| f))
    }

    pub(crate) fn facets_unchecked(&self) -> &[Facet] {
        self.facets().expect("validated at construction")
    }

    pub fn moments(&self) -> Moments {
        let mut simplices = Vec::new();
        if self.vertices.len() == self.dim + 1 {
            simplices.push(self.vertices.clone());
        } else {
            let apex = mean(&self.vertices);
            decompose_facets(
                &self.vertices,
                &self.vertices,
                self.facets_unchecked(),
                &apex,
                self.dim,
                &mut simplices,
            );
        }
        simplex_moments(&simplices, self.dim)
    }

    pub fn volume(&self) -> f64 {
        self.moments().volume
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.moments().centroid()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[..i] {
                d = d.max(vector::dist(a, b));
            }
        }
        d
    }

    /// Smallest facet slack `offset - normal . x`; positive iff `x` is interior.
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.facets_unchecked()
            .iter()
            .map(|f| f.offset - dot(&f.normal, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.depth(x) >= -tol
    }

    /// Distance from `origin` to the boundary along unit direction `u`
    /// (`origin` must be interior).
    pub fn radial(&self, origin: &[f64], u: &[f64]) -> f64 {
        self.facets_unchecked()
            .iter()
            .filter_map(|f| {
                let a = dot(&f.normal, u);
                (a > 0.0).then(|| (f.offset - dot(&f.normal, origin)) / a)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Parameter interval `{t : p + t d in P}`, or `None` when the line misses.
    pub fn clip_line(&self, p: &[f64], d: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let dn = vector::norm(d);
        let pn = vector::norm(p);
        for f in self.facets_unchecked() {
            let a = dot(&f.normal, d);
            let s = f.offset - dot(&f.normal, p);
            // A line parallel to a facet up to rounding either runs inside
            // the slab or misses the body.
            if a.abs() <= 1e-14 * dn {
                if s < -1e-12 * (f.offset.abs() + pn) {
                    return None;
                }
            } else if a > 0.0 {
                hi = hi.min(s / a);
            } else {
                lo = lo.max(s / a);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn map_vertices<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<PolytopeV> {
        PolytopeV::new(self.vertices.iter().map(|v| f(v)).collect())
    }

    pub fn translate(&self, t: &[f64]) -> Result<PolytopeV> {
        self.map_vertices(|v| vector::add(v, t))
    }

    /// `(P - z)^\circ`, with facets inherited from the vertex incidence of `P`.
    pub fn polar(&self, z: &[f64]) -> Result<PolytopeV> {
        crate::error::check_dim(self.dim, z.len())?;
        let facets = self.facets_unchecked();
        let scale = scale_of(&self.vertices).max(vector::max_abs(z));
        let mut pv = Vec::with_capacity(facets.len());
        for f in facets {
            let s = f.offset - dot(&f.normal, z);
            if s <= 1e-12 * scale {
                return Err(Error::CenterOutside);
            }
            pv.push(vector::scale(&f.normal, 1.0 / s));
        }
        let mut pf = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let inc: Vec<usize> = (0..facets.len())
                .filter(|&j| facets[j].points.contains(&i))
                .collect();
            if inc.len() < self.dim {
                continue;
            }
            let pts: Vec<Vec<f64>> = inc.iter().map(|&j| pv[j].clone()).collect();
            if affine_rank(&pts, 1e-10 * scale_of(&pts)) < self.dim {
                continue;
            }
            let w = sub(v, z);
            let l = vector::norm(&w);
            pf.push(Facet { normal: vector::scale(&w, 1.0 / l), offset: 1.0 / l, points: inc });
        }
        let p = PolytopeV { dim: self.dim, vertices: pv, facets: OnceLock::new() };
        let _ = p.facets.set(pf);
        Ok(p)
    }

    // Named bodies.

    pub fn cube(n: usize) -> PolytopeV {
        let verts = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        PolytopeV::new(verts).expect("cube is valid")
    }

    pub fn cross_polytope(n: usize) -> PolytopeV {
        let mut verts = Vec::new();
        for k in 0..n {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[k] = s;
                verts.push(v);
            }
        }
        PolytopeV::new(verts).expect("cross-polytope is valid")
    }

    /// Regular `k`-gon with circumradius `r`, first vertex at angle `phase`.
    pub fn regular_polygon(k: usize, r: f64, phase: f64) -> Result<PolytopeV> {
        if k < 3 {
            return Err(Error::InvalidInput("polygon needs at least 3 vertices".into()));
        }
        PolytopeV::new(
            (0..k)
                .map(|i| {
                    let t = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect(),
        )
    }

    /// Simplex with vertices `0, e_1, ..., e_n`.
    pub fn standard_simplex(n: usize) -> PolytopeV {
        let mut verts = vec![vec![0.0; n]];
        for k in 0..n {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            verts.push(v);
        }
        PolytopeV::new(verts).expect("simplex is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_and_cross_volumes_exact() {
        assert_eq!(PolytopeV::cube(3).volume(), 8.0);
        assert_eq!(PolytopeV::cross_polytope(3).volume(), 4.0 / 3.0);
        assert_eq!(PolytopeV::cube(4).volume(), 16.0);
        assert_eq!(PolytopeV::cube(2).volume(), 4.0);
    }

    #[test]
    fn cube_polar_is_cross() {
        let p = PolytopeV::cube(3).polar(&[0.0; 3]).unwrap();
        assert_eq!(p.volume(), 4.0 / 3.0);
        assert_eq!(p.facets().unwrap().len(), 8);
    }

    #[test]
    fn simplex_second_moment() {
        // For the standard triangle: integral of x^2 is 1/12, of xy is 1/24.
        let m = PolytopeV::standard_simplex(2).moments();
        assert!((m.volume - 0.5).abs() < 1e-15);
        assert!((m.second[0][0] - 1.0 / 12.0).abs() < 1e-15);
        assert!((m.second[0][1] - 1.0 / 24.0).abs() < 1e-15);
        assert!((m.first[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn from_points_drops_interior() {
        let mut pts = PolytopeV::cube(3).vertices().to_vec();
        pts.push(vec![0.0, 0.0, 0.0]);
        pts.push(vec![1.0, 0.0, 0.0]);
        pts.push(vec![1.0, 1.0, 0.0]);
        let p = PolytopeV::from_points(pts).unwrap();
        assert_eq!(p.vertices().len(), 8);
    }

    #[test]
    fn degenerate_rejected() {
        let r = PolytopeV::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateBody(_))));
    }

    #[test]
    fn center_outside_rejected() {
        let r = PolytopeV::cube(2).polar(&[1.0, 0.0]);
        assert_eq!(r.unwrap_err(), Error::CenterOutside);
    }
}
