//! Integrable log-concave functions and the evaluator interface used by the
//! functional routines.
//!
//! A [`LogConcaveFn`] is `f(x) = scale * base(x - shift)` with `base` from a
//! closed family. Every family knows an interior point of its support, a
//! radius beyond which it is negligible (below `exp(-50)` of its peak), and
//! how to clip a line against its effective support, which gives exact
//! integration windows and jump locations along rays.

use crate::error::{Error, Result};
use crate::polytope::PolytopeV;
use crate::quadrature::{integrate_lenient, QuadOptions};
use crate::sphere::SphereGrid;
use crate::vector::{self, dot, sub, unit_ball_volume};
use serde::{Deserialize, Serialize};

/// Integration window along `origin + t dir` for `t >= 0`; the function
/// vanishes (or is negligible) outside `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayWindow {
    pub start: f64,
    pub end: f64,
    pub breaks: Vec<f64>,
}

impl RayWindow {
    pub fn empty() -> Self {
        RayWindow { start: 0.0, end: 0.0, breaks: Vec::new() }
    }
}

pub trait Evaluator: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn ray_window(&self, origin: &[f64], dir: &[f64]) -> RayWindow;
    /// `t -> eval(origin + t dir)`; implementations may precompute per ray.
    fn ray_profile<'a>(&'a self, origin: &'a [f64], dir: &'a [f64]) -> Box<dyn Fn(f64) -> f64 + 'a> {
        Box::new(move |t| self.eval(&vector::axpy(origin, t, dir)))
    }
    /// A point in the interior of the support.
    fn interior_point(&self) -> Vec<f64>;
    /// Negligible outside the ball of this radius around `interior_point`.
    fn reach(&self) -> f64;
    /// `int_0^inf t^{n-1} f(origin + t dir) dt`.
    fn ray_moment(&self, origin: &[f64], dir: &[f64]) -> f64 {
        generic_ray_moment(self, origin, dir)
    }
}

pub fn ray_moment(f: &dyn Evaluator, origin: &[f64], dir: &[f64]) -> f64 {
    f.ray_moment(origin, dir)
}

fn generic_ray_moment<E: Evaluator + ?Sized>(f: &E, origin: &[f64], dir: &[f64]) -> f64 {
    let n = f.dim() as i32;
    let w = f.ray_window(origin, dir);
    if w.end <= w.start {
        return 0.0;
    }
    let prof = f.ray_profile(origin, dir);
    let opts = QuadOptions { rel_tol: 1e-12, ..Default::default() };
    integrate_lenient(|t| t.powi(n - 1) * prof(t), w.start, w.end, &w.breaks, &opts)
}

/// `int f` in polar coordinates around `center`.
pub fn integrate_polar(f: &dyn Evaluator, center: &[f64], grid: &SphereGrid) -> f64 {
    let n = f.dim();
    n as f64
        * unit_ball_volume(n)
        * grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(u, w)| w * ray_moment(f, center, u))
            .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `exp(-(x / width)^2)`
    Gaussian { width: f64 },
    /// `exp(-|x| / width)`
    Laplace { width: f64 },
    /// `exp(-rate x)` for `x >= 0`, else 0.
    OneSidedExp { rate: f64 },
    /// Indicator of `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl Profile {
    pub fn ln_eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { width } => -(x / width) * (x / width),
            Profile::Laplace { width } => -x.abs() / width,
            Profile::OneSidedExp { rate } => {
                if x >= 0.0 {
                    -rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
            Profile::Interval { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn is_even(&self) -> bool {
        match *self {
            Profile::Gaussian { .. } | Profile::Laplace { .. } => true,
            Profile::OneSidedExp { .. } => false,
            Profile::Interval { lo, hi } => lo == -hi,
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Profile::OneSidedExp { .. } => (0.0, f64::INFINITY),
            Profile::Interval { lo, hi } => (lo, hi),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn center(&self) -> f64 {
        match *self {
            Profile::OneSidedExp { rate } => 1.0 / rate,
            Profile::Interval { lo, hi } => 0.5 * (lo + hi),
            _ => 0.0,
        }
    }

    /// Half-width of the window around `center` outside which the profile is
    /// below `exp(-50)`.
    fn reach(&self) -> f64 {
        match *self {
            Profile::Gaussian { width } => width * 50f64.sqrt(),
            Profile::Laplace { width } => 50.0 * width,
            Profile::OneSidedExp { rate } => 50.0 / rate,
            Profile::Interval { lo, hi } => 0.5 * (hi - lo),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Profile::Laplace { .. } | Profile::OneSidedExp { .. } => vec![0.0],
            Profile::Interval { lo, hi } => vec![lo, hi],
            Profile::Gaussian { .. } => vec![],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Gaussian { width } | Profile::Laplace { width } => width > 0.0 && width.is_finite(),
            Profile::OneSidedExp { rate } => rate > 0.0 && rate.is_finite(),
            Profile::Interval { lo, hi } => lo < hi && lo.is_finite() && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid profile {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `exp(-|T x|^2)`, `T` given by rows.
    Gaussian { t: Vec<Vec<f64>> },
    /// Indicator of a polytope.
    Indicator(PolytopeV),
    /// `exp(-||x||_P)` for a polytope `P` with the origin in its interior.
    ExpGauge(PolytopeV),
    /// Product of one-dimensional profiles of the coordinates.
    Product(Vec<Profile>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogConcaveFn {
    dim: usize,
    family: Family,
    shift: Vec<f64>,
    scale: f64,
    center: Vec<f64>,
    reach: f64,
}

/// `a * 1_{|x - c| <= b} <= f(x) <= d * exp(-c_rate |x - c|)`, with `c` the
/// interior point of the function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBounds {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

fn singular_range(t: &[Vec<f64>]) -> (f64, f64) {
    let n = t.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| t[i][j]);
    let s = m.singular_values();
    (s.min(), s.max())
}

impl LogConcaveFn {
    pub fn new(family: Family, shift: Option<Vec<f64>>, scale: f64) -> Result<Self> {
        let dim = match &family {
            Family::Gaussian { t } => t.len(),
            Family::Indicator(p) | Family::ExpGauge(p) => p.dim(),
            Family::Product(f) => f.len(),
        };
        if dim == 0 {
            return Err(Error::InvalidInput("function dimension must be positive".into()));
        }
        let shift = shift.unwrap_or_else(|| vec![0.0; dim]);
        crate::error::check_dim(dim, shift.len())?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        let (center, reach) = match &family {
            Family::Gaussian { t } => {
                if t.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidInput("Gaussian matrix must be square".into()));
                }
                let (smin, _) = singular_range(t);
                if !(smin > 1e-12) {
                    return Err(Error::InvalidInput("Gaussian matrix must be invertible".into()));
                }
                (vec![0.0; dim], 50f64.sqrt() / smin)
            }
            Family::Indicator(p) => {
                let c = p.centroid();
                let r = p.vertices().iter().map(|v| vector::dist(v, &c)).fold(0.0, f64::max);
                (c, r * (1.0 + 1e-12))
            }
            Family::ExpGauge(p) => {
                if p.depth(&vec![0.0; dim]) <= 0.0 {
                    return Err(Error::CenterOutside);
                }
                let r = p.vertices().iter().map(|v| vector::norm(v)).fold(0.0, f64::max);
                (vec![0.0; dim], 50.0 * r)
            }
            Family::Product(ps) => {
                for p in ps {
                    p.validate()?;
                }
                let c = ps.iter().map(|p| p.center()).collect();
                let r = ps.iter().map(|p| p.reach() * p.reach()).sum::<f64>().sqrt();
                (c, r)
            }
        };
        Ok(LogConcaveFn { dim, family, shift, scale, center, reach })
    }

    pub fn gaussian(n: usize) -> Self {
        let t = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        LogConcaveFn::new(Family::Gaussian { t }, None, 1.0).unwrap()
    }

    pub fn indicator(p: PolytopeV) -> Self {
        LogConcaveFn::new(Family::Indicator(p), None, 1.0).unwrap()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ln base(x)` in base coordinates.
    fn ln_base(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::Gaussian { t } => -t.iter().map(|r| dot(r, x).powi(2)).sum::<f64>(),
            Family::Indicator(p) => {
                if p.contains(x, 0.0) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::ExpGauge(p) => -gauge(p, x),
            Family::Product(ps) => ps.iter().zip(x).map(|(p, v)| p.ln_eval(*v)).sum(),
        }
    }

    pub fn ln_eval(&self, x: &[f64]) -> f64 {
        self.scale.ln() + self.ln_base(&sub(x, &self.shift))
    }

    /// Maximum of `f` on the line `p + w d` (`d` need not be unit), searched
    /// over the effective support. Returns 0 when the line misses it.
    /// Whether slice maxima decay quadratically (rather than linearly) far
    /// out along unbounded directions.
    pub fn quadratic_tail(&self) -> bool {
        match &self.family {
            Family::Gaussian { .. } | Family::Indicator(_) => true,
            Family::ExpGauge(_) => false,
            Family::Product(ps) => ps.iter().all(|p| matches!(p, Profile::Gaussian { .. } | Profile::Interval { .. })),
        }
    }

    pub fn line_max(&self, p: &[f64], d: &[f64]) -> f64 {
        let Some((lo, hi, _)) = self.line_window(p, d) else {
            return 0.0;
        };
        if hi <= lo {
            return self.eval(&vector::axpy(p, 0.5 * (lo + hi), d));
        }
        match &self.family {
            Family::Indicator(_) => self.scale,
            Family::Gaussian { t } => {
                let q = sub(p, &self.shift);
                let (mut ab, mut bb) = (0.0, 0.0);
                for r in t {
                    let (a, b) = (dot(r, &q), dot(r, d));
                    ab += a * b;
                    bb += b * b;
                }
                let w = (-ab / bb).clamp(lo, hi);
                self.eval(&vector::axpy(p, w, d))
            }
            Family::Product(ps) => {
                let q = sub(p, &self.shift);
                self.product_line_max(ps, &q, d, lo, hi).exp()
            }
            Family::ExpGauge(poly) => {
                // The gauge along the line is a maximum of affine functions of
                // `w`; its minimum sits at an endpoint or a crossing.
                let q = sub(p, &self.shift);
                let lines: Vec<(f64, f64)> = poly
                    .facets_unchecked()
                    .iter()
                    .map(|f| (dot(&f.normal, &q) / f.offset, dot(&f.normal, d) / f.offset))
                    .collect();
                let at = |w: f64| lines.iter().map(|(a, b)| a + w * b).fold(f64::NEG_INFINITY, f64::max);
                let mut best = at(lo).min(at(hi));
                for (i, (a1, b1)) in lines.iter().enumerate() {
                    for (a2, b2) in &lines[i + 1..] {
                        if b1 != b2 {
                            let w = (a2 - a1) / (b1 - b2);
                            if w > lo && w < hi {
                                best = best.min(at(w));
                            }
                        }
                    }
                }
                self.scale * (-best).exp()
            }
        }
    }

    /// `max ln f(q + shift + w d)` over `[lo, hi]` for a product family. The
    /// objective is concave and piecewise quadratic between profile kinks,
    /// so the maximum is at a kink, an endpoint or a piecewise stationary
    /// point.
    fn product_line_max(&self, ps: &[Profile], q: &[f64], d: &[f64], lo: f64, hi: f64) -> f64 {
        // Intersect the profile domains first; arguments are then clamped
        // into them so rounding at a domain edge cannot produce -inf.
        let (mut wl, mut wr) = (lo, hi);
        for ((pr, a), b) in ps.iter().zip(q).zip(d) {
            let (sl, sh) = pr.support();
            if *b != 0.0 {
                let (t1, t2) = ((sl - a) / b, (sh - a) / b);
                wl = wl.max(t1.min(t2));
                wr = wr.min(t1.max(t2));
            } else if !(sl <= *a && *a <= sh) {
                return f64::NEG_INFINITY;
            }
        }
        if wl > wr {
            return f64::NEG_INFINITY;
        }
        let mut cuts = vec![wl, wr];
        for ((pr, a), b) in ps.iter().zip(q).zip(d) {
            if *b != 0.0 {
                cuts.extend(pr.kinks().into_iter().map(|k| (k - a) / b).filter(|w| *w > wl && *w < wr));
            }
        }
        cuts.sort_by(f64::total_cmp);
        let ln_at = |w: f64| -> f64 {
            self.scale.ln()
                + ps
                    .iter()
                    .zip(q)
                    .zip(d)
                    .map(|((pr, a), b)| {
                        let (sl, sh) = pr.support();
                        pr.ln_eval((a + w * b).clamp(sl, sh))
                    })
                    .sum::<f64>()
        };
        let mut best = cuts.iter().map(|w| ln_at(*w)).fold(f64::NEG_INFINITY, f64::max);
        for win in cuts.windows(2) {
            let mid = 0.5 * (win[0] + win[1]);
            // Slope `alpha + beta w` of the objective on this piece.
            let (mut alpha, mut beta) = (0.0, 0.0);
            for ((pr, a), b) in ps.iter().zip(q).zip(d) {
                match *pr {
                    Profile::Gaussian { width } => {
                        let c = 2.0 * b / (width * width);
                        alpha -= c * a;
                        beta -= c * b;
                    }
                    Profile::Laplace { width } => alpha -= (a + mid * b).signum() * b / width,
                    Profile::OneSidedExp { rate } => alpha -= rate * b,
                    Profile::Interval { .. } => {}
                }
            }
            if beta < 0.0 {
                let w = (-alpha / beta).clamp(win[0], win[1]);
                best = best.max(ln_at(w));
            }
        }
        best
    }

    /// Parameter interval of the line `p + w d` inside the effective support,
    /// with kink/jump parameters.
    pub fn line_window(&self, p: &[f64], d: &[f64]) -> Option<(f64, f64, Vec<f64>)> {
        let q = sub(p, &self.shift);
        // Ball of radius `reach` around the centre.
        let oc = sub(&q, &self.center);
        let dd = dot(d, d);
        let b = dot(&oc, d) / dd;
        let disc = b * b - (dot(&oc, &oc) - self.reach * self.reach) / dd;
        if disc < 0.0 {
            return None;
        }
        let mut lo = -b - disc.sqrt();
        let mut hi = -b + disc.sqrt();
        let mut breaks = Vec::new();
        match &self.family {
            Family::Indicator(poly) => {
                let (a, c) = poly.clip_line(&q, d)?;
                lo = lo.max(a);
                hi = hi.min(c);
            }
            Family::Product(ps) => {
                for (k, prof) in ps.iter().enumerate() {
                    let (slo, shi) = prof.support();
                    if d[k] == 0.0 {
                        if q[k] < slo || q[k] > shi {
                            return None;
                        }
                    } else {
                        let (t1, t2) = ((slo - q[k]) / d[k], (shi - q[k]) / d[k]);
                        lo = lo.max(t1.min(t2));
                        hi = hi.min(t1.max(t2));
                    }
                    if d[k] != 0.0 {
                        breaks.extend(prof.kinks().iter().map(|x| (x - q[k]) / d[k]));
                    }
                }
            }
            Family::ExpGauge(poly) => {
                breaks.extend(gauge_kinks(poly, &q, d));
            }
            Family::Gaussian { .. } => {}
        }
        if lo > hi {
            return None;
        }
        breaks.retain(|t| *t > lo && *t < hi);
        Some((lo, hi, breaks))
    }

    /// `(effective, exact)` value of `sup {<x - z, v> : f(x) > 0}`; the exact
    /// value is infinite for functions with unbounded support in direction `v`.
    pub fn support_extent(&self, z: &[f64], v: &[f64]) -> (f64, f64) {
        let q = sub(z, &self.shift);
        let eff = dot(&sub(&self.center, &q), v) + self.reach * vector::norm(v);
        let exact = match &self.family {
            Family::Indicator(p) => p.support(v) - dot(&q, v),
            Family::Product(ps) => ps
                .iter()
                .zip(v)
                .zip(&q)
                .map(|((p, vk), qk)| {
                    let (lo, hi) = p.support();
                    if *vk > 0.0 {
                        vk * (hi - qk)
                    } else if *vk < 0.0 {
                        vk * (lo - qk)
                    } else {
                        0.0
                    }
                })
                .sum(),
            _ => f64::INFINITY,
        };
        (eff.min(exact), exact)
    }

    pub fn decay_bounds(&self) -> DecayBounds {
        let s = self.scale;
        match &self.family {
            Family::Gaussian { t } => {
                let (smin, smax) = singular_range(t);
                DecayBounds { a: s / std::f64::consts::E, b: 1.0 / smax, c: smin, d: s * 0.25f64.exp() }
            }
            Family::Indicator(p) => {
                let b = p.depth(&self.center);
                DecayBounds { a: s, b, c: 1.0 / self.reach, d: s * std::f64::consts::E }
            }
            Family::ExpGauge(p) => {
                let b = p.depth(&self.center);
                let r = self.reach / 50.0;
                DecayBounds { a: s / std::f64::consts::E, b, c: 1.0 / r, d: s }
            }
            Family::Product(_) => {
                // Sampled lower radius; upper bound from the reach.
                DecayBounds { a: 0.0, b: 0.0, c: 50.0 / self.reach, d: s * 50f64.exp() }
            }
        }
    }
}

/// Gauge of a polytope containing the origin.
pub fn gauge(p: &PolytopeV, x: &[f64]) -> f64 {
    p.facets()
        .expect("validated")
        .iter()
        .map(|f| dot(&f.normal, x) / f.offset)
        .fold(0.0, f64::max)
}

/// Parameters where `t -> ||q + t d||_P` changes its active facet.
fn gauge_kinks(p: &PolytopeV, q: &[f64], d: &[f64]) -> Vec<f64> {
    let lines: Vec<(f64, f64)> = p
        .facets()
        .expect("validated")
        .iter()
        .map(|f| (dot(&f.normal, q) / f.offset, dot(&f.normal, d) / f.offset))
        .collect();
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in 0..i {
            let (a1, b1) = lines[i];
            let (a2, b2) = lines[j];
            if (b1 - b2).abs() < 1e-300 {
                continue;
            }
            let t = (a2 - a1) / (b1 - b2);
            let v = a1 + b1 * t;
            let top = lines.iter().map(|(a, b)| a + b * t).fold(0.0, f64::max);
            if v >= top - 1e-12 * top.abs().max(1.0) {
                out.push(t);
            }
        }
    }
    out
}

impl Evaluator for LogConcaveFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.ln_eval(x).exp()
    }

    fn ray_window(&self, origin: &[f64], dir: &[f64]) -> RayWindow {
        match self.line_window(origin, dir) {
            Some((lo, hi, breaks)) if hi > 0.0 => RayWindow {
                start: lo.max(0.0),
                end: hi,
                breaks,
            },
            _ => RayWindow::empty(),
        }
    }

    fn interior_point(&self) -> Vec<f64> {
        vector::add(&self.center, &self.shift)
    }

    fn reach(&self) -> f64 {
        self.reach
    }
}

/// A function given by a closure, negligible outside `B(center, reach)`.
pub struct FnEvaluator<F: Fn(&[f64]) -> f64 + Sync> {
    pub dim: usize,
    pub f: F,
    pub center: Vec<f64>,
    pub reach: f64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Evaluator for FnEvaluator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn ray_window(&self, origin: &[f64], dir: &[f64]) -> RayWindow {
        let oc = sub(origin, &self.center);
        let b = dot(&oc, dir);
        let disc = b * b - (dot(&oc, &oc) - self.reach * self.reach);
        if disc < 0.0 {
            return RayWindow::empty();
        }
        let hi = -b + disc.sqrt();
        if hi <= 0.0 {
            return RayWindow::empty();
        }
        RayWindow { start: (-b - disc.sqrt()).max(0.0), end: hi, breaks: vec![] }
    }

    fn interior_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn reach(&self) -> f64 {
        self.reach
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integral() {
        let f = LogConcaveFn::gaussian(2);
        let g = SphereGrid::new(2, 64).unwrap();
        let i = integrate_polar(&f, &[0.3, -0.2], &g);
        assert!((i - PI).abs() < 1e-9, "{i}");
    }

    #[test]
    fn product_one_sided_integral() {
        let f = LogConcaveFn::new(
            Family::Product(vec![Profile::OneSidedExp { rate: 2.0 }, Profile::Interval { lo: -1.0, hi: 0.5 }]),
            Some(vec![0.5, 0.0]),
            3.0,
        )
        .unwrap();
        let g = SphereGrid::new(2, 2048).unwrap();
        let c = f.interior_point();
        let i = integrate_polar(&f, &c, &g);
        assert!((i - 3.0 * 0.5 * 1.5).abs() < 1e-5, "{i}");
    }

    #[test]
    fn exp_gauge_integral() {
        // int exp(-||x||_K) = n! |K|.
        let f = LogConcaveFn::new(Family::ExpGauge(PolytopeV::cube(2)), None, 1.0).unwrap();
        let g = SphereGrid::new(2, 4096).unwrap();
        let i = integrate_polar(&f, &[0.0, 0.0], &g);
        assert!((i - 8.0).abs() < 1e-5, "{i}");
    }

    #[test]
    fn line_max_gaussian() {
        let f = LogConcaveFn::gaussian(2);
        let m = f.line_max(&[0.0, 1.0], &[1.0, 0.0]);
        assert!((m - (-1.0f64).exp()).abs() < 1e-12);
    }

    fn dense_line_max(f: &LogConcaveFn, p: &[f64], d: &[f64]) -> f64 {
        // Two-level scan: coarse, then fine around the coarse winner.
        let Some((mut lo, mut hi, _)) = f.line_window(p, d) else {
            return 0.0;
        };
        let mut best = (0.0, lo);
        for _ in 0..2 {
            let h = (hi - lo) / 100_000.0;
            for i in 0..=100_000 {
                let w = lo + h * i as f64;
                let v = f.eval(&vector::axpy(p, w, d));
                if v > best.0 {
                    best = (v, w);
                }
            }
            (lo, hi) = (best.1 - 2.0 * h, best.1 + 2.0 * h);
        }
        best.0
    }

    #[test]
    fn piecewise_line_max_matches_dense_scan() {
        let fs = [
            LogConcaveFn::new(
                Family::Product(vec![Profile::Laplace { width: 0.7 }, Profile::Gaussian { width: 1.3 }]),
                Some(vec![0.2, -0.4]),
                1.0,
            )
            .unwrap(),
            LogConcaveFn::new(
                Family::Product(vec![Profile::OneSidedExp { rate: 1.5 }, Profile::Interval { lo: -0.5, hi: 2.0 }]),
                None,
                2.0,
            )
            .unwrap(),
            LogConcaveFn::new(Family::ExpGauge(PolytopeV::regular_polygon(5, 1.0, 0.3).unwrap()), Some(vec![0.1, 0.2]), 1.0)
                .unwrap(),
        ];
        let lines = [([0.3, 0.9], [1.0, 0.2]), ([-1.0, 0.5], [0.3, -1.0]), ([0.8, 0.1], [-0.6, 0.8])];
        for f in &fs {
            for (p, d) in &lines {
                let exact = f.line_max(p, d);
                let dense = dense_line_max(f, p, d);
                assert!(exact >= dense * (1.0 - 1e-12), "{exact} {dense}");
                assert!(exact > 0.0 || dense == 0.0);
                assert!(exact <= dense * (1.0 + 1e-6), "{exact} {dense}");
            }
        }
    }
}
