//! Functional forms of the volume-product inequality for log-concave
//! functions.
//!
//! For `f` and a point `z`, the level body `K_z(f)` has radial function
//! `r_z(u) = (int_0^inf r^{n-1} f(z + r u) dr)^{1/n}`, so `int f = n |K_z|`.
//! The centre `z_0` is the point where `K_z` has its centroid at the origin.

use crate::error::{Error, Result};
use crate::logconcave::{integrate_polar, ray_moment, Evaluator, LogConcaveFn, RayWindow};
use crate::quadrature::{composite_gauss, integrate_lenient, QuadOptions};
use crate::report::{Relation, Report};
use crate::rho::{c_n_rho, Rho};
use crate::sphere::SphereGrid;
use crate::star::StarBody;
use crate::vector::{self, dot, sub};
use rand::Rng;
use std::sync::Arc;

pub const TAG_FUNCTIONAL: &str = "functional-santalo";
pub const TAG_INCLUSION: &str = "polar-inclusion";
pub const TAG_PREKOPA: &str = "prekopa-geometric";

/// `K_z(f)` sampled on `grid`.
pub fn body_kz(f: &dyn Evaluator, z: &[f64], grid: Arc<SphereGrid>) -> Result<StarBody> {
    crate::error::check_dim(f.dim(), z.len())?;
    let n = f.dim() as f64;
    let radial: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|u| ray_moment(f, z, u).powf(1.0 / n))
        .collect();
    if radial.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::DegenerateBody(
            "z is not in the interior of the support of f".into(),
        ));
    }
    StarBody::new(grid, radial)
}

#[derive(Debug, Clone, Copy)]
pub struct CenterOptions {
    /// Accept when `|centroid(K_z)| <= tol * reach(f)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions { tol: 1e-10, max_iter: 60 }
    }
}

#[derive(Debug, Clone)]
pub struct CenteredPair {
    pub z0: Vec<f64>,
    pub body: StarBody,
    /// `|centroid(K_{z0})|`.
    pub residual: f64,
    pub iterations: usize,
}

fn kz_centroid(f: &dyn Evaluator, z: &[f64], grid: &Arc<SphereGrid>) -> Option<(Vec<f64>, StarBody)> {
    let b = body_kz(f, z, grid.clone()).ok()?;
    Some((b.centroid(), b))
}

pub fn find_center(f: &dyn Evaluator, grid: Arc<SphereGrid>, opts: &CenterOptions) -> Result<CenteredPair> {
    let n = f.dim();
    let reach = f.reach();
    if n == 1 {
        // Balance the masses on the two sides of z.
        let c = f.interior_point()[0];
        let d = |z: f64| ray_moment(f, &[z], &[1.0]) - ray_moment(f, &[z], &[-1.0]);
        let z = crate::optim::bisect(d, c - reach, c + reach, 1e-15 * reach, 200);
        let body = body_kz(f, &[z], grid)?;
        let residual = body.centroid()[0].abs();
        return Ok(CenteredPair { z0: vec![z], body, residual, iterations: 0 });
    }
    let tol = opts.tol * reach;
    let mut z = f.interior_point();
    let (mut g, mut body) = kz_centroid(f, &z, &grid)
        .ok_or_else(|| Error::DegenerateBody("interior point of f gives a degenerate K_z".into()))?;
    let h = 1e-6 * reach;
    let jacobian = |z: &[f64], g: &[f64]| -> Option<Vec<Vec<f64>>> {
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let mut q = z.to_vec();
            q[k] += h;
            let (gk, _) = kz_centroid(f, &q, &grid)?;
            cols.push(vector::scale(&sub(&gk, g), 1.0 / h));
        }
        Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
    };
    let mut jac = jacobian(&z, &g);
    let mut iters = 0;
    while vector::norm(&g) > tol && iters < opts.max_iter {
        iters += 1;
        let Some(j) = jac.clone() else { break };
        let Some(step) = vector::solve(&j, &g).map(|s| vector::scale(&s, -1.0)) else { break };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = vector::axpy(&z, t, &step);
            if let Some((gc, bc)) = kz_centroid(f, &cand, &grid) {
                if vector::norm(&gc) < (1.0 - 1e-4 * t) * vector::norm(&g) {
                    accepted = Some((cand, gc, bc));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, gc, bc)) => {
                let s = sub(&cand, &z);
                let y = sub(&gc, &g);
                if t < 1.0 {
                    jac = jacobian(&cand, &gc);
                } else if let Some(j) = jac.as_mut() {
                    // Broyden rank-one update.
                    let js: Vec<f64> = j.iter().map(|row| dot(row, &s)).collect();
                    let ss = dot(&s, &s);
                    for i in 0..n {
                        for k in 0..n {
                            j[i][k] += (y[i] - js[i]) * s[k] / ss;
                        }
                    }
                }
                z = cand;
                g = gc;
                body = bc;
            }
            None => {
                let fresh = jacobian(&z, &g);
                if fresh == jac {
                    break;
                }
                jac = fresh;
            }
        }
    }
    if vector::norm(&g) > tol {
        let r = crate::optim::nelder_mead(
            |x| kz_centroid(f, x, &grid).map(|(g, _)| dot(&g, &g)).unwrap_or(f64::INFINITY),
            &z,
            1e-2 * reach,
            1e-14 * reach,
            0.0,
            2000,
        );
        if let Some((gn, bn)) = kz_centroid(f, &r.x, &grid) {
            if vector::norm(&gn) < vector::norm(&g) {
                z = r.x;
                g = gn;
                body = bn;
            }
        }
        iters += r.iterations;
        if vector::norm(&g) > tol {
            return Err(Error::SolverFail {
                message: "centre of f not found".into(),
                best: z,
                residual: vector::norm(&g),
            });
        }
    }
    Ok(CenteredPair { residual: vector::norm(&g), z0: z, body, iterations: iters })
}

#[derive(Debug, Clone, Copy)]
pub struct HypothesisOptions {
    pub samples: usize,
    pub seed: u64,
    /// Accept ratios up to `1 + slack`.
    pub slack: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        HypothesisOptions { samples: 10_000, seed: 0, slack: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisOutcome {
    /// Largest `f1(x) f2(y) / rho(<x-z, y-z>)^2` found.
    pub max_ratio: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub pairs: usize,
    pub passed: bool,
}

fn sample_near<R: Rng>(f: &dyn Evaluator, rng: &mut R) -> Vec<f64> {
    let scales = [0.02, 0.08, 0.25, 0.6, 1.0];
    let s = scales[rng.gen_range(0..scales.len())];
    let p = crate::rng::in_ball(rng, f.dim(), s * f.reach());
    vector::add(&f.interior_point(), &p)
}

/// Sampled test of `f1(x) f2(y) <= rho(<x - z, y - z>)^2` over pairs with
/// `<x - z, y - z> > 0`.
pub fn hypothesis_check(
    f1: &dyn Evaluator,
    f2: &dyn Evaluator,
    rho: &Rho,
    z: &[f64],
    opts: &HypothesisOptions,
) -> HypothesisOutcome {
    let mut out = HypothesisOutcome { max_ratio: 0.0, witness: None, pairs: 0, passed: true };
    for k in 0..opts.samples {
        let mut rng = crate::rng::stream(opts.seed, k as u64);
        let x = sample_near(f1, &mut rng);
        let xz = sub(&x, z);
        let mut y = if k % 5 == 0 {
            // Aligned pairs probe the diagonal where equality cases live.
            let lam = (rng.gen_range(-2.5f64..2.5)).exp();
            vector::axpy(z, lam, &xz)
        } else {
            sample_near(f2, &mut rng)
        };
        let mut t = dot(&xz, &sub(&y, z));
        if t < 0.0 {
            y = vector::axpy(z, -1.0, &sub(&y, z));
            t = -t;
        }
        if t == 0.0 {
            continue;
        }
        out.pairs += 1;
        let num = f1.eval(&x) * f2.eval(&y);
        if num == 0.0 {
            continue;
        }
        let den = rho.eval(t).powi(2);
        let ratio = if den > 0.0 { num / den } else { f64::INFINITY };
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.witness = Some((x, y));
        }
    }
    out.passed = out.max_ratio <= 1.0 + opts.slack;
    out
}

/// `g(y) = inf { rho(<x-z, y-z>)^2 / f(x) : <x-z, y-z> > 0 }`, shrunk by a
/// relative slack so that the hypothesis holds strictly after rounding.
///
/// With `y = z + s v` the infimum splits as `inf_tau rho(s tau)^2 / M_v(tau)`
/// where `M_v(tau)` is the maximum of `f` on the hyperplane
/// `<x - z, v> = tau`. Implemented for dimensions 1 and 2.
#[derive(Debug, Clone)]
pub struct PolarFunction {
    f: LogConcaveFn,
    rho: Rho,
    z: Vec<f64>,
    slack: f64,
    table: usize,
    reach: f64,
}

/// Extension of `ln M_v` past the tabulated range:
/// `ln M_v(hi + u) ~ l + sigma u + kappa u^2 / 2`. By concavity of `ln M_v`
/// the linear form is an upper bound; the quadratic form is exact for
/// Gaussian slices.
#[derive(Debug, Clone, Copy)]
struct Tail {
    hi: f64,
    l: f64,
    sigma: f64,
    kappa: f64,
}

struct RayTable {
    exact: f64,
    tail: Option<Tail>,
    /// Tabulated range `[lo, hi]` of `tau`: from the slice-maximum peak to the
    /// effective support extent.
    lo: f64,
    hi: f64,
    logm: Vec<f64>,
}

impl PolarFunction {
    pub fn new(f: &LogConcaveFn, rho: &Rho, z: &[f64]) -> Result<Self> {
        let n = f.dim();
        crate::error::check_dim(n, z.len())?;
        if n > 2 {
            return Err(Error::Unsupported(
                "polar functions are implemented for dimensions 1 and 2".into(),
            ));
        }
        if !(f.eval(z) > 0.0) {
            return Err(Error::CenterOutside);
        }
        let mut g = PolarFunction {
            f: f.clone(),
            rho: rho.clone(),
            z: z.to_vec(),
            slack: 1e-6,
            table: 2048,
            reach: 0.0,
        };
        let probe = SphereGrid::new(n, 16)?;
        g.reach = probe
            .nodes()
            .iter()
            .map(|v| g.ray_end(&g.ray_table(v)))
            .fold(0.0, f64::max)
            .max(1e-300);
        Ok(g)
    }

    pub fn with_table_size(mut self, k: usize) -> Self {
        self.table = k.max(8);
        self
    }

    pub fn center(&self) -> &[f64] {
        &self.z
    }

    /// Maximum of `f` on the hyperplane `<x - z, v> = tau`.
    fn slice_max(&self, v: &[f64], tau: f64) -> f64 {
        let p = vector::axpy(&self.z, tau, v);
        if self.f.dim() == 1 {
            self.f.eval(&p)
        } else {
            self.f.line_max(&p, &[-v[1], v[0]])
        }
    }

    /// `s` beyond which `g` vanishes along a ray with exact extent `exact`.
    fn zero_beyond(&self, exact: f64) -> f64 {
        match self.rho.support_end() {
            Some(end) if exact > 0.0 => end / exact,
            _ => f64::INFINITY,
        }
    }

    /// Tail model at `hi` from three samples of `ln M_v` spaced `h` apart,
    /// or `None` when the ray leaves the support of `f`.
    fn tail<F: Fn(f64) -> f64>(&self, exact: f64, lo: f64, hi: f64, slice: F) -> Option<Tail> {
        if exact.is_finite() || self.rho.log_quadratic().is_none() {
            return None;
        }
        let h = (hi - lo).max(hi * 1e-3) / 2048.0;
        let (l0, l1, l2) = (slice(hi), slice(hi - h), slice(hi - 2.0 * h));
        if !(l0.is_finite() && l1.is_finite() && l2.is_finite()) {
            return None;
        }
        let kappa = if self.f.quadratic_tail() { ((l0 - 2.0 * l1 + l2) / (h * h)).min(0.0) } else { 0.0 };
        Some(Tail { hi, l: l0, sigma: (l0 - l1) / h + 0.5 * kappa * h, kappa })
    }

    /// `inf_{u >= 0} 2 ln rho(s (hi + u)) - tail(u)`; both parts are
    /// quadratics in `u`.
    fn tail_min(&self, s: f64, t: &Tail) -> f64 {
        let [a0, a1, a2] = self.rho.log_quadratic().expect("tail needs a log-quadratic kernel");
        let (p0, p1, p2) = (2.0 * a0, 2.0 * a1 * s, 2.0 * a2 * s * s);
        let c = p2 - 0.5 * t.kappa;
        let b = p1 + 2.0 * p2 * t.hi - t.sigma;
        let a = p0 + p1 * t.hi + p2 * t.hi * t.hi - t.l;
        if c < 0.0 || (c == 0.0 && b < 0.0) {
            f64::NEG_INFINITY
        } else if c == 0.0 {
            a
        } else {
            let u = (-b / (2.0 * c)).max(0.0);
            a + b * u + c * u * u
        }
    }

    /// `ln g(z + s v)` by minimizing `2 ln rho(s tau) - ln M_v(tau)` over
    /// `tau`, with `slice` giving `ln M_v` on `[lo, hi]` and `tail` beyond.
    /// The objective need not be unimodal, so a scan brackets the minimum
    /// before golden-section refinement.
    fn ln_value<F: Fn(f64) -> f64>(&self, s: f64, lo: f64, hi: f64, tail: Option<&Tail>, slice: F) -> f64 {
        let obj = |tau: f64| {
            let v = 2.0 * self.rho.ln_eval(s * tau) - slice(tau);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        const SCAN: usize = 32;
        let h = (hi - lo) / SCAN as f64;
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for i in 0..=SCAN {
            let v = obj(lo + h * i as f64);
            if v < best {
                (best_i, best) = (i, v);
            }
        }
        if h > 0.0 {
            let a = lo + h * best_i.saturating_sub(1) as f64;
            let b = (lo + h * (best_i + 1) as f64).min(hi);
            let (_, v) = crate::optim::golden_min(obj, a, b, 1e-12 * hi.max(1e-300), 200);
            best = best.min(v);
        }
        match tail {
            Some(t) => best.min(self.tail_min(s, t)),
            None => best,
        }
    }

    fn ray_table(&self, v: &[f64]) -> RayTable {
        let (eff, exact) = self.f.support_extent(&self.z, v);
        let hi = eff * (1.0 - 1e-12);
        let (peak, _) = crate::optim::golden_max(|t| self.slice_max(v, t).ln(), 0.0, hi, 1e-10 * hi, 200);
        let lo = peak.clamp(0.0, hi);
        let k = self.table;
        let logm = (0..=k)
            .map(|i| self.slice_max(v, lo + (hi - lo) * i as f64 / k as f64).ln())
            .collect();
        let tail = self.tail(exact, lo, hi, |t| self.slice_max(v, t).ln());
        RayTable { exact, tail, lo, hi, logm }
    }

    fn interp(t: &RayTable, tau: f64) -> f64 {
        let k = t.logm.len() - 1;
        if t.hi <= t.lo {
            return t.logm[0];
        }
        let x = ((tau - t.lo) / (t.hi - t.lo) * k as f64).clamp(0.0, k as f64);
        let i = (x.floor() as usize).min(k - 1);
        let a = x - i as f64;
        let (l, r) = (t.logm[i], t.logm[i + 1]);
        if a == 0.0 {
            l
        } else if a == 1.0 {
            r
        } else {
            l + a * (r - l)
        }
    }

    fn value_on_ray(&self, t: &RayTable, s: f64) -> f64 {
        if s >= self.zero_beyond(t.exact) {
            return 0.0;
        }
        let v = self.ln_value(s, t.lo, t.hi, t.tail.as_ref(), |tau| Self::interp(t, tau));
        (1.0 - self.slack) * v.exp()
    }

    fn ray_end(&self, t: &RayTable) -> f64 {
        let g0 = self.value_on_ray(t, 0.0);
        let stop = self.zero_beyond(t.exact);
        if !(g0 > 0.0) {
            return 0.0;
        }
        let mut s = 1.0 / t.hi.max(1e-6 * self.f.reach());
        for _ in 0..200 {
            if s >= stop {
                return stop;
            }
            if self.value_on_ray(t, s) <= 1e-18 * g0 {
                return s;
            }
            s *= 2.0;
        }
        s
    }

    fn ray_window_table(&self, t: &RayTable) -> RayWindow {
        RayWindow { start: 0.0, end: self.ray_end(t), breaks: Vec::new() }
    }
}

impl Evaluator for PolarFunction {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let d = sub(y, &self.z);
        let s = vector::norm(&d);
        let mut v = vector::scale(&d, 1.0 / s.max(1e-300));
        if s == 0.0 {
            v = vec![0.0; self.dim()];
            v[0] = 1.0;
        }
        let (eff, exact) = self.f.support_extent(&self.z, &v);
        if s >= self.zero_beyond(exact) {
            return 0.0;
        }
        let hi = eff * (1.0 - 1e-12);
        let slice = |tau: f64| self.slice_max(&v, tau).ln();
        let tail = self.tail(exact, 0.0, hi, slice);
        let val = self.ln_value(s, 0.0, hi, tail.as_ref(), slice);
        (1.0 - self.slack) * val.exp()
    }

    fn ray_window(&self, origin: &[f64], dir: &[f64]) -> RayWindow {
        if origin == self.z.as_slice() {
            return self.ray_window_table(&self.ray_table(dir));
        }
        let oc = sub(origin, &self.z);
        let b = dot(&oc, dir);
        let disc = b * b - (dot(&oc, &oc) - self.reach * self.reach);
        if disc < 0.0 || -b + disc.sqrt() <= 0.0 {
            return RayWindow::empty();
        }
        RayWindow { start: (-b - disc.sqrt()).max(0.0), end: -b + disc.sqrt(), breaks: vec![] }
    }

    fn interior_point(&self) -> Vec<f64> {
        self.z.clone()
    }

    fn reach(&self) -> f64 {
        self.reach
    }

    fn ray_moment(&self, origin: &[f64], dir: &[f64]) -> f64 {
        if origin != self.z.as_slice() {
            let w = self.ray_window(origin, dir);
            let n = self.dim() as i32;
            let opts = QuadOptions { rel_tol: 1e-10, ..Default::default() };
            return integrate_lenient(
                |t| t.powi(n - 1) * self.eval(&vector::axpy(origin, t, dir)),
                w.start,
                w.end,
                &w.breaks,
                &opts,
            );
        }
        let table = self.ray_table(dir);
        let w = self.ray_window_table(&table);
        if w.end <= 0.0 {
            return 0.0;
        }
        let n = self.dim() as i32;
        // The tabulated profile is only piecewise smooth, which stalls
        // adaptive refinement; a fixed composite rule is stable.
        composite_gauss(|s| s.powi(n - 1) * self.value_on_ray(&table, s), 0.0, w.end, 96, 8)
    }
}

pub fn polar_function(f: &LogConcaveFn, rho: &Rho, z: &[f64]) -> Result<PolarFunction> {
    PolarFunction::new(f, rho, z)
}

#[derive(Debug, Clone)]
pub struct FunctionalOptions {
    pub grid: Arc<SphereGrid>,
    pub hypothesis: HypothesisOptions,
    /// Relative slack on the inequality.
    pub tol: f64,
    pub center: CenterOptions,
}

impl FunctionalOptions {
    pub fn for_dim(n: usize) -> Self {
        FunctionalOptions {
            // Ray moments are smooth in the angle, so a coarser circle suffices.
            grid: Arc::new(if n == 2 {
                SphereGrid::new(2, 1024).expect("valid grid size")
            } else {
                SphereGrid::default_for(n)
            }),
            hypothesis: HypothesisOptions::default(),
            tol: 1e-2,
            center: CenterOptions::default(),
        }
    }
}

/// `int f * int g <= (int rho(|x|^2) dx)^2` for a pair satisfying the
/// hypothesis at `z` (the centre of `f` when `z` is `None`). When `g` is
/// `None` the rho-polar of `f` is used.
pub fn functional_santalo_verify(
    f: &LogConcaveFn,
    g: Option<&dyn Evaluator>,
    rho: &Rho,
    z: Option<&[f64]>,
    opts: &FunctionalOptions,
) -> Result<Report> {
    let n = f.dim();
    let mut r = Report::new("functional-check");
    let z: Vec<f64> = match z {
        Some(z) => {
            crate::error::check_dim(n, z.len())?;
            z.to_vec()
        }
        None => {
            let c = find_center(f, opts.grid.clone(), &opts.center)?;
            r.value("center_residual", c.residual);
            let cert = c.body.certify_convex(4000, opts.hypothesis.seed);
            r.flag("kz_convex", cert.convex).value("kz_worst_gauge", cert.worst_gauge);
            c.z0
        }
    };
    r.vector("z", &z);
    let owned;
    let g: &dyn Evaluator = match g {
        Some(g) => g,
        None => {
            owned = PolarFunction::new(f, rho, &z)?;
            &owned
        }
    };
    crate::error::check_dim(n, g.dim())?;
    let hyp = hypothesis_check(f, g, rho, &z, &opts.hypothesis);
    r.value("hypothesis_max_ratio", hyp.max_ratio)
        .value("hypothesis_pairs", hyp.pairs as f64);
    if !hyp.passed {
        let (x, y) = hyp.witness.unwrap_or_default();
        return Err(Error::HypothesisFail(format!(
            "f(x) g(y) exceeds rho(<x-z,y-z>)^2 by factor {:e} at x = {x:?}, y = {y:?}",
            hyp.max_ratio
        )));
    }
    let int_f = integrate_polar(f, &z, &opts.grid);
    let int_g = integrate_polar(g, &z, &opts.grid);
    let (c_n, full) = c_n_rho(rho, n)?;
    let lhs = int_f * int_g;
    let rhs = full * full;
    let margin = (rhs - lhs) / rhs;
    r.value("integral_f", int_f)
        .value("integral_g", int_g)
        .value("c_n", c_n)
        .value("lhs", lhs)
        .value("rhs", rhs)
        .value("margin", margin)
        .flag("near_equality", margin.abs() < 1e-3);
    r.check("functional_santalo", TAG_FUNCTIONAL, Relation::Le, lhs, rhs, opts.tol);
    Ok(r)
}

/// `K_z(f2) ⊆ c_n(rho) K_z(f1)°`, checked on grid directions.
pub fn inclusion_check(
    f1: &dyn Evaluator,
    f2: &dyn Evaluator,
    rho: &Rho,
    z: &[f64],
    grid: Arc<SphereGrid>,
) -> Result<Report> {
    let n = f1.dim();
    crate::error::check_dim(n, f2.dim())?;
    let k1 = body_kz(f1, z, grid.clone())?;
    let (c_n, _) = c_n_rho(rho, n)?;
    let h = k1.supports();
    let mut worst = f64::NEG_INFINITY;
    let mut tight = f64::INFINITY;
    let mut loose = 0.0f64;
    for (u, hu) in grid.nodes().iter().zip(h) {
        let r2 = ray_moment(f2, z, u).powf(1.0 / n as f64);
        let slack = r2 * hu / c_n - 1.0;
        worst = worst.max(slack);
        tight = tight.min(slack.abs());
        loose = loose.max(slack.abs());
    }
    let mut r = Report::new("inclusion-check");
    r.value("c_n", c_n)
        .value("worst_excess", worst)
        .value("closest_gap", tight)
        .value("widest_gap", loose)
        .flag("tight", worst.abs() < 1e-3);
    r.check("inclusion", TAG_INCLUSION, Relation::Le, worst, 0.0, 0.0);
    let last = r.assertions.last_mut().unwrap();
    last.relation = Relation::CloseAbs;
    last.tolerance = 1e-6;
    last.passed = worst <= 1e-6;
    Ok(r)
}

#[derive(Debug, Clone, Copy)]
pub struct PrekopaOptions {
    /// Integrate over `[0, extent]^n`.
    pub extent: f64,
    pub samples: usize,
    pub seed: u64,
    /// The caller asserts the functions are unconditional, so that full-space
    /// integrals are `2^n` times the positive-orthant integrals.
    pub unconditional: bool,
    pub tol: f64,
}

impl Default for PrekopaOptions {
    fn default() -> Self {
        PrekopaOptions { extent: 40.0, samples: 20_000, seed: 0, unconditional: true, tol: 1e-6 }
    }
}

fn orthant_integral(f: &dyn Fn(&[f64]) -> f64, n: usize, lo: f64, hi: f64, exp_sub: bool) -> f64 {
    let opts = QuadOptions { rel_tol: 1e-11, ..Default::default() };
    // With `exp_sub`, integrate t -> f(e^t) e^{sum t} over [lo, hi]^n instead.
    let g = |x: &[f64]| -> f64 {
        if exp_sub {
            let e: Vec<f64> = x.iter().map(|t| t.exp()).collect();
            f(&e) * x.iter().sum::<f64>().exp()
        } else {
            f(x)
        }
    };
    match n {
        1 => integrate_lenient(|t| g(&[t]), lo, hi, &[], &opts),
        _ => integrate_lenient(
            |s| integrate_lenient(|t| g(&[s, t]), lo, hi, &[], &opts),
            lo,
            hi,
            &[],
            &opts,
        ),
    }
}

/// A function on the positive orthant.
pub type Density<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Geometric-mean Prékopa-Leindler: if `f1(x) f2(y) <= f3(sqrt(x y))^2`
/// coordinatewise on the positive orthant, then
/// `int f1 * int f2 <= (int f3)^2`.
pub fn prekopa_geometric_check(
    fs: [Density<'_>; 3],
    n: usize,
    opts: &PrekopaOptions,
) -> Result<Report> {
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported("geometric-mean check is implemented for n = 1, 2".into()));
    }
    if !opts.unconditional {
        return Err(Error::HypothesisFail("functions must be unconditional".into()));
    }
    let e = opts.extent;
    // Hypothesis on random pairs in the open orthant.
    let mut worst = 0.0f64;
    let mut witness = None;
    for k in 0..opts.samples {
        let mut rng = crate::rng::stream(opts.seed, k as u64);
        let scale = [0.02, 0.1, 0.3, 1.0][k % 4] * e;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
        let y: Vec<f64> = if k % 3 == 0 {
            let c = (rng.gen_range(-3.0f64..3.0)).exp();
            x.iter().map(|v| v * c).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0.0..scale)).collect()
        };
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a * b).sqrt()).collect();
        let num = fs[0](&x) * fs[1](&y);
        if num == 0.0 {
            continue;
        }
        let den = fs[2](&m).powi(2);
        let ratio = if den > 0.0 { num / den } else { f64::INFINITY };
        if ratio > worst {
            worst = ratio;
            witness = Some((x, y));
        }
    }
    if worst > 1.0 + 1e-9 {
        let (x, y) = witness.unwrap();
        return Err(Error::HypothesisFail(format!(
            "f1(x) f2(y) exceeds f3(sqrt(xy))^2 by factor {worst:e} at x = {x:?}, y = {y:?}"
        )));
    }
    let factor = 2f64.powi(n as i32);
    let ints: Vec<f64> = fs.iter().map(|f| factor * orthant_integral(*f, n, 0.0, e, false)).collect();
    let subs: Vec<f64> = fs
        .iter()
        .map(|f| factor * orthant_integral(*f, n, -40.0, e.ln(), true))
        .collect();
    let lhs = ints[0] * ints[1];
    let rhs = ints[2] * ints[2];
    let mut r = Report::new("prekopa-check");
    r.value("integral_f1", ints[0])
        .value("integral_f2", ints[1])
        .value("integral_f3", ints[2])
        .value("hypothesis_max_ratio", worst)
        .value("lhs", lhs)
        .value("rhs", rhs)
        .value("margin", (rhs - lhs) / rhs);
    for j in 0..3 {
        r.check(
            &format!("substitution_f{}", j + 1),
            TAG_PREKOPA,
            Relation::Close,
            subs[j],
            ints[j],
            1e-3,
        );
    }
    r.check("prekopa_geometric", TAG_PREKOPA, Relation::Le, lhs, rhs, opts.tol);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logconcave::{Family, Profile};
    use crate::polytope::PolytopeV;

    #[test]
    fn center_of_one_sided_exponential() {
        let f = LogConcaveFn::new(Family::Product(vec![Profile::OneSidedExp { rate: 1.0 }]), None, 1.0).unwrap();
        let c = find_center(&f, Arc::new(SphereGrid::default_for(1)), &CenterOptions::default()).unwrap();
        assert!((c.z0[0] - 2f64.ln()).abs() < 1e-12, "{}", c.z0[0]);
    }

    #[test]
    fn center_of_indicator_is_centroid() {
        let t = PolytopeV::standard_simplex(2);
        let f = LogConcaveFn::indicator(t);
        let c = find_center(&f, Arc::new(SphereGrid::new(2, 1024).unwrap()), &CenterOptions::default()).unwrap();
        assert!(vector::dist(&c.z0, &[1.0 / 3.0, 1.0 / 3.0]) < 1e-5, "{:?}", c.z0);
    }

    #[test]
    fn gaussian_polar_is_gaussian() {
        // With rho = exp(-t), the polar of exp(-|x|^2) is itself (up to slack).
        let f = LogConcaveFn::gaussian(2);
        let g = PolarFunction::new(&f, &Rho::exp(), &[0.0, 0.0]).unwrap();
        for y in [[0.5f64, 0.1], [1.0, -1.0], [0.0, 0.02]] {
            let exact = (-(y[0] * y[0] + y[1] * y[1])).exp();
            assert!((g.eval(&y) / exact - 1.0).abs() < 2e-6, "{y:?}: {}", g.eval(&y));
        }
    }

    #[test]
    fn prekopa_gaussian_equality() {
        let f = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        let r = prekopa_geometric_check([&f, &f, &f], 2, &PrekopaOptions { samples: 2000, ..Default::default() }).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.get("margin").unwrap().abs() < 1e-9);
    }

    #[test]
    fn mixed_rate_exponentials_satisfy_hypothesis() {
        let f1 = |x: &[f64]| (-2.0 * x[0]).exp();
        let f2 = |x: &[f64]| (-0.5 * x[0]).exp();
        let f3 = |x: &[f64]| (-x[0]).exp();
        // Brute-force max of f1(x) f2(y) / f3(sqrt(xy))^2 = exp(-(sqrt(2x) - sqrt(y/2))^2).
        let mut worst = 0.0f64;
        for i in 0..400 {
            for j in 0..400 {
                let (x, y) = (i as f64 * 0.05, j as f64 * 0.05);
                worst = worst.max(f1(&[x]) * f2(&[y]) / f3(&[(x * y).sqrt()]).powi(2));
            }
        }
        assert!(worst <= 1.0 + 1e-12, "{worst}");
        let r = prekopa_geometric_check([&f1, &f2, &f3], 1, &PrekopaOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.get("margin").unwrap().abs() < 1e-6);
    }

    #[test]
    fn swapped_rates_report_witness() {
        let f1 = |x: &[f64]| (-0.5 * x[0]).exp();
        let f3 = |x: &[f64]| (-2.0 * x[0]).exp();
        match prekopa_geometric_check([&f1, &f1, &f3], 1, &PrekopaOptions::default()) {
            Err(Error::HypothesisFail(msg)) => assert!(msg.contains("x = ")),
            other => panic!("{other:?}"),
        }
    }
}
