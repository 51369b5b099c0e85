//! Polar bodies, volume products and the Santaló point.
//!
//! `F(z) = |K^{*z}| = v_n * mean_u (h_K(u) - <z,u>)^{-n}` is strictly convex
//! on the interior of `K`, with gradient `(n+1) * int_P y dy` and Hessian
//! `(n+1)(n+2) * int_P y y^T dy` where `P = (K - z)^\circ`. The Santaló point
//! is its unique minimizer, where the centroid of `P` vanishes.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::report::{Relation, Report};
use crate::vector::{self, dot, unit_ball_volume};

pub const TAG_BS: &str = "BS-ineq";

pub fn polar(body: &ConvexBody, z: &[f64]) -> Result<ConvexBody> {
    Ok(match body {
        ConvexBody::Polytope(p) => p.polar(z)?.into(),
        ConvexBody::Star(s) => s.polar(z)?.into(),
    })
}

pub fn polar_volume(body: &ConvexBody, z: &[f64]) -> Result<f64> {
    Ok(polar(body, z)?.volume())
}

pub fn volume_product(body: &ConvexBody, z: &[f64]) -> Result<f64> {
    Ok(body.volume() * polar_volume(body, z)?)
}

/// Value, gradient and Hessian of `z -> |K^{*z}|`.
struct PolarObjective {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

fn objective(body: &ConvexBody, z: &[f64]) -> Result<PolarObjective> {
    let n = body.dim();
    let nf = n as f64;
    match body {
        ConvexBody::Polytope(p) => {
            let m = p.polar(z)?.moments();
            Ok(PolarObjective {
                value: m.volume,
                grad: vector::scale(&m.first, nf + 1.0),
                hess: m
                    .second
                    .iter()
                    .map(|r| vector::scale(r, (nf + 1.0) * (nf + 2.0)))
                    .collect(),
            })
        }
        ConvexBody::Star(s) => {
            if s.gauge(z) >= 1.0 {
                return Err(Error::CenterOutside);
            }
            let h = s.supports();
            let vn = unit_ball_volume(n);
            let mut value = 0.0;
            let mut grad = vec![0.0; n];
            let mut hess = vec![vec![0.0; n]; n];
            for ((u, hv), w) in s.grid().nodes().iter().zip(h).zip(s.grid().weights()) {
                let d = hv - dot(z, u);
                if d <= 0.0 {
                    return Err(Error::CenterOutside);
                }
                let p = w * d.powi(-(n as i32));
                value += p;
                let g = p / d;
                let hh = g / d;
                for i in 0..n {
                    grad[i] += g * u[i];
                    for j in 0..n {
                        hess[i][j] += hh * u[i] * u[j];
                    }
                }
            }
            Ok(PolarObjective {
                value: vn * value,
                grad: vector::scale(&grad, nf * vn),
                hess: hess.iter().map(|r| vector::scale(r, nf * (nf + 1.0) * vn)).collect(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SantaloOptions {
    /// Accept when `|centroid((K - z)°)| <= tol * |P|^{1/n}`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SantaloOptions {
    fn default() -> Self {
        SantaloOptions { tol: 1e-10, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SantaloPoint {
    pub point: Vec<f64>,
    /// `|centroid(K^{*z}) - z|`.
    pub residual: f64,
    pub polar_volume: f64,
    pub volume: f64,
    pub volume_product: f64,
    pub iterations: usize,
    /// `F(z +- delta e_k) >= F(z)` for every coordinate probe.
    pub probes_ok: bool,
    /// Smallest `F(probe) / F(z)`.
    pub probe_ratio: f64,
}

pub fn santalo_point(body: &ConvexBody, opts: &SantaloOptions) -> Result<SantaloPoint> {
    let n = body.dim();
    let nf = n as f64;
    let mut z = body.centroid();
    let mut cur = objective(body, &z)?;
    let resid = |o: &PolarObjective| vector::norm(&o.grad) / ((nf + 1.0) * o.value);
    let scale = |o: &PolarObjective| o.value.powf(1.0 / nf);
    let diam = body.diameter_bound();
    let mut iters = 0;
    while iters < opts.max_iter {
        if resid(&cur) <= 1e-14 * scale(&cur) {
            break;
        }
        iters += 1;
        let step = match vector::solve(&cur.hess, &cur.grad) {
            Some(s) => vector::scale(&s, -1.0),
            None => break,
        };
        let slope = dot(&cur.grad, &step);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = vector::axpy(&z, t, &step);
            if let Ok(o) = objective(body, &cand) {
                if o.value <= cur.value + 1e-4 * t * slope || resid(&o) < resid(&cur) {
                    z = cand;
                    cur = o;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved || t * vector::norm(&step) < 1e-16 * diam {
            break;
        }
    }
    if resid(&cur) > opts.tol * scale(&cur) {
        // Derivative-free fallback on log F.
        let r = crate::optim::nelder_mead(
            |x| objective(body, x).map(|o| o.value.ln()).unwrap_or(f64::INFINITY),
            &z,
            1e-3 * diam,
            1e-14 * diam,
            0.0,
            20_000,
        );
        if let Ok(o) = objective(body, &r.x) {
            if resid(&o) < resid(&cur) {
                z = r.x;
                cur = o;
            }
        }
        iters += r.iterations;
        if resid(&cur) > opts.tol * scale(&cur) {
            return Err(Error::SolverFail {
                message: "Santaló point iteration did not converge".into(),
                best: z,
                residual: resid(&cur),
            });
        }
    }
    let delta = 1e-4 * diam;
    let mut probe_ratio = f64::INFINITY;
    for k in 0..n {
        for s in [-1.0, 1.0] {
            let mut q = z.clone();
            q[k] += s * delta;
            if let Ok(o) = objective(body, &q) {
                probe_ratio = probe_ratio.min(o.value / cur.value);
            }
        }
    }
    let volume = body.volume();
    Ok(SantaloPoint {
        residual: resid(&cur),
        polar_volume: cur.value,
        volume,
        volume_product: volume * cur.value,
        iterations: iters,
        probes_ok: probe_ratio >= 1.0 - 1e-12,
        probe_ratio,
        point: z,
    })
}

/// Blaschke-Santaló check at the Santaló point: `|K| |K^{*s}| <= v_n^2`.
pub fn bs_check(body: &ConvexBody, tol: f64, opts: &SantaloOptions) -> Result<Report> {
    let n = body.dim();
    let sp = santalo_point(body, opts)?;
    let bound = unit_ball_volume(n).powi(2);
    let margin = (bound - sp.volume_product) / bound;
    let mut r = Report::new("bs-check");
    r.value("volume", sp.volume)
        .value("polar_volume", sp.polar_volume)
        .value("volume_product", sp.volume_product)
        .value("bound", bound)
        .value("margin", margin)
        .value("residual", sp.residual)
        .value("iterations", sp.iterations as f64)
        .value("probe_ratio", sp.probe_ratio)
        .vector("santalo_point", &sp.point);
    r.check("blaschke_santalo", TAG_BS, Relation::Le, sp.volume_product, bound, tol);
    r.check("probe_minimum", TAG_BS, Relation::Ge, sp.probe_ratio, 1.0, 1e-12);
    let near = margin.abs() < 1e-3;
    r.flag("near_equality", near);
    if near {
        let centered = body.translate(&vector::scale(&sp.point, -1.0))?;
        let e = crate::steiner::ellipsoid_test(&centered)?;
        r.flag("ellipsoid_confirmed", e.is_ellipsoid);
        r.value("ellipsoid_defect", e.defect);
    }
    Ok(r)
}
