//! Seeded property fuzzing of the volume-product inequalities.
//!
//! Case `i` of a run draws everything from `rng::stream(seed, i)`. An
//! instance is a canonical object plus `amplitude` times a random
//! perturbation; the random draws do not depend on the amplitude, so a
//! violation shrinks by halving the amplitude while it still violates.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::functional::{functional_santalo_verify, FunctionalOptions, TAG_FUNCTIONAL};
use crate::legendre::{legendre_santalo_verify, uniform_axis, GridFn, LegendreOptions, TAG_LEGENDRE};
use crate::logconcave::{Family, LogConcaveFn, Profile};
use crate::measure::{measure_product_check, DensityMeasure, MeasureOptions, PotentialTerm, RadialProfile, TAG_MEASURE};
use crate::polar::{bs_check, volume_product, SantaloOptions, TAG_BS};
use crate::polytope::PolytopeV;
use crate::report::{Relation, Report};
use crate::rho::{Rho, RhoFamily};
use crate::rng::{in_ball, stream};
use crate::sphere::SphereGrid;
use crate::star::StarBody;
use crate::vector::{self, unit_ball_volume};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzFamily {
    #[serde(alias = "symmetric-polygons")]
    SymmetricPolytopes,
    ConvexBodies,
    LogconcaveFunctions,
    ConvexGridfns,
    RhoKernels,
    MeasurePairs,
}

impl FuzzFamily {
    fn tag(self) -> &'static str {
        match self {
            FuzzFamily::SymmetricPolytopes | FuzzFamily::ConvexBodies => TAG_BS,
            FuzzFamily::LogconcaveFunctions | FuzzFamily::RhoKernels => TAG_FUNCTIONAL,
            FuzzFamily::ConvexGridfns => TAG_LEGENDRE,
            FuzzFamily::MeasurePairs => TAG_MEASURE,
        }
    }

    fn generator(self) -> CaseFn {
        match self {
            FuzzFamily::SymmetricPolytopes => symmetric_polytope,
            FuzzFamily::ConvexBodies => convex_body,
            FuzzFamily::LogconcaveFunctions => logconcave_function,
            FuzzFamily::ConvexGridfns => convex_gridfn,
            FuzzFamily::RhoKernels => rho_kernel,
            FuzzFamily::MeasurePairs => measure_pair,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FuzzOptions {
    pub family: FuzzFamily,
    pub count: usize,
    pub seed: u64,
    /// Fixes the dimension where the family supports several.
    pub dim: Option<usize>,
    /// A case violates when its relative margin is below `-tol`.
    pub tol: f64,
    /// Halvings attempted when shrinking a violation.
    pub shrink_steps: usize,
}

impl FuzzOptions {
    pub fn new(family: FuzzFamily, count: usize, seed: u64) -> Self {
        FuzzOptions { family, count, seed, dim: None, tol: 1e-2, shrink_steps: 16 }
    }
}

/// Relative margin `(rhs - lhs) / rhs` of one instance; `consistent` is
/// false when an internal cross-check of the instance failed.
#[derive(Debug, Clone)]
struct Case {
    margin: f64,
    consistent: bool,
    detail: String,
}

struct Ctx {
    seed: u64,
    index: usize,
    dim: Option<usize>,
}

type CaseFn = fn(&mut ChaCha8Rng, f64, &Ctx) -> Result<Case>;

enum Outcome {
    Pass(f64),
    Violation { margin: f64, amplitude: f64, detail: String },
    Inconsistent(String),
    Skipped(String),
    Failed(String),
}

fn evaluate(gen: CaseFn, opts: &FuzzOptions, index: usize, amplitude: f64) -> Result<Case> {
    let ctx = Ctx { seed: opts.seed, index, dim: opts.dim };
    gen(&mut stream(opts.seed, index as u64), amplitude, &ctx)
}

fn run_case(gen: CaseFn, opts: &FuzzOptions, index: usize) -> Outcome {
    match evaluate(gen, opts, index, 1.0) {
        Ok(c) if c.margin < -opts.tol || c.margin.is_nan() => {
            let mut best = (c.margin, 1.0, c.detail);
            let mut a = 1.0;
            for _ in 0..opts.shrink_steps {
                a *= 0.5;
                match evaluate(gen, opts, index, a) {
                    Ok(s) if s.margin < -opts.tol || s.margin.is_nan() => best = (s.margin, a, s.detail),
                    _ => break,
                }
            }
            Outcome::Violation { margin: best.0, amplitude: best.1, detail: best.2 }
        }
        Ok(c) if !c.consistent => Outcome::Inconsistent(c.detail),
        Ok(c) => Outcome::Pass(c.margin),
        // Random geometry that does not meet the hypotheses is not a case.
        Err(e @ (Error::DegenerateBody(_) | Error::CenterOutside)) => Outcome::Skipped(e.to_string()),
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// Runs `count` cases in parallel and assembles the report in case order.
pub fn fuzz(opts: &FuzzOptions) -> Report {
    let gen = opts.family.generator();
    let outcomes: Vec<Outcome> = (0..opts.count).into_par_iter().map(|i| run_case(gen, opts, i)).collect();
    let mut r = Report::new("fuzz");
    let (mut violations, mut skipped, mut failed, mut inconsistent) = (0usize, 0usize, 0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    let mut worst = None;
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Outcome::Pass(m) => {
                if *m < min_margin {
                    min_margin = *m;
                    worst = Some(i);
                }
            }
            Outcome::Violation { margin, amplitude, detail } => {
                violations += 1;
                if !(*margin >= min_margin) {
                    min_margin = *margin;
                    worst = Some(i);
                }
                r.warn(format!("case {i}: violation, margin {margin:e} at amplitude {amplitude}: {detail}"));
            }
            Outcome::Inconsistent(d) => {
                inconsistent += 1;
                r.warn(format!("case {i}: cross-check failed: {d}"));
            }
            Outcome::Skipped(why) => {
                skipped += 1;
                r.warn(format!("case {i}: skipped: {why}"));
            }
            Outcome::Failed(e) => {
                failed += 1;
                r.warn(format!("case {i}: {e}"));
            }
        }
    }
    let tag = opts.family.tag();
    r.value("cases", opts.count as f64)
        .value("violations", violations as f64)
        .value("skipped", skipped as f64)
        .value("failures", failed as f64)
        .value("inconsistent", inconsistent as f64)
        .value("tolerance", opts.tol);
    if let Some(w) = worst {
        r.value("min_margin", min_margin).value("worst_case", w as f64);
    }
    let m = if min_margin.is_finite() { min_margin } else { 0.0 };
    r.check("min_margin", tag, Relation::Ge, m, -opts.tol, 0.0);
    r.check("solver_failures", tag, Relation::CloseAbs, (failed + inconsistent) as f64, 0.0, 0.0);
    r
}

// Shared random pieces. Every helper draws the same number of values
// whatever the amplitude.

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn near_identity(rng: &mut ChaCha8Rng, n: usize, spread: f64, amp: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = uniform(rng, -spread, spread);
                    if i == j { 1.0 + amp * e } else { amp * e }
                })
                .collect()
        })
        .collect()
}

fn apply(t: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    t.iter().map(|r| vector::dot(r, x)).collect()
}

/// `k` well-spread unit vectors.
fn canonical_points(n: usize, k: usize, phase: f64) -> Vec<Vec<f64>> {
    match n {
        1 => (0..k).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..k)
            .map(|i| {
                let a = phase + 2.0 * PI * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere.
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - y * y).sqrt();
                    let a = phase + golden * i as f64;
                    vec![r * a.cos(), y, r * a.sin()]
                })
                .collect()
        }
    }
}

fn perturbed(rng: &mut ChaCha8Rng, base: Vec<Vec<f64>>, radius: f64, amp: f64) -> Vec<Vec<f64>> {
    base.into_iter()
        .map(|c| {
            let d = in_ball(rng, c.len(), radius);
            vector::axpy(&c, amp, &d)
        })
        .collect()
}

/// Attaches the instance description to solver and hypothesis failures.
fn annotate(e: Error, detail: &str) -> Error {
    match e {
        Error::SolverFail { message, best, residual } => {
            Error::SolverFail { message: format!("{message} [{detail}]"), best, residual }
        }
        Error::HypothesisFail(m) => Error::HypothesisFail(format!("{m} [{detail}]")),
        other => other,
    }
}

fn margin_of(r: &Report) -> f64 {
    r.get("margin").unwrap_or(f64::NAN)
}

// Families.

fn symmetric_polytope(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let n = ctx.dim.unwrap_or(if ctx.index % 3 == 2 { 3 } else { 2 });
    let pairs = if n == 2 { rng.gen_range(2..=6) } else { rng.gen_range(3..=7) };
    let base = if n == 3 && pairs == 3 {
        (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    } else if n == 2 {
        // Half of a regular 2k-gon; the other half comes from the reflection.
        (0..pairs)
            .map(|i| {
                let a = PI * i as f64 / pairs as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        canonical_points(n, pairs, 0.0)
    };
    let half = perturbed(rng, base, 0.7, amp);
    let t = near_identity(rng, n, 0.5, amp);
    let pts: Vec<Vec<f64>> = half
        .iter()
        .flat_map(|p| [apply(&t, p), apply(&t, &vector::scale(p, -1.0))])
        .collect();
    let p = PolytopeV::from_points(pts)?;
    let body: ConvexBody = p.into();
    let vp = volume_product(&body, &vec![0.0; n])?;
    let bound = unit_ball_volume(n).powi(2);
    Ok(Case {
        margin: (bound - vp) / bound,
        consistent: true,
        detail: format!("n = {n}, vp = {vp}, vertices = {:?}", body.to_file()),
    })
}

fn convex_body(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let n = ctx.dim.unwrap_or(if ctx.index % 3 == 2 { 3 } else { 2 });
    let ellipsoid = ctx.index % 10 == 9;
    let m = rng.gen_range(n + 1..=n + 7);
    let phase = uniform(rng, 0.0, 2.0 * PI);
    let pts = perturbed(rng, canonical_points(n, m, phase), 0.9, amp);
    let t = near_identity(rng, n, 0.5, amp);
    let shift = vector::scale(&in_ball(rng, n, 2.0), amp);
    let axes: Vec<f64> = (0..n).map(|_| (amp * uniform(rng, -1.0, 1.0)).exp()).collect();
    let body: ConvexBody = if ellipsoid {
        let grid = Arc::new(SphereGrid::default_for(n));
        let e: ConvexBody = StarBody::ellipsoid(grid, &axes)?.into();
        // The sampled encoding is star-shaped about the origin, so the shift
        // stays within 0.8 of the body in its own coordinates.
        let inside: Vec<f64> = shift.iter().zip(&axes).map(|(s, a)| 0.4 * s * a).collect();
        e.linear_image(&t)?.translate(&apply(&t, &inside))?
    } else {
        let pts: Vec<Vec<f64>> = pts.iter().map(|p| vector::add(&apply(&t, p), &shift)).collect();
        PolytopeV::from_points(pts)?.into()
    };
    let detail = format!("n = {n}, ellipsoid = {ellipsoid}, body = {:?}", body.to_file());
    let r = bs_check(&body, 1e-2, &SantaloOptions::default()).map_err(|e| annotate(e, &detail))?;
    let residual = r.get("residual").unwrap_or(f64::NAN);
    Ok(Case { margin: margin_of(&r), consistent: residual <= 1e-6, detail: format!("{detail}, residual = {residual:e}") })
}

fn random_rho(rng: &mut ChaCha8Rng, amp: f64) -> Rho {
    let kind = rng.gen_range(0..5);
    let u = uniform(rng, -1.0, 1.0);
    let p = uniform(rng, 0.0, 1.0);
    let knots = rng.gen_range(2..=6);
    let family = match kind {
        0 => RhoFamily::Exp { rate: (amp * u).exp() },
        1 => RhoFamily::Power { m: (1.0 + amp * u).max(0.05) * 2.0 },
        2 => RhoFamily::Indicator { threshold: (amp * u).exp() },
        3 => RhoFamily::Gaussian,
        _ => {
            // Concave and decreasing on its support, hence log-concave.
            let end = (amp * u).exp();
            let power = 1.0 + 2.0 * amp * p;
            RhoFamily::Piecewise {
                knots: (0..=knots)
                    .map(|i| {
                        let t = end * i as f64 / knots as f64;
                        (t, 1.0 - 0.9 * (t / end).powf(power))
                    })
                    .collect(),
            }
        }
    };
    Rho::new(family).expect("generated kernels are valid")
}

fn random_polygon(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Result<PolytopeV> {
    if n == 1 {
        let a = 1.0 + amp * uniform(rng, -0.5, 1.0);
        let b = 1.0 + amp * uniform(rng, -0.5, 1.0);
        return PolytopeV::new(vec![vec![-a], vec![b]]);
    }
    let k = rng.gen_range(3..=6);
    let phase = uniform(rng, 0.0, 2.0 * PI);
    // Perturbations below the inradius of the regular triangle keep the
    // origin interior.
    PolytopeV::from_points(perturbed(rng, canonical_points(n, k, phase), 0.4, amp))
}

fn random_function(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Result<LogConcaveFn> {
    let kind = rng.gen_range(0..4);
    let t = near_identity(rng, n, 0.5, amp);
    let shift = vector::scale(&in_ball(rng, n, 1.0), amp);
    let poly = random_polygon(rng, n, amp)?;
    let profiles: Vec<Profile> = (0..n)
        .map(|_| {
            let which = rng.gen_range(0..4);
            let (u, v) = (uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
            match which {
                0 => Profile::Gaussian { width: (amp * u).exp() },
                1 => Profile::Laplace { width: (amp * u).exp() },
                2 => Profile::OneSidedExp { rate: (amp * u).exp() },
                _ => Profile::Interval { lo: -1.0 + amp * u, hi: 1.0 + amp * v },
            }
        })
        .collect();
    let family = match kind {
        0 => Family::Gaussian { t },
        1 => Family::ExpGauge(poly),
        2 => Family::Indicator(poly),
        _ => Family::Product(profiles),
    };
    LogConcaveFn::new(family, Some(shift), 1.0)
}

fn functional_opts(n: usize, seed: u64) -> FunctionalOptions {
    let mut o = FunctionalOptions::for_dim(n);
    if n == 2 {
        o.grid = Arc::new(SphereGrid::new(2, 512).expect("valid grid size"));
    }
    o.hypothesis.samples = 1000;
    o.hypothesis.seed = seed;
    o
}

fn logconcave_function(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let n = ctx.dim.unwrap_or(1 + ctx.index % 2);
    let f = random_function(rng, n, amp)?;
    let rho = random_rho(rng, amp);
    let detail = format!("f = {:?}, shift = {:?}, rho = {:?}", f.family(), f.shift(), rho.family);
    let r = functional_santalo_verify(&f, None, &rho, None, &functional_opts(n, ctx.seed))
        .map_err(|e| annotate(e, &detail))?;
    Ok(Case { margin: margin_of(&r), consistent: true, detail })
}

/// Grid on `[-extent, extent]^n` with `phi` sampled at the nodes.
fn sampled(n: usize, extent: f64, nodes: usize, phi: impl Fn(&[f64]) -> f64) -> Result<GridFn> {
    GridFn::from_fn(vec![uniform_axis(-extent, extent, nodes); n], phi)
}

fn convex_gridfn(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let n = ctx.dim.unwrap_or(1 + ctx.index % 2);
    let nodes = if n == 1 { 1201 } else { 201 };
    let kind = rng.gen_range(0..3);
    let rho = match rng.gen_range(0..4) {
        0 | 1 => Rho::exp(),
        2 => Rho::power(uniform(rng, 1.0, 4.0))?,
        _ => Rho::indicator(),
    };
    let exp_kernel = matches!(rho.family, RhoFamily::Exp { .. });
    let t = near_identity(rng, n, 0.3, amp);
    let a = vector::scale(&in_ball(rng, n, 0.5), amp);
    let beta = amp * uniform(rng, 0.0, 1.0);
    let c = if exp_kernel { amp * uniform(rng, -1.0, 1.0) } else { 0.0 };
    let k = 3 + rng.gen_range(0..4);
    let slope_radius = uniform(rng, 1.0, 2.0);
    let phase = uniform(rng, 0.0, 2.0 * PI);
    let slopes: Vec<Vec<f64>> = perturbed(rng, canonical_points(n, k.max(2), phase), 0.3, amp)
        .into_iter()
        .map(|s| vector::scale(&s, slope_radius))
        .collect();
    let intercepts: Vec<f64> = (0..slopes.len()).map(|_| amp * uniform(rng, 0.0, 0.5)).collect();
    let level = rho.negligible_beyond() + c.abs();
    let (phi, extent) = match kind {
        0 | 1 => {
            let smin = nalgebra::DMatrix::from_fn(n, n, |i, j| t[i][j]).singular_values().min();
            let extent = vector::norm(&a) + 1.2 * (2.0 * level).sqrt() / smin + 0.5;
            let l1 = if kind == 1 { beta } else { 0.0 };
            let phi = sampled(n, extent, nodes, |x| {
                let d = vector::sub(x, &a);
                let q = 0.5 * t.iter().map(|r| vector::dot(r, &d).powi(2)).sum::<f64>();
                q + l1 * d.iter().map(|v| v.abs()).sum::<f64>() + c
            })?;
            (phi, extent)
        }
        _ => {
            // phi(x) >= inradius * |x| - max intercept, with the inradius
            // taken about the origin.
            let hull = PolytopeV::from_points(slopes.clone())?;
            let inradius = hull.depth(&vec![0.0; n]);
            if !(inradius > 1e-3) {
                return Err(Error::DegenerateBody("slope hull does not surround the origin".into()));
            }
            let bmax = intercepts.iter().cloned().fold(0.0, f64::max);
            let extent = 1.1 * (level + bmax + c.abs()) / inradius + 0.5;
            let phi = sampled(n, extent, nodes, |x| {
                slopes
                    .iter()
                    .zip(&intercepts)
                    .map(|(s, b)| vector::dot(s, x) + b)
                    .fold(f64::NEG_INFINITY, f64::max)
                    + c
            })?;
            (phi, extent)
        }
    };
    let detail = format!(
        "n = {n}, kind = {kind}, extent = {extent}, rho = {:?}, T = {t:?}, a = {a:?}, beta = {beta}, c = {c}, \
         slopes = {slopes:?}, intercepts = {intercepts:?}",
        rho.family
    );
    let r = legendre_santalo_verify(&phi, &rho, None, &LegendreOptions::default()).map_err(|e| annotate(e, &detail))?;
    Ok(Case { margin: margin_of(&r), consistent: true, detail })
}

fn rho_kernel(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let rho = random_rho(rng, amp);
    let shift = amp * uniform(rng, -1.0, 1.0);
    let detail = format!("rho = {:?}, shift = {shift}", rho.family);
    rho.verify_flags(ctx.seed).map_err(|e| annotate(e, &detail))?;
    let f = LogConcaveFn::new(Family::Gaussian { t: vec![vec![1.0]] }, Some(vec![shift]), 1.0)?;
    let fr = functional_santalo_verify(&f, None, &rho, None, &functional_opts(1, ctx.seed))
        .map_err(|e| annotate(e, &detail))?;
    let phi = sampled(1, 2.0 * (rho.negligible_beyond() + 1.0).sqrt() + 1.0, 1201, |x| 0.5 * x[0] * x[0])?;
    let lr = legendre_santalo_verify(&phi, &rho, None, &LegendreOptions::default()).map_err(|e| annotate(e, &detail))?;
    Ok(Case {
        margin: margin_of(&fr).min(margin_of(&lr)),
        consistent: true,
        detail: format!(
            "rho = {:?}, functional margin {:e}, legendre margin {:e}",
            rho.family,
            margin_of(&fr),
            margin_of(&lr)
        ),
    })
}

fn measure_pair(rng: &mut ChaCha8Rng, amp: f64, ctx: &Ctx) -> Result<Case> {
    let unconditional = rng.gen_range(0..2) == 0;
    let k = rng.gen_range(2..=5);
    let phase = uniform(rng, 0.0, PI);
    let half = perturbed(rng, canonical_points(2, 2 * k, phase).into_iter().take(k).collect(), 0.5, amp);
    let scale = (amp * uniform(rng, -1.0, 1.0)).exp();
    let terms: Vec<PotentialTerm> = (0..2)
        .map(|_| PotentialTerm {
            coef: 0.5 * (amp * uniform(rng, -1.0, 1.0)).exp(),
            offset: amp * uniform(rng, 0.0, 0.5),
            power: 2.0 + amp * uniform(rng, -1.0, 1.0),
        })
        .collect();
    let which = rng.gen_range(0..4);
    let (s, w) = ((amp * uniform(rng, -1.0, 1.0)).exp(), (amp * uniform(rng, -0.5, 0.5)).exp());
    let (mu, pts): (DensityMeasure, Vec<Vec<f64>>) = if unconditional {
        let pts = half
            .iter()
            .flat_map(|p| {
                let (x, y) = (p[0].abs() * scale, p[1].abs() * scale);
                [vec![x, y], vec![-x, y], vec![x, -y], vec![-x, -y]]
            })
            .collect();
        (DensityMeasure::UnconditionalLogconcave { terms }, pts)
    } else {
        let profile = match which {
            0 => RadialProfile::Gaussian { sigma: s },
            1 => RadialProfile::Exponential { rate: s },
            2 => RadialProfile::Flat { radius: 0.5 * w, rate: s },
            _ => RadialProfile::Truncated { radius: 2.0 * w },
        };
        let pts = half
            .iter()
            .flat_map(|p| [vector::scale(p, scale), vector::scale(p, -scale)])
            .collect();
        (DensityMeasure::RotationInvariant { dim: 2, profile }, pts)
    };
    let body: ConvexBody = PolytopeV::from_points(pts)?.into();
    let opts = MeasureOptions { mc_samples: 4000, seed: ctx.seed ^ ctx.index as u64, ..Default::default() };
    let r = measure_product_check(&mu, &body, &opts).map_err(|e| annotate(e, &format!("mu = {mu:?}")))?;
    let cross_checks_ok = r.assertions.iter().filter(|a| a.name.starts_with("monte_carlo")).all(|a| a.passed);
    Ok(Case {
        margin: margin_of(&r),
        consistent: cross_checks_ok,
        detail: format!("mu = {mu:?}, body = {:?}", body.to_file()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_do_not_depend_on_order() {
        let o = FuzzOptions::new(FuzzFamily::SymmetricPolytopes, 6, 3);
        let a = fuzz(&o);
        let b = fuzz(&o);
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.passed(), "{:?}", a.warnings);
    }

    #[test]
    fn amplitude_zero_is_canonical() {
        let o = FuzzOptions::new(FuzzFamily::SymmetricPolytopes, 1, 0);
        let c = evaluate(symmetric_polytope, &o, 0, 0.0).unwrap();
        assert!(c.margin >= 0.0);
    }
}
