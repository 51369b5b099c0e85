//! Volume-product inequalities for measures with a density: unconditional
//! log-concave densities on unconditional bodies, and rotation-invariant
//! densities `h(|x|)` on centrally symmetric bodies.
//!
//! `mu(K)` is computed in polar coordinates around the origin,
//! `mu(K) = n v_n * mean_u int_0^{r_K(u)} t^{n-1} density(t u) dt`,
//! and cross-checked by Monte Carlo on a bounding box.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::polar::polar;
use crate::quadrature::{integrate_lenient, QuadOptions};
use crate::report::{Relation, Report};
use crate::sphere::SphereGrid;
use crate::vector::{self, unit_ball_volume};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const TAG_MEASURE: &str = "measure-santalo";

/// `coef * max(|x_i| - offset, 0)^power` for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialTerm {
    pub coef: f64,
    #[serde(default)]
    pub offset: f64,
    pub power: f64,
}

impl PotentialTerm {
    fn eval(&self, x: f64) -> f64 {
        let d = (x.abs() - self.offset).max(0.0);
        if d == 0.0 {
            0.0
        } else {
            self.coef * d.powf(self.power)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// `exp(-r^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `exp(-rate r)`
    Exponential { rate: f64 },
    /// `1` up to `radius`, then `exp(-rate (r - radius))`.
    Flat { radius: f64, rate: f64 },
    /// `1` up to `radius`, then `0`.
    Truncated { radius: f64 },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian { sigma } => (-0.5 * (r / sigma).powi(2)).exp(),
            RadialProfile::Exponential { rate } => (-rate * r).exp(),
            RadialProfile::Flat { radius, rate } => (-rate * (r - radius).max(0.0)).exp(),
            RadialProfile::Truncated { radius } => {
                if r <= radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn breakpoint(&self) -> Option<f64> {
        match *self {
            RadialProfile::Flat { radius, .. } | RadialProfile::Truncated { radius } => Some(radius),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialProfile::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            RadialProfile::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            RadialProfile::Flat { radius, rate } => radius >= 0.0 && rate > 0.0 && radius.is_finite() && rate.is_finite(),
            RadialProfile::Truncated { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("radial profile parameters out of range".into()))
        }
    }

    /// Radius beyond which the profile is negligible.
    fn reach(&self) -> f64 {
        match *self {
            RadialProfile::Gaussian { sigma } => 10.0 * sigma,
            RadialProfile::Exponential { rate } => 45.0 / rate,
            RadialProfile::Flat { radius, rate } => radius + 45.0 / rate,
            RadialProfile::Truncated { radius } => radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityMeasure {
    /// Density `exp(-W)`, `W(x) = sum_i terms[i](x_i)`.
    UnconditionalLogconcave { terms: Vec<PotentialTerm> },
    /// Density `h(|x|)`.
    RotationInvariant { dim: usize, profile: RadialProfile },
}

impl DensityMeasure {
    /// `exp(-|x|^2 / 2)` as an unconditional log-concave density.
    pub fn gaussian(n: usize) -> Self {
        DensityMeasure::UnconditionalLogconcave {
            terms: vec![PotentialTerm { coef: 0.5, offset: 0.0, power: 2.0 }; n],
        }
    }

    /// `exp(-|x|^2 / 2)` as a rotation-invariant density.
    pub fn gaussian_radial(n: usize) -> Self {
        DensityMeasure::RotationInvariant { dim: n, profile: RadialProfile::Gaussian { sigma: 1.0 } }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DensityMeasure::UnconditionalLogconcave { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidInput("potential needs one term per coordinate".into()));
                }
                for t in terms {
                    let ok = t.coef >= 0.0 && t.offset >= 0.0 && t.power >= 1.0;
                    if !(ok && t.coef.is_finite() && t.offset.is_finite() && t.power.is_finite()) {
                        return Err(Error::InvalidInput(
                            "potential terms need coef >= 0, offset >= 0, power >= 1".into(),
                        ));
                    }
                }
                Ok(())
            }
            DensityMeasure::RotationInvariant { dim, profile } => {
                if *dim == 0 {
                    return Err(Error::InvalidInput("dimension must be positive".into()));
                }
                profile.validate()
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityMeasure::UnconditionalLogconcave { terms } => terms.len(),
            DensityMeasure::RotationInvariant { dim, .. } => *dim,
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            DensityMeasure::UnconditionalLogconcave { terms } => {
                (-terms.iter().zip(x).map(|(t, v)| t.eval(*v)).sum::<f64>()).exp()
            }
            DensityMeasure::RotationInvariant { profile, .. } => profile.eval(vector::norm(x)),
        }
    }

    /// Radii along a ray where the density has a kink or a jump.
    fn ray_breaks(&self, u: &[f64]) -> Vec<f64> {
        match self {
            DensityMeasure::UnconditionalLogconcave { terms } => terms
                .iter()
                .zip(u)
                .filter(|(t, c)| t.offset > 0.0 && c.abs() > 0.0)
                .map(|(t, c)| t.offset / c.abs())
                .collect(),
            DensityMeasure::RotationInvariant { profile, .. } => profile.breakpoint().into_iter().collect(),
        }
    }

    /// Radius beyond which the density is negligible (infinite when it is not
    /// integrable along some axis).
    fn reach(&self) -> f64 {
        match self {
            DensityMeasure::UnconditionalLogconcave { terms } => terms
                .iter()
                .map(|t| if t.coef > 0.0 { t.offset + (45.0 / t.coef).powf(1.0 / t.power) } else { f64::INFINITY })
                .map(|r| r * r)
                .sum::<f64>()
                .sqrt(),
            DensityMeasure::RotationInvariant { profile, .. } => profile.reach(),
        }
    }

    /// Sampled structural checks: log-concavity and sign-flip invariance for
    /// unconditional densities; monotone `h` with `t -> h(e^t)` log-concave
    /// for rotation-invariant ones.
    pub fn verify_structure(&self, seed: u64, pairs: usize) -> Result<()> {
        self.validate()?;
        let n = self.dim();
        let radius = self.reach().min(1e3);
        for k in 0..pairs {
            let mut rng = crate::rng::stream(seed, k as u64);
            match self {
                DensityMeasure::UnconditionalLogconcave { .. } => {
                    let a = crate::rng::in_ball(&mut rng, n, radius);
                    let b = crate::rng::in_ball(&mut rng, n, radius);
                    let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
                    let (da, db, dm) = (self.density(&a), self.density(&b), self.density(&mid));
                    if dm * dm < da * db * (1.0 - 1e-9) {
                        return Err(Error::HypothesisFail(format!("density is not log-concave near {mid:?}")));
                    }
                    let flipped: Vec<f64> = a.iter().map(|v| if rng.gen::<bool>() { -v } else { *v }).collect();
                    let df = self.density(&flipped);
                    if (df - da).abs() > 1e-12 * da.max(df) {
                        return Err(Error::HypothesisFail(format!("density is not unconditional at {a:?}")));
                    }
                }
                DensityMeasure::RotationInvariant { profile, .. } => {
                    let s: f64 = rng.gen_range(0.0..radius);
                    let t: f64 = rng.gen_range(0.0..radius);
                    let (lo, hi) = if s < t { (s, t) } else { (t, s) };
                    if profile.eval(hi) > profile.eval(lo) * (1.0 + 1e-12) {
                        return Err(Error::HypothesisFail("radial profile is increasing".into()));
                    }
                    let (a, b) = (lo.max(1e-6).ln(), hi.max(1e-6).ln());
                    let (ha, hb) = (profile.eval(a.exp()), profile.eval(b.exp()));
                    let hm = profile.eval((0.5 * (a + b)).exp());
                    if hm * hm < ha * hb * (1.0 - 1e-9) {
                        return Err(Error::HypothesisFail("t -> h(e^t) is not log-concave".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// `mu(K)` for a body star-shaped about the origin, by ray quadrature.
    pub fn measure_of(&self, body: &ConvexBody, grid: &SphereGrid) -> f64 {
        let n = self.dim();
        let opts = QuadOptions { rel_tol: 1e-11, ..Default::default() };
        let reach = self.reach();
        let total: f64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(u, w)| {
                let r = body.radial(u).min(reach);
                let breaks: Vec<f64> = self.ray_breaks(u).into_iter().filter(|b| *b < r).collect();
                let f = |t: f64| t.powi(n as i32 - 1) * self.density(&vector::scale(u, t));
                w * integrate_lenient(f, 0.0, r, &breaks, &opts)
            })
            .sum();
        n as f64 * unit_ball_volume(n) * total
    }

    /// Monte Carlo estimate of `mu(K)` and its standard error.
    pub fn measure_monte_carlo(&self, body: &ConvexBody, samples: usize, seed: u64) -> (f64, f64) {
        let n = self.dim();
        let half = (0.5 * body.diameter_bound()).max(
            (0..n)
                .flat_map(|k| {
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    let mut f = e.clone();
                    f[k] = -1.0;
                    [body.support(&e), body.support(&f)]
                })
                .fold(0.0, f64::max),
        );
        let half = half.min(self.reach());
        let vol = (2.0 * half).powi(n as i32);
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..samples {
            let mut rng = crate::rng::stream(seed, k as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-half..half)).collect();
            let v = if body.gauge(&x) <= 1.0 { self.density(&x) } else { 0.0 };
            s += v;
            s2 += v * v;
        }
        let m = samples as f64;
        let mean = s / m;
        let var = (s2 / m - mean * mean).max(0.0);
        (vol * mean, vol * (var / m).sqrt())
    }
}

fn is_unconditional(body: &ConvexBody, tol: f64) -> bool {
    let n = body.dim();
    let flips: Vec<Vec<f64>> = (1..(1u32 << n))
        .map(|mask| (0..n).map(|k| if mask & (1 << k) != 0 { -1.0 } else { 1.0 }).collect())
        .collect();
    let flip = |x: &[f64], s: &[f64]| -> Vec<f64> { x.iter().zip(s).map(|(a, b)| a * b).collect() };
    match body {
        ConvexBody::Polytope(p) => {
            let scale = p.diameter();
            p.vertices().iter().all(|v| flips.iter().all(|s| p.contains(&flip(v, s), tol * scale)))
        }
        ConvexBody::Star(st) => st.grid().nodes().iter().zip(st.radial()).all(|(u, r)| {
            flips.iter().all(|s| (st.radial_at(&flip(u, s)) - r).abs() <= tol * r)
        }),
    }
}

#[derive(Debug, Clone)]
pub struct MeasureOptions {
    pub grid: Option<Arc<SphereGrid>>,
    /// Monte Carlo cross-check samples per body; 0 disables it.
    pub mc_samples: usize,
    pub seed: u64,
    /// Relative slack on the inequality.
    pub tol: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { grid: None, mc_samples: 100_000, seed: 0, tol: 1e-2 }
    }
}

/// `mu(K) mu(K°) <= mu(B)^2` under the structural hypotheses of the density
/// kind.
pub fn measure_product_check(mu: &DensityMeasure, body: &ConvexBody, opts: &MeasureOptions) -> Result<Report> {
    let n = mu.dim();
    crate::error::check_dim(n, body.dim())?;
    mu.verify_structure(opts.seed, 10_000)?;
    match mu {
        DensityMeasure::UnconditionalLogconcave { .. } => {
            if !is_unconditional(body, 1e-9) {
                return Err(Error::HypothesisFail("body is not unconditional".into()));
            }
        }
        DensityMeasure::RotationInvariant { .. } => {
            if !crate::steiner::is_centrally_symmetric(body, 1e-9) {
                return Err(Error::HypothesisFail("body is not centrally symmetric".into()));
            }
        }
    }
    if !body.contains_origin_strictly() {
        return Err(Error::CenterOutside);
    }
    let grid = opts.grid.clone().unwrap_or_else(|| Arc::new(SphereGrid::default_for(n)));
    let dual = polar(body, &vec![0.0; n])?;
    let ball = ConvexBody::Star(crate::star::StarBody::ball(grid.clone(), 1.0)?);
    let mk = mu.measure_of(body, &grid);
    let mp = mu.measure_of(&dual, &grid);
    let mb = mu.measure_of(&ball, &grid);
    let lhs = mk * mp;
    let rhs = mb * mb;
    let margin = (rhs - lhs) / rhs;
    let mut r = Report::new("measure-check");
    r.seeds.push(opts.seed);
    r.value("mu_k", mk)
        .value("mu_polar", mp)
        .value("mu_ball", mb)
        .value("lhs", lhs)
        .value("rhs", rhs)
        .value("margin", margin)
        .flag("near_equality", margin.abs() < 1e-3);
    r.check("measure_santalo", TAG_MEASURE, Relation::Le, lhs, rhs, opts.tol);
    if opts.mc_samples > 0 {
        for (name, b, q) in [("k", body, mk), ("polar", &dual, mp), ("ball", &ball, mb)] {
            let (est, se) = mu.measure_monte_carlo(b, opts.mc_samples, opts.seed);
            r.value(&format!("mc_{name}"), est).value(&format!("mc_{name}_stderr"), se);
            r.check(&format!("monte_carlo_{name}"), TAG_MEASURE, Relation::CloseAbs, est, q, 6.0 * se + 1e-9 * q);
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::named;

    #[test]
    fn gaussian_ball_is_equality() {
        let r = measure_product_check(&DensityMeasure::gaussian(2), &named("ball2").unwrap(), &MeasureOptions::default())
            .unwrap();
        assert!(r.get("margin").unwrap().abs() < 1e-12, "{r:?}");
        assert!(r.passed());
    }

    #[test]
    fn triangle_is_rejected() {
        let e = measure_product_check(&DensityMeasure::gaussian(2), &named("triangle").unwrap(), &MeasureOptions::default());
        assert!(matches!(e, Err(Error::HypothesisFail(_))));
    }

    #[test]
    fn negative_potential_is_rejected() {
        let bad = DensityMeasure::UnconditionalLogconcave {
            terms: vec![PotentialTerm { coef: -1.0, offset: 0.0, power: 2.0 }; 2],
        };
        assert!(bad.verify_structure(0, 100).is_err());
    }
}
