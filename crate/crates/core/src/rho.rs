//! One-dimensional kernels `rho` for the functional inequalities.
//!
//! Kernels are defined on all of R: the functional statements only use
//! `rho` on `[0, inf)`, but Legendre-side quantities such as `rho(L phi)` can
//! have negative arguments. Each family uses its natural extension, and
//! piecewise kernels are constant to the left of their first knot.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::vector::unit_ball_volume;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoFamily {
    /// `exp(-rate t)`
    Exp {
        #[serde(default = "one")]
        rate: f64,
    },
    /// `(1 - t)_+^m`
    Power { m: f64 },
    /// `1` for `t <= threshold`, else `0`.
    Indicator {
        #[serde(default = "one")]
        threshold: f64,
    },
    /// `exp(-t^2)`
    Gaussian,
    /// Linear interpolation of `(t, value)` knots, zero after the last knot.
    Piecewise { knots: Vec<(f64, f64)> },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RhoFlags {
    pub log_concave: bool,
    pub non_increasing: bool,
    pub geometric_mean_dominant: bool,
    pub strictly_convex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rho {
    pub family: RhoFamily,
    pub flags: RhoFlags,
}

impl Rho {
    pub fn new(family: RhoFamily) -> Result<Self> {
        let flags = match &family {
            RhoFamily::Exp { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidInput("exp kernel needs a positive rate".into()));
                }
                RhoFlags { log_concave: true, non_increasing: true, geometric_mean_dominant: true, strictly_convex: true }
            }
            RhoFamily::Power { m } => {
                if !(*m > 0.0 && m.is_finite()) {
                    return Err(Error::InvalidInput("power kernel needs m > 0".into()));
                }
                RhoFlags { log_concave: true, non_increasing: true, geometric_mean_dominant: true, strictly_convex: false }
            }
            RhoFamily::Indicator { threshold } => {
                if !(*threshold > 0.0 && threshold.is_finite()) {
                    return Err(Error::InvalidInput("indicator threshold must be positive".into()));
                }
                RhoFlags { log_concave: true, non_increasing: true, geometric_mean_dominant: true, strictly_convex: false }
            }
            RhoFamily::Gaussian => RhoFlags {
                log_concave: true,
                non_increasing: true,
                geometric_mean_dominant: true,
                strictly_convex: false,
            },
            RhoFamily::Piecewise { knots } => {
                if knots.len() < 2 || knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidInput("piecewise kernel needs increasing knots".into()));
                }
                if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidInput("piecewise kernel values must be finite and nonnegative".into()));
                }
                // Flags for custom kernels are established by sampling.
                let probe = Rho { family: family.clone(), flags: RhoFlags::default() };
                probe.sampled_flags(0, 10_000)
            }
        };
        Ok(Rho { family, flags })
    }

    pub fn exp() -> Self {
        Rho::new(RhoFamily::Exp { rate: 1.0 }).unwrap()
    }

    pub fn indicator() -> Self {
        Rho::new(RhoFamily::Indicator { threshold: 1.0 }).unwrap()
    }

    pub fn power(m: f64) -> Result<Self> {
        Rho::new(RhoFamily::Power { m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.family {
            RhoFamily::Exp { rate } => (-rate * t).exp(),
            RhoFamily::Power { m } => {
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - t).powf(*m)
                }
            }
            RhoFamily::Indicator { threshold } => {
                if t <= *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            RhoFamily::Gaussian => {
                let s = t.max(0.0);
                (-s * s).exp()
            }
            RhoFamily::Piecewise { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    first.1
                } else if t > last.0 {
                    0.0
                } else {
                    let k = knots.partition_point(|(x, _)| *x < t).max(1);
                    let (a, b) = (knots[k - 1], knots[k]);
                    a.1 + (t - a.0) / (b.0 - a.0) * (b.1 - a.1)
                }
            }
        }
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        match &self.family {
            RhoFamily::Exp { rate } => -rate * t,
            RhoFamily::Power { m } if t < 1.0 => m * (1.0 - t).ln(),
            _ => self.eval(t).ln(),
        }
    }

    /// First derivative where it exists classically on the whole line.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        match &self.family {
            RhoFamily::Exp { rate } => Some(-rate * (-rate * t).exp()),
            RhoFamily::Power { m } if *m >= 1.0 => {
                Some(if t >= 1.0 { 0.0 } else { -m * (1.0 - t).powf(m - 1.0) })
            }
            _ => None,
        }
    }

    pub fn second_derivative(&self, t: f64) -> Option<f64> {
        match &self.family {
            RhoFamily::Exp { rate } => Some(rate * rate * (-rate * t).exp()),
            RhoFamily::Power { m } if *m >= 2.0 => {
                Some(if t >= 1.0 { 0.0 } else { m * (m - 1.0) * (1.0 - t).powf(m - 2.0) })
            }
            _ => None,
        }
    }

    /// Points where `rho` jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match &self.family {
            RhoFamily::Indicator { threshold } => vec![*threshold],
            RhoFamily::Piecewise { knots } => {
                let last = knots[knots.len() - 1];
                if last.1 > 0.0 { vec![last.0] } else { vec![] }
            }
            _ => vec![],
        }
    }

    /// Points where `rho` has a kink or a jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            RhoFamily::Power { .. } => vec![1.0],
            RhoFamily::Indicator { threshold } => vec![*threshold],
            RhoFamily::Piecewise { knots } => knots.iter().map(|k| k.0).collect(),
            _ => vec![],
        }
    }

    /// `rho` vanishes on `(end, inf)`.
    pub fn support_end(&self) -> Option<f64> {
        match &self.family {
            RhoFamily::Power { .. } => Some(1.0),
            RhoFamily::Indicator { threshold } => Some(*threshold),
            RhoFamily::Piecewise { knots } => Some(knots[knots.len() - 1].0),
            _ => None,
        }
    }

    /// Beyond this argument `rho` is below `1e-17 * rho(0)`.
    pub fn negligible_beyond(&self) -> f64 {
        match &self.family {
            RhoFamily::Exp { rate } => 40.0 / rate,
            RhoFamily::Gaussian => 40f64.sqrt(),
            _ => self.support_end().unwrap(),
        }
    }

    /// Coefficients `[a0, a1, a2]` with `ln rho(t) = a0 + a1 t + a2 t^2` for
    /// all `t >= 0`, when the kernel has that form.
    pub fn log_quadratic(&self) -> Option<[f64; 3]> {
        match &self.family {
            RhoFamily::Exp { rate } => Some([0.0, -rate, 0.0]),
            RhoFamily::Gaussian => Some([0.0, 0.0, -1.0]),
            _ => None,
        }
    }

    pub fn has_jumps(&self) -> bool {
        !self.jumps().is_empty()
    }

    /// Flags established by sampling `pairs` random argument pairs.
    pub fn sampled_flags(&self, seed: u64, pairs: usize) -> RhoFlags {
        let mut rng = crate::rng::stream(seed, 0x5248);
        let top = match self.support_end() {
            Some(e) => 1.2 * e,
            None => self.negligible_beyond(),
        };
        let slack = 1e-9;
        let (mut lc, mut ni, mut gm, mut sc) = (true, true, true, true);
        for _ in 0..pairs {
            let s: f64 = rng.gen_range(0.0..top);
            let t: f64 = rng.gen_range(0.0..top);
            let (rs, rt) = (self.eval(s), self.eval(t));
            let mid = self.eval(0.5 * (s + t));
            if mid * mid < rs * rt * (1.0 - slack) - 1e-300 {
                lc = false;
            }
            let (lo, hi) = if s < t { (s, t) } else { (t, s) };
            if self.eval(hi) > self.eval(lo) * (1.0 + slack) + 1e-300 {
                ni = false;
            }
            let g = self.eval((s * t).sqrt());
            if rs * rt > g * g * (1.0 + slack) + 1e-300 {
                gm = false;
            }
            if mid >= 0.5 * (rs + rt) - slack * (rs + rt) && (s - t).abs() > 1e-6 * top {
                sc = false;
            }
        }
        RhoFlags { log_concave: lc, non_increasing: ni, geometric_mean_dominant: gm, strictly_convex: sc }
    }

    /// Mismatches between declared and sampled flags. Declared `true` flags
    /// that sampling refutes are errors.
    pub fn verify_flags(&self, seed: u64) -> Result<RhoFlags> {
        let s = self.sampled_flags(seed, 10_000);
        let d = self.flags;
        let bad = [
            (d.log_concave && !s.log_concave, "log-concave"),
            (d.non_increasing && !s.non_increasing, "non-increasing"),
            (d.geometric_mean_dominant && !s.geometric_mean_dominant, "geometric-mean dominant"),
        ];
        if let Some((_, name)) = bad.iter().find(|(b, _)| *b) {
            return Err(Error::HypothesisFail(format!("kernel declared {name} but sampling refutes it")));
        }
        Ok(s)
    }
}

/// `c_n(rho) = (int_0^inf r^{n-1} rho(r^2) dr)^{2/n}` together with
/// `int_{R^n} rho(|x|^2) dx = n v_n c_n^{n/2}`.
pub fn c_n_rho(rho: &Rho, n: usize) -> Result<(f64, f64)> {
    let i = radial_integral(rho, n, 1.0)?;
    Ok((i.powf(2.0 / n as f64), n as f64 * unit_ball_volume(n) * i))
}

/// `int_0^inf r^{n-1} rho(r^2 / scale) dr`.
pub fn radial_integral(rho: &Rho, n: usize, scale: f64) -> Result<f64> {
    let opts = QuadOptions { rel_tol: 1e-13, ..Default::default() };
    let f = |r: f64| r.powi(n as i32 - 1) * rho.eval(r * r / scale);
    let breaks: Vec<f64> = rho
        .breakpoints()
        .iter()
        .filter(|b| **b > 0.0)
        .map(|b| (b * scale).sqrt())
        .collect();
    let end = (rho.negligible_beyond() * scale).sqrt();
    let head = integrate(f, 0.0, end, &breaks, &opts)?.value;
    if rho.support_end().is_none() {
        // The tail beyond `end` must be negligible for a decaying kernel.
        let tail = integrate(f, end, 2.0 * end, &[], &opts)?.value;
        if !(tail <= 1e-10 * head) {
            return Err(Error::DivergentKernel(format!("tail {tail:e} vs head {head:e}")));
        }
    }
    if !(head.is_finite() && head > 0.0) {
        return Err(Error::DivergentKernel("kernel integral is not positive and finite".into()));
    }
    Ok(head)
}
