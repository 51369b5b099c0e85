//! Discrete Legendre transforms on rectilinear grids, the optimal centre of
//! a convex function and the Legendre form of the volume-product bound.
//!
//! On a grid the transform is the exact discrete supremum
//! `L_z phi(y) = max_x <x - z, y - z> - phi(x)` over primal nodes `x`.
//! Coordinates are shifted once, `x' = x - z` and `y' = y - z`, and the
//! maximum is taken one axis at a time: starting from `t = -phi(x)`, pass `k`
//! forms `t <- x'_k * y'_k + t` and maximizes over `x_k`. Floating-point
//! addition is monotone, so this equals the brute-force maximum of the same
//! expression bit for bit.

use crate::error::{Error, Result};
use crate::report::{Relation, Report};
use crate::rho::{radial_integral, Rho};
use crate::vector::{self, unit_ball_volume};
use serde::{Deserialize, Serialize};

pub const TAG_LEGENDRE: &str = "legendre-santalo";
/// Serialized form of `+inf` grid values.
pub const INF_SENTINEL: &str = "+inf";

/// A function on the nodes of a rectilinear grid, `+inf` allowed. Values are
/// stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFnFile", into = "GridFnFile")]
pub struct GridFn {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFnFile {
    axes: Vec<Vec<f64>>,
    values: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Cell {
    Num(f64),
    Tag(String),
}

impl TryFrom<GridFnFile> for GridFn {
    type Error = Error;

    fn try_from(f: GridFnFile) -> Result<Self> {
        let values = f
            .values
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => Ok(v),
                Cell::Tag(s) if s == INF_SENTINEL => Ok(f64::INFINITY),
                Cell::Tag(s) => Err(Error::InvalidInput(format!("unknown grid value {s:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        GridFn::new(f.axes, values)
    }
}

impl From<GridFn> for GridFnFile {
    fn from(g: GridFn) -> Self {
        let values = g
            .values
            .iter()
            .map(|v| if v.is_finite() { Cell::Num(*v) } else { Cell::Tag(INF_SENTINEL.into()) })
            .collect();
        GridFnFile { axes: g.axes, values }
    }
}

/// `count` equally spaced nodes from `lo` to `hi`.
pub fn uniform_axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect()
}

fn check_axes(axes: &[Vec<f64>]) -> Result<()> {
    if axes.is_empty() {
        return Err(Error::InvalidInput("a grid needs at least one axis".into()));
    }
    for a in axes {
        if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid axes must be non-empty and finite".into()));
        }
        if a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid axes must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// Trapezoid weights of one axis; a single node gets weight 1.
fn axis_weights(a: &[f64]) -> Vec<f64> {
    let m = a.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|i| {
            let lo = if i == 0 { a[0] } else { a[i - 1] };
            let hi = if i + 1 == m { a[m - 1] } else { a[i + 1] };
            0.5 * (hi - lo)
        })
        .collect()
}

fn max_spacing(a: &[f64]) -> f64 {
    a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

impl GridFn {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        check_axes(&axes)?;
        let len: usize = axes.iter().map(|a| a.len()).product();
        if values.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: values.len() });
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidInput("grid values must be real or +inf".into()));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::EmptyDomain("grid function is +inf everywhere".into()));
        }
        Ok(GridFn { axes, values })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> f64>(axes: Vec<Vec<f64>>, mut f: F) -> Result<Self> {
        check_axes(&axes)?;
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let len: usize = shape.iter().product();
        let mut x = vec![0.0; axes.len()];
        let values = (0..len)
            .map(|i| {
                fill_node(&axes, &shape, i, &mut x);
                f(&x)
            })
            .collect();
        GridFn::new(axes, values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        fill_node(&self.axes, &self.shape(), i, &mut x);
        x
    }

    /// Product trapezoid weights of the nodes.
    pub fn weights(&self) -> Vec<f64> {
        product_weights(&self.axes)
    }

    /// Largest node spacing along each axis.
    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(|a| max_spacing(a)).collect()
    }

    /// Axes spanning `z` plus the range of finite-difference slopes of the
    /// function along each axis, with as many nodes as the primal axis.
    pub fn slope_axes(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let shape = self.shape();
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let stride: usize = shape[k + 1..].iter().product();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..self.len() {
                let ik = (i / stride) % shape[k];
                if ik + 1 == shape[k] {
                    continue;
                }
                let (a, b) = (self.values[i], self.values[i + stride]);
                if a.is_finite() && b.is_finite() {
                    let s = (b - a) / (self.axes[k][ik + 1] - self.axes[k][ik]);
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
            }
            if !(lo < hi) {
                let c = if lo.is_finite() { lo } else { 0.0 };
                lo = c - 1.0;
                hi = c + 1.0;
            }
            out.push(uniform_axis(z[k] + lo, z[k] + hi, shape[k].max(2)));
        }
        out
    }

    /// The same function on every other node of each axis (ends kept when
    /// the axis length is odd).
    pub fn coarsened(&self) -> GridFn {
        let shape = self.shape();
        let keep: Vec<Vec<usize>> = shape.iter().map(|m| (0..*m).step_by(2).collect()).collect();
        let axes: Vec<Vec<f64>> = keep
            .iter()
            .zip(&self.axes)
            .map(|(k, a)| k.iter().map(|i| a[*i]).collect())
            .collect();
        let cshape: Vec<usize> = keep.iter().map(|k| k.len()).collect();
        let len: usize = cshape.iter().product();
        let values = (0..len)
            .map(|c| {
                let mut rem = c;
                let mut idx = 0;
                for k in (0..shape.len()).rev() {
                    let ik = keep[k][rem % cshape[k]];
                    rem /= cshape[k];
                    let stride: usize = shape[k + 1..].iter().product();
                    idx += ik * stride;
                }
                self.values[idx]
            })
            .collect();
        GridFn { axes, values }
    }
}

fn fill_node(axes: &[Vec<f64>], shape: &[usize], mut i: usize, x: &mut [f64]) {
    for k in (0..shape.len()).rev() {
        x[k] = axes[k][i % shape[k]];
        i /= shape[k];
    }
}

fn product_weights(axes: &[Vec<f64>]) -> Vec<f64> {
    let mut w = vec![1.0];
    for a in axes {
        let aw = axis_weights(a);
        w = w.iter().flat_map(|p| aw.iter().map(move |q| p * q)).collect();
    }
    w
}

/// Result of a transform: values on the dual grid and, per dual node,
/// whether the maximizing primal node lies off the grid boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub psi: GridFn,
    pub trusted: Vec<bool>,
    pub z: Vec<f64>,
}

impl Conjugate {
    /// Values with untrusted nodes replaced by `+inf`.
    pub fn trusted_values(&self) -> Vec<f64> {
        self.psi
            .values
            .iter()
            .zip(&self.trusted)
            .map(|(v, t)| if *t { *v } else { f64::INFINITY })
            .collect()
    }

    pub fn untrusted_count(&self) -> usize {
        self.trusted.iter().filter(|t| !**t).count()
    }
}

/// One-dimensional pass: `out[j] = max_i x[i] * y[j] + h[i]` with boundary
/// tracking. `y` must be increasing.
fn conjugate_1d(
    x: &[f64],
    h: &[f64],
    hb: &[bool],
    y: &[f64],
    out: &mut [f64],
    out_b: &mut [bool],
    stack: &mut Vec<usize>,
) {
    let m = x.len();
    stack.clear();
    let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ymax = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let hmax = h.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = hmax + xmax * ymax;
    // Points dropped from the hull sit below it by more than `t_hull`, far
    // above the rounding error of any evaluation, so they never attain the
    // floating-point maximum. Kept points are concave to within `t_scan`.
    let t_hull = 64.0 * f64::EPSILON * scale;
    let t_scan = 1e-9 * scale;
    for i in 0..m {
        if h[i] == f64::NEG_INFINITY {
            continue;
        }
        while stack.len() >= 2 {
            let (a, b) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            let chord = h[a] + (h[i] - h[a]) * (x[b] - x[a]) / (x[i] - x[a]);
            if h[b] < chord - t_hull {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(i);
    }
    if stack.is_empty() {
        out.fill(f64::NEG_INFINITY);
        out_b.fill(false);
        return;
    }
    let val = |k: usize, yj: f64| x[stack[k]] * yj + h[stack[k]];
    let mut p = 0;
    for (j, &yj) in y.iter().enumerate() {
        let mut best_k = p;
        let mut best = val(p, yj);
        let mut k = p;
        while k + 1 < stack.len() {
            let v = val(k + 1, yj);
            if v < best - t_scan {
                break;
            }
            k += 1;
            if v > best {
                best = v;
                best_k = k;
            }
        }
        k = p;
        while k > 0 {
            let v = val(k - 1, yj);
            if v < best - t_scan {
                break;
            }
            k -= 1;
            if v > best {
                best = v;
                best_k = k;
            }
        }
        p = best_k;
        let i = stack[best_k];
        out[j] = best;
        out_b[j] = hb[i] || i == 0 || i + 1 == m;
    }
}

/// Core transform on shifted coordinates: `max_x sum_k xs_k ys_k - phi(x)`.
fn transform_shifted(xs: &[Vec<f64>], values: &[f64], ys: &[Vec<f64>]) -> (Vec<f64>, Vec<bool>) {
    let n = xs.len();
    let mut shape: Vec<usize> = xs.iter().map(|a| a.len()).collect();
    let mut h: Vec<f64> = values.iter().map(|v| -v).collect();
    let mut b = vec![false; h.len()];
    let mut stack = Vec::new();
    for k in 0..n {
        let (nx, ny) = (shape[k], ys[k].len());
        let outer: usize = shape[..k].iter().product();
        let inner: usize = shape[k + 1..].iter().product();
        let mut nh = vec![0.0; outer * ny * inner];
        let mut nb = vec![false; outer * ny * inner];
        let (mut fh, mut fb) = (vec![0.0; nx], vec![false; nx]);
        let (mut oh, mut ob) = (vec![0.0; ny], vec![false; ny]);
        for o in 0..outer {
            for i in 0..inner {
                for ix in 0..nx {
                    let src = (o * nx + ix) * inner + i;
                    fh[ix] = h[src];
                    fb[ix] = b[src];
                }
                conjugate_1d(&xs[k], &fh, &fb, &ys[k], &mut oh, &mut ob, &mut stack);
                for jy in 0..ny {
                    let dst = (o * ny + jy) * inner + i;
                    nh[dst] = oh[jy];
                    nb[dst] = ob[jy];
                }
            }
        }
        h = nh;
        b = nb;
        shape[k] = ny;
    }
    let trusted = b.iter().zip(&h).map(|(bb, v)| !bb && v.is_finite()).collect();
    (h, trusted)
}

fn shifted(axes: &[Vec<f64>], z: &[f64]) -> Vec<Vec<f64>> {
    axes.iter().zip(z).map(|(a, c)| a.iter().map(|v| v - c).collect()).collect()
}

/// `L_z phi` on `dual_axes` (absolute coordinates; defaults to
/// [`GridFn::slope_axes`]).
pub fn legendre_transform(phi: &GridFn, z: &[f64], dual_axes: Option<&[Vec<f64>]>) -> Result<Conjugate> {
    crate::error::check_dim(phi.dim(), z.len())?;
    if !phi.values.iter().any(|v| v.is_finite()) {
        return Err(Error::EmptyDomain("grid function is +inf everywhere".into()));
    }
    let dual: Vec<Vec<f64>> = match dual_axes {
        Some(d) => {
            crate::error::check_dim(phi.dim(), d.len())?;
            check_axes(d)?;
            d.to_vec()
        }
        None => phi.slope_axes(z),
    };
    let (psi, trusted) = transform_shifted(&shifted(&phi.axes, z), &phi.values, &shifted(&dual, z));
    Ok(Conjugate { psi: GridFn { axes: dual, values: psi }, trusted, z: z.to_vec() })
}

/// `L_z L_z phi` back on the primal axes, with untrusted dual nodes removed
/// before the second transform.
pub fn biconjugate(phi: &GridFn, z: &[f64], dual_axes: Option<&[Vec<f64>]>) -> Result<(Conjugate, Conjugate)> {
    let first = legendre_transform(phi, z, dual_axes)?;
    let mid = GridFn { axes: first.psi.axes.clone(), values: first.trusted_values() };
    if !mid.values.iter().any(|v| v.is_finite()) {
        return Err(Error::EmptyDomain("no trusted dual node".into()));
    }
    let second = legendre_transform(&mid, z, Some(&phi.axes))?;
    Ok((first, second))
}

/// Fenchel-Young bound `L_z L_z phi <= phi` and the convexity defect
/// `phi - L_z L_z phi` on nodes whose second maximizer is interior.
pub fn biconjugate_check(phi: &GridFn, z: &[f64], dual_axes: Option<&[Vec<f64>]>) -> Result<Report> {
    let (first, second) = biconjugate(phi, z, dual_axes)?;
    let scale = phi.values.iter().filter(|v| v.is_finite()).fold(1.0f64, |a, v| a.max(v.abs()));
    let mut excess = f64::NEG_INFINITY;
    let mut defect = 0.0f64;
    let mut at = None;
    let slack: f64 = phi
        .spacings()
        .iter()
        .zip(first.psi.spacings())
        .map(|(h, g)| 2.0 * h * g)
        .sum();
    let mut nonconvex = 0usize;
    for i in 0..phi.len() {
        let (p, q) = (phi.values[i], second.psi.values[i]);
        if !p.is_finite() {
            continue;
        }
        excess = excess.max(q - p);
        if second.trusted[i] {
            let d = p - q;
            if d > defect {
                defect = d;
                at = Some(i);
            }
            if d > slack {
                nonconvex += 1;
            }
        }
    }
    let mut r = Report::new("biconjugate-check");
    r.value("max_excess", excess)
        .value("max_defect", defect)
        .value("defect_slack", slack)
        .value("nonconvex_nodes", nonconvex as f64)
        .value("untrusted_dual_nodes", first.untrusted_count() as f64)
        .flag("convex_on_grid", nonconvex == 0);
    if let Some(i) = at {
        r.vector("defect_at", &phi.node(i));
    }
    r.check("fenchel_young", TAG_LEGENDRE, Relation::CloseAbs, excess.max(0.0), 0.0, 1e-12 * scale);
    Ok(r)
}

/// Jumps of `rho`, each dropping to zero: `rho = rho_c + sum J_j 1{t <= t_j}`
/// with `rho_c` continuous.
fn jump_parts(rho: &Rho) -> Vec<(f64, f64)> {
    rho.jumps().into_iter().map(|t| (t, rho.eval(t))).collect()
}

fn continuous_part(rho: &Rho, jumps: &[(f64, f64)], t: f64) -> f64 {
    let v = rho.eval(t);
    v - jumps.iter().filter(|(tj, _)| t <= *tj).map(|(_, j)| j).sum::<f64>()
}

/// Fraction of a segment where the linear interpolant of `a`, `b` is `<= t`.
fn frac2(a: f64, b: f64, t: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if !lo.is_finite() || !hi.is_finite() {
        return [lo, hi].iter().filter(|v| **v <= t).count() as f64 / 2.0;
    }
    if hi == lo {
        return if t >= lo { 1.0 } else { 0.0 };
    }
    ((t - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Fraction of a triangle where the linear interpolant of its vertex values
/// is `<= t`.
fn frac3(v: [f64; 3], t: f64) -> f64 {
    let mut s = v;
    s.sort_by(f64::total_cmp);
    let [a, b, c] = s;
    if !c.is_finite() {
        return s.iter().filter(|x| **x <= t).count() as f64 / 3.0;
    }
    if t <= a {
        return if t == a && a == c { 1.0 } else { 0.0 };
    }
    if t >= c {
        return 1.0;
    }
    if t <= b {
        (t - a) * (t - a) / ((b - a) * (c - a))
    } else {
        1.0 - (c - t) * (c - t) / ((c - a) * (c - b))
    }
}

/// Measure of `{u <= t}` for the piecewise-linear interpolant of `u` on the
/// grid (cells split into simplices; node-weighted count for `n >= 3`).
fn sublevel_measure(axes: &[Vec<f64>], u: &[f64], weights: &[f64], t: f64) -> f64 {
    match axes.len() {
        1 => axes[0]
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[1] - w[0]) * frac2(u[i], u[i + 1], t))
            .sum(),
        2 => {
            let (nx, ny) = (axes[0].len(), axes[1].len());
            let mut total = 0.0;
            for i in 0..nx.saturating_sub(1) {
                let dx = axes[0][i + 1] - axes[0][i];
                for j in 0..ny.saturating_sub(1) {
                    let dy = axes[1][j + 1] - axes[1][j];
                    let (u00, u10) = (u[i * ny + j], u[(i + 1) * ny + j]);
                    let (u01, u11) = (u[i * ny + j + 1], u[(i + 1) * ny + j + 1]);
                    let f = frac3([u00, u10, u11], t) + frac3([u00, u11, u01], t);
                    total += 0.5 * dx * dy * f;
                }
            }
            total
        }
        _ => u.iter().zip(weights).filter(|(v, _)| **v <= t).map(|(_, w)| w).sum(),
    }
}

/// `int rho(u)` for grid data `u` (`+inf` contributes nothing). Jumps of
/// `rho` are integrated against the piecewise-linear sublevel measure.
fn rho_integral(axes: &[Vec<f64>], u: &[f64], weights: &[f64], rho: &Rho) -> f64 {
    let jumps = jump_parts(rho);
    let smooth: f64 = u
        .iter()
        .zip(weights)
        .filter(|(v, _)| v.is_finite())
        .map(|(v, w)| w * continuous_part(rho, &jumps, *v))
        .sum();
    smooth + jumps.iter().map(|(t, j)| j * sublevel_measure(axes, u, weights, *t)).sum::<f64>()
}

/// `int rho(phi)` by the grid rule.
pub fn integral_rho_phi(phi: &GridFn, rho: &Rho) -> f64 {
    rho_integral(&phi.axes, &phi.values, &phi.weights(), rho)
}

/// `J(z) = int rho(L_z phi)`, evaluated through `L_z phi(y + z) = L phi(y) - <z, y>`
/// on a transform taken at the origin.
struct DualObjective<'a> {
    axes: &'a [Vec<f64>],
    nodes: Vec<Vec<f64>>,
    psi: Vec<f64>,
    raw: &'a [f64],
    trusted: &'a [bool],
    weights: Vec<f64>,
    rho: &'a Rho,
}

impl<'a> DualObjective<'a> {
    fn new(c: &'a Conjugate, rho: &'a Rho) -> Self {
        let nodes = (0..c.psi.len()).map(|i| c.psi.node(i)).collect();
        DualObjective {
            axes: &c.psi.axes,
            nodes,
            psi: c.trusted_values(),
            raw: &c.psi.values,
            trusted: &c.trusted,
            weights: c.psi.weights(),
            rho,
        }
    }

    fn shifted(&self, z: &[f64], values: &[f64]) -> Vec<f64> {
        values.iter().zip(&self.nodes).map(|(p, y)| p - vector::dot(z, y)).collect()
    }

    fn value(&self, z: &[f64]) -> f64 {
        rho_integral(self.axes, &self.shifted(z, &self.psi), &self.weights, self.rho)
    }

    /// Upper bound on the mass dropped with untrusted nodes.
    fn untrusted_mass(&self, z: &[f64]) -> f64 {
        let u = self.shifted(z, self.raw);
        u.iter()
            .zip(self.trusted)
            .zip(&self.weights)
            .filter(|((_, t), _)| !**t)
            .map(|((v, _), w)| w * self.rho.eval(*v))
            .sum()
    }

    /// Gradient and Hessian of `J` when `rho` is twice differentiable.
    fn derivatives(&self, z: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        if self.rho.has_jumps() {
            return None;
        }
        let n = z.len();
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        let mut d1 = 0.0;
        for ((p, y), w) in self.psi.iter().zip(&self.nodes).zip(&self.weights) {
            if !p.is_finite() {
                continue;
            }
            let u = p - vector::dot(z, y);
            let r1 = self.rho.derivative(u)?;
            let r2 = self.rho.second_derivative(u)?;
            d1 += w * r1;
            for a in 0..n {
                g[a] -= w * y[a] * r1;
                for b in 0..n {
                    h[a][b] += w * y[a] * y[b] * r2;
                }
            }
        }
        Some((g, h, d1))
    }

    /// `|int y rho'(L_z phi(y + z)) dy| / |int rho'(...)|`, the distance from
    /// `z` to the weighted mean on the right of the fixed-point identity.
    fn fixed_point_residual(&self, z: &[f64]) -> f64 {
        match self.derivatives(z) {
            Some((g, _, d1)) if d1 != 0.0 => vector::norm(&g) / d1.abs(),
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CenterSolveOptions {
    /// Accept when the fixed-point residual is below `tol` times the grid extent.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CenterSolveOptions {
    fn default() -> Self {
        CenterSolveOptions { tol: 1e-6, max_iter: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterSolveResult {
    pub z0: Vec<f64>,
    /// `int rho(L_{z0} phi)`.
    pub objective: f64,
    /// Fixed-point defect; `NaN` when `rho` is not differentiable.
    pub residual: f64,
    /// `rho` is not strictly convex, so the minimizer may not be unique.
    pub nonunique_possible: bool,
    pub iterations: usize,
}

fn extent(phi: &GridFn) -> f64 {
    phi.axes.iter().map(|a| a[a.len() - 1] - a[0]).fold(0.0, f64::max).max(1e-300)
}

fn solve_center(phi: &GridFn, c: &Conjugate, rho: &Rho, opts: &CenterSolveOptions) -> Result<CenterSolveResult> {
    let obj = DualObjective::new(c, rho);
    let ext = extent(phi);
    // Start from the barycentre of rho(phi).
    let w = phi.weights();
    let mut mass = 0.0;
    let mut start = vec![0.0; phi.dim()];
    for (i, (v, wi)) in phi.values.iter().zip(&w).enumerate() {
        if v.is_finite() {
            let m = wi * rho.eval(*v);
            mass += m;
            start = vector::axpy(&start, m, &phi.node(i));
        }
    }
    if mass > 0.0 {
        start = vector::scale(&start, 1.0 / mass);
    }
    // The minimizer lies in the interior of dom phi, so z is confined to the box of finite nodes.
    let mut lo = vec![f64::INFINITY; phi.dim()];
    let mut hi = vec![f64::NEG_INFINITY; phi.dim()];
    for (i, v) in phi.values.iter().enumerate() {
        if v.is_finite() {
            for (k, x) in phi.node(i).into_iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
    }
    let inside = |z: &[f64]| z.iter().zip(lo.iter().zip(&hi)).all(|(x, (a, b))| *a <= *x && x <= b);
    let nm = crate::optim::nelder_mead(
        |z| if inside(z) { obj.value(z) } else { f64::INFINITY },
        &start,
        0.05 * ext,
        1e-10 * ext,
        1e-13,
        opts.max_iter,
    );
    let mut z = nm.x;
    let mut iters = nm.iterations;
    let mut value = obj.value(&z);
    // Newton polish on the convex objective.
    for _ in 0..50 {
        let Some((g, h, _)) = obj.derivatives(&z) else { break };
        if obj.fixed_point_residual(&z) <= opts.tol * ext {
            break;
        }
        let Some(step) = vector::solve(&h, &g) else { break };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = vector::axpy(&z, -t, &step);
            let v = obj.value(&cand);
            if inside(&cand) && v <= value {
                z = cand;
                value = v;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        iters += 1;
        if !moved {
            break;
        }
    }
    let residual = obj.fixed_point_residual(&z);
    let differentiable = !residual.is_nan();
    if differentiable && residual > opts.tol * ext {
        return Err(Error::SolverFail {
            message: "optimal centre did not satisfy the fixed-point identity".into(),
            best: z,
            residual,
        });
    }
    if !differentiable && !nm.converged {
        return Err(Error::SolverFail {
            message: "optimal centre search did not converge".into(),
            best: z,
            residual: nm.size,
        });
    }
    Ok(CenterSolveResult {
        z0: z,
        objective: value,
        residual,
        nonunique_possible: !rho.flags.strictly_convex,
        iterations: iters,
    })
}

/// Minimizer of `z -> int rho(L_z phi)`.
pub fn optimal_center(phi: &GridFn, rho: &Rho, opts: &CenterSolveOptions) -> Result<CenterSolveResult> {
    let origin = vec![0.0; phi.dim()];
    let c = legendre_transform(phi, &origin, None)?;
    solve_center(phi, &c, rho, opts)
}

#[derive(Debug, Clone)]
pub struct LegendreOptions {
    /// Dual axes for `y - z`; slope axes of `phi` when `None`.
    pub dual_axes: Option<Vec<Vec<f64>>>,
    /// Relative slack on the inequality.
    pub tol: f64,
    pub center: CenterSolveOptions,
    /// Run equality diagnostics when `|margin|` is below this.
    pub equality_threshold: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        LegendreOptions { dual_axes: None, tol: 1e-2, center: CenterSolveOptions::default(), equality_threshold: 1e-3 }
    }
}

/// `int rho(|x|^2 / 2) dx` over `R^n`.
pub fn gaussian_side(rho: &Rho, n: usize) -> Result<f64> {
    Ok(n as f64 * unit_ball_volume(n) * radial_integral(rho, n, 2.0)?)
}

/// `int rho(phi) * int rho(L_z phi) <= (int rho(|x|^2 / 2))^2` at the given
/// `z`, or at the minimizer of the dual integral when `z` is `None`.
pub fn legendre_santalo_verify(phi: &GridFn, rho: &Rho, z: Option<&[f64]>, opts: &LegendreOptions) -> Result<Report> {
    if !(rho.flags.log_concave && rho.flags.non_increasing) {
        return Err(Error::HypothesisFail("rho must be log-concave and non-increasing".into()));
    }
    let n = phi.dim();
    let int_phi = integral_rho_phi(phi, rho);
    if !(int_phi > 0.0 && int_phi.is_finite()) {
        return Err(Error::HypothesisFail("int rho(phi) must be positive and finite".into()));
    }
    let coarse = integral_rho_phi(&phi.coarsened(), rho);
    let origin = vec![0.0; n];
    let c = legendre_transform(phi, &origin, opts.dual_axes.as_deref())?;
    let mut r = Report::new("legendre-check");
    let (z, residual, nonunique) = match z {
        Some(z) => {
            crate::error::check_dim(n, z.len())?;
            (z.to_vec(), DualObjective::new(&c, rho).fixed_point_residual(z), false)
        }
        None => {
            let s = solve_center(phi, &c, rho, &opts.center)?;
            (s.z0, s.residual, s.nonunique_possible)
        }
    };
    let obj = DualObjective::new(&c, rho);
    let int_dual = obj.value(&z);
    let rhs = gaussian_side(rho, n)?.powi(2);
    let lhs = int_phi * int_dual;
    let margin = (rhs - lhs) / rhs;
    r.vector("z", &z)
        .value("integral_phi", int_phi)
        .value("integral_phi_coarse", coarse)
        .value("integral_dual", int_dual)
        .value("untrusted_mass", obj.untrusted_mass(&z))
        .value("untrusted_dual_nodes", c.untrusted_count() as f64)
        .value("center_residual", residual)
        .value("lhs", lhs)
        .value("rhs", rhs)
        .value("margin", margin)
        .flag("nonunique_possible", nonunique)
        .flag("near_equality", margin.abs() < opts.equality_threshold);
    r.check("legendre_santalo", TAG_LEGENDRE, Relation::Le, lhs, rhs, opts.tol);
    if margin.abs() < opts.equality_threshold {
        r.absorb("equality", equality_diagnostics(phi, rho, &z)?);
    }
    Ok(r)
}

/// Weighted least-squares fit `phi(x) ~ (x - m)^T A (x - m) / 2 + c` with
/// weights `rho(phi(x))`, and whether `log rho` is affine on `[-|c|, ...)`.
pub fn equality_diagnostics(phi: &GridFn, rho: &Rho, z: &[f64]) -> Result<Report> {
    let n = phi.dim();
    crate::error::check_dim(n, z.len())?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let p = pairs.len() + n + 1;
    let w = phi.weights();
    let mut ata = nalgebra::DMatrix::<f64>::zeros(p, p);
    let mut atb = nalgebra::DVector::<f64>::zeros(p);
    let mut wsum = 0.0;
    let feature = |x: &[f64]| -> Vec<f64> {
        let mut f: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| if i == j { 0.5 * x[i] * x[i] } else { x[i] * x[j] })
            .collect();
        f.extend_from_slice(x);
        f.push(1.0);
        f
    };
    for (i, v) in phi.values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let wt = w[i] * rho.eval(*v);
        if !(wt > 0.0) {
            continue;
        }
        wsum += wt;
        let f = feature(&phi.node(i));
        for a in 0..p {
            atb[a] += wt * f[a] * v;
            for b in 0..p {
                ata[(a, b)] += wt * f[a] * f[b];
            }
        }
    }
    let mut r = Report::new("equality-diagnostics");
    let coef = if wsum > 0.0 { ata.clone().svd(true, true).solve(&atb, 1e-14).ok() } else { None };
    let Some(coef) = coef else {
        r.flag("equality_form", false).warn("quadratic fit failed");
        return Ok(r);
    };
    let mut a = vec![vec![0.0; n]; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        a[i][j] = coef[k];
        a[j][i] = coef[k];
    }
    let b: Vec<f64> = (0..n).map(|i| coef[pairs.len() + i]).collect();
    let d = coef[p - 1];
    let (mut res, mut norm) = (0.0, 0.0);
    for (i, v) in phi.values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let wt = w[i] * rho.eval(*v);
        if !(wt > 0.0) {
            continue;
        }
        let f = feature(&phi.node(i));
        let fit: f64 = f.iter().zip(coef.iter()).map(|(x, c)| x * c).sum();
        res += wt * (fit - v).powi(2);
        norm += wt * v * v;
    }
    let residual = (res / wsum).sqrt() / (1.0 + (norm / wsum).sqrt());
    let am = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let eig = am.clone().symmetric_eigen().eigenvalues;
    let pd = eig.iter().all(|e| *e > 1e-12);
    let (center, c) = match vector::solve(&a, &b) {
        Some(s) if pd => {
            let m = vector::scale(&s, -1.0);
            let quad: f64 = (0..n).map(|i| (0..n).map(|j| m[i] * a[i][j] * m[j]).sum::<f64>()).sum();
            (m, d - 0.5 * quad)
        }
        _ => (vec![f64::NAN; n], f64::NAN),
    };
    let exponential = log_affine_from(rho, -c.abs());
    let quadratic = residual <= 1e-6;
    let c_zero = c.abs() <= 1e-6 * (1.0 + d.abs());
    r.vector("fit_matrix", &a.concat())
        .vector("fit_center", &center)
        .value("fit_constant", c)
        .value("fit_residual", residual)
        .value("fit_min_eigenvalue", eig.min())
        .flag("positive_definite", pd)
        .flag("quadratic", quadratic)
        .flag("rho_exponential", exponential)
        .flag("equality_form", quadratic && pd && (c_zero || exponential));
    Ok(r)
}

/// `log rho` affine on `[start, negligible]`, by second differences.
fn log_affine_from(rho: &Rho, start: f64) -> bool {
    if !start.is_finite() {
        return false;
    }
    let end = rho.support_end().unwrap_or_else(|| rho.negligible_beyond());
    let end = if end > start { end } else { start + 1.0 };
    let k = 64;
    let h = (end - start) / k as f64;
    let l: Vec<f64> = (0..=k).map(|i| rho.ln_eval(start + h * i as f64)).collect();
    if l.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let scale = l.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    l.windows(3).all(|w| (w[0] - 2.0 * w[1] + w[2]).abs() <= 1e-9 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_1d(m: usize) -> GridFn {
        GridFn::from_fn(vec![uniform_axis(-8.0, 8.0, m)], |x| 0.5 * x[0] * x[0]).unwrap()
    }

    #[test]
    fn half_square_is_self_dual() {
        let phi = quadratic_1d(801);
        let c = legendre_transform(&phi, &[0.0], None).unwrap();
        for (i, y) in c.psi.axes()[0].iter().enumerate() {
            if y.abs() <= 4.0 {
                assert!((c.psi.values()[i] - 0.5 * y * y).abs() < 1e-3);
                assert!(c.trusted[i]);
            }
        }
    }

    #[test]
    fn square_has_quarter_square_transform() {
        let phi = GridFn::from_fn(vec![uniform_axis(-6.0, 6.0, 1201)], |x| x[0] * x[0]).unwrap();
        let dual = vec![uniform_axis(-4.0, 4.0, 97)];
        let c = legendre_transform(&phi, &[0.0], Some(&dual)).unwrap();
        for (y, v) in dual[0].iter().zip(c.psi.values()) {
            assert!((v - y * y / 4.0).abs() < 1e-4);
        }
    }

    #[test]
    fn point_mass_gives_linear_transform() {
        let axis = uniform_axis(-2.0, 2.0, 41);
        let a = axis[27];
        let phi = GridFn::from_fn(vec![axis.clone()], |x| if x[0] == a { 0.0 } else { f64::INFINITY }).unwrap();
        let dual = vec![uniform_axis(-3.0, 3.0, 13)];
        let c = legendre_transform(&phi, &[0.0], Some(&dual)).unwrap();
        for (y, v) in dual[0].iter().zip(c.psi.values()) {
            assert_eq!(*v, a * y);
        }
    }

    #[test]
    fn sentinel_round_trip() {
        let phi = GridFn::new(vec![vec![0.0, 1.0, 2.0]], vec![1.0, f64::INFINITY, 0.5]).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        assert!(s.contains(INF_SENTINEL));
        let back: GridFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
        assert!(serde_json::from_str::<GridFn>(r#"{"axes":[[0,1]],"values":[1,"-inf"]}"#).is_err());
    }

    #[test]
    fn triangle_sublevel_fractions() {
        assert!((frac3([0.0, 1.0, 2.0], 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(frac3([0.0, 0.0, 0.0], 0.0), 1.0);
        assert!((frac3([0.0, 0.0, 1.0], 0.5) - 0.75).abs() < 1e-15);
        assert!((frac2(0.0, 4.0, 1.0) - 0.25).abs() < 1e-15);
    }
}
