//! Direction grids on the unit sphere with quadrature weights summing to 1
//! (normalized surface measure).
//!
//! * n = 1: the two points `{+1, -1}`.
//! * n = 2: `N` equally spaced angles, `N` a multiple of 8 so that the axes
//!   and diagonals are nodes.
//! * n >= 3: cubed-sphere lattice. Nodes are the boundary points of the grid
//!   `{-1, -1 + 2/m, ..., 1}^n` projected to the sphere; weights are Simpson
//!   weights on each face times the solid-angle Jacobian `|p|^{-n}`.
//!
//! All grids are invariant under every coordinate sign flip.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Pair,
    Circle { count: usize },
    Cubed { m: usize, faces: Vec<Vec<u32>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    layout: Layout,
}

pub const DEFAULT_N2: usize = 4096;
pub const DEFAULT_N3: usize = 8192;
pub const DEFAULT_N4: usize = 32768;

pub fn default_size(n: usize) -> usize {
    match n {
        1 => 2,
        2 => DEFAULT_N2,
        3 => DEFAULT_N3,
        _ => DEFAULT_N4,
    }
}

fn cubed_count(n: usize, m: usize) -> usize {
    (m + 1).pow(n as u32) - (m - 1).pow(n as u32)
}

fn circle_point(k: usize, count: usize) -> [f64; 2] {
    let q4 = count / 4;
    let q8 = count / 8;
    let j = k % count;
    let quadrant = j / q4;
    let rem = j % q4;
    let (c, s) = if rem == q8 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if rem < q8 {
        let a = 2.0 * PI * rem as f64 / count as f64;
        (a.cos(), a.sin())
    } else {
        let b = 2.0 * PI * (q4 - rem) as f64 / count as f64;
        (b.sin(), b.cos())
    };
    match quadrant {
        0 => [c, s],
        1 => [-s, c],
        2 => [-c, -s],
        _ => [s, -c],
    }
}

impl SphereGrid {
    /// Grid in dimension `n` with approximately `size` nodes.
    pub fn new(n: usize, size: usize) -> Result<Self> {
        match n {
            0 => Err(Error::InvalidInput("dimension must be positive".into())),
            1 => Ok(SphereGrid {
                dim: 1,
                nodes: vec![vec![1.0], vec![-1.0]],
                weights: vec![0.5, 0.5],
                layout: Layout::Pair,
            }),
            2 => {
                let count = (size.max(8)).div_ceil(8) * 8;
                let nodes: Vec<Vec<f64>> = (0..count).map(|k| circle_point(k, count).to_vec()).collect();
                Ok(SphereGrid {
                    dim: 2,
                    nodes,
                    weights: vec![1.0 / count as f64; count],
                    layout: Layout::Circle { count },
                })
            }
            _ => {
                // m divisible by 4 keeps face centre lines on Simpson panel boundaries.
                let mut m = 4;
                while cubed_count(n, m + 4) <= size
                    || (cubed_count(n, m + 4) as f64 - size as f64).abs()
                        < (size as f64 - cubed_count(n, m) as f64).abs()
                {
                    m += 4;
                }
                Ok(Self::cubed(n, m))
            }
        }
    }

    pub fn default_for(n: usize) -> Self {
        Self::new(n, default_size(n)).expect("positive dimension")
    }

    /// Cubed-sphere grid with `m` (even) intervals per face edge.
    pub fn cubed(n: usize, m: usize) -> Self {
        assert!(n >= 3 && m >= 2 && m.is_multiple_of(2));
        let per_face = (m + 1).pow((n - 1) as u32);
        let simpson = |i: usize| -> f64 {
            if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
        let mut nodes = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut faces = Vec::with_capacity(2 * n);
        for axis in 0..n {
            for side in [0usize, m] {
                let mut table = vec![0u32; per_face];
                for (flat, slot) in table.iter_mut().enumerate() {
                    let mut rest = flat;
                    let mut lattice = vec![0u16; n];
                    let mut w = 1.0;
                    for j in (0..n).rev() {
                        if j == axis {
                            lattice[j] = side as u16;
                        } else {
                            let i = rest % (m + 1);
                            rest /= m + 1;
                            lattice[j] = i as u16;
                            w *= simpson(i);
                        }
                    }
                    let p: Vec<f64> = lattice
                        .iter()
                        .map(|&i| -1.0 + 2.0 * i as f64 / m as f64)
                        .collect();
                    let r = crate::vector::norm(&p);
                    let id = *index.entry(lattice).or_insert_with(|| {
                        nodes.push(crate::vector::scale(&p, 1.0 / r));
                        weights.push(0.0);
                        (nodes.len() - 1) as u32
                    });
                    weights[id as usize] += w * r.powi(-(n as i32));
                    *slot = id;
                }
                faces.push(table);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        SphereGrid {
            dim: n,
            nodes,
            weights,
            layout: Layout::Cubed { m, faces },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Requested-size parameter that reproduces this grid through [`SphereGrid::new`].
    pub fn size_parameter(&self) -> usize {
        self.len()
    }

    fn face_of(&self, x: &[f64]) -> (usize, usize, Vec<f64>) {
        let n = self.dim;
        let m = match &self.layout {
            Layout::Cubed { m, .. } => *m,
            _ => unreachable!(),
        };
        let axis = (0..n)
            .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
            .unwrap();
        let side = usize::from(x[axis] > 0.0);
        let scale = x[axis].abs();
        let q: Vec<f64> = (0..n)
            .filter(|&j| j != axis)
            .map(|j| ((x[j] / scale + 1.0) * 0.5 * m as f64).clamp(0.0, m as f64))
            .collect();
        (2 * axis + side, m, q)
    }

    fn face_node(&self, face: usize, coords: &[usize]) -> usize {
        match &self.layout {
            Layout::Cubed { m, faces } => {
                let mut flat = 0;
                for &c in coords {
                    flat = flat * (m + 1) + c;
                }
                faces[face][flat] as usize
            }
            _ => unreachable!(),
        }
    }

    /// Grid node closest (in lattice terms) to the direction of `x`.
    pub fn nearest(&self, x: &[f64]) -> usize {
        match &self.layout {
            Layout::Pair => usize::from(x[0] < 0.0),
            Layout::Circle { count } => {
                let t = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
                ((t / (2.0 * PI) * *count as f64).round() as usize) % count
            }
            Layout::Cubed { .. } => {
                let (face, _, q) = self.face_of(x);
                let c: Vec<usize> = q.iter().map(|t| t.round() as usize).collect();
                self.face_node(face, &c)
            }
        }
    }

    /// Number of lattice cells (only for the cubed layout in dimension 3).
    pub fn cell_count(&self) -> usize {
        match &self.layout {
            Layout::Cubed { m, .. } if self.dim == 3 => 6 * m * m,
            _ => 0,
        }
    }

    /// Corner nodes of a 3D lattice cell in cyclic order `00, 10, 11, 01`.
    pub fn cell_corners(&self, cell: usize) -> [usize; 4] {
        let m = match &self.layout {
            Layout::Cubed { m, .. } => *m,
            _ => unreachable!(),
        };
        let face = cell / (m * m);
        let i = (cell % (m * m)) / m;
        let j = cell % m;
        [
            self.face_node(face, &[i, j]),
            self.face_node(face, &[i + 1, j]),
            self.face_node(face, &[i + 1, j + 1]),
            self.face_node(face, &[i, j + 1]),
        ]
    }

    /// Node indices of the boundary simplex whose cone contains `x`. For 3D
    /// lattices `diag[cell]` selects the split of each cell: `false` cuts along
    /// corners 00-11, `true` along 10-01.
    pub fn simplex(&self, x: &[f64], diag: &[bool]) -> Vec<usize> {
        match &self.layout {
            Layout::Pair => vec![usize::from(x[0] < 0.0)],
            Layout::Circle { count } => {
                let t = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
                let k = ((t / (2.0 * PI) * *count as f64).floor() as usize) % count;
                vec![k, (k + 1) % count]
            }
            Layout::Cubed { m, .. } => {
                let m = *m;
                let (face, _, q) = self.face_of(x);
                let d = q.len();
                let c: Vec<usize> = q.iter().map(|t| (t.floor() as usize).min(m - 1)).collect();
                let f: Vec<f64> = q.iter().zip(&c).map(|(t, c)| t - *c as f64).collect();
                if d == 2 {
                    let cell = face * m * m + c[0] * m + c[1];
                    let at = |a: usize, b: usize| self.face_node(face, &[c[0] + a, c[1] + b]);
                    if !diag.is_empty() && diag[cell] {
                        if f[0] + f[1] <= 1.0 {
                            vec![at(0, 0), at(1, 0), at(0, 1)]
                        } else {
                            vec![at(1, 0), at(1, 1), at(0, 1)]
                        }
                    } else if f[0] >= f[1] {
                        vec![at(0, 0), at(1, 0), at(1, 1)]
                    } else {
                        vec![at(0, 0), at(1, 1), at(0, 1)]
                    }
                } else {
                    let mut order: Vec<usize> = (0..d).collect();
                    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
                    let mut cur = c.clone();
                    let mut out = vec![self.face_node(face, &cur)];
                    for &k in &order {
                        cur[k] += 1;
                        out.push(self.face_node(face, &cur));
                    }
                    out
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::unit_ball_volume;

    #[test]
    fn weights_sum_to_one() {
        for n in 1..=4 {
            let g = SphereGrid::new(n, 2000).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn default_sizes() {
        assert_eq!(SphereGrid::default_for(2).len(), 4096);
        assert_eq!(SphereGrid::default_for(3).len(), 7778);
        assert_eq!(SphereGrid::default_for(4).len(), 32896);
    }

    #[test]
    fn second_moment_is_isotropic() {
        // The mean of u_i^2 over the sphere is 1/n.
        for n in 2..=4 {
            let g = SphereGrid::new(n, 3000).unwrap();
            let m: f64 = g.nodes().iter().zip(g.weights()).map(|(u, w)| w * u[0] * u[0]).sum();
            assert!((m - 1.0 / n as f64).abs() < 1e-6, "n={n}: {m}");
        }
    }

    #[test]
    fn ball_moment_of_cube_radial() {
        // Cube [-1,1]^3: r^3 times the Jacobian is constant on each face.
        let g = SphereGrid::default_for(3);
        let v: f64 = g
            .nodes()
            .iter()
            .zip(g.weights())
            .map(|(u, w)| w * crate::vector::max_abs(u).powi(-3))
            .sum::<f64>()
            * unit_ball_volume(3);
        assert!((v - 8.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn symmetric_under_sign_flips() {
        let g = SphereGrid::new(3, 1500).unwrap();
        for (i, u) in g.nodes().iter().enumerate().step_by(17) {
            let f = vec![-u[0], u[1], -u[2]];
            let j = g.nearest(&f);
            assert!(crate::vector::dist(g.node(j), &f) < 1e-14);
            assert!((g.weights()[i] - g.weights()[j]).abs() < 1e-16);
        }
        let c = SphereGrid::new(2, 64).unwrap();
        for u in c.nodes() {
            let j = c.nearest(&[u[1], -u[0]]);
            assert_eq!(c.node(j), &[u[1], -u[0]][..]);
        }
    }
}
