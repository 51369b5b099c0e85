//! Small dense-vector helpers on plain slices. Dimensions in this crate are
//! tiny (1 to 4), so allocation-free slice arithmetic beats matrix types.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + t * d`
pub fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Determinant of a small square matrix given as rows, by Gaussian elimination
/// with partial pivoting.
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    match n {
        0 => 1.0,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let r = rows;
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        }
        _ => {
            let mut m: Vec<Vec<f64>> = rows.to_vec();
            let mut d = 1.0;
            for c in 0..n {
                let p = (c..n)
                    .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
                    .unwrap();
                if m[p][c] == 0.0 {
                    return 0.0;
                }
                if p != c {
                    m.swap(p, c);
                    d = -d;
                }
                d *= m[c][c];
                let (top, rest) = m.split_at_mut(c + 1);
                let pivot = &top[c];
                for row in rest.iter_mut() {
                    let f = row[c] / pivot[c];
                    for (r, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                        *r -= f * p;
                    }
                }
            }
            d
        }
    }
}

/// Normal of the hyperplane spanned by `n-1` vectors in R^n (generalized cross
/// product). Its length is the (n-1)-volume of the spanned parallelotope.
pub fn cross(vectors: &[Vec<f64>], n: usize) -> Vec<f64> {
    debug_assert_eq!(vectors.len() + 1, n);
    let mut out = vec![0.0; n];
    let mut minor = vec![vec![0.0; n - 1]; n - 1];
    for (k, o) in out.iter_mut().enumerate() {
        for (r, v) in vectors.iter().enumerate() {
            let mut c = 0;
            for (j, x) in v.iter().enumerate() {
                if j != k {
                    minor[r][c] = *x;
                    c += 1;
                }
            }
        }
        let sign = if (k + n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        *o = sign * det(&minor);
    }
    out
}

/// Solve the small linear system `a x = b`; `None` when singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let v = nalgebra::DVector::from_column_slice(b);
    let x = m.lu().solve(&v)?;
    if x.iter().all(|t| t.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

pub fn unit_ball_volume(n: usize) -> f64 {
    // v_n = pi^{n/2} / Gamma(n/2 + 1), via the two-step recursion.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Orthonormal basis of the orthogonal complement of `normal` (unit).
pub fn complement_basis(normal: &[f64]) -> Vec<Vec<f64>> {
    let n = normal.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| normal[i].abs().total_cmp(&normal[j].abs()));
    for &k in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        let p = dot(&v, normal);
        v = axpy(&v, -p, normal);
        for b in &basis {
            let p = dot(&v, b);
            v = axpy(&v, -p, b);
        }
        if let Some(u) = normalized(&v) {
            if norm(&v) > 1e-8 {
                basis.push(u);
            }
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_is_orthogonal() {
        let a = vec![1.0, 2.0, 0.5, -1.0];
        let b = vec![0.0, 1.0, 3.0, 2.0];
        let c = vec![-2.0, 0.0, 1.0, 1.0];
        let n = cross(&[a.clone(), b.clone(), c.clone()], 4);
        assert!(dot(&n, &a).abs() < 1e-12);
        assert!(dot(&n, &b).abs() < 1e-12);
        assert!(dot(&n, &c).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn det_matches_elimination() {
        let m = vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![1.0, 3.0, 1.0, 0.0],
            vec![0.0, 1.0, 4.0, 1.0],
            vec![0.0, 0.0, 1.0, 5.0],
        ];
        let d = det(&m);
        assert!((d - 85.0).abs() < 1e-10, "{d}");
    }
}
