//! Library results against independent computations: brute-force maxima,
//! closed forms through `erf`, exhaustive grid search and hand-derived
//! polytope duals.

use proptest::prelude::*;
use santalo_core::body::{named, ConvexBody};
use santalo_core::legendre::{legendre_transform, uniform_axis, GridFn};
use santalo_core::measure::DensityMeasure;
use santalo_core::polar::{polar_volume, santalo_point, volume_product, SantaloOptions};
use santalo_core::polytope::PolytopeV;
use santalo_core::sphere::SphereGrid;
use statrs::function::erf::erf;
use std::f64::consts::{PI, SQRT_2};

/// `max_x <x - z, y - z> - phi(x)` over every primal node, accumulated in
/// the same per-axis order as the factorized transform.
fn brute_conjugate(phi: &GridFn, z: &[f64], dual: &GridFn) -> Vec<f64> {
    (0..dual.len())
        .map(|j| {
            let y = dual.node(j);
            let mut best = f64::NEG_INFINITY;
            for i in 0..phi.len() {
                let x = phi.node(i);
                let mut t = -phi.values()[i];
                for k in 0..x.len() {
                    t += (x[k] - z[k]) * (y[k] - z[k]);
                }
                best = best.max(t);
            }
            best
        })
        .collect()
}

fn grid_strategy() -> impl Strategy<Value = (GridFn, Vec<f64>)> {
    (1usize..=2, 2usize..=64, 2usize..=64, any::<u64>()).prop_map(|(n, m0, m1, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let shape = if n == 1 { vec![m0] } else { vec![m0, m1] };
        let axes: Vec<Vec<f64>> = shape
            .iter()
            .map(|m| {
                let lo = rng.gen_range(-3.0..-0.5);
                let hi = rng.gen_range(0.5..3.0);
                uniform_axis(lo, hi, *m)
            })
            .collect();
        let len: usize = shape.iter().product();
        // Mix of convex, non-convex and partially infinite functions.
        let kind = rng.gen_range(0..3);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut values = Vec::with_capacity(len);
        let probe = GridFn::new(axes.clone(), vec![0.0; len]).unwrap();
        for i in 0..len {
            let x = probe.node(i);
            let q: f64 = x.iter().zip(&c).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
            let v = match kind {
                0 => q,
                1 => q + rng.gen_range(-0.5..0.5),
                _ if x[0] > 1.0 => f64::INFINITY,
                _ => q.sqrt() + x.iter().map(|a| a.abs()).sum::<f64>(),
            };
            values.push(v);
        }
        if values.iter().all(|v| v.is_infinite()) {
            values[0] = 0.0;
        }
        let z = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        (GridFn::new(axes, values).unwrap(), z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorized_transform_is_bit_identical_to_brute_force((phi, z) in grid_strategy()) {
        let c = legendre_transform(&phi, &z, None).unwrap();
        let brute = brute_conjugate(&phi, &z, &c.psi);
        for (j, (a, b)) in c.psi.values().iter().zip(&brute).enumerate() {
            prop_assert!(a.to_bits() == b.to_bits(), "node {j}: {a:e} vs {b:e}");
        }
    }
}

#[test]
fn gaussian_measure_of_square_and_diamond() {
    let mu = DensityMeasure::gaussian(2);
    let grid = SphereGrid::default_for(2);
    // int_{-1}^{1} exp(-x^2/2) dx = sqrt(2 pi) erf(1/sqrt 2)
    let line = (2.0 * PI).sqrt() * erf(1.0 / SQRT_2);
    let square = mu.measure_of(&named("square").unwrap(), &grid);
    // The radial function has corners, so the angular rule is only second order.
    assert!((square / (line * line) - 1.0).abs() < 1e-6, "{square} vs {}", line * line);

    // Diamond |x| + |y| <= 1: inner integral in closed form, outer by
    // composite Simpson on [0, 1] doubled.
    let inner = |x: f64| (-0.5 * x * x).exp() * (2.0 * PI).sqrt() * erf((1.0 - x) / SQRT_2);
    let m = 20_000;
    let h = 1.0 / m as f64;
    let simpson: f64 = (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * inner(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let diamond = mu.measure_of(&named("diamond").unwrap(), &grid);
    assert!((diamond / (2.0 * simpson) - 1.0).abs() < 1e-6, "{diamond} vs {}", 2.0 * simpson);

    let ball = mu.measure_of(&named("ball2").unwrap(), &grid);
    let exact = 2.0 * PI * (1.0 - (-0.5f64).exp());
    assert!((ball / exact - 1.0).abs() < 1e-9, "{ball} vs {exact}");
}

/// Area of `(T - z)°` for a triangle `T`: its vertices are `a_i / (b_i - <a_i, z>)`
/// for the facet inequalities `<a_i, x> <= b_i`.
fn triangle_polar_area(t: &[[f64; 2]; 3], z: [f64; 2]) -> f64 {
    let mut verts = Vec::new();
    for i in 0..3 {
        let (p, q, r) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
        let mut a = [q[1] - p[1], p[0] - q[0]];
        if a[0] * (r[0] - p[0]) + a[1] * (r[1] - p[1]) > 0.0 {
            a = [-a[0], -a[1]];
        }
        let b = a[0] * p[0] + a[1] * p[1];
        let s = b - a[0] * z[0] - a[1] * z[1];
        verts.push([a[0] / s, a[1] / s]);
    }
    let mut area = 0.0;
    for i in 0..3 {
        let (u, v) = (verts[i], verts[(i + 1) % 3]);
        area += u[0] * v[1] - u[1] * v[0];
    }
    0.5 * area.abs()
}

#[test]
fn santalo_point_of_scalene_triangle_matches_grid_search() {
    let t = [[0.0, 0.0], [3.0, 0.0], [0.7, 1.6]];
    let body: ConvexBody = PolytopeV::new(t.iter().map(|v| v.to_vec()).collect()).unwrap().into();
    let sp = santalo_point(&body, &SantaloOptions::default()).unwrap();
    assert!(sp.residual <= 1e-6);

    // Search on a 200^2 grid over the bounding box, then on a refined box.
    let search = |lo: [f64; 2], hi: [f64; 2]| {
        let m = 200;
        let mut best = (f64::INFINITY, [0.0; 2]);
        for i in 0..m {
            for j in 0..m {
                let z = [
                    lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / m as f64,
                    lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / m as f64,
                ];
                if !body_contains(&t, z) {
                    continue;
                }
                let a = triangle_polar_area(&t, z);
                if a < best.0 {
                    best = (a, z);
                }
            }
        }
        best
    };
    let (_, coarse) = search([0.0, 0.0], [3.0, 1.6]);
    let d = 0.03;
    let (area, fine) = search([coarse[0] - d, coarse[1] - d], [coarse[0] + d, coarse[1] + d]);

    let vol = body.volume();
    assert!((sp.volume_product - vol * area).abs() <= 1e-6 * vol * area);
    assert!(sp.volume_product <= vol * area * (1.0 + 1e-12));
    let dist = ((sp.point[0] - fine[0]).powi(2) + (sp.point[1] - fine[1]).powi(2)).sqrt();
    assert!(dist < 1e-3, "{:?} vs {fine:?}", sp.point);
    // Every triangle is affinely regular, so the product is 27/4.
    assert!((sp.volume_product - 6.75).abs() < 1e-9, "{}", sp.volume_product);
}

fn body_contains(t: &[[f64; 2]; 3], z: [f64; 2]) -> bool {
    let cross = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]);
    let s: Vec<f64> = (0..3).map(|i| cross(t[i], t[(i + 1) % 3])).collect();
    s.iter().all(|v| *v > 1e-9) || s.iter().all(|v| *v < -1e-9)
}

#[test]
fn hand_computed_polytope_products() {
    // square: 4 * 2, cube: 8 * 4/3, cross-polytopes by duality
    for (name, vp) in [("square", 8.0), ("cube3", 32.0 / 3.0), ("diamond", 8.0), ("octahedron", 32.0 / 3.0)] {
        let b = named(name).unwrap();
        let z = vec![0.0; b.dim()];
        assert_eq!(volume_product(&b, &z).unwrap(), vp, "{name}");
    }
    // Off-centre square: (K - z)° for z = (a, 0) is a kite with diagonals
    // 2 / (1 - a^2) and 2.
    let a = 0.4;
    let pv = polar_volume(&named("square").unwrap(), &[a, 0.0]).unwrap();
    assert!((pv - 2.0 / (1.0 - a * a)).abs() < 1e-12, "{pv}");
}

#[test]
fn ball_products_match_unit_ball_volumes() {
    for (n, vn) in [(1, 2.0), (2, PI), (3, 4.0 * PI / 3.0)] {
        let b = if n == 1 { named("segment").unwrap() } else { named(&format!("ball{n}")).unwrap() };
        let vp = volume_product(&b, &vec![0.0; n]).unwrap();
        assert!((vp / (vn * vn) - 1.0).abs() < 1e-3, "n = {n}: {vp}");
    }
}
