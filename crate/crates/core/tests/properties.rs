use proptest::prelude::*;
use santalo_core::body::{named, ConvexBody};
use santalo_core::functional::{body_kz, find_center, CenterOptions};
use santalo_core::legendre::{legendre_transform, uniform_axis, GridFn};
use santalo_core::logconcave::{integrate_polar, Family, LogConcaveFn, Profile};
use santalo_core::polar::{polar, santalo_point, volume_product, SantaloOptions};
use santalo_core::polytope::PolytopeV;
use santalo_core::sphere::SphereGrid;
use santalo_core::star::StarBody;
use santalo_core::steiner::{steiner_symmetrize, vp_monotonicity};
use santalo_core::vector::{self, dot};
use std::f64::consts::PI;
use std::sync::Arc;

fn grid2() -> Arc<SphereGrid> {
    Arc::new(SphereGrid::default_for(2))
}

/// Convex polygon from angles and radii around the origin, which it contains.
fn polygon(points: &[(f64, f64)]) -> PolytopeV {
    let pts = points.iter().map(|(a, r)| vec![r * a.cos(), r * a.sin()]).collect();
    PolytopeV::from_points(pts).unwrap()
}

fn polygon_strategy() -> impl Strategy<Value = PolytopeV> {
    prop::collection::vec((0.0..2.0 * PI, 0.5f64..2.0), 3..12)
        .prop_map(|mut pts| {
            // Three spread anchors keep the origin strictly inside.
            pts.extend([(0.0, 1.0), (2.1, 1.0), (4.2, 1.0)]);
            polygon(&pts)
        })
}

fn symmetric_polygon_strategy() -> impl Strategy<Value = PolytopeV> {
    prop::collection::vec((0.0..PI, 0.5f64..2.0), 2..7).prop_map(|half| {
        let mut pts: Vec<(f64, f64)> = half.iter().flat_map(|&(a, r)| [(a, r), (a + PI, r)]).collect();
        pts.extend([(0.0, 1.0), (PI, 1.0), (PI / 2.0, 1.0), (1.5 * PI, 1.0)]);
        polygon(&pts)
    })
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (0.0..PI, 0.0..PI, 0.4f64..2.0, 0.4f64..2.0).prop_map(|(a, b, s1, s2)| {
        // R(a) diag(s1, s2) R(b): condition number at most 5.
        let r = |t: f64| [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        let (ra, rb) = (r(a), r(b));
        let s = [s1, s2];
        (0..2)
            .map(|i| (0..2).map(|j| (0..2).map(|k| ra[i][k] * s[k] * rb[k][j]).sum()).collect())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauge_is_positively_homogeneous(p in polygon_strategy(), x in (-3.0f64..3.0, -3.0f64..3.0), t in 0.01f64..50.0) {
        let k: ConvexBody = p.into();
        let x = [x.0, x.1];
        let g = k.gauge(&x);
        let gt = k.gauge(&vector::scale(&x, t));
        prop_assert!((gt - t * g).abs() <= 1e-12 * (1.0 + t * g));
    }

    #[test]
    fn star_volume_scales_and_matches_polygon(p in polygon_strategy(), t in 0.1f64..10.0) {
        let area = p.volume();
        let k: ConvexBody = p.into();
        let s = k.to_star(grid2()).unwrap();
        prop_assert!((s.volume() / area - 1.0).abs() <= 1e-3, "{} vs {area}", s.volume());
        let scaled = StarBody::new(s.grid().clone(), s.radial().iter().map(|r| t * r).collect()).unwrap();
        prop_assert!((scaled.volume() / (t * t * s.volume()) - 1.0).abs() <= 1e-10);
        for (u, r) in s.grid().nodes().iter().zip(s.radial()) {
            prop_assert!(s.support(u) >= r * (1.0 - 1e-12));
        }
    }

    #[test]
    fn symmetric_star_bodies_have_centroid_at_origin(p in symmetric_polygon_strategy()) {
        let s = ConvexBody::from(p).to_star(grid2()).unwrap();
        let c = s.centroid();
        prop_assert!(vector::norm(&c) <= 1e-10, "{c:?}");
    }

    #[test]
    fn bipolar_returns_the_body(p in symmetric_polygon_strategy()) {
        let k: ConvexBody = p.clone().into();
        let s = k.to_star(grid2()).unwrap();
        let back = s.polar(&[0.0, 0.0]).unwrap().polar(&[0.0, 0.0]).unwrap();
        let scale = s.radial().iter().cloned().fold(0.0, f64::max);
        for (a, b) in s.radial().iter().zip(back.radial()) {
            prop_assert!((a - b).abs() <= 1e-3 * scale, "{a} vs {b}");
        }
        // Exact path.
        let pp = polar(&polar(&k, &[0.0, 0.0]).unwrap(), &[0.0, 0.0]).unwrap();
        prop_assert!((pp.volume() / k.volume() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn polarity_reverses_inclusion(p in polygon_strategy(), t in 1.0f64..2.0) {
        // K ⊂ L = conv(K ∪ tK), so L° ⊂ K°.
        let mut pts = p.vertices().to_vec();
        pts.extend(p.vertices().iter().map(|v| vector::scale(v, t)));
        pts.push(vec![2.5, 0.3]);
        let l = PolytopeV::from_points(pts).unwrap();
        let (k, l): (ConvexBody, ConvexBody) = (p.into(), l.into());
        let (kp, lp) = (polar(&k, &[0.0, 0.0]).unwrap(), polar(&l, &[0.0, 0.0]).unwrap());
        for u in grid2().nodes().iter().step_by(16) {
            prop_assert!(lp.radial(u) <= kp.radial(u) + 1e-9);
        }
    }

    #[test]
    fn volume_product_is_linear_invariant(p in symmetric_polygon_strategy(), t in matrix_strategy()) {
        let k: ConvexBody = p.into();
        let tk = k.linear_image(&t).unwrap();
        let (a, b) = (volume_product(&k, &[0.0, 0.0]).unwrap(), volume_product(&tk, &[0.0, 0.0]).unwrap());
        prop_assert!((a - b).abs() <= 1e-2 * a);
        // Star-body path.
        let s: ConvexBody = tk.to_star(grid2()).unwrap().into();
        let c = volume_product(&s, &[0.0, 0.0]).unwrap();
        prop_assert!((a - c).abs() <= 1e-2 * a, "{a} vs {c}");
    }

    #[test]
    fn santalo_point_is_a_fixed_point_below_the_bound(p in polygon_strategy()) {
        let k: ConvexBody = p.into();
        let sp = santalo_point(&k, &SantaloOptions::default()).unwrap();
        prop_assert!(sp.residual <= 1e-6);
        prop_assert!(sp.volume_product <= PI * PI * (1.0 + 1e-12));
        let dual = polar(&k, &sp.point).unwrap().translate(&sp.point).unwrap();
        let c = dual.centroid();
        prop_assert!(vector::dist(&c, &sp.point) <= 1e-6 * dual.volume().sqrt());
    }
}

/// Random log-concave function in the plane.
fn logconcave_strategy() -> impl Strategy<Value = LogConcaveFn> {
    (0usize..3, matrix_strategy(), polygon_strategy(), 0.3f64..2.0, 0.3f64..2.0, (-1.0f64..1.0, -1.0f64..1.0)).prop_map(
        |(kind, t, p, w1, w2, shift)| {
            let family = match kind {
                0 => Family::Gaussian { t },
                1 => Family::ExpGauge(p),
                _ => Family::Product(vec![Profile::Laplace { width: w1 }, Profile::Gaussian { width: w2 }]),
            };
            LogConcaveFn::new(family, Some(vec![shift.0, shift.1]), 1.0).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn level_bodies_are_convex_with_the_integral_as_volume(f in logconcave_strategy(), z in (-0.2f64..0.2, -0.2f64..0.2)) {
        let z = vec![f.shift()[0] + z.0, f.shift()[1] + z.1];
        let grid = grid2();
        let k = body_kz(&f, &z, grid.clone()).unwrap();
        let cert = k.certify_convex(2000, 1);
        prop_assert!(cert.convex, "{cert:?}");
        let int = integrate_polar(&f, &z, &grid);
        prop_assert!((int / (2.0 * k.volume()) - 1.0).abs() <= 1e-2, "{int} vs {}", 2.0 * k.volume());
    }

    #[test]
    fn level_bodies_translate_with_the_function(f in logconcave_strategy(), a in (-2.0f64..2.0, -2.0f64..2.0)) {
        let grid = grid2();
        let z = f.shift().to_vec();
        let moved_shift = vec![z[0] + a.0, z[1] + a.1];
        let g = LogConcaveFn::new(f.family().clone(), Some(moved_shift.clone()), f.scale()).unwrap();
        let k = body_kz(&f, &z, grid.clone()).unwrap();
        let kt = body_kz(&g, &moved_shift, grid).unwrap();
        for (r, s) in k.radial().iter().zip(kt.radial()) {
            prop_assert!((r - s).abs() <= 1e-10 * r.max(1.0), "{r} vs {s}");
        }
    }

    #[test]
    fn even_functions_are_centred_at_their_shift(w in (0.3f64..2.0, 0.3f64..2.0), shift in (-1.0f64..1.0, -1.0f64..1.0)) {
        let f = LogConcaveFn::new(
            Family::Product(vec![Profile::Laplace { width: w.0 }, Profile::Gaussian { width: w.1 }]),
            Some(vec![shift.0, shift.1]),
            1.0,
        )
        .unwrap();
        let c = find_center(&f, grid2(), &CenterOptions::default()).unwrap();
        prop_assert!(vector::dist(&c.z0, f.shift()) <= 1e-6, "{:?}", c.z0);
    }
}

fn grid_fn(axes: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> GridFn {
    GridFn::from_fn(axes, |x| f(x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conjugation_reverses_order(
        c in (-1.0f64..1.0, -1.0f64..1.0),
        bump in prop::collection::vec(0.0f64..1.0, 33 * 33),
        z in (-0.5f64..0.5, -0.5f64..0.5),
    ) {
        let axes = vec![uniform_axis(-2.0, 2.0, 33), uniform_axis(-2.0, 2.0, 33)];
        let phi1 = grid_fn(axes.clone(), |x| 0.5 * ((x[0] - c.0).powi(2) + (x[1] - c.1).powi(2)));
        let v2: Vec<f64> = phi1.values().iter().zip(&bump).map(|(a, b)| a + b).collect();
        let phi2 = GridFn::new(axes, v2).unwrap();
        let z = [z.0, z.1];
        let dual = phi1.slope_axes(&z);
        let l1 = legendre_transform(&phi1, &z, Some(&dual)).unwrap();
        let l2 = legendre_transform(&phi2, &z, Some(&dual)).unwrap();
        for (a, b) in l2.psi.values().iter().zip(l1.psi.values()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn fenchel_young_holds_on_every_node_pair(
        c in (-1.0f64..1.0, -1.0f64..1.0),
        noise in prop::collection::vec(-0.3f64..0.3, 17 * 17),
        z in (-0.5f64..0.5, -0.5f64..0.5),
    ) {
        let axes = vec![uniform_axis(-2.0, 2.0, 17), uniform_axis(-1.5, 2.5, 17)];
        let base = grid_fn(axes.clone(), |x| (x[0] - c.0).abs() + 0.5 * (x[1] - c.1).powi(2));
        let values: Vec<f64> = base.values().iter().zip(&noise).map(|(a, b)| a + b).collect();
        let phi = GridFn::new(axes, values).unwrap();
        let z = [z.0, z.1];
        let l = legendre_transform(&phi, &z, None).unwrap();
        for i in 0..phi.len() {
            let x = phi.node(i);
            for j in 0..l.psi.len() {
                let y = l.psi.node(j);
                let pairing = dot(&vector::sub(&x, &z), &vector::sub(&y, &z));
                let scale = phi.values()[i].abs() + l.psi.values()[j].abs() + pairing.abs();
                prop_assert!(phi.values()[i] + l.psi.values()[j] >= pairing - 1e-12 * scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steiner_symmetrals_keep_volume_and_are_reflection_symmetric(p in polygon_strategy(), a in 0.0..PI) {
        let u = [a.cos(), a.sin()];
        let v = [-u[1], u[0]];
        let k: ConvexBody = p.into();
        let s = steiner_symmetrize(&k, &u).unwrap();
        prop_assert!((s.volume() / k.volume() - 1.0).abs() <= 1e-6);
        let ConvexBody::Polytope(sp) = &s else { panic!("polygons stay exact") };
        for x in sp.vertices() {
            let refl = vector::axpy(x, -2.0 * dot(x, &u), &u);
            prop_assert!(sp.contains(&refl, 1e-9 * sp.diameter()));
        }
        // Supports and second moments orthogonal to u are unchanged.
        for w in [v, [-v[0], -v[1]]] {
            prop_assert!((s.support(&w) - k.support(&w)).abs() <= 1e-9 * k.diameter_bound());
        }
        let second = |b: &ConvexBody| {
            let m = b.moments();
            let c = b.centroid();
            // int <x, v>^2 about the origin from central moments
            let cv = dot(&c, &v);
            let mut q = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    q += v[i] * v[j] * m.second[i][j];
                }
            }
            q + m.volume * cv * cv
        };
        prop_assert!((second(&s) / second(&k) - 1.0).abs() <= 1e-3);
        // Idempotent.
        let ss = steiner_symmetrize(&s, &u).unwrap();
        prop_assert!((ss.volume() / s.volume() - 1.0).abs() <= 1e-9);
        for w in grid2().nodes().iter().step_by(64) {
            prop_assert!((ss.support(w) - s.support(w)).abs() <= 1e-9 * k.diameter_bound());
        }
    }

    #[test]
    fn orthogonal_symmetrals_are_unconditional(p in symmetric_polygon_strategy(), a in 0.0..PI) {
        let u = [a.cos(), a.sin()];
        let k: ConvexBody = p.into();
        let (s1, r1) = vp_monotonicity(&k, &u, 1e-2).unwrap();
        let (s2, r2) = vp_monotonicity(&s1, &[-u[1], u[0]], 1e-2).unwrap();
        prop_assert!(r1.passed() && r2.passed(), "{r1:?} {r2:?}");
        for w in grid2().nodes().iter().step_by(32) {
            // Coordinates along (u, u^⊥): flip both signs separately.
            let (a1, a2) = (dot(w, &u), w[1] * u[0] - w[0] * u[1]);
            let flipped = [-a1 * u[0] - a2 * (-u[1]), -a1 * u[1] - a2 * u[0]];
            let mirrored = [a1 * u[0] - a2 * (-u[1]), a1 * u[1] - a2 * u[0]];
            let r = s2.radial(w);
            prop_assert!((s2.radial(&flipped) - r).abs() <= 1e-6 * r);
            prop_assert!((s2.radial(&mirrored) - r).abs() <= 1e-6 * r);
        }
    }
}

#[test]
fn named_ball_support_equals_radius() {
    let b = named("ball2").unwrap();
    let ConvexBody::Star(s) = &b else { panic!() };
    for (u, r) in s.grid().nodes().iter().zip(s.radial()) {
        assert!((s.support(u) - r).abs() < 1e-12);
    }
}
