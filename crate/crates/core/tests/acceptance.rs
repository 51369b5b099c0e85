//! One line per acceptance criterion, then a non-zero exit if any failed.

use santalo_core::body::{named, ConvexBody};
use santalo_core::functional::{find_center, functional_santalo_verify, inclusion_check, CenterOptions, FunctionalOptions};
use santalo_core::fuzz::{fuzz, FuzzFamily, FuzzOptions};
use santalo_core::harness::{parse_config, run};
use santalo_core::legendre::{biconjugate_check, legendre_santalo_verify, legendre_transform, uniform_axis, GridFn, LegendreOptions};
use santalo_core::logconcave::LogConcaveFn;
use santalo_core::measure::{DensityMeasure, MeasureOptions, measure_product_check};
use santalo_core::polar::{santalo_point, volume_product, SantaloOptions};
use santalo_core::polytope::PolytopeV;
use santalo_core::rho::Rho;
use santalo_core::rng;
use santalo_core::sphere::SphereGrid;
use santalo_core::steiner::{ellipsoid_test, vp_monotonicity};
use santalo_core::star::StarBody;
use santalo_core::vector::unit_ball_volume;
use rand::Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ball_equality() -> Outcome {
    let mut out = Vec::new();
    for n in 1..=3 {
        let vn2 = unit_ball_volume(n).powi(2);
        let t = Instant::now();
        let body = if n == 1 { named("segment") } else { named(&format!("ball{n}")) }.map_err(e)?;
        let vp = volume_product(&body, &vec![0.0; n]).map_err(e)?;
        let secs = t.elapsed().as_secs_f64();
        ensure(rel(vp, vn2) <= 1e-3, || format!("n = {n}: vp {vp} vs {vn2}"))?;
        ensure(secs < 1.0, || format!("n = {n}: {secs:.2} s"))?;
        out.push(format!("n={n} rel err {:.1e} in {secs:.2}s", rel(vp, vn2)));
    }
    Ok(out.join(", "))
}

fn cube_duality() -> Outcome {
    let mut out = Vec::new();
    for (name, n, exact) in [("square", 2, 8.0), ("cube3", 3, 32.0 / 3.0)] {
        let body = named(name).map_err(e)?;
        let z = vec![0.0; n];
        let vp = volume_product(&body, &z).map_err(e)?;
        let err = (vp - exact).abs();
        ensure(err <= 1e-12 * exact, || format!("{name}: exact path {vp}"))?;
        let star: ConvexBody = body.to_star(Arc::new(SphereGrid::default_for(n))).map_err(e)?.into();
        let vs = volume_product(&star, &z).map_err(e)?;
        ensure(rel(vs, exact) <= 1e-3, || format!("{name}: star path {vs}"))?;
        let bound = unit_ball_volume(n).powi(2);
        ensure(vp <= bound && vs <= bound, || format!("{name}: above v_n^2"))?;
        out.push(format!("{name} exact err {err:.0e}, star rel err {:.1e}", rel(vs, exact)));
    }
    Ok(out.join(", "))
}

/// Area of `(T - z)°` from the facet inequalities of a triangle.
fn triangle_polar_area(t: &[Vec<f64>], z: [f64; 2]) -> Option<f64> {
    let mut v = Vec::new();
    for i in 0..3 {
        let (p, q, r) = (&t[i], &t[(i + 1) % 3], &t[(i + 2) % 3]);
        let mut a = [q[1] - p[1], p[0] - q[0]];
        if a[0] * (r[0] - p[0]) + a[1] * (r[1] - p[1]) > 0.0 {
            a = [-a[0], -a[1]];
        }
        let s = a[0] * (p[0] - z[0]) + a[1] * (p[1] - z[1]);
        if s <= 0.0 {
            return None;
        }
        v.push([a[0] / s, a[1] / s]);
    }
    let twice: f64 = (0..3).map(|i| v[i][0] * v[(i + 1) % 3][1] - v[i][1] * v[(i + 1) % 3][0]).sum();
    Some(0.5 * twice.abs())
}

fn simplex_santalo() -> Outcome {
    let body = named("triangle").map_err(e)?;
    let ConvexBody::Polytope(p) = &body else { return Err("triangle is not a polytope".into()) };
    let sp = santalo_point(&body, &SantaloOptions::default()).map_err(e)?;
    ensure(sp.residual <= 1e-6, || format!("residual {:e}", sp.residual))?;
    ensure((sp.volume_product - 6.75).abs() <= 1e-2, || format!("vp {}", sp.volume_product))?;
    let t = p.vertices();
    let (lo, hi) = (
        [t.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min), t.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min)],
        [t.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max), t.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max)],
    );
    let m = 200;
    let mut best = f64::INFINITY;
    for i in 0..m {
        for j in 0..m {
            let z = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / m as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / m as f64,
            ];
            if let Some(a) = triangle_polar_area(t, z) {
                best = best.min(a);
            }
        }
    }
    let grid_vp = best * p.volume();
    ensure((grid_vp - sp.volume_product).abs() <= 1e-2, || format!("grid {grid_vp} vs solver {}", sp.volume_product))?;
    Ok(format!(
        "residual {:.1e}, vp {:.6}, 200^2 grid search {:.6}",
        sp.residual, sp.volume_product, grid_vp
    ))
}

fn gaussian_functional() -> Outcome {
    let t = Instant::now();
    let mut out = Vec::new();
    for n in 1..=2 {
        let f = LogConcaveFn::gaussian(n);
        let opts = FunctionalOptions::for_dim(n);
        let c = find_center(&f, opts.grid.clone(), &CenterOptions::default()).map_err(e)?;
        let z0 = c.z0.iter().map(|v| v * v).sum::<f64>().sqrt();
        ensure(z0 <= 1e-6, || format!("n = {n}: |z0| = {z0:e}"))?;
        let r = functional_santalo_verify(&f, Some(&f), &Rho::exp(), None, &opts).map_err(e)?;
        let pin = PI.powi(n as i32);
        let (ff, gg, rhs) = (r.get("integral_f").unwrap(), r.get("integral_g").unwrap(), r.get("rhs").unwrap());
        let lhs = ff * gg;
        ensure(rel(lhs, pin) <= 1e-3 && rel(rhs, pin) <= 1e-3, || format!("n = {n}: lhs {lhs}, rhs {rhs}"))?;
        out.push(format!("n={n} lhs/pi^n-1 {:.1e}, rhs/pi^n-1 {:.1e}, |z0| {z0:.0e}", lhs / pin - 1.0, rhs / pin - 1.0));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("{secs:.2} s"))?;
    Ok(format!("{} in {secs:.2}s", out.join(", ")))
}

fn legendre_equality() -> Outcome {
    let rho = Rho::exp();
    let reach = (2.0 * rho.negligible_beyond()).sqrt() + 1.0;
    let mut out = Vec::new();
    for (diag, shift) in [([1.0, 1.0], 0.0), ([2.0, 0.5], 0.0), ([3.0, 1.0], 0.0), ([1.0, 1.0], 1.0)] {
        let axes: Vec<Vec<f64>> = diag.iter().map(|d| uniform_axis(-reach / d, reach / d, 201)).collect();
        let phi = GridFn::from_fn(axes, |x| {
            0.5 * ((diag[0] * x[0]).powi(2) + (diag[1] * x[1]).powi(2)) + shift
        })
        .map_err(e)?;
        let r = legendre_santalo_verify(&phi, &rho, None, &LegendreOptions::default()).map_err(e)?;
        let margin = r.get("margin").unwrap();
        ensure(margin.abs() <= 1e-2 && r.passed(), || format!("T = diag{diag:?}, c = {shift}: margin {margin:e}"))?;
        out.push(format!("diag({},{}){} {:.1e}", diag[0], diag[1], if shift != 0.0 { "+1" } else { "" }, margin));
    }
    Ok(format!("margins {}", out.join(", ")))
}

fn prekopa_equality() -> Outcome {
    let mut out = Vec::new();
    for (c, d) in [(1.0, 1.0), (2.0, 1.5), (0.5, 3.0)] {
        let cfg = parse_config(&format!(
            r#"{{"command": "prekopa-check", "seed": 1, "prekopa": {{"c": {c}, "d": {d}}}}}"#
        ))
        .map_err(e)?;
        let r = run(&cfg).map_err(e)?.report;
        let a = r.assertion("prekopa_geometric").ok_or("missing assertion")?;
        let gap = rel(a.lhs, a.rhs);
        ensure(gap <= 1e-3 && r.passed(), || format!("c = {c}, d = {d}: {} vs {}", a.lhs, a.rhs))?;
        out.push(format!("(c,d)=({c},{d}) rel gap {gap:.0e}"));
    }
    Ok(out.join(", "))
}

fn random_symmetric_hexagon(seed: u64, i: u64) -> PolytopeV {
    let mut r = rng::stream(seed, i);
    let pts: Vec<Vec<f64>> = (0..3)
        .flat_map(|k| {
            let a = PI * (k as f64 + r.gen_range(-0.3..0.3)) / 3.0;
            let rad = r.gen_range(0.4..2.0);
            [vec![rad * a.cos(), rad * a.sin()], vec![-rad * a.cos(), -rad * a.sin()]]
        })
        .collect();
    PolytopeV::from_points(pts).expect("hexagon with spread vertices")
}

fn measure_santalo() -> Outcome {
    let t = Instant::now();
    let product = DensityMeasure::gaussian(2);
    let radial = DensityMeasure::gaussian_radial(2);
    let opts = MeasureOptions { seed: 5, ..Default::default() };
    let ball = measure_product_check(&product, &named("ball2").map_err(e)?, &opts).map_err(e)?;
    let eq = ball.get("margin").unwrap();
    ensure(ball.passed() && eq.abs() <= 1e-3, || format!("ball margin {eq:e}"))?;
    let square = measure_product_check(&product, &named("square").map_err(e)?, &opts).map_err(e)?;
    ensure(square.passed(), || format!("square {:?}", square.assertions))?;
    let batch = MeasureOptions { mc_samples: 20_000, ..opts };
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let hex: ConvexBody = random_symmetric_hexagon(2024, i).into();
        let r = measure_product_check(&radial, &hex, &batch).map_err(e)?;
        ensure(r.passed(), || format!("hexagon {i}: {:?}", r.assertions))?;
        worst = worst.min(r.get("margin").unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("{secs:.1} s"))?;
    Ok(format!(
        "ball margin {eq:.0e}, square margin {:.3}, 100 hexagons min margin {worst:.3}, {secs:.1}s",
        square.get("margin").unwrap()
    ))
}

fn inclusion_tight() -> Outcome {
    let mut out = Vec::new();
    for n in 1..=2 {
        let f = LogConcaveFn::gaussian(n);
        let grid = Arc::new(SphereGrid::default_for(n));
        let r = inclusion_check(&f, &f, &Rho::exp(), &vec![0.0; n], grid).map_err(e)?;
        let gap = r.get("widest_gap").unwrap();
        ensure(gap <= 1e-3 && r.passed(), || format!("n = {n}: widest gap {gap:e}"))?;
        out.push(format!("n={n} widest gap {gap:.0e}"));
    }
    Ok(out.join(", "))
}

fn steiner_properties() -> Outcome {
    let mut vol_err = 0.0f64;
    let mut vp_drop = 0.0f64;
    for i in 0..100 {
        let mut body: ConvexBody = random_symmetric_hexagon(99, i).into();
        let mut r = rng::stream(100, i);
        for _ in 0..3 {
            let a: f64 = r.gen_range(0.0..PI);
            let (next, rep) = vp_monotonicity(&body, &[a.cos(), a.sin()], 1e-2).map_err(e)?;
            let (vb, va) = (rep.get("volume_before").unwrap(), rep.get("volume_after").unwrap());
            let (pb, pa) = (rep.get("vp_before").unwrap(), rep.get("vp_after").unwrap());
            vol_err = vol_err.max(rel(va, vb));
            vp_drop = vp_drop.max((pb - pa) / pb);
            body = next;
        }
    }
    ensure(vol_err <= 1e-6, || format!("volume error {vol_err:e}"))?;
    ensure(vp_drop <= 1e-2, || format!("vp decreased by {vp_drop:e}"))?;
    let grid = Arc::new(SphereGrid::default_for(2));
    let disc = ellipsoid_test(&named("ball2").map_err(e)?).map_err(e)?.defect;
    let ell = ellipsoid_test(&StarBody::ellipsoid(grid, &[2.0, 0.5]).map_err(e)?.into()).map_err(e)?.defect;
    let sq = ellipsoid_test(&named("square").map_err(e)?).map_err(e)?.defect;
    ensure(disc < 1e-2 && ell < 1e-2, || format!("ellipsoid defects {disc:e}, {ell:e}"))?;
    ensure(sq >= 0.3, || format!("square defect {sq}"))?;
    Ok(format!(
        "300 steps on 100 polygons: max vol err {vol_err:.0e}, max vp drop {vp_drop:.1e}; defects disc {disc:.0e}, ellipse {ell:.0e}, square {sq:.4}"
    ))
}

fn brute(phi: &GridFn, z: &[f64], dual: &GridFn) -> Vec<f64> {
    (0..dual.len())
        .map(|j| {
            let y = dual.node(j);
            (0..phi.len())
                .map(|i| {
                    let x = phi.node(i);
                    let mut t = -phi.values()[i];
                    for k in 0..x.len() {
                        t += (x[k] - z[k]) * (y[k] - z[k]);
                    }
                    t
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn legendre_correctness() -> Outcome {
    let mut checked = 0usize;
    for (case, shape) in [vec![64], vec![7], vec![64, 64], vec![33, 64], vec![16, 5]].into_iter().enumerate() {
        let mut r = rng::stream(10, case as u64);
        let axes: Vec<Vec<f64>> = shape.iter().map(|m| uniform_axis(-2.0 + r.gen_range(0.0..0.5), 2.0, *m)).collect();
        let c: Vec<f64> = shape.iter().map(|_| r.gen_range(-0.5..0.5)).collect();
        let phi = GridFn::from_fn(axes, |x| {
            x.iter().zip(&c).map(|(a, b)| 0.5 * (a - b) * (a - b) + 0.3 * (a * 3.0).sin()).sum()
        })
        .map_err(e)?;
        let z: Vec<f64> = shape.iter().map(|_| r.gen_range(-0.3..0.3)).collect();
        let l = legendre_transform(&phi, &z, None).map_err(e)?;
        let b = brute(&phi, &z, &l.psi);
        let same = l.psi.values().iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits());
        ensure(same, || format!("grid {shape:?} differs from brute force"))?;
        checked += phi.len() * l.psi.len();
    }
    let defect = |m: usize| -> Result<f64, String> {
        let phi = GridFn::from_fn(vec![uniform_axis(-2.0, 2.0, m); 2], |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).map_err(e)?;
        Ok(biconjugate_check(&phi, &[0.0, 0.0], None).map_err(e)?.get("max_defect").unwrap())
    };
    let (d1, d2, d3) = (defect(33)?, defect(65)?, defect(129)?);
    ensure(d1 / d2 >= 3.5 && d2 / d3 >= 3.5, || format!("defects {d1:e}, {d2:e}, {d3:e}"))?;
    Ok(format!(
        "bit-identical on 5 grids ({checked} pairs); involution defect {d1:.1e} -> {d2:.1e} -> {d3:.1e} (ratios {:.2}, {:.2})",
        d1 / d2,
        d2 / d3
    ))
}

fn fuzz_suite() -> Outcome {
    let t = Instant::now();
    let mut out = Vec::new();
    for (family, count) in [
        (FuzzFamily::SymmetricPolytopes, 250),
        (FuzzFamily::ConvexBodies, 250),
        (FuzzFamily::LogconcaveFunctions, 200),
        (FuzzFamily::ConvexGridfns, 200),
    ] {
        let r = fuzz(&FuzzOptions::new(family, count, 7));
        let v = |k: &str| r.get(k).unwrap_or(f64::NAN);
        ensure(v("violations") == 0.0 && v("failures") == 0.0, || {
            format!("{family:?}: {} violations, {} failures, {:?}", v("violations"), v("failures"), r.warnings)
        })?;
        let skipped = v("skipped");
        out.push(format!(
            "{family:?} {}/{count} checked min margin {:.1e}",
            count - skipped as usize,
            v("min_margin")
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 600.0, || format!("{secs:.0} s"))?;
    Ok(format!("{}; {secs:.0}s", out.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ball equality", ball_equality),
        ("cube/cross-polytope duality", cube_duality),
        ("simplex Santalo point", simplex_santalo),
        ("Gaussian functional equality", gaussian_functional),
        ("Legendre equality", legendre_equality),
        ("Prekopa geometric-mean equality", prekopa_equality),
        ("measure Santalo", measure_santalo),
        ("polar inclusion", inclusion_tight),
        ("Steiner properties", steiner_properties),
        ("Legendre transform correctness", legendre_correctness),
        ("fuzz suite", fuzz_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
