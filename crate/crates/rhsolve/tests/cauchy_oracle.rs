mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rhsolve::cauchy::{cauchy_boundary, cauchy_off, Side};
use rhsolve::chebyshev::{derivative_coeffs, values_to_coeffs};
use rhsolve::contour::ContourSegment;

#[test]
fn random_interpolants_match_quadrature() {
    let mut r = rng(7);
    for case in 0..20 {
        let shape = random_shape(&mut r);
        let n = 4 + case;
        let seg = shape.segment(n);
        let vals = random_values(&mut r, n);
        for _ in 0..20 {
            let z = random_target(&mut r, &seg);
            let got = cauchy_off(&seg, &vals, z).unwrap();
            let want = oracle_cauchy(&shape, &seg, &vals, z, 1e-13);
            assert!((got - want).norm() < 1e-9, "case {case}: {got} vs {want} at {z}");
        }
    }
}

#[test]
fn degree_eight_on_arc_at_two_plus_i() {
    let mut r = rng(11);
    let shape = Shape::Arc { center: c(0.0, 0.0), radius: 1.0, th1: -0.4, th2: 2.2 };
    let seg = shape.segment(9);
    let vals = random_values(&mut r, 9);
    let z = c(2.0, 1.0);
    let got = cauchy_off(&seg, &vals, z).unwrap();
    let want = oracle_cauchy(&shape, &seg, &vals, z, 1e-14);
    assert!((got - want).norm() < 1e-10);
}

#[test]
fn near_segment_targets_stay_accurate() {
    let mut r = rng(3);
    for shape in [
        Shape::Line { p: c(-1.0, 0.2), q: c(1.5, -0.3) },
        Shape::Arc { center: c(0.1, 0.0), radius: 0.8, th1: 0.5, th2: 2.5 },
    ] {
        let seg = shape.segment(16);
        let vals = random_values(&mut r, 16);
        for k in 2..=6 {
            let d = 10f64.powi(-k);
            let (p, dp) = shape.point(0.37);
            let normal = dp * c(0.0, 1.0) / dp.norm();
            for z in [p + d * normal, p - d * normal] {
                let got = cauchy_off(&seg, &vals, z).unwrap();
                let want = oracle_cauchy(&shape, &seg, &vals, z, 1e-14);
                assert!((got - want).norm() < 1e-9, "d={d}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn t_k_transforms_match_quadrature() {
    // matrix applied to samples of T_k equals the oracle transform of T_k
    let shape = Shape::Arc { center: c(0.3, -0.2), radius: 1.1, th1: 1.0, th2: 2.7 };
    let n = 10;
    let seg = shape.segment(n);
    let z = c(-0.4, 0.3);
    let m = rhsolve::cauchy::cauchy_matrix(&seg, 0, &[z], rhsolve::cauchy::MatrixSide::Off).unwrap();
    for k in 0..n {
        let vals: Vec<Complex64> = seg.params.iter().map(|t| c((k as f64 * t.acos()).cos(), 0.0)).collect();
        let got = m.apply(&vals)[0];
        let want = oracle_cauchy(&shape, &seg, &vals, z, 1e-14);
        assert!((got - want).norm() < 1e-11, "k={k}");
    }
}

#[test]
fn analytic_off_the_contour() {
    let mut r = rng(5);
    let shape = Shape::Arc { center: c(0.0, 0.0), radius: 1.0, th1: 0.0, th2: 2.0 };
    let seg = shape.segment(12);
    let vals = random_values(&mut r, 12);
    let center = c(0.2, -0.6);
    let rad = 0.2;
    let m = 64;
    let mut acc = c(0.0, 0.0);
    for j in 0..m {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
        acc += cauchy_off(&seg, &vals, center + rad * e).unwrap() * c(0.0, 1.0) * rad * e;
    }
    acc *= 2.0 * PI / m as f64;
    assert!(acc.norm() < 1e-10, "{acc}");
}

#[test]
fn decays_like_inverse_distance() {
    let mut r = rng(9);
    for shape in [
        Shape::Line { p: c(-1.0, 0.0), q: c(1.0, 0.5) },
        Shape::Arc { center: c(0.0, 0.0), radius: 1.0, th1: 0.3, th2: 1.9 },
    ] {
        let seg = shape.segment(8);
        let vals = random_values(&mut r, 8);
        let radii = [1e2, 1e3, 1e4];
        let mags: Vec<f64> = radii
            .iter()
            .map(|&rr| cauchy_off(&seg, &vals, Complex64::from_polar(rr, 0.7)).unwrap().norm())
            .collect();
        let s = loglog_slope(&radii, &mags);
        assert!((s + 1.0).abs() < 0.05, "slope {s}");
    }
}

#[test]
fn derivative_identity_on_line() {
    // d/dz C f = C f' + (f(a)/(a - z) - f(b)/(b - z)) / (2 pi i)
    let mut r = rng(21);
    let (a, b) = (c(-0.5, -0.5), c(1.0, 0.7));
    let n = 9;
    let seg = ContourSegment::line(a, b, n).unwrap();
    let vals = random_values(&mut r, n);
    let z = c(0.1, 0.9);
    let h = 1e-5;
    let fd = (cauchy_off(&seg, &vals, z + h).unwrap() - cauchy_off(&seg, &vals, z - h).unwrap()) / (2.0 * h);
    let dt = seg.map.deriv(c(0.0, 0.0));
    let dco: Vec<Complex64> = derivative_coeffs(&values_to_coeffs(&vals)).iter().map(|v| v / dt).collect();
    let dvals: Vec<Complex64> = seg
        .params
        .iter()
        .map(|&t| rhsolve::chebyshev::clenshaw(&dco, c(t, 0.0)))
        .collect();
    let rhs = cauchy_off(&seg, &dvals, z).unwrap()
        + (vals[0] / (a - z) - vals[n - 1] / (b - z)) / c(0.0, 2.0 * PI);
    assert!((fd - rhs).norm() < 1e-8, "{fd} vs {rhs}");
}

#[test]
fn junction_bundle_bounded_only_with_zero_sum() {
    // three rays from 0; densities vanish-sum at the junction or not
    let dirs = [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, 2.2), Complex64::from_polar(1.0, -1.9)];
    let segs: Vec<ContourSegment> = dirs.iter().map(|&d| ContourSegment::line(c(0.0, 0.0), d, 12).unwrap()).collect();
    let smooth = |z: Complex64, k: f64| (z * k).exp();
    let good: Vec<Vec<Complex64>> = vec![
        segs[0].nodes.iter().map(|&z| smooth(z, 1.0)).collect(),
        segs[1].nodes.iter().map(|&z| -smooth(z, 0.5) * 0.25).collect(),
        segs[2].nodes.iter().map(|&z| -smooth(z, -1.0) * 0.75).collect(),
    ];
    let mut bad = good.clone();
    bad[1].iter_mut().for_each(|v| *v += 0.5);
    let probe = |vals: &Vec<Vec<Complex64>>, d: f64| {
        let z = d * Complex64::from_polar(1.0, 1.2);
        segs.iter().zip(vals).map(|(s, v)| cauchy_off(s, v, z).unwrap()).sum::<Complex64>().norm()
    };
    let good_vals: Vec<f64> = (2..=8).map(|k| probe(&good, 10f64.powi(-k))).collect();
    let bad_vals: Vec<f64> = (2..=8).map(|k| probe(&bad, 10f64.powi(-k))).collect();
    let spread = good_vals.iter().cloned().fold(0.0, f64::max) - good_vals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 2e-2, "{good_vals:?}");
    // log growth: roughly 0.5 * ln(10) / (2 pi) per decade
    let growth = bad_vals[6] - bad_vals[0];
    assert!(growth > 0.5, "{bad_vals:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn plemelj_jump_equals_density(seed in 0u64..10_000, n in 2usize..40) {
        let mut r = rng(seed);
        let shape = random_shape(&mut r);
        let seg = shape.segment(n);
        let vals = random_values(&mut r, n);
        let interior: Vec<Complex64> = seg.nodes[1..n - 1].to_vec();
        let p = cauchy_boundary(&seg, &vals, Side::Plus, &interior).unwrap();
        let m = cauchy_boundary(&seg, &vals, Side::Minus, &interior).unwrap();
        for ((a, b), v) in p.iter().zip(&m).zip(&vals[1..n - 1]) {
            prop_assert!((a - b - v).norm() < 1e-10);
        }
    }

    #[test]
    fn boundary_value_is_limit_of_off_values(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let shape = random_shape(&mut r);
        let seg = shape.segment(10);
        let vals = random_values(&mut r, 10);
        let (p, dp) = shape.point(0.41);
        let left = dp * c(0.0, 1.0) / dp.norm();
        let t = [p];
        let bp = cauchy_boundary(&seg, &vals, Side::Plus, &t).unwrap()[0];
        let bm = cauchy_boundary(&seg, &vals, Side::Minus, &t).unwrap()[0];
        let op = cauchy_off(&seg, &vals, p + 1e-8 * left).unwrap();
        let om = cauchy_off(&seg, &vals, p - 1e-8 * left).unwrap();
        prop_assert!((bp - op).norm() < 1e-5);
        prop_assert!((bm - om).norm() < 1e-5);
    }
}
