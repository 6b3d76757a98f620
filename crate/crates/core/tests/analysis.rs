mod common;

use std::f64::consts::FRAC_PI_2;

use maganiso::analysis::{
    convexity_scan, direction, hard_axis, legendre_oracle, locus_constant_induction, trace_contour, ConvexityOptions,
    Region,
};
use maganiso::{conjugate_exponent, Frame, PNormModel, Potential};

use common::*;

#[test]
fn contours_are_mirror_symmetric() {
    let m = steel(Frame::Coenergy, 13.0 / 3.0);
    let n = 128;
    let c = trace_contour(&m, 250.0, n).unwrap();
    for k in 0..n {
        let p = c.points[k];
        let across_x2 = c.points[(n / 2 + n - k) % n];
        let across_x1 = c.points[(n - k) % n];
        let tol = 1e-10 * p[0].hypot(p[1]);
        assert!((p[0] + across_x2[0]).abs() <= tol && (p[1] - across_x2[1]).abs() <= tol, "{p:?} {across_x2:?}");
        assert!((p[0] - across_x1[0]).abs() <= tol && (p[1] + across_x1[1]).abs() <= tol, "{p:?} {across_x1:?}");
    }
}

#[test]
fn contours_are_nested() {
    let m = steel(Frame::Coenergy, 2.0);
    let radii = |level: f64| -> Vec<f64> {
        trace_contour(&m, level, 96).unwrap().points.iter().map(|p| p[0].hypot(p[1])).collect()
    };
    let levels = [10.0, 100.0, 1000.0, 10000.0];
    let all: Vec<Vec<f64>> = levels.iter().map(|l| radii(*l)).collect();
    for pair in all.windows(2) {
        assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a < b));
    }
}

#[test]
fn contour_vertices_sit_on_the_level() {
    let m = steel(Frame::Energy, 1.7);
    let c = trace_contour(&m, 300.0, 64).unwrap();
    assert!(c.closed && c.len() == 64);
    for p in &c.points {
        assert!(rel_err(m.value(*p).unwrap(), 300.0) <= 1e-12);
    }
    assert_eq!(c.points[0][0], m.axes[0].invert(Frame::Energy, 300.0).unwrap().value);
}

#[test]
fn value_increases_along_rays() {
    let m = steel(Frame::Coenergy, 3.0);
    for k in 0..16 {
        let d = direction(k as f64 * std::f64::consts::TAU / 16.0);
        let mut last = 0.0;
        for j in 0..32 {
            let r = 10f64.powf(-2.0 + 6.0 * j as f64 / 31.0);
            let w = m.value([r * d[0], r * d[1]]).unwrap();
            assert!(w > last);
            last = w;
        }
    }
}

#[test]
fn duality_matches_closed_form_conjugate() {
    let energy = PNormModel::new(Frame::Energy, [2.0, 1.0], 1.3).unwrap();
    let coenergy = energy.dual().unwrap();
    let res = 401;
    let region = Region::square(5.0);
    let spacing = 10.0 / (res - 1) as f64;
    for h in [[1.0, 1.0], [-2.0, 0.5], [0.0, 1.5], [0.0, 0.0]] {
        let sup = legendre_oracle(&energy, h, region, res).unwrap();
        assert!((sup - coenergy.pnorm_value(h)).abs() <= 5.0 * spacing * h[0].hypot(h[1]), "{h:?}");
        assert!(sup <= coenergy.pnorm_value(h) + 1e-12);
    }
}

#[test]
fn loci_agree_for_tabulated_pair_on_axes() {
    let co = steel(Frame::Coenergy, 2.0);
    let en = steel(Frame::Energy, 2.0);
    let a = locus_constant_induction(&co, 1.2, 8).unwrap();
    let b = locus_constant_induction(&en, 1.2, 8).unwrap();
    // Both frames reproduce the measured curves along the axes.
    for k in [0, 2, 4, 6] {
        let (p, q) = (a.points[k], b.points[k]);
        assert!(vec_rel_err(p, q) <= 1e-10, "{p:?} {q:?}");
    }
}

/// Dense closed-form sampling of `|∇w(b)|` for the energy p-norm.
fn hard_angle_by_sampling(p: f64) -> f64 {
    let m = PNormModel::new(Frame::Energy, [2.0, 1.0], p).unwrap();
    let n = 200_000;
    (0..=n)
        .map(|k| {
            let phi = FRAC_PI_2 * k as f64 / n as f64;
            let g = m.pnorm_gradient([phi.cos(), phi.sin()]);
            (phi, g[0].hypot(g[1]))
        })
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
        .0
}

#[test]
fn hard_axis_matches_sampled_closed_form() {
    let reference = hard_angle_by_sampling(1.3);
    let co = linear(Frame::Coenergy, 2.0, 1.0, conjugate_exponent(1.3).unwrap());
    let en = linear(Frame::Energy, 2.0, 1.0, 1.3);
    for m in [&co as &dyn Potential, &en] {
        let h = hard_axis(m, 1.0, 91).unwrap();
        assert!(!h.degenerate);
        assert!((h.angle - reference).abs() <= 1e-4, "{} vs {reference}", h.angle);
    }
}

#[test]
fn isotropic_hard_axis_is_degenerate() {
    let m = linear(Frame::Coenergy, 1.0, 1.0, 2.0);
    let h = hard_axis(&m, 1.0, 31).unwrap();
    assert!(h.degenerate);
    assert!((h.field_magnitude - 1.0).abs() <= 1e-12);
}

#[test]
fn anisotropic_quadratic_scan() {
    let m = linear(Frame::Coenergy, 2.0, 1.0, 2.0);
    let opts = ConvexityOptions { grid: 21, triples: 2000, ..ConvexityOptions::default() };
    let r = convexity_scan(&m, Region::square(5.0), &opts).unwrap();
    assert!((r.min_eigenvalue - 0.25).abs() <= 1e-12);
    assert_eq!(r.midpoint_violations, 0);
    assert!(r.contour_convex.iter().all(|c| *c));
}

#[test]
fn steel_models_scan_convex() {
    let m = steel(Frame::Coenergy, 2.0);
    let opts = ConvexityOptions { grid: 21, triples: 2000, ..ConvexityOptions::default() };
    let r = convexity_scan(&m, Region::square(2000.0), &opts).unwrap();
    assert_eq!(r.midpoint_violations, 0);
    assert!(r.contour_convex.iter().all(|c| *c));
}

#[test]
fn variable_exponent_fixture_is_not_convex() {
    let maganiso::config::Model::Implicit(m) = maganiso::config::load_model(data("nonconvex.json")).unwrap().model else {
        panic!("expected an implicit model");
    };
    let opts = ConvexityOptions { grid: 21, triples: 2000, ..ConvexityOptions::default() };
    let r = convexity_scan(&m, Region::square(3.0), &opts).unwrap();
    assert!(r.min_eigenvalue < -0.1, "{}", r.min_eigenvalue);
    assert!(r.midpoint_violations > 0);

    // Second differences of the value along the reported eigenvector, at a point with a unique level.
    let x = r.min_eig_location;
    let range = m.default_level_range(x).unwrap();
    assert!(m.check_uniqueness(x, range, 512).monotone);
    let hess = m.hessian(x).unwrap();
    let lam = hess.eigenvalues()[0];
    let v = if hess.t12.abs() > 1e-14 { [hess.t12, lam - hess.t11] } else { [1.0, 0.0] };
    let n = v[0].hypot(v[1]);
    let (d, s) = ([v[0] / n, v[1] / n], 1e-4);
    let f = |t: f64| m.value([x[0] + t * d[0], x[1] + t * d[1]]).unwrap();
    let second = (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s);
    assert!(second < 0.0 && rel_err(second, lam) <= 1e-4, "{second} vs {lam}");
}
