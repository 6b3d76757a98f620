#![allow(dead_code)]

use std::path::PathBuf;

use maganiso::{ExponentRule, Frame, ImplicitModel, PrincipalCurve};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn linear(frame: Frame, c1: f64, c2: f64, e: f64) -> ImplicitModel {
    ImplicitModel::new(
        frame,
        PrincipalCurve::linear(c1).unwrap(),
        PrincipalCurve::linear(c2).unwrap(),
        ExponentRule::constant(e).unwrap(),
    )
}

/// Twelve-sample synthetic steel curve (rolling direction).
pub fn steel_samples() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (50.0, 0.5),
        (100.0, 1.0),
        (200.0, 1.3),
        (400.0, 1.45),
        (700.0, 1.53),
        (1000.0, 1.58),
        (2000.0, 1.66),
        (4000.0, 1.74),
        (8000.0, 1.82),
        (16000.0, 1.92),
        (32000.0, 2.02),
    ]
}

pub fn steel_td_samples() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (50.0, 0.3),
        (100.0, 0.7),
        (200.0, 1.05),
        (400.0, 1.3),
        (700.0, 1.43),
        (1000.0, 1.5),
        (2000.0, 1.6),
        (4000.0, 1.7),
        (8000.0, 1.79),
        (16000.0, 1.9),
        (32000.0, 2.0),
    ]
}

pub fn steel(frame: Frame, e: f64) -> ImplicitModel {
    ImplicitModel::new(
        frame,
        PrincipalCurve::tabulated(&steel_samples()).unwrap(),
        PrincipalCurve::tabulated(&steel_td_samples()).unwrap(),
        ExponentRule::constant(e).unwrap(),
    )
}

/// `∫₀^|h| b(s) ds` by Simpson's rule on each interpolation segment (exact for
/// the piecewise cubic) plus the linear tail.
pub fn simpson_coenergy(curve: &PrincipalCurve, h: f64) -> f64 {
    let h = h.abs();
    let knots: Vec<f64> = match curve {
        PrincipalCurve::Linear { .. } => vec![0.0],
        PrincipalCurve::Tabulated(t) => t.knots().to_vec(),
    };
    let mut breaks: Vec<f64> = knots.into_iter().filter(|k| *k < h).collect();
    breaks.push(h);
    let simpson = |a: f64, b: f64| (b - a) / 6.0 * (curve.b(a) + 4.0 * curve.b(0.5 * (a + b)) + curve.b(b));
    breaks.windows(2).map(|w| simpson(w[0], w[1])).sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative error of two vectors in the max norm.
pub fn vec_rel_err(a: [f64; 2], b: [f64; 2]) -> f64 {
    let scale = a[0].abs().max(a[1].abs()).max(b[0].abs()).max(b[1].abs());
    if scale == 0.0 {
        0.0
    } else {
        (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) / scale
    }
}

/// Central differences with relative step `rel` in each coordinate.
pub fn fd_gradient(f: impl Fn([f64; 2]) -> f64, x: [f64; 2], rel: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for i in 0..2 {
        let step = rel * x[i].abs().max(1e-3);
        let mut p = x;
        let mut m = x;
        p[i] += step;
        m[i] -= step;
        g[i] = (f(p) - f(m)) / (p[i] - m[i]);
    }
    g
}

/// Central-difference Jacobian of a vector field, columns by coordinate.
pub fn fd_jacobian(f: impl Fn([f64; 2]) -> [f64; 2], x: [f64; 2], rel: f64) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for k in 0..2 {
        let step = rel * x[k].abs().max(1e-3);
        let mut p = x;
        let mut m = x;
        p[k] += step;
        m[k] -= step;
        let (gp, gm) = (f(p), f(m));
        for i in 0..2 {
            j[i][k] = (gp[i] - gm[i]) / (p[k] - m[k]);
        }
    }
    j
}

/// Random strictly increasing 12-sample curve through the origin.
pub fn random_samples(rng: &mut impl rand::Rng) -> Vec<(f64, f64)> {
    let h_scale = 10f64.powf(rng.random_range(0.0..3.0));
    let b_scale = rng.random_range(0.2..2.0);
    let mut s = vec![(0.0, 0.0)];
    let (mut h, mut b) = (0.0, 0.0);
    let mut slope = rng.random_range(0.5..2.0);
    for _ in 0..11 {
        let dh = h_scale * rng.random_range(0.2..2.0);
        slope *= rng.random_range(0.3..1.0);
        h += dh;
        b += b_scale * slope * dh / h_scale;
        s.push((h, b));
    }
    s
}

pub fn random_axis(rng: &mut impl rand::Rng) -> PrincipalCurve {
    if rng.random_bool(0.5) {
        PrincipalCurve::linear(10f64.powf(rng.random_range(-1.0..1.0))).unwrap()
    } else {
        PrincipalCurve::tabulated(&random_samples(rng)).unwrap()
    }
}

/// Random frame and constant exponent in `[1, 8)`; each axis is Linear or
/// tabulated with probability ½.
pub fn random_model(rng: &mut impl rand::Rng) -> ImplicitModel {
    let e = rng.random_range(1.0..8.0);
    let frame = if rng.random_bool(0.5) { Frame::Coenergy } else { Frame::Energy };
    let a1 = random_axis(rng);
    let a2 = random_axis(rng);
    ImplicitModel::new(frame, a1, a2, ExponentRule::constant(e).unwrap())
}

/// Random point with log-uniform magnitude in `[10^lo, 10^hi]`; every tenth point lies on an axis.
pub fn random_point(rng: &mut impl rand::Rng, lo: f64, hi: f64) -> [f64; 2] {
    let r = 10f64.powf(rng.random_range(lo..hi));
    match rng.random_range(0..20) {
        0 => [if rng.random_bool(0.5) { r } else { -r }, 0.0],
        1 => [0.0, if rng.random_bool(0.5) { r } else { -r }],
        _ => {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            [r * t.cos(), r * t.sin()]
        }
    }
}
