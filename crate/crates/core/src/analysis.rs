//! Duality, contour, locus and convexity diagnostics.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::material_law::Potential;
use crate::roots::{golden_max, grow_bracket, newton_bisect, RootOptions};
use crate::Frame;

/// Axis-aligned box `[lo₀, hi₀] × [lo₁, hi₁]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Region {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Self { lo: [-half_width; 2], hi: [half_width; 2] }
    }

    fn point(&self, i: usize, j: usize, res: usize) -> [f64; 2] {
        let t = |k: usize| if res == 1 { 0.5 } else { k as f64 / (res - 1) as f64 };
        [self.lo[0] + (self.hi[0] - self.lo[0]) * t(i), self.lo[1] + (self.hi[1] - self.lo[1]) * t(j)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    /// Polar angle that generated each vertex.
    pub angles: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `theta,x1,x2` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,x1,x2\n");
        for (a, p) in self.angles.iter().zip(&self.points) {
            out.push_str(&format!("{a:?},{:?},{:?}\n", p[0], p[1]));
        }
        out
    }

    /// True when every turn has the same orientation, up to `tol` times the squared extent.
    pub fn is_convex(&self, tol: f64) -> bool {
        let n = self.points.len();
        if n < 3 {
            return false;
        }
        let scale = self.points.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
        let eps = tol * scale * scale;
        let (mut pos, mut neg) = (false, false);
        for k in 0..n {
            let a = self.points[k];
            let b = self.points[(k + 1) % n];
            let c = self.points[(k + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross > eps {
                pos = true;
            } else if cross < -eps {
                neg = true;
            }
        }
        !(pos && neg)
    }
}

/// Unit vector at angle `theta`, with components below 1e-15 snapped to zero
/// so multiples of π/2 land exactly on the axes.
pub fn direction(theta: f64) -> [f64; 2] {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    [snap(theta.cos()), snap(theta.sin())]
}

/// Energy values sampled on a regular grid, reusable for many conjugate evaluations.
#[derive(Debug, Clone)]
pub struct LegendreGrid {
    region: Region,
    resolution: usize,
    /// Row-major over the first coordinate: `values[i * res + j]` at `region.point(i, j)`.
    values: Vec<f64>,
}

impl LegendreGrid {
    pub fn sample(model: &dyn Potential, region: Region, resolution: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::InvalidArgument("Legendre grid needs at least 3 points per side".into()));
        }
        let rows: Vec<Result<Vec<f64>>> = (0..resolution)
            .into_par_iter()
            .map(|i| (0..resolution).map(|j| model.value(region.point(i, j, resolution))).collect())
            .collect();
        let mut values = Vec::with_capacity(resolution * resolution);
        for row in rows {
            values.extend(row?);
        }
        Ok(Self { region, resolution, values })
    }

    /// Largest grid spacing.
    pub fn spacing(&self) -> f64 {
        let r = (self.resolution - 1) as f64;
        ((self.region.hi[0] - self.region.lo[0]) / r).max((self.region.hi[1] - self.region.lo[1]) / r)
    }

    /// `sup_b ⟨h, b⟩ − w(b)` over the grid.
    pub fn conjugate(&self, h: [f64; 2]) -> Result<f64> {
        let res = self.resolution;
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0, 0);
        for i in 0..res {
            let row = &self.values[i * res..(i + 1) * res];
            let b0 = self.region.point(i, 0, res)[0];
            for (j, w) in row.iter().enumerate() {
                let b1 = self.region.point(i, j, res)[1];
                let v = h[0] * b0 + h[1] * b1 - w;
                if v > best {
                    best = v;
                    arg = (i, j);
                }
            }
        }
        let edge = |k: usize| k == 0 || k == res - 1;
        if edge(arg.0) || edge(arg.1) {
            return Err(Error::ArgmaxOnBoundary);
        }
        Ok(best)
    }
}

/// Brute-force convex conjugate of `energy` at `h` over a `resolution²` grid on `region`.
pub fn legendre_oracle(energy: &dyn Potential, h: [f64; 2], region: Region, resolution: usize) -> Result<f64> {
    LegendreGrid::sample(energy, region, resolution)?.conjugate(h)
}

/// Radius `r` with `value(r·d) = level` along direction `d`.
fn radial_solve(model: &dyn Potential, d: [f64; 2], level: f64) -> Result<f64> {
    if d[0] == 0.0 || d[1] == 0.0 {
        if let Some(r) = model.axis_inverse((d[0] == 0.0) as usize, level) {
            return Ok(r);
        }
    }
    let g = |r: f64| model.value([r * d[0], r * d[1]]).map(|v| v - level).unwrap_or(f64::NAN);
    let (lo, hi) = grow_bracket(g, 0.0, 1.0, true)?;
    let opts = RootOptions { x_tol_rel: 4.0 * f64::EPSILON, ..RootOptions::default() };
    let root = newton_bisect(
        |r| match model.value_gradient([r * d[0], r * d[1]]) {
            Ok((v, grad)) => (v - level, grad[0] * d[0] + grad[1] * d[1]),
            Err(_) => (f64::NAN, f64::NAN),
        },
        lo,
        hi,
        None,
        &opts,
    )?;
    Ok(root.x)
}

/// Closed level curve `value = level`, one vertex per direction `θₖ = 2πk/samples`.
pub fn trace_contour(model: &dyn Potential, level: f64, samples: usize) -> Result<Polyline> {
    if !(level > 0.0) {
        return Err(Error::NonPositiveLevel(level));
    }
    if samples < 3 {
        return Err(Error::InvalidArgument("a closed contour needs at least 3 samples".into()));
    }
    let angles: Vec<f64> = (0..samples).map(|k| 2.0 * PI * k as f64 / samples as f64).collect();
    let points = angles
        .par_iter()
        .map(|&theta| {
            let d = direction(theta);
            radial_solve(model, d, level).map(|r| [r * d[0], r * d[1]])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Polyline { angles, points, closed: true })
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Field `h` along the direction of `b` at which the coenergy gradient has
/// component `|b|` along that direction; exact on the principal axes.
fn radial_guess(model: &dyn Potential, b: [f64; 2]) -> Result<[f64; 2]> {
    let bm = norm(b);
    let d = [b[0] / bm, b[1] / bm];
    let g = |s: f64| {
        model
            .gradient([s * d[0], s * d[1]])
            .map(|gr| gr[0] * d[0] + gr[1] * d[1] - bm)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = grow_bracket(g, 0.0, 1.0, true)?;
    let root = newton_bisect(
        |s| {
            let x = [s * d[0], s * d[1]];
            let v = g(s);
            let slope = model.hessian(x).map(|h| {
                let hd = h.apply(d);
                hd[0] * d[0] + hd[1] * d[1]
            });
            (v, slope.unwrap_or(f64::NAN))
        },
        lo,
        hi,
        None,
        &RootOptions::default(),
    )?;
    Ok([root.x * d[0], root.x * d[1]])
}

/// Solves `∇w*(h) = b` by damped Newton with the Hessian as Jacobian.
pub fn invert_law(model: &dyn Potential, b: [f64; 2], start: Option<[f64; 2]>) -> Result<[f64; 2]> {
    let angle = b[1].atan2(b[0]);
    let bm = norm(b);
    if bm == 0.0 {
        return Ok([0.0, 0.0]);
    }
    if b[0] == 0.0 || b[1] == 0.0 {
        return radial_guess(model, b);
    }
    let residual = |h: [f64; 2]| -> Result<[f64; 2]> {
        let g = model.gradient(h)?;
        Ok([g[0] - b[0], g[1] - b[1]])
    };
    let mut h = match start {
        Some(s) => s,
        None => radial_guess(model, b)?,
    };
    let mut r = residual(h)?;
    let tol = 1e-14 * bm;
    for _ in 0..100 {
        if norm(r) <= tol {
            return Ok(h);
        }
        let jac = model.hessian(h).map_err(|_| Error::NewtonDiverged { angle })?;
        let inv = jac.inverse().ok_or(Error::NewtonDiverged { angle })?;
        let step = inv.apply(r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=40 {
            let trial = [h[0] - t * step[0], h[1] - t * step[1]];
            if let Ok(rt) = residual(trial) {
                if norm(rt) < norm(r) {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, rt)) => {
                let moved = norm([trial[0] - h[0], trial[1] - h[1]]);
                h = trial;
                r = rt;
                if moved <= 1e-15 * norm(h) {
                    break;
                }
            }
            None => break,
        }
    }
    if norm(r) <= 1e-10 * bm {
        Ok(h)
    } else {
        Err(Error::NewtonDiverged { angle })
    }
}

/// Field for flux density `b`: `∇w(b)` in the energy frame, the Newton inverse of `∇w*` otherwise.
pub fn field_for_flux(model: &dyn Potential, b: [f64; 2], start: Option<[f64; 2]>) -> Result<[f64; 2]> {
    match model.frame() {
        Frame::Energy => model.gradient(b),
        Frame::Coenergy => match start {
            Some(s) if s[0] != 0.0 && s[1] != 0.0 => {
                invert_law(model, b, Some(s)).or_else(|_| invert_law(model, b, None))
            }
            _ => invert_law(model, b, None),
        },
    }
}

/// Fields `h` for flux densities `|b|·(cos φ, sin φ)`, `φₖ = 2πk/samples`.
pub fn locus_constant_induction(model: &dyn Potential, b_magnitude: f64, samples: usize) -> Result<Polyline> {
    if !(b_magnitude > 0.0) {
        return Err(Error::InvalidArgument(format!("induction magnitude must be positive, got {b_magnitude}")));
    }
    if samples < 3 {
        return Err(Error::InvalidArgument("a locus needs at least 3 samples".into()));
    }
    let angles: Vec<f64> = (0..samples).map(|k| 2.0 * PI * k as f64 / samples as f64).collect();
    let points = match model.frame() {
        Frame::Energy => angles
            .par_iter()
            .map(|&phi| {
                let d = direction(phi);
                model.gradient([b_magnitude * d[0], b_magnitude * d[1]])
            })
            .collect::<Result<Vec<_>>>()?,
        Frame::Coenergy => {
            // Sequential: each angle starts from the previous solution.
            let mut points: Vec<[f64; 2]> = Vec::with_capacity(samples);
            for &phi in &angles {
                let d = direction(phi);
                let b = [b_magnitude * d[0], b_magnitude * d[1]];
                let h = field_for_flux(model, b, points.last().copied())?;
                points.push(h);
            }
            points
        }
    };
    Ok(Polyline { angles, points, closed: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardAxis {
    /// Flux direction in `[0, π/2]` needing the largest field.
    pub angle: f64,
    pub field_magnitude: f64,
    /// All sampled directions need the same field (isotropic response).
    pub degenerate: bool,
}

/// Direction of hard magnetization for induction magnitude `|b|`.
pub fn hard_axis(model: &dyn Potential, b_magnitude: f64, samples: usize) -> Result<HardAxis> {
    if !(b_magnitude > 0.0) {
        return Err(Error::InvalidArgument(format!("induction magnitude must be positive, got {b_magnitude}")));
    }
    let samples = samples.max(3);
    let field = |phi: f64| -> Result<f64> {
        let d = direction(phi);
        field_for_flux(model, [b_magnitude * d[0], b_magnitude * d[1]], None).map(norm)
    };
    let step = FRAC_PI_2 / (samples - 1) as f64;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| field(k as f64 * step))
        .collect::<Result<Vec<_>>>()?;
    let (kmax, vmax) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    if vmax - vmin <= 1e-12 * vmax {
        return Ok(HardAxis { angle: kmax as f64 * step, field_magnitude: vmax, degenerate: true });
    }
    let lo = kmax.saturating_sub(1) as f64 * step;
    let hi = ((kmax + 1).min(samples - 1)) as f64 * step;
    let (angle, field_magnitude) = golden_max(field, lo, hi, 1e-6)?;
    Ok(HardAxis { angle, field_magnitude, degenerate: false })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityOptions {
    pub grid: usize,
    pub triples: usize,
    /// Points closer than this to an axis are skipped for Hessian checks.
    pub axis_band: f64,
    /// Contour levels to test; when empty, three levels are picked inside the region.
    pub levels: Vec<f64>,
    pub contour_samples: usize,
    pub seed: u64,
}

impl Default for ConvexityOptions {
    fn default() -> Self {
        Self { grid: 41, triples: 10_000, axis_band: 1e-6, levels: Vec::new(), contour_samples: 256, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub region: Region,
    pub min_eigenvalue: f64,
    pub min_eig_location: [f64; 2],
    pub hessian_points: usize,
    pub hessian_failures: usize,
    pub contour_levels: Vec<f64>,
    pub contour_convex: Vec<bool>,
    pub midpoint_violations: usize,
    pub triples: usize,
}

/// Hessian eigenvalues on a grid, midpoint convexity on random pairs, and
/// polygon convexity of traced contours.
pub fn convexity_scan(model: &dyn Potential, region: Region, opts: &ConvexityOptions) -> Result<ConvexityReport> {
    let res = opts.grid.max(2);
    let cells: Vec<(f64, [f64; 2], bool)> = (0..res * res)
        .into_par_iter()
        .filter_map(|idx| {
            let x = region.point(idx / res, idx % res, res);
            if x[0].abs() < opts.axis_band || x[1].abs() < opts.axis_band {
                return None;
            }
            Some(match model.hessian(x) {
                Ok(h) => (h.eigenvalues()[0], x, true),
                Err(_) => (f64::NAN, x, false),
            })
        })
        .collect();
    let mut min_eigenvalue = f64::INFINITY;
    let mut min_eig_location = [f64::NAN; 2];
    let mut hessian_failures = 0;
    for &(lam, x, ok) in &cells {
        if !ok {
            hessian_failures += 1;
        } else if lam < min_eigenvalue {
            min_eigenvalue = lam;
            min_eig_location = x;
        }
    }

    let mut rng = StdRng::seed_from_u64(opts.seed);
    let pairs: Vec<([f64; 2], [f64; 2])> = (0..opts.triples)
        .map(|_| {
            let mut p = || {
                [
                    rng.random_range(region.lo[0]..=region.hi[0]),
                    rng.random_range(region.lo[1]..=region.hi[1]),
                ]
            };
            (p(), p())
        })
        .collect();
    let midpoint_violations = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<usize> {
            let m = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            let (fx, fy, fm) = (model.value(x)?, model.value(y)?, model.value(m)?);
            let slack = 1e-12 * (1.0 + fx.abs() + fy.abs());
            Ok((fm > 0.5 * (fx + fy) + slack) as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let contour_levels = if opts.levels.is_empty() {
        let corner = [
            region.lo[0].abs().min(region.hi[0].abs()).max(1e-300),
            region.lo[1].abs().min(region.hi[1].abs()).max(1e-300),
        ];
        [0.2, 0.5, 0.8]
            .iter()
            .map(|t| model.value([t * corner[0], t * corner[1]]))
            .collect::<Result<Vec<_>>>()?
    } else {
        opts.levels.clone()
    };
    let contour_convex = contour_levels
        .iter()
        .map(|&level| trace_contour(model, level, opts.contour_samples).map(|c| c.is_convex(1e-10)))
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvexityReport {
        region,
        min_eigenvalue,
        min_eig_location,
        hessian_points: cells.len(),
        hessian_failures,
        contour_levels,
        contour_convex,
        midpoint_violations,
        triples: opts.triples,
    })
}
