//! Scalar B-H curves along the principal axes and their (co)energy integrals.
//!
//! A [`PrincipalCurve`] stores `b(h)` for `h >= 0` and extends it to negative
//! fields by odd reflection. Tabulated data is interpolated with a
//! monotone cubic Hermite interpolant and continued linearly past the last
//! sample, so the slope stays within positive, finite bounds everywhere.
//!
//! [`EnergyProfile`] adds the single-axis potentials
//! `w*(h) = ∫₀ʰ b(s) ds` and `w(b) = ∫₀ᵇ h(s) ds` together with their inverses
//! `ĥ(w*)` and `b̂(w)`, the building blocks of the implicit models.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::roots::{grow_bracket, newton_bisect, RootOptions};
use crate::Frame;

/// Cubic Hermite interpolant through `(h_k, b_k)` with Fritsch-Butland slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    h: Vec<f64>,
    b: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::TooFewSamples { required: 3, got: samples.len() });
        }
        let (h0, b0) = samples[0];
        if h0 != 0.0 || b0 != 0.0 {
            return Err(Error::MissingOrigin { h: h0, b: b0 });
        }
        let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let b: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if h.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite B-H sample".into()));
        }
        let n = h.len();
        let mut delta = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let dh = h[k + 1] - h[k];
            let slope = (b[k + 1] - b[k]) / dh;
            if !(dh > 0.0) || !(slope > 0.0) || !slope.is_finite() {
                return Err(Error::NonMonotoneData { h0: h[k], h1: h[k + 1] });
            }
            delta.push(slope);
        }

        let mut m = vec![0.0; n];
        for k in 1..n - 1 {
            let (d0, d1) = (h[k] - h[k - 1], h[k + 1] - h[k]);
            let w1 = 2.0 * d1 + d0;
            let w2 = d1 + 2.0 * d0;
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
        m[0] = end_slope(h[1] - h[0], h[2] - h[1], delta[0], delta[1]);
        m[n - 1] = end_slope(h[n - 1] - h[n - 2], h[n - 2] - h[n - 3], delta[n - 2], delta[n - 3]);

        let curve = Self { h, b, m };
        for k in 0..n - 1 {
            if !(curve.segment_min_slope(k) > 0.0) {
                return Err(Error::NonMonotoneData { h0: curve.h[k], h1: curve.h[k + 1] });
            }
        }
        Ok(curve)
    }

    fn len(&self) -> usize {
        self.h.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.b
    }

    fn h_max(&self) -> f64 {
        self.h[self.len() - 1]
    }

    fn b_max(&self) -> f64 {
        self.b[self.len() - 1]
    }

    fn m_end(&self) -> f64 {
        self.m[self.len() - 1]
    }

    /// Segment containing `x` among sorted `nodes` (clamped to the last one).
    fn locate(nodes: &[f64], x: f64) -> usize {
        let k = nodes.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(nodes.len() - 2)
    }

    fn segment(&self, k: usize) -> (f64, f64, f64, f64, f64, f64) {
        (self.h[k], self.h[k + 1] - self.h[k], self.b[k], self.b[k + 1], self.m[k], self.m[k + 1])
    }

    fn eval_segment(&self, k: usize, x: f64) -> (f64, f64) {
        let (h0, dh, y0, y1, m0, m1) = self.segment(k);
        let t = (x - h0) / dh;
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * dh * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * dh * m1;
        let slope = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / dh
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, slope)
    }

    /// `∫_{h_k}^{x} p(s) ds`, exact for the cubic.
    fn integrate_segment(&self, k: usize, x: f64) -> f64 {
        let (h0, dh, y0, y1, m0, m1) = self.segment(k);
        let s = (x - h0) / dh;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        dh * ((0.5 * s4 - s3 + s) * y0
            + (0.25 * s4 - 2.0 / 3.0 * s3 + 0.5 * s2) * dh * m0
            + (-0.5 * s4 + s3) * y1
            + (0.25 * s4 - s3 / 3.0) * dh * m1)
    }

    fn segment_min_slope(&self, k: usize) -> f64 {
        let (h0, dh, ..) = self.segment(k);
        let ends = self.m[k].min(self.m[k + 1]);
        // p' is quadratic in t; check its vertex when it falls inside the segment.
        let (y0, y1, m0, m1) = (self.b[k], self.b[k + 1], self.m[k], self.m[k + 1]);
        let a = 6.0 * (y0 - y1) / dh + 3.0 * (m0 + m1);
        let bq = -6.0 * (y0 - y1) / dh - 4.0 * m0 - 2.0 * m1;
        if a > 0.0 {
            let t = -bq / (2.0 * a);
            if t > 0.0 && t < 1.0 {
                return ends.min(self.eval_segment(k, h0 + t * dh).1);
            }
        }
        ends
    }

    /// `(b, db/dh)` for `h >= 0`.
    fn eval(&self, h: f64) -> (f64, f64) {
        if h >= self.h_max() {
            (self.b_max() + self.m_end() * (h - self.h_max()), self.m_end())
        } else {
            self.eval_segment(Self::locate(&self.h, h), h)
        }
    }

    /// Inverse law `h(b)` for `b >= 0`.
    fn inverse(&self, b: f64) -> f64 {
        if b >= self.b_max() {
            return self.h_max() + (b - self.b_max()) / self.m_end();
        }
        let k = Self::locate(&self.b, b);
        if b == self.b[k] {
            return self.h[k];
        }
        let opts = RootOptions::default();
        newton_bisect(
            |x| {
                let (v, d) = self.eval_segment(k, x);
                (v - b, d)
            },
            self.h[k],
            self.h[k + 1],
            None,
            &opts,
        )
        .map(|r| r.x)
        .unwrap_or_else(|_| {
            // Bracket endpoints straddle b by construction; rounding at a knot is the only failure.
            self.h[k]
        })
    }
}

fn end_slope(d0: f64, d1: f64, s0: f64, s1: f64) -> f64 {
    let m = ((2.0 * d0 + d1) * s0 - d0 * s1) / (d0 + d1);
    if m <= 0.0 {
        0.5 * s0
    } else if m > 3.0 * s0 {
        3.0 * s0
    } else {
        m
    }
}

/// A scalar B-H relation along one principal axis.
#[derive(Debug, Clone, PartialEq)]
pub enum PrincipalCurve {
    /// `b(h) = h / c²`.
    Linear { c: f64 },
    Tabulated(MonotoneCubic),
}

impl PrincipalCurve {
    pub fn linear(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonPositiveCoefficient(c));
        }
        Ok(PrincipalCurve::Linear { c })
    }

    /// Builds a curve from `(h, b)` samples starting at the origin.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        MonotoneCubic::new(samples).map(PrincipalCurve::Tabulated)
    }

    /// Reads an `h,b` CSV with a header row; lines starting with `#` are skipped.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Config(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "h" || &headers[1] != "b" {
            return Err(Error::Config(format!("expected header `h,b`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Config(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{}`: {e}", &record[i])))
            };
            samples.push((parse(0)?, parse(1)?));
        }
        Self::tabulated(&samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    /// Flux density `b(h)`.
    pub fn b(&self, h: f64) -> f64 {
        match self {
            PrincipalCurve::Linear { c } => h / (c * c),
            PrincipalCurve::Tabulated(t) => {
                if h == 0.0 {
                    0.0
                } else {
                    h.signum() * t.eval(h.abs()).0
                }
            }
        }
    }

    /// Differential permeability `db/dh`.
    pub fn db(&self, h: f64) -> f64 {
        match self {
            PrincipalCurve::Linear { c } => 1.0 / (c * c),
            PrincipalCurve::Tabulated(t) => t.eval(h.abs()).1,
        }
    }

    /// Inverse law `h(b)`.
    pub fn h(&self, b: f64) -> f64 {
        match self {
            PrincipalCurve::Linear { c } => c * c * b,
            PrincipalCurve::Tabulated(t) => {
                if b == 0.0 {
                    0.0
                } else {
                    b.signum() * t.inverse(b.abs())
                }
            }
        }
    }

    /// Differential reluctivity `dh/db`.
    pub fn dh(&self, b: f64) -> f64 {
        match self {
            PrincipalCurve::Linear { c } => c * c,
            PrincipalCurve::Tabulated(_) => 1.0 / self.db(self.h(b)),
        }
    }

    /// Lower and upper bounds on `db/dh` over the whole real line.
    pub fn slope_bounds(&self) -> (f64, f64) {
        match self {
            PrincipalCurve::Linear { c } => (1.0 / (c * c), 1.0 / (c * c)),
            PrincipalCurve::Tabulated(t) => {
                let lo = (0..t.len() - 1).map(|k| t.segment_min_slope(k)).fold(f64::INFINITY, f64::min);
                // The maximum of a quadratic on [0,1] sits at an end or the vertex; sampling is enough for reporting.
                let mut hi: f64 = 0.0;
                for k in 0..t.len() - 1 {
                    for i in 0..=16 {
                        let x = t.h[k] + (t.h[k + 1] - t.h[k]) * i as f64 / 16.0;
                        hi = hi.max(t.eval_segment(k, x).1);
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// Inverse of a single-axis potential: `x̂(w)` and its first two derivatives in `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisInverse {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// A principal curve together with its single-axis energy and coenergy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    curve: PrincipalCurve,
    /// `w*(h_k)` at each knot of a tabulated curve.
    coenergy_nodes: Vec<f64>,
    /// `w(b(h_k))` at each knot of a tabulated curve.
    energy_nodes: Vec<f64>,
}

impl EnergyProfile {
    pub fn new(curve: PrincipalCurve) -> Self {
        let (coenergy_nodes, energy_nodes) = match &curve {
            PrincipalCurve::Linear { .. } => (Vec::new(), Vec::new()),
            PrincipalCurve::Tabulated(t) => {
                let mut co = vec![0.0; t.len()];
                for k in 0..t.len() - 1 {
                    co[k + 1] = co[k] + t.integrate_segment(k, t.h[k + 1]);
                }
                let en = (0..t.len()).map(|k| t.h[k] * t.b[k] - co[k]).collect();
                (co, en)
            }
        };
        Self { curve, coenergy_nodes, energy_nodes }
    }

    pub fn curve(&self) -> &PrincipalCurve {
        &self.curve
    }

    /// `w*(h) = ∫₀^|h| b(s) ds` in J/m³.
    pub fn coenergy(&self, h: f64) -> f64 {
        let h = h.abs();
        match &self.curve {
            PrincipalCurve::Linear { c } => h * h / (2.0 * c * c),
            PrincipalCurve::Tabulated(t) => {
                if h >= t.h_max() {
                    let s = h - t.h_max();
                    self.coenergy_nodes[t.len() - 1] + t.b_max() * s + 0.5 * t.m_end() * s * s
                } else {
                    let k = MonotoneCubic::locate(&t.h, h);
                    self.coenergy_nodes[k] + t.integrate_segment(k, h)
                }
            }
        }
    }

    /// `w(b) = ∫₀^|b| h(s) ds` in J/m³, evaluated through `b·h(b) − w*(h(b))`.
    pub fn energy(&self, b: f64) -> f64 {
        let b = b.abs();
        match &self.curve {
            PrincipalCurve::Linear { c } => 0.5 * c * c * b * b,
            PrincipalCurve::Tabulated(_) => {
                let h = self.curve.h(b);
                b * h - self.coenergy(h)
            }
        }
    }

    /// `ĥ(w*)`: the non-negative field whose axis coenergy equals `w`.
    pub fn invert_coenergy(&self, w: f64) -> Result<AxisInverse> {
        if !(w >= 0.0) {
            return Err(Error::NegativeEnergy(w));
        }
        let h = match &self.curve {
            PrincipalCurve::Linear { c } => c * (2.0 * w).sqrt(),
            PrincipalCurve::Tabulated(t) => self.solve_on_knots(t, w, &self.coenergy_nodes, |h| {
                let (b, _) = t.eval(h);
                (self.coenergy(h), b)
            })?,
        };
        let (b, db) = (self.curve.b(h), self.curve.db(h));
        Ok(AxisInverse { value: h, d1: 1.0 / b, d2: -db / (b * b * b) })
    }

    /// `b̂(w)`: the non-negative flux density whose axis energy equals `w`.
    pub fn invert_energy(&self, w: f64) -> Result<AxisInverse> {
        if !(w >= 0.0) {
            return Err(Error::NegativeEnergy(w));
        }
        match &self.curve {
            PrincipalCurve::Linear { c } => {
                let b = (2.0 * w).sqrt() / c;
                let h = c * c * b;
                Ok(AxisInverse { value: b, d1: 1.0 / h, d2: -(c * c) / (h * h * h) })
            }
            PrincipalCurve::Tabulated(t) => {
                // Parametrise by the field: E(h) = h·b(h) − w*(h) is increasing with E' = h·b'(h).
                let h = self.solve_on_knots(t, w, &self.energy_nodes, |h| {
                    let (b, db) = t.eval(h);
                    (h * b - self.coenergy(h), h * db)
                })?;
                let (b, db) = t.eval(h);
                let dh = 1.0 / db;
                Ok(AxisInverse { value: b, d1: 1.0 / h, d2: -dh / (h * h * h) })
            }
        }
    }

    /// Solves `g(h) = w` for an increasing `g` whose knot values are `nodes`.
    fn solve_on_knots<G>(&self, t: &MonotoneCubic, w: f64, nodes: &[f64], g: G) -> Result<f64>
    where
        G: Fn(f64) -> (f64, f64),
    {
        if w == 0.0 {
            return Ok(0.0);
        }
        let last = nodes.len() - 1;
        let (lo, hi) = if w >= nodes[last] {
            let (lo, hi) = grow_bracket(|h| g(h).0 - w, t.h_max(), 2.0 * t.h_max(), true)?;
            (lo, hi)
        } else {
            let k = MonotoneCubic::locate(nodes, w);
            if nodes[k] == w {
                return Ok(t.h[k]);
            }
            (t.h[k], t.h[k + 1])
        };
        let opts = RootOptions { f_tol: 1e-15 * w, ..RootOptions::default() };
        newton_bisect(
            |h| {
                let (v, d) = g(h);
                (v - w, d)
            },
            lo,
            hi,
            None,
            &opts,
        )
        .map(|r| r.x)
    }

    /// Single-axis potential in the given frame: `w*(x)` or `w(x)`.
    pub fn potential(&self, frame: Frame, x: f64) -> f64 {
        match frame {
            Frame::Coenergy => self.coenergy(x),
            Frame::Energy => self.energy(x),
        }
    }

    /// Inverse potential in the given frame: `ĥ(w)` or `b̂(w)`.
    pub fn invert(&self, frame: Frame, w: f64) -> Result<AxisInverse> {
        match frame {
            Frame::Coenergy => self.invert_coenergy(w),
            Frame::Energy => self.invert_energy(w),
        }
    }

    /// The conjugate scalar law in the given frame: `b(h)` or `h(b)`.
    pub fn law(&self, frame: Frame, x: f64) -> f64 {
        match frame {
            Frame::Coenergy => self.curve.b(x),
            Frame::Energy => self.curve.h(x),
        }
    }
}

/// `w*ᵢ(h)` along one axis.
pub fn coenergy_along_axis(profile: &EnergyProfile, h: f64) -> f64 {
    profile.coenergy(h)
}

/// `(ĥᵢ(w), dĥᵢ/dw)` along one axis.
pub fn invert_axis_energy(profile: &EnergyProfile, w: f64) -> Result<(f64, f64)> {
    profile.invert_coenergy(w).map(|inv| (inv.value, inv.d1))
}
