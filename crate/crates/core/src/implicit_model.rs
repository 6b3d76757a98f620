//! The implicit level equation and its scalar solver.
//!
//! For a point `x` the model value is the level `w > 0` solving
//! `F(x, w) = Σᵢ (|xᵢ| / x̂ᵢ(w))^e(w) − 1 = 0`, where `x̂ᵢ` is `ĥᵢ` in the
//! coenergy frame and `b̂ᵢ` in the energy frame. With a constant exponent `F`
//! is strictly decreasing in `w`, so the root is unique and a safeguarded
//! Newton iteration on a sign-changing bracket always finds it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::principal_curves::{AxisInverse, EnergyProfile, PrincipalCurve};
use crate::roots::{grow_bracket, newton_bisect, RootOptions};
use crate::Frame;

/// Beyond this log-argument a term is treated as `+∞`.
const LOG_OVERFLOW: f64 = 700.0;

/// The exponent `e(w)` of the level equation.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentRule {
    Constant(f64),
    /// Piecewise-linear in the level, clamped outside the table.
    Tabulated { levels: Vec<f64>, exponents: Vec<f64> },
}

impl ExponentRule {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidExponent(format!("constant exponent must be positive, got {value}")));
        }
        Ok(ExponentRule::Constant(value))
    }

    pub fn tabulated(table: &[(f64, f64)]) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidExponent("empty exponent table".into()));
        }
        for pair in table.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::InvalidExponent(format!(
                    "levels must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(w, e)) = table.iter().find(|(w, e)| !(*e > 0.0) || !e.is_finite() || !w.is_finite()) {
            return Err(Error::InvalidExponent(format!("invalid table entry ({w}, {e})")));
        }
        Ok(ExponentRule::Tabulated {
            levels: table.iter().map(|p| p.0).collect(),
            exponents: table.iter().map(|p| p.1).collect(),
        })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ExponentRule::Constant(_))
    }

    /// `(e(w), e'(w))`; the derivative is one-sided (from the right) at table knots.
    pub fn eval(&self, level: f64) -> (f64, f64) {
        match self {
            ExponentRule::Constant(e) => (*e, 0.0),
            ExponentRule::Tabulated { levels, exponents } => {
                let n = levels.len();
                if n == 1 || level <= levels[0] {
                    return (exponents[0], 0.0);
                }
                if level >= levels[n - 1] {
                    return (exponents[n - 1], 0.0);
                }
                let k = levels.partition_point(|&v| v <= level) - 1;
                let slope = (exponents[k + 1] - exponents[k]) / (levels[k + 1] - levels[k]);
                (exponents[k] + slope * (level - levels[k]), slope)
            }
        }
    }

    pub fn value(&self, level: f64) -> f64 {
        self.eval(level).0
    }

    pub fn min_exponent(&self) -> f64 {
        match self {
            ExponentRule::Constant(e) => *e,
            ExponentRule::Tabulated { exponents, .. } => exponents.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_iter: 200 }
    }
}

/// Diagnostics attached to evaluations that leave the well-posed regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Warning {
    /// The residual is not monotone in the level near the solution; the root may not be unique.
    NonMonotoneResidual,
    /// Derivatives were computed with a level-dependent exponent.
    VariableExponentDerivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolution {
    pub level: f64,
    pub residual: f64,
    pub iterations: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub monotone: bool,
    pub sign_changes: usize,
    pub sample_levels: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Per-axis quantities of the level equation at a fixed level.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisTerm {
    pub x: f64,
    pub inv: AxisInverse,
    /// `|x| / x̂(w)`.
    pub u: f64,
    /// `u^e`.
    pub t: f64,
    /// `ln u`, `-∞` on the axis.
    pub log_u: f64,
}

impl AxisTerm {
    /// `x̂'/x̂`.
    pub fn rate(&self) -> f64 {
        self.inv.d1 / self.inv.value
    }

    /// `∂t/∂w = t·a` with `a = e'·ln u − e·x̂'/x̂`; zero when `t` vanishes.
    pub fn level_slope(&self, e: f64, de: f64) -> f64 {
        if self.t == 0.0 {
            return 0.0;
        }
        let log_part = if de == 0.0 { 0.0 } else { de * self.log_u };
        self.t * (log_part - e * self.rate())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelTerms {
    #[allow(dead_code)]
    pub level: f64,
    pub e: f64,
    pub de: f64,
    pub axes: [AxisTerm; 2],
}

impl LevelTerms {
    pub fn residual(&self) -> f64 {
        self.axes[0].t + self.axes[1].t - 1.0
    }

    /// `∂F/∂w`.
    pub fn level_derivative(&self) -> f64 {
        self.axes.iter().map(|a| a.level_slope(self.e, self.de)).sum()
    }
}

/// An implicit (co)energy model built from two principal curves.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitModel {
    pub frame: Frame,
    /// Rolling direction, then transverse direction.
    pub axes: [EnergyProfile; 2],
    pub exponent: ExponentRule,
    pub solver: SolverOptions,
}

impl ImplicitModel {
    pub fn new(frame: Frame, axis1: PrincipalCurve, axis2: PrincipalCurve, exponent: ExponentRule) -> Self {
        Self::from_profiles(frame, EnergyProfile::new(axis1), EnergyProfile::new(axis2), exponent)
    }

    pub fn from_profiles(frame: Frame, axis1: EnergyProfile, axis2: EnergyProfile, exponent: ExponentRule) -> Self {
        Self { frame, axes: [axis1, axis2], exponent, solver: SolverOptions::default() }
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    /// Single-axis potential `w*ᵢ(x)` or `wᵢ(x)` of axis `i`.
    pub fn axis_potential(&self, i: usize, x: f64) -> f64 {
        self.axes[i].potential(self.frame, x)
    }

    pub(crate) fn terms(&self, point: [f64; 2], level: f64) -> Result<LevelTerms> {
        let (e, de) = self.exponent.eval(level);
        let mut axes = [None, None];
        for (i, slot) in axes.iter_mut().enumerate() {
            let x = point[i];
            let inv = self.axes[i].invert(self.frame, level)?;
            let ax = x.abs();
            let (u, t, log_u) = if ax == 0.0 {
                (0.0, 0.0, f64::NEG_INFINITY)
            } else {
                let u = ax / inv.value;
                let log_u = u.ln();
                let t = if !u.is_finite() || e * log_u > LOG_OVERFLOW { f64::INFINITY } else { u.powf(e) };
                (u, t, log_u)
            };
            *slot = Some(AxisTerm { x, inv, u, t, log_u });
        }
        Ok(LevelTerms { level, e, de, axes: [axes[0].unwrap(), axes[1].unwrap()] })
    }

    /// `F(x, w)`; negative below the level set, positive above.
    pub fn residual(&self, point: [f64; 2], level: f64) -> Result<f64> {
        if !(level > 0.0) {
            return Err(Error::NonPositiveLevel(level));
        }
        Ok(self.terms(point, level)?.residual())
    }

    fn check_point(point: [f64; 2]) -> Result<()> {
        if point.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinitePoint(point[0], point[1]))
        }
    }

    /// A bracket `[lo, hi]` with `F(lo) >= 0 >= F(hi)` for a nonzero point.
    ///
    /// At `lo = maxᵢ potentialᵢ(|xᵢ|)` one term equals one, so `F(lo) >= 0` for
    /// any exponent rule. The sum of axis potentials is tried as the upper end
    /// and doubled until the residual turns negative.
    pub fn level_bracket(&self, point: [f64; 2]) -> Result<(f64, f64)> {
        let p0 = self.axis_potential(0, point[0]);
        let p1 = self.axis_potential(1, point[1]);
        let lo = p0.max(p1);
        let start = p0 + p1;
        let (_, hi) = grow_bracket(
            |w| self.terms(point, w).map(|t| t.residual()).unwrap_or(f64::NAN),
            lo,
            start,
            false,
        )?;
        Ok((lo, hi))
    }

    /// Evaluates the model value `w(x)`.
    pub fn solve_level(&self, point: [f64; 2]) -> Result<f64> {
        self.solve(point).map(|s| s.level)
    }

    pub fn solve(&self, point: [f64; 2]) -> Result<LevelSolution> {
        Self::check_point(point)?;
        if point[0] == 0.0 && point[1] == 0.0 {
            return Ok(LevelSolution { level: 0.0, residual: 0.0, iterations: 0, warnings: Vec::new() });
        }
        let (lo, hi) = self.level_bracket(point)?;
        let f_lo = self.terms(point, lo)?.residual();
        let rel_tol = self.solver.rel_tol;
        let mut warnings = Vec::new();
        if !self.exponent.is_constant() {
            let report = self.check_uniqueness(point, (0.5 * lo, 2.0 * hi), 64);
            if !report.monotone {
                warnings.push(Warning::NonMonotoneResidual);
            }
        }
        if f_lo <= 0.0 {
            // On an axis the lower bound is the exact answer up to rounding.
            if f_lo >= -rel_tol {
                return Ok(LevelSolution { level: lo, residual: f_lo, iterations: 0, warnings });
            }
            return Err(Error::NoBracket);
        }

        let opts = RootOptions {
            x_tol_abs: self.solver.abs_tol.min(16.0 * f64::EPSILON * lo),
            x_tol_rel: 16.0 * f64::EPSILON,
            f_tol: 1e-3 * rel_tol,
            max_iter: self.solver.max_iter,
        };
        let root = newton_bisect(
            |w| match self.terms(point, w) {
                Ok(t) => (t.residual(), t.level_derivative()),
                Err(_) => (f64::NAN, f64::NAN),
            },
            lo,
            hi,
            Some(lo),
            &opts,
        )?;
        let residual = self.terms(point, root.x)?.residual();
        if !(residual.abs() <= rel_tol) {
            return Err(Error::MaxIterExceeded(root.iterations));
        }
        Ok(LevelSolution { level: root.x, residual, iterations: root.iterations, warnings })
    }

    /// A level interval guaranteed to contain every root for `point`.
    pub fn default_level_range(&self, point: [f64; 2]) -> Result<(f64, f64)> {
        if point[0] == 0.0 && point[1] == 0.0 {
            return Ok((1e-6, 1e6));
        }
        let (lo, hi) = self.level_bracket(point)?;
        Ok((0.1 * lo, 10.0 * hi))
    }

    /// Samples `F` on `samples` log-spaced levels in `range` and reports
    /// whether it decreases monotonically and how often it changes sign.
    pub fn check_uniqueness(&self, point: [f64; 2], range: (f64, f64), samples: usize) -> UniquenessReport {
        let (a, b) = range;
        let samples = samples.max(2);
        let ratio = (b / a).ln() / (samples - 1) as f64;
        let sample_levels: Vec<f64> = (0..samples).map(|k| a * (ratio * k as f64).exp()).collect();
        let residuals: Vec<f64> = sample_levels
            .iter()
            .map(|&w| self.terms(point, w).map(|t| t.residual()).unwrap_or(f64::NAN))
            .collect();

        let monotone = residuals
            .windows(2)
            .all(|p| p[1] <= p[0] + 1e-14 * p[0].abs().max(1.0));
        let mut sign_changes = 0;
        let mut last_sign = 0.0;
        for &r in &residuals {
            if r == 0.0 || r.is_nan() {
                continue;
            }
            let s = r.signum();
            if last_sign != 0.0 && s != last_sign {
                sign_changes += 1;
            }
            last_sign = s;
        }
        UniquenessReport { monotone, sign_changes, sample_levels, residuals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(c1: f64, c2: f64, n: f64) -> ImplicitModel {
        ImplicitModel::new(
            Frame::Coenergy,
            PrincipalCurve::linear(c1).unwrap(),
            PrincipalCurve::linear(c2).unwrap(),
            ExponentRule::constant(n).unwrap(),
        )
    }

    #[test]
    fn residual_examples() {
        let m = linear(2.0, 1.0, 2.0);
        assert!(m.residual([2.0, 0.0], 0.5).unwrap().abs() < 1e-15);
        assert_eq!(m.residual([0.0, 0.0], 0.7).unwrap(), -1.0);
        let iso = linear(1.0, 1.0, 2.0);
        assert!(iso.residual([1.0, 1.0], 1.0).unwrap().abs() < 1e-15);
        assert_eq!(m.residual([1.0, 1.0], 0.0), Err(Error::NonPositiveLevel(0.0)));
    }

    #[test]
    fn solve_examples() {
        let m = linear(2.0, 1.0, 2.0);
        assert!((m.solve_level([2.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(m.solve_level([0.0, 0.0]).unwrap(), 0.0);
        let m = linear(2.0, 1.0, 13.0 / 3.0);
        assert!((m.solve_level([3.0, 0.0]).unwrap() - 1.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_points() {
        let m = linear(2.0, 1.0, 2.0);
        assert!(matches!(m.solve_level([f64::NAN, 1.0]), Err(Error::NonFinitePoint(..))));
    }

    #[test]
    fn huge_fields_do_not_overflow() {
        let m = linear(2.0, 1.0, 13.0 / 3.0);
        let w = m.solve_level([1e150, -3e149]).unwrap();
        assert!(w.is_finite() && w > 0.0);
        let small = m.solve_level([1.0, -0.3]).unwrap();
        assert!((w / small / 1e300 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sub_unit_exponent_is_solvable() {
        // The upper bracket guess is not a bound for small exponents; doubling recovers it.
        let m = linear(1.0, 1.0, 0.5);
        let s = m.solve([1.0, 1.0]).unwrap();
        assert!(s.residual.abs() <= 1e-12);
        let e = ExponentRule::constant(0.5).unwrap();
        let u = (1.0 / (2.0 * s.level).sqrt()).powf(e.value(1.0));
        assert!((2.0 * u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_rule_validation() {
        assert!(ExponentRule::constant(0.0).is_err());
        assert!(ExponentRule::tabulated(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(ExponentRule::tabulated(&[(1.0, 2.0), (2.0, -3.0)]).is_err());
        let r = ExponentRule::tabulated(&[(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(r.eval(0.5), (2.0, 0.0));
        assert_eq!(r.eval(2.0), (3.0, 1.0));
        assert_eq!(r.eval(9.0), (4.0, 0.0));
    }

    #[test]
    fn uniqueness_for_constant_exponent_and_origin() {
        let m = linear(2.0, 1.0, 13.0 / 3.0);
        let p = [1.3, -0.4];
        let report = m.check_uniqueness(p, m.default_level_range(p).unwrap(), 512);
        assert!(report.monotone);
        assert_eq!(report.sign_changes, 1);
        let report = m.check_uniqueness([0.0, 0.0], (1e-3, 1e3), 512);
        assert_eq!(report.sign_changes, 0);
        assert!(report.monotone);
    }
}
