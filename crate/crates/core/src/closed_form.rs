//! Explicit reference models.
//!
//! [`PNormModel`] is the squared, axis-scaled p-norm that the implicit model
//! reduces to for linear principal curves. [`SpecialModel`] covers the wider
//! family where the two inverse axis functions are proportional,
//! `x̂₁(w) = λ·x̂₂(w)`: the level equation then has the explicit solution
//! `w = potential₂(‖(x₁/λ, x₂)‖ₑ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material_law::Potential;
use crate::principal_curves::EnergyProfile;
use crate::tensor::SymTensor2;
use crate::Frame;

const AXIS_BAND: f64 = 1e-12;

/// `(Σ|vᵢ|^e)^(1/e)` with the largest component factored out.
pub fn stable_norm(v: [f64; 2], e: f64) -> f64 {
    let m = v[0].abs().max(v[1].abs());
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(e)).sum();
    m * s.powf(1.0 / e)
}

/// `½‖(x₁/c₁, x₂/c₂)‖ₑ²` (coenergy) or `½‖(c₁x₁, c₂x₂)‖ₑ²` (energy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PNormModel {
    pub frame: Frame,
    pub scales: [f64; 2],
    pub exponent: f64,
}

impl PNormModel {
    pub fn new(frame: Frame, scales: [f64; 2], exponent: f64) -> Result<Self> {
        if let Some(&c) = scales.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::NonPositiveCoefficient(c));
        }
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidExponent(format!("p-norm exponent must be at least 1, got {exponent}")));
        }
        Ok(Self { frame, scales, exponent })
    }

    /// The convex conjugate: same scales, other frame, conjugate exponent.
    pub fn dual(&self) -> Result<Self> {
        Self::new(self.frame.dual(), self.scales, conjugate_exponent(self.exponent)?)
    }

    fn factors(&self) -> [f64; 2] {
        match self.frame {
            Frame::Coenergy => [1.0 / self.scales[0], 1.0 / self.scales[1]],
            Frame::Energy => self.scales,
        }
    }

    fn scaled(&self, x: [f64; 2]) -> [f64; 2] {
        let k = self.factors();
        [k[0] * x[0], k[1] * x[1]]
    }

    pub fn pnorm_value(&self, x: [f64; 2]) -> f64 {
        let n = stable_norm(self.scaled(x), self.exponent);
        0.5 * n * n
    }

    pub fn pnorm_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let v = self.scaled(x);
        let k = self.factors();
        let n = stable_norm(v, self.exponent);
        if n == 0.0 {
            return [0.0, 0.0];
        }
        let e = self.exponent;
        let g = |i: usize| k[i] * n * (v[i].abs() / n).powf(e - 1.0) * v[i].signum() * (v[i] != 0.0) as i32 as f64;
        [g(0), g(1)]
    }

    pub fn pnorm_hessian(&self, x: [f64; 2]) -> Result<SymTensor2> {
        let e = self.exponent;
        let k = self.factors();
        let v = self.scaled(x);
        let n = stable_norm(v, e);
        if n == 0.0 {
            if e == 2.0 {
                return Ok(SymTensor2::diag(k[0] * k[0], k[1] * k[1]));
            }
            return Err(Error::OriginSingularity);
        }
        if e < 2.0 && (v[0].abs() <= AXIS_BAND * n || v[1].abs() <= AXIS_BAND * n) {
            return Err(Error::AxisSingularity { exponent: e });
        }
        let rho = [v[0].abs() / n, v[1].abs() / n];
        let s = [v[0].signum(), v[1].signum()];
        let outer = |i: usize| rho[i].powf(e - 1.0) * s[i] * (v[i] != 0.0) as i32 as f64;
        let entry = |i: usize, j: usize| {
            let diag = if i == j { (e - 1.0) * rho[i].powf(e - 2.0) } else { 0.0 };
            k[i] * k[j] * ((2.0 - e) * outer(i) * outer(j) + diag)
        };
        Ok(SymTensor2::new(entry(0, 0), entry(0, 1), entry(1, 1)))
    }
}

impl Potential for PNormModel {
    fn frame(&self) -> Frame {
        self.frame
    }

    fn value(&self, x: [f64; 2]) -> Result<f64> {
        Ok(self.pnorm_value(x))
    }

    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.pnorm_gradient(x))
    }

    fn hessian(&self, x: [f64; 2]) -> Result<SymTensor2> {
        self.pnorm_hessian(x)
    }

    fn axis_inverse(&self, axis: usize, level: f64) -> Option<f64> {
        Some((2.0 * level).sqrt() / self.factors()[axis])
    }
}

/// `e/(e−1)`: the Hölder-conjugate exponent.
pub fn conjugate_exponent(e: f64) -> Result<f64> {
    if !(e > 1.0) || !e.is_finite() {
        return Err(Error::ExponentNotConjugable(e));
    }
    Ok(e / (e - 1.0))
}

/// Explicit model for proportional inverse axis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialModel {
    pub frame: Frame,
    axis2: EnergyProfile,
    /// `x̂₁(w) / x̂₂(w)`.
    pub lambda: f64,
    pub exponent: f64,
}

impl SpecialModel {
    /// Measures `λ` at `w = 1` and checks proportionality at 32 log-spaced levels.
    pub fn from_profiles(frame: Frame, axis1: &EnergyProfile, axis2: EnergyProfile, exponent: f64) -> Result<Self> {
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidExponent(format!("exponent must be at least 1, got {exponent}")));
        }
        let lambda = axis1.invert(frame, 1.0)?.value / axis2.invert(frame, 1.0)?.value;
        let mut worst: f64 = 0.0;
        for k in 0..32 {
            let w = 10f64.powf(-4.0 + 8.0 * k as f64 / 31.0);
            let ratio = axis1.invert(frame, w)?.value / (lambda * axis2.invert(frame, w)?.value);
            worst = worst.max((ratio - 1.0).abs());
        }
        if worst > 1e-8 {
            return Err(Error::ProportionalityViolated(worst));
        }
        Ok(Self { frame, axis2, lambda, exponent })
    }

    /// `ψ⁻¹((|x₁|/λ)^e + |x₂|^e)` with `ψ(w) = x̂₂(w)^e`, i.e. `potential₂(‖(x₁/λ, x₂)‖ₑ)`.
    pub fn special_value(&self, x: [f64; 2]) -> f64 {
        let s = stable_norm([x[0] / self.lambda, x[1]], self.exponent);
        self.axis2.potential(self.frame, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principal_curves::PrincipalCurve;

    #[test]
    fn value_examples() {
        let m = PNormModel::new(Frame::Coenergy, [2.0, 1.0], 2.0).unwrap();
        assert!((m.pnorm_value([2.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(m.pnorm_value([0.0, 0.0]), 0.0);
        let en = PNormModel::new(Frame::Energy, [2.0, 1.0], 1.3).unwrap();
        assert_eq!(en.pnorm_value([0.0, 0.0]), 0.0);
        assert!((en.pnorm_value([0.0, 0.8]) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let m = PNormModel::new(Frame::Coenergy, [2.0, 1.0], 2.0).unwrap();
        let g = m.pnorm_gradient([2.0, 1.0]);
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
        for x in [[2.0, 1.0], [0.0, 0.0], [-1.0, 3.0], [5.0, 0.0]] {
            let h = m.pnorm_hessian(x).unwrap();
            assert!((h.t11 - 0.25).abs() < 1e-15 && h.t12.abs() < 1e-15 && (h.t22 - 1.0).abs() < 1e-15);
        }
        let m = PNormModel::new(Frame::Coenergy, [2.0, 1.0], 13.0 / 3.0).unwrap();
        let g = m.pnorm_gradient([1.3, -0.7]);
        let gm = m.pnorm_gradient([-1.3, 0.7]);
        assert_eq!(g, [-gm[0], -gm[1]]);
        let en = PNormModel::new(Frame::Energy, [2.0, 1.0], 1.3).unwrap();
        assert_eq!(en.pnorm_hessian([1.0, 0.0]), Err(Error::AxisSingularity { exponent: 1.3 }));
        assert_eq!(m.pnorm_hessian([0.0, 0.0]), Err(Error::OriginSingularity));
    }

    #[test]
    fn conjugate_exponent_examples() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert!((conjugate_exponent(13.0 / 3.0).unwrap() - 1.3).abs() < 1e-15);
        assert!((conjugate_exponent(1.3).unwrap() - 13.0 / 3.0).abs() < 1e-14);
        assert_eq!(conjugate_exponent(1.0), Err(Error::ExponentNotConjugable(1.0)));
    }

    #[test]
    fn stable_norm_survives_large_inputs() {
        let n = stable_norm([1e200, 1e200], 13.0 / 3.0);
        assert!((n / 1e200 - 2f64.powf(3.0 / 13.0)).abs() < 1e-14);
    }

    #[test]
    fn special_model_requires_proportional_axes() {
        let a1 = EnergyProfile::new(PrincipalCurve::linear(2.0).unwrap());
        let a2 = EnergyProfile::new(PrincipalCurve::linear(1.0).unwrap());
        let m = SpecialModel::from_profiles(Frame::Coenergy, &a1, a2.clone(), 2.0).unwrap();
        assert!((m.lambda - 2.0).abs() < 1e-15);
        assert_eq!(m.special_value([0.0, 0.0]), 0.0);
        assert!((m.special_value([3.0, 0.0]) - a1.coenergy(3.0)).abs() < 1e-14);

        let steel = EnergyProfile::new(
            PrincipalCurve::tabulated(&[(0.0, 0.0), (100.0, 1.0), (300.0, 1.4), (1000.0, 1.6)]).unwrap(),
        );
        assert!(matches!(
            SpecialModel::from_profiles(Frame::Coenergy, &steel, a2, 2.0),
            Err(Error::ProportionalityViolated(_))
        ));
    }
}
