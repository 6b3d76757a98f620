//! Vector material laws and differential tensors by implicit differentiation.
//!
//! Writing the level equation as `F(x, w(x)) = 0` gives
//!
//! ```text
//! ∂ᵢw  = Nᵢ / D,            Nᵢ = ∂F/∂xᵢ = e·sign(xᵢ)·uᵢ^(e−1) / x̂ᵢ,   D = −∂F/∂w
//! ∂ᵢⱼw = (F_xᵢxⱼ + F_xᵢw·∂ⱼw + F_xⱼw·∂ᵢw + F_ww·∂ᵢw·∂ⱼw) / D
//! ```
//!
//! with `uᵢ = |xᵢ|/x̂ᵢ(w)`. For a constant exponent
//! `D = e·Σⱼ uⱼ^e·x̂ⱼ'/x̂ⱼ > 0`. A level-dependent exponent adds
//! `e'(w)·ln uⱼ` terms to the level derivatives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::implicit_model::{ImplicitModel, LevelTerms, Warning};
use crate::tensor::SymTensor2;
use crate::Frame;

/// Relative distance to an axis below which second derivatives are refused for `e < 2`.
const AXIS_BAND: f64 = 1e-12;

/// A scalar potential over the plane with its first and second derivatives.
pub trait Potential: Send + Sync {
    fn frame(&self) -> Frame;
    fn value(&self, x: [f64; 2]) -> Result<f64>;
    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]>;
    fn hessian(&self, x: [f64; 2]) -> Result<SymTensor2>;

    fn value_gradient(&self, x: [f64; 2]) -> Result<(f64, [f64; 2])> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// `x̂ᵢ(level)`: the distance along axis `i` at which the potential equals `level`, when known in closed form.
    fn axis_inverse(&self, _axis: usize, _level: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawEvaluation {
    pub level: f64,
    pub gradient: [f64; 2],
    pub hessian: Option<SymTensor2>,
    pub discriminant: f64,
    pub warnings: Vec<Warning>,
}

/// Partial derivatives of `F` at the solved level.
struct Partials {
    /// `∂F/∂xᵢ`.
    fx: [f64; 2],
    /// `∂²F/∂xᵢ²`; the mixed `∂²F/∂x₁∂x₂` vanishes.
    fxx: [f64; 2],
    /// `∂²F/∂xᵢ∂w`.
    fxw: [f64; 2],
    /// `∂²F/∂w²`.
    fww: f64,
    discriminant: f64,
}

fn partials(terms: &LevelTerms, second: bool) -> Partials {
    let (e, de) = (terms.e, terms.de);
    let mut fx = [0.0; 2];
    let mut fxx = [0.0; 2];
    let mut fxw = [0.0; 2];
    let mut fww = 0.0;
    for (i, ax) in terms.axes.iter().enumerate() {
        if ax.x == 0.0 {
            // Only the pure second derivative survives on the axis, and only for e <= 2.
            if second {
                fxx[i] = e * (e - 1.0) * 0f64.powf(e - 2.0) / (ax.inv.value * ax.inv.value);
            }
            continue;
        }
        let sign = ax.x.signum();
        // t/x = sign·u^(e−1)/x̂, computed without dividing by x.
        let t_over_x = sign * ax.u.powf(e - 1.0) / ax.inv.value;
        fx[i] = e * t_over_x;
        if second {
            let rate = ax.rate();
            let a = de * ax.log_u - e * rate;
            fxx[i] = e * (e - 1.0) * ax.u.powf(e - 2.0) / (ax.inv.value * ax.inv.value);
            fxw[i] = t_over_x * (de + e * a);
            let da = -2.0 * de * rate - e * (ax.inv.d2 / ax.inv.value - rate * rate);
            fww += ax.t * (a * a + da);
        }
    }
    Partials { fx, fxx, fxw, fww, discriminant: -terms.level_derivative() }
}

fn second_derivative(p: &Partials, grad: [f64; 2], i: usize, j: usize) -> f64 {
    let fxx = if i == j { p.fxx[i] } else { 0.0 };
    (fxx + p.fxw[i] * grad[j] + p.fxw[j] * grad[i] + p.fww * grad[i] * grad[j]) / p.discriminant
}

fn near_axis(x: [f64; 2]) -> bool {
    let scale = x[0].abs().max(x[1].abs());
    x[0].abs() <= AXIS_BAND * scale || x[1].abs() <= AXIS_BAND * scale
}

/// Solves the level, then evaluates the gradient and optionally the Hessian.
pub fn evaluate(model: &ImplicitModel, x: [f64; 2], with_hessian: bool) -> Result<LawEvaluation> {
    let solution = model.solve(x)?;
    let mut warnings = solution.warnings;
    if !model.exponent.is_constant() {
        warnings.push(Warning::VariableExponentDerivative);
    }

    if x[0] == 0.0 && x[1] == 0.0 {
        if model.exponent.value(0.0) < 1.0 {
            return Err(Error::ExponentTooSmall(model.exponent.value(0.0)));
        }
        if with_hessian {
            return Err(Error::OriginSingularity);
        }
        return Ok(LawEvaluation { level: 0.0, gradient: [0.0; 2], hessian: None, discriminant: f64::NAN, warnings });
    }

    let terms = model.terms(x, solution.level)?;
    let e = terms.e;
    if e < 1.0 {
        return Err(Error::ExponentTooSmall(e));
    }
    if with_hessian && e < 2.0 && near_axis(x) {
        return Err(Error::AxisSingularity { exponent: e });
    }
    let p = partials(&terms, with_hessian);
    if !(p.discriminant > 0.0) || !p.discriminant.is_finite() {
        return Err(Error::DegenerateDiscriminant(p.discriminant));
    }
    let gradient = [p.fx[0] / p.discriminant, p.fx[1] / p.discriminant];
    if !gradient.iter().all(|g| g.is_finite()) {
        return Err(Error::DegenerateDiscriminant(p.discriminant));
    }

    let hessian = if with_hessian {
        let h = SymTensor2::new(
            second_derivative(&p, gradient, 0, 0),
            second_derivative(&p, gradient, 0, 1),
            second_derivative(&p, gradient, 1, 1),
        );
        if !h.is_finite() {
            return Err(Error::AxisSingularity { exponent: e });
        }
        Some(h)
    } else {
        None
    };
    Ok(LawEvaluation { level: solution.level, gradient, hessian, discriminant: p.discriminant, warnings })
}

/// `b(h) = ∇w*(h)` in the coenergy frame, `h(b) = ∇w(b)` in the energy frame.
pub fn gradient(model: &ImplicitModel, x: [f64; 2]) -> Result<[f64; 2]> {
    evaluate(model, x, false).map(|ev| ev.gradient)
}

/// `μ'(h)` in the coenergy frame, `ν'(b)` in the energy frame.
pub fn hessian(model: &ImplicitModel, x: [f64; 2]) -> Result<SymTensor2> {
    if x[0] == 0.0 && x[1] == 0.0 {
        return Err(Error::OriginSingularity);
    }
    evaluate(model, x, true).map(|ev| ev.hessian.expect("hessian requested"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorPair {
    pub permeability: SymTensor2,
    pub reluctivity: SymTensor2,
    /// The flux density at which `ν'` was evaluated.
    pub flux: [f64; 2],
    /// `‖μ'·ν' − I‖_max`.
    pub product_error: f64,
}

/// `μ'` of the coenergy model at `h` and `ν'` of the energy model at `b = ∇w*(h)`.
pub fn differential_tensor_pair(coenergy: &dyn Potential, energy: &dyn Potential, h: [f64; 2]) -> Result<TensorPair> {
    if coenergy.frame() != Frame::Coenergy || energy.frame() != Frame::Energy {
        return Err(Error::InvalidArgument("expected a coenergy model and an energy model".into()));
    }
    let permeability = coenergy.hessian(h)?;
    let flux = coenergy.gradient(h)?;
    let reluctivity = energy.hessian(flux)?;
    let product_error = permeability.identity_error(&reluctivity);
    Ok(TensorPair { permeability, reluctivity, flux, product_error })
}

impl Potential for ImplicitModel {
    fn frame(&self) -> Frame {
        self.frame
    }

    fn value(&self, x: [f64; 2]) -> Result<f64> {
        self.solve_level(x)
    }

    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        gradient(self, x)
    }

    fn hessian(&self, x: [f64; 2]) -> Result<SymTensor2> {
        hessian(self, x)
    }

    fn value_gradient(&self, x: [f64; 2]) -> Result<(f64, [f64; 2])> {
        evaluate(self, x, false).map(|ev| (ev.level, ev.gradient))
    }

    fn axis_inverse(&self, axis: usize, level: f64) -> Option<f64> {
        self.axes[axis].invert(self.frame, level).ok().map(|inv| inv.value)
    }
}
