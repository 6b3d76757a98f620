//! Implicit interpolation models for anisotropic nonlinear magnetic materials.
//!
//! The crate builds a two-dimensional (co)energy functional from B-H curves
//! measured along the rolling and transverse directions of an electrical steel
//! sheet. The value at an arbitrary field (or flux) vector is the level `w`
//! solving the unit-sum equation
//!
//! ```text
//! |x1 / x̂1(w)|^e(w) + |x2 / x̂2(w)|^e(w) = 1
//! ```
//!
//! where `x̂i` inverts the single-axis (co)energy. Material laws and the
//! differential permeability/reluctivity tensors follow by implicit
//! differentiation of that equation.
//!
//! ```
//! use maganiso::{ExponentRule, Frame, ImplicitModel, PrincipalCurve};
//!
//! let model = ImplicitModel::new(
//!     Frame::Coenergy,
//!     PrincipalCurve::linear(2.0).unwrap(),
//!     PrincipalCurve::linear(1.0).unwrap(),
//!     ExponentRule::constant(2.0).unwrap(),
//! );
//! let w = model.solve_level([2.0, 1.0]).unwrap();
//! assert!((w - 1.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod implicit_model;
pub mod material_law;
pub mod principal_curves;
pub mod roots;
pub mod tensor;

pub use closed_form::{conjugate_exponent, PNormModel, SpecialModel};
pub use error::{Error, Result};
pub use implicit_model::{ExponentRule, ImplicitModel, SolverOptions, UniquenessReport, Warning};
pub use material_law::{LawEvaluation, Potential};
pub use principal_curves::{AxisInverse, EnergyProfile, PrincipalCurve};
pub use tensor::SymTensor2;

/// A field vector `(h1, h2)` in A/m.
pub type FieldPoint = [f64; 2];
/// A flux density vector `(b1, b2)` in T.
pub type FluxPoint = [f64; 2];

/// Which potential a model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Coenergy `w*(h)`; its gradient is the flux density.
    Coenergy,
    /// Energy `w(b)`; its gradient is the magnetic field.
    Energy,
}

impl Frame {
    pub fn dual(self) -> Self {
        match self {
            Frame::Coenergy => Frame::Energy,
            Frame::Energy => Frame::Coenergy,
        }
    }
}
