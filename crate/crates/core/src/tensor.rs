use serde::Serialize;

/// Symmetric 2×2 tensor, e.g. a differential permeability `μ'` or reluctivity `ν'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymTensor2 {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl SymTensor2 {
    pub const IDENTITY: SymTensor2 = SymTensor2 { t11: 1.0, t12: 0.0, t22: 1.0 };

    pub fn new(t11: f64, t12: f64, t22: f64) -> Self {
        Self { t11, t12, t22 }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self { t11: a, t12: 0.0, t22: b }
    }

    pub fn to_matrix(&self) -> [[f64; 2]; 2] {
        [[self.t11, self.t12], [self.t12, self.t22]]
    }

    pub fn det(&self) -> f64 {
        self.t11 * self.t22 - self.t12 * self.t12
    }

    pub fn trace(&self) -> f64 {
        self.t11 + self.t22
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.t11 + self.t22);
        let half_diff = 0.5 * (self.t11 - self.t22);
        let radius = half_diff.hypot(self.t12);
        [mean - radius, mean + radius]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[0] > 0.0
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.t11 * v[0] + self.t12 * v[1], self.t12 * v[0] + self.t22 * v[1]]
    }

    pub fn inverse(&self) -> Option<SymTensor2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(SymTensor2::new(self.t22 / det, -self.t12 / det, self.t11 / det))
    }

    /// The (generally non-symmetric) product `self · other`.
    pub fn mul(&self, other: &SymTensor2) -> [[f64; 2]; 2] {
        let a = self.to_matrix();
        let b = other.to_matrix();
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    /// `‖self · other − I‖_max`.
    pub fn identity_error(&self, other: &SymTensor2) -> f64 {
        let p = self.mul(other);
        let mut err: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((v - target).abs());
            }
        }
        err
    }

    pub fn max_abs(&self) -> f64 {
        self.t11.abs().max(self.t12.abs()).max(self.t22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.t11.is_finite() && self.t12.is_finite() && self.t22.is_finite()
    }
}
