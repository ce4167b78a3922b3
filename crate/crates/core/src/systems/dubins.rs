use super::System;
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};

/// Dubins car `(v cos θ, v sin θ, ω) + Gw` with constant `G ∈ R^{3×m}`.
#[derive(Clone, Debug)]
pub struct Dubins {
    v: f64,
    omega: f64,
    g: Matrix,
}

impl Dubins {
    pub fn new(v: f64, omega: f64, g: Matrix) -> Result<Self> {
        if g.nrows() != 3 || !(2..=3).contains(&g.ncols()) {
            return Err(Error::Config(format!(
                "Dubins disturbance matrix must be 3x2 or 3x3, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if !v.is_finite() || !omega.is_finite() {
            return Err(Error::Config("Dubins speeds must be finite".into()));
        }
        Ok(Dubins { v, omega, g })
    }
}

impl System for Dubins {
    fn state_dim(&self) -> usize {
        3
    }
    fn disturbance_dim(&self) -> usize {
        self.g.ncols()
    }
    fn drift(&self, _t: f64, x: &Vector) -> Vector {
        Vector::from_vec(vec![self.v * x[2].cos(), self.v * x[2].sin(), self.omega])
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        self.g.clone()
    }
    fn drift_jacobian(&self, _t: f64, x: &Vector) -> Matrix {
        let mut j = Matrix::zeros(3, 3);
        j[(0, 2)] = -self.v * x[2].sin();
        j[(1, 2)] = self.v * x[2].cos();
        j
    }
    fn label(&self) -> String {
        format!("dubins(v={}, omega={}, m={})", self.v, self.omega, self.g.ncols())
    }
}
