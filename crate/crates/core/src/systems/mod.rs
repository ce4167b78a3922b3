//! Control-affine dynamics `ẋ = f(t,x) + g(t,x)w` and the benchmark systems.

mod attraction;
mod dubins;
mod neural;
mod spacecraft;

pub use attraction::{smooth_cutoff, AttractionRepulsion};
pub use dubins::Dubins;
pub use neural::{softplus, softplus_derivative, MlpPolicy, NeuralLoop, POLICY_SEED};
pub use spacecraft::{
    cross_matrix, omega_matrix, ControlSignal, SpacecraftFull, SpacecraftOmega, SPACECRAFT_INERTIA,
};

use crate::geometry::{Matrix, Vector};
use crate::error::{Error, Result};

/// Step of the central differences used by [`jacobian_check`].
pub const FD_STEP: f64 = 1e-6;

/// A disturbed system `ẋ = f(t,x) + g(t,x)w` with `x ∈ Rⁿ`, `w ∈ Rᵐ`.
pub trait System: Send + Sync {
    fn state_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;
    fn drift(&self, t: f64, x: &Vector) -> Vector;
    /// The `n × m` disturbance matrix.
    fn input_matrix(&self, t: f64, x: &Vector) -> Matrix;
    /// `∇f(t,x)`, `n × n`.
    fn drift_jacobian(&self, t: f64, x: &Vector) -> Matrix;
    /// `[∇g(t,x)w]_{ik} = Σ_j ∂g_ij/∂x_k w_j`, `n × n`. Zero for constant `g`.
    fn input_jacobian_times(&self, _t: f64, _x: &Vector, _w: &Vector) -> Matrix {
        Matrix::zeros(self.state_dim(), self.state_dim())
    }
    fn label(&self) -> String;
    /// Time window on which the dynamics are defined, if bounded.
    fn time_domain(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Fails with an interpolation error when `[t0, tf]` leaves the system's
/// time domain.
pub fn check_time_window(sys: &dyn System, t0: f64, tf: f64) -> Result<()> {
    if let Some((lo, hi)) = sys.time_domain() {
        let slack = 1e-9 * (1.0 + hi.abs());
        if t0 < lo - slack {
            return Err(Error::Interpolation(t0));
        }
        if tf > hi + slack {
            return Err(Error::Interpolation(tf));
        }
    }
    Ok(())
}

/// Linear system `ẋ = Ax + Gw` with constant `G`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    a: Matrix,
    g: Matrix,
}

impl LinearSystem {
    pub fn new(a: Matrix, g: Matrix) -> Result<Self> {
        if !a.is_square() || g.nrows() != a.nrows() || g.ncols() == 0 {
            return Err(Error::Config(format!(
                "linear system shapes A {}x{}, G {}x{} do not chain",
                a.nrows(),
                a.ncols(),
                g.nrows(),
                g.ncols()
            )));
        }
        Ok(LinearSystem { a, g })
    }

    /// `ẋ = w` in `Rⁿ`.
    pub fn single_integrator(n: usize) -> Self {
        LinearSystem {
            a: Matrix::zeros(n, n),
            g: Matrix::identity(n, n),
        }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
}

impl System for LinearSystem {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    fn disturbance_dim(&self) -> usize {
        self.g.ncols()
    }
    fn drift(&self, _t: f64, x: &Vector) -> Vector {
        &self.a * x
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        self.g.clone()
    }
    fn drift_jacobian(&self, _t: f64, _x: &Vector) -> Matrix {
        self.a.clone()
    }
    fn label(&self) -> String {
        format!("linear(n={})", self.a.nrows())
    }
}

/// Worst finite-difference discrepancies of a system's analytic Jacobians.
///
/// Each entry is scored as `|analytic − fd| / (abs + rel·|fd|)`; the check
/// passes when both scores are at most 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianCheck {
    pub drift: f64,
    pub input: f64,
}

impl JacobianCheck {
    pub fn passed(&self) -> bool {
        self.drift <= 1.0 && self.input <= 1.0
    }
}

/// Compares `∇f` and `∇g·w` at `(t, x)` with central differences of step
/// [`FD_STEP`].
pub fn jacobian_check(sys: &dyn System, t: f64, x: &Vector, w: &Vector, rel: f64, abs: f64) -> JacobianCheck {
    let n = sys.state_dim();
    let jf = sys.drift_jacobian(t, x);
    let jg = sys.input_jacobian_times(t, x, w);
    let mut worst_f = 0.0f64;
    let mut worst_g = 0.0f64;
    for k in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += FD_STEP;
        xm[k] -= FD_STEP;
        let df = (sys.drift(t, &xp) - sys.drift(t, &xm)) / (2.0 * FD_STEP);
        let dg = (sys.input_matrix(t, &xp) * w - sys.input_matrix(t, &xm) * w) / (2.0 * FD_STEP);
        for i in 0..n {
            worst_f = worst_f.max((jf[(i, k)] - df[i]).abs() / (abs + rel * df[i].abs()));
            worst_g = worst_g.max((jg[(i, k)] - dg[i]).abs() / (abs + rel * dg[i].abs()));
        }
    }
    JacobianCheck {
        drift: worst_f,
        input: worst_g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn linear_shapes_and_jacobian() {
        let sys = LinearSystem::new(dmatrix![0.0, 1.0; -1.0, -0.5], Matrix::identity(2, 2)).unwrap();
        assert_eq!(sys.drift(0.0, &dvector![1.0, 0.0]), dvector![0.0, -1.0]);
        let c = jacobian_check(&sys, 0.0, &dvector![0.3, -0.2], &dvector![0.1, 0.0], 1e-4, 1e-8);
        assert!(c.passed(), "{c:?}");
        assert!(LinearSystem::new(Matrix::zeros(2, 3), Matrix::identity(2, 2)).is_err());
    }
}
