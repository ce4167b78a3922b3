use super::System;
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};

fn phi(z: f64) -> f64 {
    if z > 0.0 {
        (-1.0 / z).exp()
    } else {
        0.0
    }
}

fn phi_prime(z: f64) -> f64 {
    if z > 0.0 {
        phi(z) / (z * z)
    } else {
        0.0
    }
}

/// Smooth step `s(r)` with `s = 0` for `r ≤ rc`, `s = 1` for `r ≥ 2rc`,
/// returned with its derivative.
pub fn smooth_cutoff(r: f64, rc: f64) -> (f64, f64) {
    let u = (r - rc) / rc;
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0);
    }
    let a = phi(u);
    let b = phi(1.0 - u);
    let s = a / (a + b);
    let ds = (phi_prime(u) * b + a * phi_prime(1.0 - u)) / ((a + b) * (a + b));
    (s, ds / rc)
}

/// `f(x) = s(‖x_a−x‖)(x_a−x)/‖x_a−x‖³ − s(‖x_r−x‖)(x_r−x)/‖x_r−x‖³`,
/// `g = I₂`.
#[derive(Clone, Debug)]
pub struct AttractionRepulsion {
    attractor: Vector,
    repeller: Vector,
    cutoff: f64,
}

impl AttractionRepulsion {
    pub fn new(attractor: Vector, repeller: Vector, cutoff: f64) -> Result<Self> {
        if attractor.len() != 2 || repeller.len() != 2 {
            return Err(Error::Config("attraction-repulsion poles must be 2-D".into()));
        }
        if attractor == repeller {
            return Err(Error::Config("attractor and repeller coincide".into()));
        }
        if !(cutoff > 0.0) {
            return Err(Error::Config("cutoff radius must be positive".into()));
        }
        Ok(AttractionRepulsion {
            attractor,
            repeller,
            cutoff,
        })
    }

    pub fn attractor(&self) -> &Vector {
        &self.attractor
    }

    pub fn repeller(&self) -> &Vector {
        &self.repeller
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Value of `s(r) y/r³` with `y = pole − x`.
    fn term(&self, pole: &Vector, x: &Vector) -> Vector {
        let y = pole - x;
        let r = y.norm();
        let (s, _) = smooth_cutoff(r, self.cutoff);
        if s == 0.0 {
            return Vector::zeros(2);
        }
        y * (s / (r * r * r))
    }

    /// Jacobian of `s(r) y/r³` with respect to `x`.
    fn term_jacobian(&self, pole: &Vector, x: &Vector) -> Matrix {
        let y = pole - x;
        let r = y.norm();
        let (s, ds) = smooth_cutoff(r, self.cutoff);
        if s == 0.0 && ds == 0.0 {
            return Matrix::zeros(2, 2);
        }
        let r3 = r * r * r;
        let dy = Matrix::identity(2, 2) * (s / r3) + &y * y.transpose() * (ds / (r3 * r) - 3.0 * s / (r3 * r * r));
        -dy
    }
}

impl System for AttractionRepulsion {
    fn state_dim(&self) -> usize {
        2
    }
    fn disturbance_dim(&self) -> usize {
        2
    }
    fn drift(&self, _t: f64, x: &Vector) -> Vector {
        self.term(&self.attractor, x) - self.term(&self.repeller, x)
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        Matrix::identity(2, 2)
    }
    fn drift_jacobian(&self, _t: f64, x: &Vector) -> Matrix {
        self.term_jacobian(&self.attractor, x) - self.term_jacobian(&self.repeller, x)
    }
    fn label(&self) -> String {
        "attraction-repulsion".into()
    }
}
