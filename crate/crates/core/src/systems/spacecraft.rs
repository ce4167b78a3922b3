//! Rigid spacecraft attitude dynamics with feedback `u = ū(t) + Kω`.
//!
//! Quaternions are scalar-first, `q = (q₀, q_v)`, with body-frame kinematics
//! `q̇ = Ω(ω)q`, `Ω(ω) = ½[[0, −ωᵀ], [ω, −S(ω)]]`, where `S(ω)` is the
//! cross-product matrix (`S(a)b = a × b`).

use super::System;
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};

/// Diagonal of the inertia matrix of the benchmark spacecraft.
pub const SPACECRAFT_INERTIA: [f64; 3] = [5.0, 2.0, 1.0];

/// `S(a)` with `S(a)b = a × b`.
pub fn cross_matrix(a: &Vector) -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0])
}

/// `Ω(ω)` for scalar-first quaternions.
pub fn omega_matrix(w: &Vector) -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    for i in 0..3 {
        m[(0, i + 1)] = -0.5 * w[i];
        m[(i + 1, 0)] = 0.5 * w[i];
    }
    let s = cross_matrix(w);
    for i in 0..3 {
        for j in 0..3 {
            m[(i + 1, j + 1)] = -0.5 * s[(i, j)];
        }
    }
    m
}

/// Feedforward control: node values `ū_0 … ū_{K−1}` spaced by `Δt` from
/// `t0`, linearly interpolated between nodes and held after the last one.
/// Defined on `[t0, t0 + KΔt]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal {
    t0: f64,
    dt: f64,
    values: Vec<Vector>,
}

impl ControlSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<Vector>) -> Result<Self> {
        if values.is_empty() || !(dt > 0.0) {
            return Err(Error::Config("control signal needs nodes and a positive step".into()));
        }
        let m = values[0].len();
        if values.iter().any(|v| v.len() != m) {
            return Err(Error::Config("control nodes have mixed dimensions".into()));
        }
        Ok(ControlSignal { t0, dt, values })
    }

    /// `K` zero nodes of dimension `m`.
    pub fn zeros(m: usize, nodes: usize, dt: f64) -> Self {
        ControlSignal {
            t0: 0.0,
            dt,
            values: vec![Vector::zeros(m); nodes.max(1)],
        }
    }

    /// Node values flattened node-major.
    pub fn from_flat(t0: f64, dt: f64, m: usize, flat: &[f64]) -> Result<Self> {
        if m == 0 || flat.len() % m != 0 {
            return Err(Error::Config("flat control length is not a multiple of m".into()));
        }
        ControlSignal::new(t0, dt, flat.chunks(m).map(Vector::from_column_slice).collect())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn nodes(&self) -> &[Vector] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.dt * self.values.len() as f64
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Value at `t`, clamped to the nearest end outside the domain.
    pub fn value(&self, t: f64) -> Vector {
        let s = ((t - self.t0) / self.dt).max(0.0);
        let k = s.floor() as usize;
        if k + 1 >= self.values.len() {
            return self.values[self.values.len() - 1].clone();
        }
        let a = s - k as f64;
        &self.values[k] * (1.0 - a) + &self.values[k + 1] * a
    }
}

fn check_gains(inertia: &[f64; 3], gain: &Matrix) -> Result<()> {
    if inertia.iter().any(|j| !(*j > 0.0)) {
        return Err(Error::Config("inertia must be positive".into()));
    }
    if gain.shape() != (3, 3) {
        return Err(Error::Config("feedback gain must be 3x3".into()));
    }
    Ok(())
}

fn omega_rhs(inertia: &[f64; 3], gain: &Matrix, u: &Vector, w: &Vector) -> Vector {
    let jw = Vector::from_fn(3, |i, _| inertia[i] * w[i]);
    let torque = u + gain * w - w.cross(&jw);
    Vector::from_fn(3, |i, _| torque[i] / inertia[i])
}

fn omega_jacobian(inertia: &[f64; 3], gain: &Matrix, w: &Vector) -> Matrix {
    let jmat = Matrix::from_diagonal(&Vector::from_column_slice(inertia));
    let jw = &jmat * w;
    // ∂(ω × Jω)/∂ω = S(ω)J − S(Jω)
    let gyro = cross_matrix(w) * &jmat - cross_matrix(&jw);
    let mut d = gain - gyro;
    for i in 0..3 {
        d.row_mut(i).scale_mut(1.0 / inertia[i]);
    }
    d
}

fn inverse_inertia(inertia: &[f64; 3]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_fn(3, |i, _| 1.0 / inertia[i]))
}

/// Closed-loop angular-velocity dynamics
/// `ω̇ = J⁻¹(ū(t) + Kω − S(ω)Jω) + J⁻¹w`.
#[derive(Clone, Debug)]
pub struct SpacecraftOmega {
    inertia: [f64; 3],
    gain: Matrix,
    control: ControlSignal,
}

impl SpacecraftOmega {
    pub fn new(inertia: [f64; 3], gain: Matrix, control: ControlSignal) -> Result<Self> {
        check_gains(&inertia, &gain)?;
        if control.dim() != 3 {
            return Err(Error::Config("spacecraft control must be 3-D".into()));
        }
        Ok(SpacecraftOmega { inertia, gain, control })
    }

    /// Benchmark spacecraft: `J = diag(5,2,1)`, `K = −J`.
    pub fn benchmark(control: ControlSignal) -> Self {
        let gain = -Matrix::from_diagonal(&Vector::from_column_slice(&SPACECRAFT_INERTIA));
        SpacecraftOmega::new(SPACECRAFT_INERTIA, gain, control).expect("benchmark parameters are valid")
    }

    pub fn control(&self) -> &ControlSignal {
        &self.control
    }

    pub fn gain(&self) -> &Matrix {
        &self.gain
    }

    pub fn inertia(&self) -> [f64; 3] {
        self.inertia
    }
}

impl System for SpacecraftOmega {
    fn state_dim(&self) -> usize {
        3
    }
    fn disturbance_dim(&self) -> usize {
        3
    }
    fn drift(&self, t: f64, x: &Vector) -> Vector {
        omega_rhs(&self.inertia, &self.gain, &self.control.value(t), x)
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        inverse_inertia(&self.inertia)
    }
    fn drift_jacobian(&self, _t: f64, x: &Vector) -> Matrix {
        omega_jacobian(&self.inertia, &self.gain, x)
    }
    fn label(&self) -> String {
        "spacecraft-omega".into()
    }
    fn time_domain(&self) -> Option<(f64, f64)> {
        Some((self.control.start(), self.control.end()))
    }
}

/// Full attitude state `(q, ω) ∈ R⁷` under the same feedback law.
#[derive(Clone, Debug)]
pub struct SpacecraftFull {
    inertia: [f64; 3],
    gain: Matrix,
    control: ControlSignal,
}

impl SpacecraftFull {
    pub fn new(inertia: [f64; 3], gain: Matrix, control: ControlSignal) -> Result<Self> {
        check_gains(&inertia, &gain)?;
        if control.dim() != 3 {
            return Err(Error::Config("spacecraft control must be 3-D".into()));
        }
        Ok(SpacecraftFull { inertia, gain, control })
    }

    pub fn benchmark(control: ControlSignal) -> Self {
        let gain = -Matrix::from_diagonal(&Vector::from_column_slice(&SPACECRAFT_INERTIA));
        SpacecraftFull::new(SPACECRAFT_INERTIA, gain, control).expect("benchmark parameters are valid")
    }

    pub fn control(&self) -> &ControlSignal {
        &self.control
    }

    pub fn gain(&self) -> &Matrix {
        &self.gain
    }

    pub fn inertia(&self) -> [f64; 3] {
        self.inertia
    }
}

impl System for SpacecraftFull {
    fn state_dim(&self) -> usize {
        7
    }
    fn disturbance_dim(&self) -> usize {
        3
    }
    fn drift(&self, t: f64, x: &Vector) -> Vector {
        let q = x.rows(0, 4).into_owned();
        let w = x.rows(4, 3).into_owned();
        let mut out = Vector::zeros(7);
        out.rows_mut(0, 4).copy_from(&(omega_matrix(&w) * q));
        out.rows_mut(4, 3)
            .copy_from(&omega_rhs(&self.inertia, &self.gain, &self.control.value(t), &w));
        out
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        let mut g = Matrix::zeros(7, 3);
        g.view_mut((4, 0), (3, 3)).copy_from(&inverse_inertia(&self.inertia));
        g
    }
    fn drift_jacobian(&self, _t: f64, x: &Vector) -> Matrix {
        let q = x.rows(0, 4).into_owned();
        let qv = x.rows(1, 3).into_owned();
        let w = x.rows(4, 3).into_owned();
        let mut jac = Matrix::zeros(7, 7);
        jac.view_mut((0, 0), (4, 4)).copy_from(&omega_matrix(&w));
        // ∂(Ω(ω)q)/∂ω = ½[−q_vᵀ; q₀I + S(q_v)]
        for i in 0..3 {
            jac[(0, 4 + i)] = -0.5 * qv[i];
        }
        let lower = (Matrix::identity(3, 3) * q[0] + cross_matrix(&qv)) * 0.5;
        jac.view_mut((1, 4), (3, 3)).copy_from(&lower);
        jac.view_mut((4, 4), (3, 3))
            .copy_from(&omega_jacobian(&self.inertia, &self.gain, &w));
        jac
    }
    fn label(&self) -> String {
        "spacecraft-full".into()
    }
    fn time_domain(&self) -> Option<(f64, f64)> {
        Some((self.control.start(), self.control.end()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn omega_equilibrium_and_axis_rate() {
        let sys = SpacecraftOmega::benchmark(ControlSignal::zeros(3, 10, 1.0));
        assert_eq!(sys.drift(0.0, &Vector::zeros(3)), Vector::zeros(3));
        let f = sys.drift(0.0, &dvector![0.1, 0.0, 0.0]);
        assert!((f - dvector![-0.1, 0.0, 0.0]).norm() < 1e-16);
    }

    #[test]
    fn omega_matrix_is_skew() {
        let m = omega_matrix(&dvector![0.3, -0.2, 0.1]);
        assert!((&m + m.transpose()).norm() < 1e-16);
    }

    #[test]
    fn control_interpolation() {
        let u = ControlSignal::new(0.0, 1.0, vec![dvector![0.0], dvector![1.0], dvector![3.0]]).unwrap();
        assert_eq!(u.value(0.5), dvector![0.5]);
        assert_eq!(u.value(1.5), dvector![2.0]);
        assert_eq!(u.value(2.7), dvector![3.0]);
        assert_eq!(u.end(), 3.0);
        assert_eq!(ControlSignal::from_flat(0.0, 1.0, 1, &u.flat()).unwrap(), u);
    }
}
