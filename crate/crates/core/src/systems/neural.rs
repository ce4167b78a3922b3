//! Softplus multilayer perceptrons and the neural feedback loop
//! `ẋ = Ax + Bπ(x) + w`.
//!
//! # Parameter file
//!
//! Policies are stored as UTF-8 text with LF line endings:
//!
//! ```text
//! chreach-mlp v1
//! beta <β>
//! layers <L>
//! sizes <s0> <s1> ... <sL>
//! W <rows> <cols>          (then <rows> lines of <cols> numbers)
//! b <rows>                 (then one line of <rows> numbers)
//! ...                      (one W/b pair per layer)
//! ```
//!
//! Numbers are written with `{:.17e}` so a round trip is exact. Hidden
//! layers apply softplus, the last layer is affine.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::System;
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};

const HEADER: &str = "chreach-mlp v1";
const SHIPPED_POLICY: &str = include_str!("../../data/nn_policy.txt");

/// Seed of the hidden layers of the shipped policy.
pub const POLICY_SEED: u64 = 7;

/// `log(1 + e^{βz})/β`, evaluated without overflow.
pub fn softplus(z: f64, beta: f64) -> f64 {
    let y = beta * z;
    (y.max(0.0) + (-y.abs()).exp().ln_1p()) / beta
}

/// `d/dz softplus = 1/(1 + e^{−βz})`.
pub fn softplus_derivative(z: f64, beta: f64) -> f64 {
    let y = beta * z;
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpPolicy {
    weights: Vec<Matrix>,
    biases: Vec<Vector>,
    beta: f64,
}

impl MlpPolicy {
    pub fn new(weights: Vec<Matrix>, biases: Vec<Vector>, beta: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Config("policy needs one bias per weight matrix".into()));
        }
        if !(beta > 0.0) {
            return Err(Error::Config("softplus sharpness must be positive".into()));
        }
        for (i, (w, b)) in weights.iter().zip(biases.iter()).enumerate() {
            if w.nrows() != b.len() {
                return Err(Error::Config(format!("layer {i}: bias length {} != rows {}", b.len(), w.nrows())));
            }
            if i > 0 && weights[i - 1].nrows() != w.ncols() {
                return Err(Error::Config(format!("layer {i}: input width does not chain")));
            }
        }
        Ok(MlpPolicy { weights, biases, beta })
    }

    /// Policy whose every weight and bias is zero.
    pub fn zeros(sizes: &[usize], beta: f64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("policy needs at least input and output sizes".into()));
        }
        let weights = sizes.windows(2).map(|s| Matrix::zeros(s[1], s[0])).collect();
        let biases = sizes[1..].iter().map(|&s| Vector::zeros(s)).collect();
        MlpPolicy::new(weights, biases, beta)
    }

    /// Random hidden layers with a least-squares output layer: hidden weights
    /// are `N(0, 1/fan_in)` and biases `N(0, 1)` drawn from `seed`; the output
    /// layer minimizes `Σ ‖π(x) − target(x)‖² + ridge·‖W‖²` over `samples`.
    pub fn fit_output_layer<F>(
        sizes: &[usize],
        beta: f64,
        seed: u64,
        samples: &[Vector],
        ridge: f64,
        target: F,
    ) -> Result<Self>
    where
        F: Fn(&Vector) -> Vector,
    {
        if sizes.len() < 3 {
            return Err(Error::Config("fit needs at least one hidden layer".into()));
        }
        if samples.is_empty() {
            return Err(Error::Config("fit needs samples".into()));
        }
        let mut rng = crate::rng::seeded(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for s in sizes.windows(2).take(sizes.len() - 2) {
            let scale = 1.0 / (s[0] as f64).sqrt();
            weights.push(Matrix::from_fn(s[1], s[0], |_, _| scale * rng.sample::<f64, _>(StandardNormal)));
            biases.push(Vector::from_fn(s[1], |_, _| rng.sample::<f64, _>(StandardNormal)));
        }
        let hidden = sizes[sizes.len() - 2];
        let out = sizes[sizes.len() - 1];
        let mut features = DMatrix::from_element(samples.len(), hidden + 1, 1.0);
        for (r, x) in samples.iter().enumerate() {
            let mut a = x.clone();
            for (w, b) in weights.iter().zip(biases.iter()) {
                a = (w * &a + b).map(|z| softplus(z, beta));
            }
            features.row_mut(r).columns_mut(0, hidden).copy_from(&a.transpose());
        }
        let targets = DMatrix::from_fn(samples.len(), out, |r, c| target(&samples[r])[c]);
        let gram = features.transpose() * &features + Matrix::identity(hidden + 1, hidden + 1) * ridge;
        let rhs = features.transpose() * targets;
        let sol = gram
            .cholesky()
            .ok_or_else(|| Error::Config("output-layer normal equations are singular".into()))?
            .solve(&rhs);
        weights.push(sol.rows(0, hidden).transpose());
        biases.push(sol.row(hidden).transpose());
        MlpPolicy::new(weights, biases, beta)
    }

    /// Construction of the shipped policy: `2 → 16 → 16 → 1`, `β = 1`, hidden
    /// layers from [`POLICY_SEED`], output layer fitted on a 41×41 grid of
    /// `[−1.5, 3.5] × [−2.5, 1.5]` to the damping feedback `−(x₁ + 1.5x₂)`.
    pub fn benchmark_fit() -> Result<Self> {
        let samples: Vec<Vector> = (0..41 * 41)
            .map(|i| {
                let (a, b) = ((i / 41) as f64 / 40.0, (i % 41) as f64 / 40.0);
                Vector::from_vec(vec![-1.5 + 5.0 * a, -2.5 + 4.0 * b])
            })
            .collect();
        MlpPolicy::fit_output_layer(&[2, 16, 16, 1], 1.0, POLICY_SEED, &samples, 1e-6, |x| {
            Vector::from_element(1, -(x[0] + 1.5 * x[1]))
        })
    }

    /// The policy shipped in `data/nn_policy.txt`.
    pub fn shipped() -> Self {
        MlpPolicy::from_text(SHIPPED_POLICY).expect("shipped policy file parses")
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].nrows()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.weights.iter().map(|w| w.nrows()));
        s
    }

    pub fn evaluate(&self, x: &Vector) -> Vector {
        let last = self.weights.len() - 1;
        let mut a = x.clone();
        for (i, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let z = w * &a + b;
            a = if i == last { z } else { z.map(|v| softplus(v, self.beta)) };
        }
        a
    }

    /// `∇π(x)`, `output_dim × input_dim`, by the chain rule.
    pub fn jacobian(&self, x: &Vector) -> Matrix {
        let last = self.weights.len() - 1;
        let mut a = x.clone();
        let mut jac = Matrix::identity(x.len(), x.len());
        for (i, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let z = w * &a + b;
            jac = w * jac;
            if i == last {
                break;
            }
            for (r, zr) in z.iter().enumerate() {
                let s = softplus_derivative(*zr, self.beta);
                jac.row_mut(r).scale_mut(s);
            }
            a = z.map(|v| softplus(v, self.beta));
        }
        jac
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes = self.layer_sizes();
        writeln!(s, "{HEADER}").unwrap();
        writeln!(s, "beta {:.17e}", self.beta).unwrap();
        writeln!(s, "layers {}", self.weights.len()).unwrap();
        let sizes: Vec<String> = sizes.iter().map(|v| v.to_string()).collect();
        writeln!(s, "sizes {}", sizes.join(" ")).unwrap();
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            writeln!(s, "W {} {}", w.nrows(), w.ncols()).unwrap();
            for r in 0..w.nrows() {
                let row: Vec<String> = (0..w.ncols()).map(|c| format!("{:.17e}", w[(r, c)])).collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
            writeln!(s, "b {}", b.len()).unwrap();
            let row: Vec<String> = b.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("policy file: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = || lines.next().ok_or_else(|| bad("unexpected end of file"));
        if next()? != HEADER {
            return Err(bad("missing header"));
        }
        let field = |line: &str, key: &str| -> Result<Vec<String>> {
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(bad(&format!("expected `{key}`")));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`"))) };
        let int = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|_| bad(&format!("bad integer `{s}`"))) };
        let beta = num(field(next()?, "beta")?.first().ok_or_else(|| bad("beta value"))?)?;
        let layers = int(field(next()?, "layers")?.first().ok_or_else(|| bad("layer count"))?)?;
        let sizes = field(next()?, "sizes")?
            .iter()
            .map(|s| int(s))
            .collect::<Result<Vec<_>>>()?;
        if sizes.len() != layers + 1 {
            return Err(bad("sizes do not match layer count"));
        }
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let dims = field(next()?, "W")?;
            if dims.len() != 2 {
                return Err(bad("W needs rows and cols"));
            }
            let (r, c) = (int(&dims[0])?, int(&dims[1])?);
            if r != sizes[l + 1] || c != sizes[l] {
                return Err(bad(&format!("layer {l} shape disagrees with sizes")));
            }
            let mut w = Matrix::zeros(r, c);
            for i in 0..r {
                let row = next()?.split_whitespace().map(num).collect::<Result<Vec<_>>>()?;
                if row.len() != c {
                    return Err(bad(&format!("layer {l} row {i} has {} entries", row.len())));
                }
                for (j, v) in row.into_iter().enumerate() {
                    w[(i, j)] = v;
                }
            }
            let dims = field(next()?, "b")?;
            if dims.len() != 1 || int(&dims[0])? != r {
                return Err(bad(&format!("layer {l} bias length")));
            }
            let row = next()?.split_whitespace().map(num).collect::<Result<Vec<_>>>()?;
            if row.len() != r {
                return Err(bad(&format!("layer {l} bias has {} entries", row.len())));
            }
            weights.push(w);
            biases.push(Vector::from_vec(row));
        }
        MlpPolicy::new(weights, biases, beta)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MlpPolicy::from_text(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// `ẋ = Ax + Bπ(x) + w` on `R²`.
#[derive(Clone, Debug)]
pub struct NeuralLoop {
    a: Matrix,
    b: Matrix,
    policy: MlpPolicy,
}

impl NeuralLoop {
    pub fn new(a: Matrix, b: Matrix, policy: MlpPolicy) -> Result<Self> {
        if a.shape() != (2, 2) {
            return Err(Error::Config("neural loop A must be 2x2".into()));
        }
        if b.nrows() != 2 || b.ncols() != policy.output_dim() || policy.input_dim() != 2 {
            return Err(Error::Config(format!(
                "neural loop B is {}x{} but the policy maps R^{} to R^{}",
                b.nrows(),
                b.ncols(),
                policy.input_dim(),
                policy.output_dim()
            )));
        }
        Ok(NeuralLoop { a, b, policy })
    }

    /// Double integrator `A = [[0,1],[0,0]]`, `B = [0,1]ᵀ`.
    pub fn double_integrator(policy: MlpPolicy) -> Result<Self> {
        NeuralLoop::new(
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
            policy,
        )
    }

    /// Double integrator closed by the shipped policy.
    pub fn shipped() -> Self {
        NeuralLoop::double_integrator(MlpPolicy::shipped()).expect("shipped policy is 2 -> 1")
    }

    pub fn policy(&self) -> &MlpPolicy {
        &self.policy
    }
}

impl System for NeuralLoop {
    fn state_dim(&self) -> usize {
        2
    }
    fn disturbance_dim(&self) -> usize {
        2
    }
    fn drift(&self, _t: f64, x: &Vector) -> Vector {
        &self.a * x + &self.b * self.policy.evaluate(x)
    }
    fn input_matrix(&self, _t: f64, _x: &Vector) -> Matrix {
        Matrix::identity(2, 2)
    }
    fn drift_jacobian(&self, _t: f64, x: &Vector) -> Matrix {
        &self.a + &self.b * self.policy.jacobian(x)
    }
    fn label(&self) -> String {
        let sizes: Vec<String> = self.policy.layer_sizes().iter().map(|s| s.to_string()).collect();
        format!("neural-loop({})", sizes.join("-"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn softplus_values() {
        assert_eq!(softplus_derivative(0.0, 1.0), 0.5);
        assert!((softplus(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!(softplus(50.0, 1.0).is_finite() && softplus(-50.0, 1.0) > 0.0);
        assert!((softplus(50.0, 1.0) - 50.0).abs() < 1e-15);
    }

    #[test]
    fn zero_policy_leaves_linear_part() {
        let sys = NeuralLoop::double_integrator(MlpPolicy::zeros(&[2, 4, 1], 1.0).unwrap()).unwrap();
        let x = dvector![0.7, -0.3];
        assert_eq!(sys.drift(0.0, &x), dvector![-0.3, 0.0]);
        assert_eq!(sys.drift_jacobian(0.0, &x), Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let samples: Vec<Vector> = (0..50).map(|i| dvector![i as f64 * 0.1 - 2.0, (i % 7) as f64 * 0.3 - 1.0]).collect();
        let p = MlpPolicy::fit_output_layer(&[2, 8, 8, 1], 1.0, 3, &samples, 1e-8, |x| dvector![-x[0] - x[1]]).unwrap();
        let q = MlpPolicy::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(MlpPolicy::from_text("nope").is_err());
        let p = MlpPolicy::zeros(&[2, 3, 1], 1.0).unwrap().to_text();
        assert!(MlpPolicy::from_text(&p.replace("W 3 2", "W 2 2")).is_err());
    }

    #[test]
    fn shape_mismatch_is_config_error() {
        let p = MlpPolicy::zeros(&[3, 4, 1], 1.0).unwrap();
        assert!(matches!(NeuralLoop::double_integrator(p), Err(Error::Config(_))));
    }
}
