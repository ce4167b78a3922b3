//! Convex QPs `min ½xᵀPx + qᵀx  s.t.  l ≤ Ax ≤ u` by operator splitting.
//!
//! The iteration is the ADMM scheme with relaxation `α`, proximal term `σ`
//! and per-row penalties `ρ_i` (×10³ on equality rows). Each step solves
//! `(P + σI + AᵀRA)x̃ = σx − q + Aᵀ(Rz − y)` with a cached Cholesky factor.
//! `ρ` is rescaled from the ratio of normalized residuals, primal and dual
//! infeasibility are detected from the iterate differences, and a solved
//! problem is polished by an equality-constrained solve on the guessed
//! active set.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct QpProblem {
    pub p: Matrix,
    pub q: Vector,
    pub a: Matrix,
    pub l: Vector,
    pub u: Vector,
}

impl QpProblem {
    pub fn new(p: Matrix, q: Vector, a: Matrix, l: Vector, u: Vector) -> Result<Self> {
        let n = q.len();
        let m = a.nrows();
        if p.shape() != (n, n) || (m > 0 && a.ncols() != n) || l.len() != m || u.len() != m {
            return Err(Error::Qp("inconsistent problem dimensions".into()));
        }
        if l.iter().zip(u.iter()).any(|(lo, hi)| lo > hi || lo.is_nan() || hi.is_nan()) {
            return Err(Error::Qp("bounds must satisfy l <= u".into()));
        }
        Ok(QpProblem { p, q, a, l, u })
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q.len(), self.a.nrows())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSettings {
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub eps_infeasible: f64,
    pub max_iter: usize,
    pub adapt_interval: usize,
    pub polish: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            eps_infeasible: 1e-7,
            max_iter: 10_000,
            adapt_interval: 25,
            polish: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpStatus {
    Solved,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub x: Vector,
    /// Multipliers: positive on active upper bounds, negative on lower.
    pub y: Vector,
    pub status: QpStatus,
    pub iterations: usize,
    pub polished: bool,
}

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const EQUALITY_SCALE: f64 = 1e3;

fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn row_rhos(problem: &QpProblem, rho: f64) -> Vector {
    Vector::from_fn(problem.l.len(), |i, _| {
        let (lo, hi) = (problem.l[i], problem.u[i]);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            RHO_MIN
        } else if (hi - lo).abs() < 1e-12 {
            EQUALITY_SCALE * rho
        } else {
            rho
        }
    })
}

fn factor(problem: &QpProblem, sigma: f64, rhos: &Vector) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let n = problem.q.len();
    let mut k = &problem.p + Matrix::identity(n, n) * sigma;
    if problem.a.nrows() > 0 {
        let mut ra = problem.a.clone();
        for (i, r) in rhos.iter().enumerate() {
            ra.row_mut(i).scale_mut(*r);
        }
        k += problem.a.transpose() * ra;
    }
    k.cholesky()
        .ok_or_else(|| Error::Qp("KKT matrix is not positive definite (is P positive semidefinite?)".into()))
}

/// Largest violation of primal feasibility, stationarity and complementary
/// slackness at `(x, y)`.
pub fn kkt_residual(problem: &QpProblem, x: &Vector, y: &Vector) -> f64 {
    let ax = &problem.a * x;
    let mut worst = inf_norm(&(&problem.p * x + &problem.q + problem.a.transpose() * y));
    for i in 0..ax.len() {
        let (lo, hi) = (problem.l[i], problem.u[i]);
        worst = worst.max(lo - ax[i]).max(ax[i] - hi);
        if y[i] > 0.0 {
            worst = worst.max(if hi.is_finite() { y[i] * (hi - ax[i]).abs() } else { y[i] });
        } else if y[i] < 0.0 {
            worst = worst.max(if lo.is_finite() { -y[i] * (ax[i] - lo).abs() } else { -y[i] });
        }
    }
    worst
}

pub fn solve_qp(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    let (n, m) = problem.dims();
    let mut rho = settings.rho;
    let mut rhos = row_rhos(problem, rho);
    let mut chol = factor(problem, settings.sigma, &rhos)?;
    let mut x = Vector::zeros(n);
    let mut z = Vector::zeros(m);
    let mut y = Vector::zeros(m);
    let at = problem.a.transpose();
    let mut status = QpStatus::MaxIterations;
    let mut iterations = settings.max_iter;

    for it in 1..=settings.max_iter {
        let x_prev = x.clone();
        let y_prev = y.clone();
        let rhs = &x * settings.sigma - &problem.q + &at * (rhos.component_mul(&z) - &y);
        let xt = chol.solve(&rhs);
        let zt = &problem.a * &xt;
        x = &xt * settings.alpha + &x * (1.0 - settings.alpha);
        let zr = &zt * settings.alpha + &z * (1.0 - settings.alpha);
        let z_new = Vector::from_fn(m, |i, _| (zr[i] + y[i] / rhos[i]).clamp(problem.l[i], problem.u[i]));
        y += rhos.component_mul(&(&zr - &z_new));
        z = z_new;

        let ax = &problem.a * &x;
        let px = &problem.p * &x;
        let aty = &at * &y;
        let r_prim = inf_norm(&(&ax - &z));
        let r_dual = inf_norm(&(&px + &problem.q + &aty));
        let prim_scale = inf_norm(&ax).max(inf_norm(&z));
        let dual_scale = inf_norm(&px).max(inf_norm(&aty)).max(inf_norm(&problem.q));
        if r_prim <= settings.eps_abs + settings.eps_rel * prim_scale
            && r_dual <= settings.eps_abs + settings.eps_rel * dual_scale
        {
            status = QpStatus::Solved;
            iterations = it;
            break;
        }

        let dy = &y - &y_prev;
        let dy_norm = inf_norm(&dy);
        if dy_norm > 0.0 && primal_infeasible(problem, &dy, dy_norm, settings.eps_infeasible) {
            status = QpStatus::PrimalInfeasible;
            iterations = it;
            break;
        }
        let dx = &x - &x_prev;
        let dx_norm = inf_norm(&dx);
        if dx_norm > 0.0 && dual_infeasible(problem, &dx, dx_norm, settings.eps_infeasible) {
            status = QpStatus::DualInfeasible;
            iterations = it;
            break;
        }

        if settings.adapt_interval > 0 && it % settings.adapt_interval == 0 && m > 0 {
            let num = r_prim / prim_scale.max(1e-12);
            let den = r_dual / dual_scale.max(1e-12);
            let new_rho = (rho * (num / den.max(1e-300)).sqrt()).clamp(RHO_MIN, RHO_MAX);
            if new_rho > 5.0 * rho || new_rho < 0.2 * rho {
                rho = new_rho;
                rhos = row_rhos(problem, rho);
                chol = factor(problem, settings.sigma, &rhos)?;
            }
        }
    }

    let mut solution = QpSolution {
        x,
        y,
        status,
        iterations,
        polished: false,
    };
    if settings.polish && status == QpStatus::Solved {
        if let Some((xp, yp)) = polish(problem, &solution.x, &solution.y, &z) {
            if kkt_residual(problem, &xp, &yp) <= kkt_residual(problem, &solution.x, &solution.y) {
                solution.x = xp;
                solution.y = yp;
                solution.polished = true;
            }
        }
    }
    Ok(solution)
}

fn primal_infeasible(problem: &QpProblem, dy: &Vector, dy_norm: f64, eps: f64) -> bool {
    if inf_norm(&(problem.a.transpose() * dy)) > eps * dy_norm {
        return false;
    }
    let mut support = 0.0;
    for i in 0..dy.len() {
        let d = dy[i] / dy_norm;
        if d > eps {
            if !problem.u[i].is_finite() {
                return false;
            }
            support += problem.u[i] * d;
        } else if d < -eps {
            if !problem.l[i].is_finite() {
                return false;
            }
            support += problem.l[i] * d;
        }
    }
    support < -eps
}

fn dual_infeasible(problem: &QpProblem, dx: &Vector, dx_norm: f64, eps: f64) -> bool {
    let d = dx / dx_norm;
    if inf_norm(&(&problem.p * &d)) > eps || problem.q.dot(&d) >= -eps {
        return false;
    }
    let ad = &problem.a * &d;
    (0..ad.len()).all(|i| {
        let lo_ok = !problem.l[i].is_finite() || ad[i] >= -eps;
        let hi_ok = !problem.u[i].is_finite() || ad[i] <= eps;
        lo_ok && hi_ok
    })
}

/// Equality-constrained re-solve on the active set guessed from `(y, z)`.
fn polish(problem: &QpProblem, x: &Vector, y: &Vector, z: &Vector) -> Option<(Vector, Vector)> {
    let (n, m) = problem.dims();
    let scale = 1.0 + inf_norm(x);
    let mut active: Vec<(usize, f64)> = Vec::new();
    for i in 0..m {
        let (lo, hi) = (problem.l[i], problem.u[i]);
        let tol = 1e-7 * (1.0 + z[i].abs());
        if (hi - lo).abs() < 1e-12 {
            active.push((i, hi));
        } else if lo.is_finite() && y[i] < 0.0 && (y[i] < -1e-9 || (z[i] - lo).abs() <= tol) {
            active.push((i, lo));
        } else if hi.is_finite() && y[i] > 0.0 && (y[i] > 1e-9 || (z[i] - hi).abs() <= tol) {
            active.push((i, hi));
        }
    }
    let k = active.len();
    if k > n {
        return None;
    }
    let dim = n + k;
    let mut kkt = Matrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (n, n)).copy_from(&problem.p);
    let mut rhs = Vector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&(-&problem.q));
    for (r, (i, b)) in active.iter().enumerate() {
        for c in 0..n {
            kkt[(n + r, c)] = problem.a[(*i, c)];
            kkt[(c, n + r)] = problem.a[(*i, c)];
        }
        rhs[n + r] = *b;
    }
    let lu = kkt.clone().lu();
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..3 {
        let res = &rhs - &kkt * &sol;
        sol += lu.solve(&res)?;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let xp = sol.rows(0, n).into_owned();
    let mut yp = Vector::zeros(m);
    for (r, (i, _)) in active.iter().enumerate() {
        yp[*i] = sol[n + r];
    }
    let ax = &problem.a * &xp;
    let feas_tol = 1e-9 * scale;
    for i in 0..m {
        if ax[i] < problem.l[i] - feas_tol || ax[i] > problem.u[i] + feas_tol {
            return None;
        }
    }
    for (i, b) in &active {
        let (lo, hi) = (problem.l[*i], problem.u[*i]);
        if (hi - lo).abs() >= 1e-12 && (*b == hi && yp[*i] < -1e-12 || *b == lo && yp[*i] > 1e-12) {
            return None;
        }
    }
    Some((xp, yp))
}
