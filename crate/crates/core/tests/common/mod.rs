#![allow(dead_code)]

use chreach::geometry::{lift_set, LambdaMode, Matrix, SmoothConvexSet, Vector};
use chreach::reach::{InitialSet, TimeGrid};
use rand::Rng;
use chreach::systems::{AttractionRepulsion, ControlSignal, Dubins, LinearSystem, NeuralLoop, SpacecraftOmega, System};

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn diag(xs: &[f64]) -> Matrix {
    Matrix::from_diagonal(&v(xs))
}

pub fn attraction_repulsion() -> AttractionRepulsion {
    AttractionRepulsion::new(v(&[1.0, 0.0]), v(&[-1.0, 0.0]), 0.2).unwrap()
}

/// Every benchmark system with its disturbance set and initial set.
pub fn benchmarks() -> Vec<(Box<dyn System>, SmoothConvexSet, InitialSet)> {
    vec![
        (
            Box::new(attraction_repulsion()),
            SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap(),
            InitialSet::Singleton(v(&[0.0, -1.5])),
        ),
        (
            Box::new(Dubins::new(0.5, 0.5, Matrix::identity(3, 3)).unwrap()),
            SmoothConvexSet::ball(Vector::zeros(3), 1e-2).unwrap(),
            InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(Vector::zeros(3), diag(&[1e-3, 1e-3, 1e-4])).unwrap()),
        ),
        (
            Box::new(NeuralLoop::shipped()),
            SmoothConvexSet::ball(Vector::zeros(2), 2f64.sqrt() / 20.0).unwrap(),
            InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(v(&[2.75, 0.0]), diag(&[0.125, 0.02])).unwrap()),
        ),
        (
            Box::new(SpacecraftOmega::benchmark(ControlSignal::zeros(3, 10, 1.0))),
            SmoothConvexSet::ball(Vector::zeros(3), 1e-2).unwrap(),
            InitialSet::Singleton(v(&[0.05, -0.02, 0.03])),
        ),
        (
            Box::new(LinearSystem::single_integrator(2)),
            SmoothConvexSet::ball(Vector::zeros(2), 1.0).unwrap(),
            InitialSet::Singleton(Vector::zeros(2)),
        ),
    ]
}

/// Grid over which every benchmark is defined.
pub fn benchmark_grid() -> TimeGrid {
    TimeGrid::new(0.0, 2.0, 200).unwrap()
}

/// One set of every supported shape in `R³`, plus a planar ball.
pub fn gauss_sets() -> Vec<(&'static str, SmoothConvexSet)> {
    let c = v(&[0.3, -0.2, 0.1]);
    let half = v(&[1.0, 0.5, 2.0]);
    let shape = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5]);
    let disk = SmoothConvexSet::ball(Vector::zeros(2), 1e-2).unwrap();
    vec![
        ("planar ball", SmoothConvexSet::ball(v(&[1.0, -2.0]), 0.4).unwrap()),
        ("ball", SmoothConvexSet::ball(c.clone(), 0.7).unwrap()),
        ("ellipsoid", SmoothConvexSet::ellipsoid(c.clone(), shape).unwrap()),
        (
            "lambda-ball under",
            SmoothConvexSet::lambda_ball(c.clone(), half.clone(), 8.0, LambdaMode::Under).unwrap(),
        ),
        ("lambda-ball over", SmoothConvexSet::lambda_ball(c, half, 8.0, LambdaMode::Over).unwrap()),
        ("lifted level set", SmoothConvexSet::lifted(disk.clone(), 3).unwrap()),
        ("lifted ellipsoid", lift_set(&disk, 3).unwrap()),
    ]
}

pub fn random_spd(n: usize, rng: &mut impl Rng) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.transpose() * &m + Matrix::identity(n, n) * 0.1
}

/// Exact minimizer of a box QP by enumerating every face: each coordinate is
/// free, at its lower bound or at its upper bound.
pub fn brute_force_box(p: &Matrix, q: &Vector, l: &Vector, u: &Vector) -> Vector {
    let n = q.len();
    let mut best: Option<(f64, Vector)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut x = Vector::zeros(n);
        let mut free = Vec::new();
        let mut c = code;
        for i in 0..n {
            match c % 3 {
                0 => free.push(i),
                1 => x[i] = l[i],
                _ => x[i] = u[i],
            }
            c /= 3;
        }
        if !free.is_empty() {
            let k = free.len();
            let pff = Matrix::from_fn(k, k, |a, b| p[(free[a], free[b])]);
            let rhs = Vector::from_fn(k, |a, _| -q[free[a]] - (0..n).filter(|j| !free.contains(j)).map(|j| p[(free[a], j)] * x[j]).sum::<f64>());
            let sol = pff.cholesky().unwrap().solve(&rhs);
            for (a, &i) in free.iter().enumerate() {
                x[i] = sol[a];
            }
        }
        if (0..n).any(|i| x[i] < l[i] - 1e-12 || x[i] > u[i] + 1e-12) {
            continue;
        }
        let f = 0.5 * x.dot(&(p * &x)) + q.dot(&x);
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, x));
        }
    }
    best.unwrap().1
}
