//! Robust MPC of the spacecraft attitude with tightened constraints.
//!
//! Run with `cargo run --release --example spacecraft_mpc [-- <seeds>]`.

use chreach::geometry::{sample_sphere, SphereScheme};
use chreach::mpc::{compute_tightening, mpc_closed_loop, sample_initial_state, ClosedLoopConfig, OcpSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let mut spec = OcpSpec::benchmark(sample_sphere(3, 50, SphereScheme::Fibonacci)?);
    let start = std::time::Instant::now();
    let tight = compute_tightening(&spec, 10, 200, 20_000, 0)?;
    println!(
        "delta = {:.4}, eps_K = {:.3e}, L variation = {:.1}% ({:.1}s)",
        tight.delta,
        tight.eps.last().unwrap(),
        100.0 * tight.lbar_variation,
        start.elapsed().as_secs_f64()
    );
    spec.tightening = tight.eps;
    for seed in 0..seeds {
        let mut rng = chreach::rng::seeded(1000 + seed);
        let x0 = sample_initial_state(&mut rng);
        let start = std::time::Instant::now();
        let trace = mpc_closed_loop(&spec, &x0, &ClosedLoopConfig::benchmark(seed))?;
        let xf = trace.final_state();
        let quat_err = ((xf[0] - 1.0).powi(2) + xf.rows(1, 3).norm_squared()).sqrt();
        println!(
            "seed {seed}: violations {}, peak |w| {:.4}, peak |u| {:.4}, final |q - q_r| {:.2e}, final |w| {:.2e}, cold iters {}, {:.1}s",
            trace.violations,
            trace.peak_omega,
            trace.peak_control,
            quat_err,
            xf.rows(4, 3).amax(),
            trace.solves[0].trace.len(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
