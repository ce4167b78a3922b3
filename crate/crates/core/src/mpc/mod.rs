//! Robust MPC of the spacecraft attitude with reachability-tightened
//! constraints.
//!
//! The optimal control problem parameterizes only the feedforward `ū` at the
//! nodes `t_k = kΔt`. Its cost is the nominal quadratic tracking cost of the
//! full attitude state. For every direction `d^i` the extremal trajectory
//! `ω^i(ū, t)` of the closed-loop angular-velocity subsystem is integrated,
//! and at every node
//!
//! ```text
//! −ω_max + ε_k ≤ ω^i(ū, t_k)_j           ≤ ω_max − ε_k   (k = 1..K)
//! −u_max + ε_k ≤ (ū(t_k) + Kω^i(ū,t_k))_j ≤ u_max − ε_k   (k = 0..K)
//! ```
//!
//! is enforced, with `ε_k` the quadratic error bound of the direction set.
//! The problem is solved by sequential convex programming and applied in a
//! receding horizon.

mod closed_loop;
mod ocp;
pub mod qp;
mod scp;

pub use closed_loop::{mpc_closed_loop, sample_initial_state, ClosedLoopConfig, ClosedLoopTrace, SolveRecord};
pub use ocp::{
    compute_tightening, tightened_constraints, ConstraintKind, ConstraintRow, OcpSpec, Tightening,
    TightenedConstraints,
};
pub use scp::{scp_solve, ScpConfig, ScpIterate, ScpResult, ScpStatus};
