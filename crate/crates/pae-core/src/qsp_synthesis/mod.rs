//! Phase-shifter synthesis: Jacobi-Anger target, completion to an achievable
//! pair, QSP angle solving and the resulting branch unitary.

pub mod bessel;
mod complete;
pub mod grid;
mod shifter;
mod solve;

pub use complete::{
    complete_target, delta_bound, eval_h, truncate_target, CompletedTarget, CompletionMethod,
    TruncatedTarget, DELTA_FLOOR, FEASIBILITY_TOL,
};
pub use shifter::{
    build_branch_unitary, format_angles, ideal_branch_unitary, kron2, l_star, min_l_for_delta,
    parse_angles, select_l, select_l_empirical, sequential_error_budget, shifter_state_error,
    synthesis_degree, PhaseShifterSpec, EMPIRICAL_DELTA,
};
pub use solve::{
    complement_error, gammas, layer, layer_peel, optimize, realized, realized_abcd, solve_angles,
    verify_angles, AngleSequence, Convention, OptimizeStart, SolveMethod,
};
