//! Transfer matrices of the three-term recurrence, scaled products
//! `S_n(z) = g_n ⋯ g_1`, the scaled solution `(f_{n+1}, f_n)` with
//! `f_0 = 0, f_1 = 1`, and Lyapunov exponent estimators.

mod lyapunov;
mod matrix;
mod probes;
mod recurrence;

pub use lyapunov::{
    lyapunov, lyapunov_pair, lyapunov_top, lyapunov_vector, lyapunov_via_recurrence, replica_growth,
    LyapunovEstimate, LyapunovMethod, ReplicaGrowth, MIN_LYAPUNOV_STEPS, ORTHONORMALIZE_PERIOD,
};
pub use matrix::{propagate, propagate_iter, transfer_matrix, Mat2, ScaledTransferState, TransferMatrix, Vec2};
pub use probes::{
    angular_decay_probe, angular_distance, large_deviation_probe, AngularDecayProbe, LargeDeviationProbe,
};
pub use recurrence::{solution_pair, solution_pair_iter, SolutionPair};
