//! Numerical checks of the recursive inequalities, the lattice-count
//! sums, and the experiment batteries built on them.

pub mod config;
pub mod experiment;
pub mod props;
pub mod rt;

pub use config::{Battery, ExperimentConfig};
pub use experiment::{run_experiment, ExperimentSummary, SUMMARY_FILE};
pub use props::{
    verify_decreasing, verify_dyadic_partition, verify_increasing, verify_l2_monotonicity,
    verify_linear, verify_main_bound, verify_multiplicative, DEFAULT_EPS, MULTIPLICATIVE_MAX_N,
};
pub use rt::{rt_sums, RtSums};
