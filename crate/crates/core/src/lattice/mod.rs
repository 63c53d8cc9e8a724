//! Difference weights, the sums `S` and `S~`, and planar geometry of numbers.

pub mod geometry;
pub mod ssum;
pub mod weights;

pub use geometry::{
    body_area, count_vs_minima_check, gauge, gauss_reduce, lattice_point_count, minkowski_check,
    successive_minima, BodyArea, LatticeBody, MinimaResult, QuadraticForm,
};
pub use ssum::{count_s, count_s_with, s_tilde, s_tilde_weighted, Boundary, SumChoice, SumMethod};
pub use weights::{
    dyadic_blocks, l1_norm, l2_norm_sq, load_weights, parse_weights, DifferenceWeights,
    DyadicBlock, DyadicSplit, WeightedPoint,
};
