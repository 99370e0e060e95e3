//! # blackwell-kit
//!
//! A computable calculus of discrete memoryless channels: scalar parameters
//! (mutual information, capacity, MAP and code error probabilities,
//! Bhattacharyya), channel operations (composition, sums, products,
//! interpolations, generalized polar transforms), Blackwell-measure
//! representations of channel equivalence classes with the matching
//! measure-level arithmetic, and order/distance structure (LP degradation
//! tests, noisiness and total-variation distances).
//!
//! Channels are dense row-stochastic matrices over index alphabets
//! `0..n`. Equivalence classes are represented by canonical finitely
//! supported Blackwell measures: lists of posterior atoms with weights. The
//! crate verifies, in its test suites and in [`selftest`], that the two
//! representations compute the same quantities along every route it
//! implements.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs (given explicit seeds), so everything here is safe
//! to use concurrently.

pub mod analysis;
pub mod channel;
pub mod dist;
mod error;
pub mod files;
pub mod measure;
pub mod ops;
pub mod params;
pub mod selftest;
mod simplex;

pub use channel::{
    channel_distance, compose, random_channel, random_channel_with, Channel,
    ChannelDecomposition,
};
pub use dist::Distribution;
pub use error::{Error, Result};
pub use measure::{
    equivalent, measures_equal, minus_convolve, minus_kernel, mixture, plus_convolve,
    plus_kernel, tensor, tv_distance, BlackwellMeasure, MeasureOpReport,
};
pub use ops::{
    channel_product, channel_sum, interpolate, polar_minus, polar_plus, BinaryOp, RightInverse,
};
pub use params::{
    bhattacharyya, capacity, code_error, correct_guess_prob, map_error, mutual_information,
    optimal_code_error, CapacityResult, Code, JointPrior,
};

/// Tolerance for stochasticity checks: row sums and weight sums must be
/// within this of 1, entries within this of [0, 1]. Accepted data is then
/// renormalized exactly.
pub const EPS_STOCH: f64 = 1e-9;

/// Output probabilities at or below this are treated as exactly zero when
/// forming the image of a channel.
pub const EPS_ZERO: f64 = 1e-12;

/// Tolerance for the decomposition reconstruction identity
/// `|X| * P_o(y) * posterior_y(x) = W(y|x)`.
pub const EPS_RECON: f64 = 1e-12;

/// L1 tolerance under which two posterior atoms of a measure are merged
/// during canonicalization, and under which atoms of two measures are
/// aligned when comparing them.
pub const ATOM_TOL: f64 = 1e-9;

/// Tolerance for the balance check: the mean of a measure must be within
/// this of the uniform distribution, coordinatewise.
pub const EPS_BAL: f64 = 1e-9;

/// Feasibility tolerance of the degradation linear program.
pub const LP_TOL: f64 = 1e-8;

/// Cap on the number of joint output sequences enumerated by code-error
/// computations.
pub const ENUM_CAP: u64 = 10_000_000;

/// Cap on the number of candidate codes enumerated by the optimal-code
/// search.
pub const COMB_CAP: u64 = 1_000_000;

/// Cap on the number of atoms a measure operation may produce before
/// canonicalization.
pub const RANK_CAP: usize = 100_000;

/// Iteration cap of the capacity solver.
pub const MAX_CAPACITY_ITER: u64 = 100_000;
