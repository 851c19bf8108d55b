#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod operators;
pub mod params;
pub mod scalar;
pub mod sequences;
pub mod stages;

pub use operators::{
    defect_profile, demo_contradiction, find_block_witness, op_norm, DefectProfile,
    FiniteOperator, OperatorError, WitnessBlock,
};
pub use params::{solve_alpha, AlphaResult, Convention, Params, ParamsError, ValidationReport};
pub use scalar::Scalar;
pub use sequences::{
    bd_growth_experiment, best_subsequence_fit, growth_exponent, make_l2_blocks,
    partial_sum_norms, BdCandidate, BlockSequence, GrowthFit, NormChoice, SequenceError,
};
pub use stages::{ExtendedVector, GammaIndex, Sign, StageError, StageLedger, StageVector};
