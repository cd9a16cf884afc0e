//! Domain types, binomial probabilities, restricted MLE and the score statistic.

pub mod mle;
pub mod normal;
pub mod pmf;
pub mod score;
pub mod sum;
pub mod types;

pub use mle::{constrained_log_likelihood, restricted_mle};
pub use pmf::{joint_log_pmf, ln_binomial_pmf, ArmDistribution, Pruning};
pub use score::score_statistic;
pub use sum::CompensatedSum;
pub use types::{
    BinomialArm, ConstrainedMle, DifferenceConstraint, NoninfSpec, ScoreResult, Shape, TwoArmData,
};
