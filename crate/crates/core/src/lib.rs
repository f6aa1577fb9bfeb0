//! Hat-guessing strategies on a countable line of players: exact analysis
//! of finite games, team-plan generation with exact rationals, and seeded
//! simulation of the infinite game.

pub mod error;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod plan;
pub mod rational;
pub mod segments;
pub mod strategies;
pub mod suites;

pub use error::{Error, Result};
pub use model::{
    prefix_mean, sample_assignment, Color, ColorSpace, DensityEstimate, HatAssignment, KSchedule, OutcomeTrajectory,
    PrefixCounts, RandomSource, Tail,
};
pub use plan::{generate_plan, validate_plan, TeamMode, TeamPlan};
pub use rational::Rational;
pub use strategies::spec::{library_strategies, StrategySpec};
pub use strategies::Strategy;
