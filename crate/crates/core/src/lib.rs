//! Random-walk collision census: simulation and estimation of agent density
//! and network size from random-walk encounter rates.
//!
//! The crate provides
//!
//! * [`topology`] — torus, ring, hypercube, and explicit graph families with
//!   uniform-neighbor stepping and degree-proportional sampling;
//! * [`oracle`] — exact walk distributions, re-collision/equalization
//!   probabilities, and mixing distances on small graphs, by brute force;
//! * [`density`] — the synchronous multi-agent simulator for encounter-rate,
//!   independent-sampling, and property-frequency density estimation;
//! * [`recollision`] — empirical re-collision profiles, collision-count
//!   moments, per-family theoretical bounds, and their prefix sums B(t);
//! * [`netsize`] — network size estimation over a link-query interface:
//!   burn-in, degree-weighted collision counting, average-degree estimation,
//!   walk-count planning, and median boosting;
//! * [`spectral`] — the walk-matrix spectral quantity controlling expander
//!   bounds and burn-in lengths;
//! * [`rng`] — reproducible seed/stream derivation for parallel trials.

pub mod density;
pub mod error;
pub mod netsize;
pub mod oracle;
pub mod recollision;
pub mod rng;
pub mod spectral;
pub mod topology;

pub use density::{
    occupancy_collisions, run_encounter_rate, run_frequency_estimation,
    run_independent_sampling, run_independent_sampling_with, Algorithm, DensityEstimate,
    FrequencyEstimate, IndependentInit, SimConfig,
};
pub use error::{Error, Result};
pub use netsize::{
    burn_in_length, degree_weighted_big_b, estimate_avg_degree, estimate_size, median_boost,
    plan_walk_count, run_burn_in, run_pipeline, LinkQuery, LinkQueryGraph, PipelineConfig,
    PipelineResult, PipelineRun, SizeEstimate, WalkEnsemble, WalkMode, DEFAULT_C_BURN,
    DEFAULT_C_PLAN,
};
pub use oracle::{
    degree_weighted_beta, equalization_profile, exact_equalization, exact_recollision,
    recollision_profile, step_distribution, tv_to_stationary, DistributionVector,
    ORACLE_SIZE_GUARD,
};
pub use recollision::{
    big_b, empirical_beta_profile, empirical_beta_profile_from, empirical_equalization_profile,
    log_log_slope, oracle_beta_profile, oracle_equalization_profile, pair_collision_moments,
    theoretical_beta, theoretical_profile, visit_count_moments, BetaProfile, MomentReport,
    ProfileSource, TheoreticalFamily,
};
pub use spectral::{spectral_lambda, spectral_lambda_lazy, spectral_lambda_positive};
pub use topology::{Family, GraphStats, NodeId, Topology};
