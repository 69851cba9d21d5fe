//! Independent oracles and statistical tests used to check the engine.

mod estimators;
mod ks;
mod oracles;
mod special;
mod stats;

pub use estimators::{
    age_distribution_test, estimate_l2_variance, estimate_mean_field, initial_condition_gap, invariance_statistics,
    invariance_two_sample, joint_moment_mc, ks_beta, ks_beta_marginal, mean_slope, normalized_marginals,
    oracle_triangle, pathwise_structure, regularity_regression, residual_decay, sandwich_holds,
    stationary_weak_residual, weak_mean_pde_residual, AgeReport, DecayReport, MeanFieldReport, OracleReport,
    PathwiseReport, RegressionReport, Sampler, Statistic, TestFunction, WeakResidualReport, UPPER_RESOLUTION,
};
pub use ks::{kolmogorov_quantile, kolmogorov_survival, ks_one_sample, ks_two_sample, KSReport};
pub use oracles::{ode_oracle_step, ode_orbit, observed_order, rk4_relaxation_step, FdOracle};
pub use special::{beta_cdf, ln_beta, ln_gamma};
pub use stats::{Moments, StatReport};
