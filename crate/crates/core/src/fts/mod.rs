//! Functional time series numerics shared by both models.

mod covariance;
mod diagnostics;
mod fpca;

pub use covariance::{
    bandwidth_rule, bartlett_weight, center_rows, column_means, difference, difference_series,
    empirical_autocov, long_run_covariance, long_run_covariance_raw, long_run_variance_diagonal,
    plugin_bandwidth, psd_projection, CovSurface,
};
pub use diagnostics::{
    functional_kpss_statistic, independence_test, kpss_test, IndependenceResult, KpssResult,
    DEFAULT_LAG_COUNT, DEFAULT_PROJECTION_DIM, DEGENERATE_VARIANCE,
};
pub use fpca::{expand_scores, fpca, project_scores, EigenBasis};
pub(crate) use fpca::orient;
