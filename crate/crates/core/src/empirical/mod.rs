//! Sampling of actual coefficient sequences: clustering and matching against
//! predicted limit values, interval filling, the range of `mu_hat` over the
//! reals, equidistribution, translated coefficients and decay for
//! non-Pisot parameters.

pub mod cluster;
pub mod discrepancy;
mod sampling;
mod translate;

pub use cluster::{Cluster, PlaneCluster};
pub use discrepancy::{discrepancy, discrepancy_lacunary, random_unit_float, star_discrepancy};
pub use sampling::{
    decay_check, derivative_bound, estimate_j, interval_fill_test, match_clusters, sample_and_cluster,
    strictly_decreasing_tail, BlockMax, ClusterReport, IntervalEstimate, Match, DEFAULT_GAP, FAST_THRESHOLD,
    VALIDATION_POINTS,
};
pub use translate::{translated_sample, Gamma, Sampling, TranslatedReport, ANGULAR_BINS};
