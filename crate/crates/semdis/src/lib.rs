//! Reconstruction of feature-similarity networks from free-association
//! word norms.
//!
//! An association network is row-normalized into a transition matrix, the
//! first S transition powers are accumulated, and pairwise cosines of the
//! accumulated rows form a synthetic similarity network that can be scored
//! against the empirical feature-production reference, both through global
//! network descriptors and through per-word ranked neighbor lists.

pub mod compare;
pub mod descriptors;
pub mod error;
pub mod featuresim;
pub mod ingest;
pub mod matrix;
pub mod network;
pub mod rim;
pub mod vocab;

pub use compare::{compare_networks, error_score, match_rate, neighbor_list, ComparisonReport};
pub use descriptors::{descriptor_report, DescriptorReport, DistributionMode};
pub use error::{Error, Result};
pub use featuresim::fp_cosine_network;
pub use ingest::{intersect_vocabulary, parse_fa, parse_fp, FeatureMatrix};
pub use matrix::DenseMatrix;
pub use network::{build_network, DupPolicy, SymmetrizeRule, WeightedNetwork};
pub use rim::{
    cosine_project, mc_inheritance, power_sum, rim_pipeline, row_normalize,
    AccumulatedTransition, DanglingPolicy, RimConfig, SimilarityNetwork, TransitionMatrix,
};
pub use vocab::{normalize_token, Vocabulary};
