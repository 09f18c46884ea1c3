//! Geometric extremal graphical models on block graphs.
//!
//! A model assigns a gauge function to every clique of a block graph (a
//! decomposable graph whose minimal separators are single vertices); the
//! joint gauge is the sum of the clique gauges minus the separator
//! magnitudes. This crate assembles such models, evaluates and marginalizes
//! their joint gauges numerically, computes conditional-extremes `alpha`/
//! `beta` coefficients both by closed-form path recurrences and by
//! independent numeric contact searches, and enumerates the geometric
//! extreme directions of the unit level set.
//!
//! Margins are standard exponential (gauges on the nonnegative orthant) or
//! standard Laplace (signed coordinates); every gauge is 1-homogeneous,
//! continuous, and dominates the sup norm.
//!
//! ```
//! use gauge_graph::{alpha_path, beta_path, Gauge, Margin, Model};
//!
//! // 1 -- 2 -- 3 chain: logistic and Gaussian edge gauges
//! let model = Model::from_cliques(
//!     &[vec![1, 2], vec![2, 3]],
//!     vec![Gauge::logistic(2, 0.4)?, Gauge::gaussian_exp(0.6)?],
//!     Margin::Exponential,
//! )?;
//!
//! // the joint gauge touches 1 exactly at the pathwise contact point
//! let v = model.eval_joint(&[1.0, 1.0, 0.36])?;
//! assert!((v - 1.0).abs() < 1e-12);
//!
//! // alpha multiplies along the path: 1 x 0.36
//! assert_eq!(alpha_path(&model, 1, 3)?.value, 0.36);
//! // beta folds along the path: max(0, 1/2)
//! assert_eq!(beta_path(&model, 1, 3)?.value, 0.5);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod coeffs;
pub mod directions;
pub mod gauge;
pub mod graph;
pub mod model;
pub mod numerics;

mod chain;
mod curve;

pub use coeffs::{
    alpha_path, alpha_path_signed, alpha_vector, beta_path, beta_path_all_positive,
    beta_path_all_zero, beta_path_with_edges, edge_alpha, edge_alpha_marginal, edge_beta,
    edge_beta_marginal, AlphaResult, BetaResult, CoeffError, CoeffMethod,
    COMPOSED_EXCESS_FLOOR,
};
pub use curve::Sign;
pub use directions::{
    check_clique_equivalence, directions_from_alphas, enumerate_directions, is_direction,
    separator_gap, tree_ad_marginal, AlphaDirections, CliqueEquivalence, DirectionReport,
    JointExtremesError, TreeAdMarginal, CORNER_SHRINK, DIRECTION_GAP_TOL,
    MAX_ENUMERATION_VERTICES,
};
pub use gauge::{
    check_gauge_axioms, AxiomReport, CustomGauge, Gauge, GaugeError, GaugeKind, Margin,
};
pub use graph::{build_block_graph, BlockGraph, GraphError, Path};
pub use model::{
    assemble_model, sample_level_set, MarginalGauge, MarginalMethod, Model, ModelError,
    MAX_CLIQUE,
};
pub use numerics::{
    fit_loglog_slope, invert_spd, minimize_box, rightmost_minimizer_1d, MinimizerConfig, Minimum,
    NumericsError, SlopeFit, SlopeFitConfig,
};
