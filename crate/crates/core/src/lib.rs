//! Cascaded metric trees.
//!
//! A metric tree over a black-box distance function whose nodes also keep,
//! for every ancestor on the root path, the range of distances from that
//! ancestor's object to the node's subtree. Every distance a query computes
//! on the way down is then reused as a pruning test at every deeper node,
//! at no extra metric cost.
//!
//! ```
//! use cascade_index::{BuildConfig, CascadeLimit, CmtTree, Euclidean, QueryStats};
//! use cascade_index::data::{gen_uniform_points, sample_point_queries};
//!
//! let points = gen_uniform_points(2_000, 3, 42);
//! let tree = CmtTree::build(points, Euclidean, BuildConfig::new(CascadeLimit::FULL, 7)).unwrap();
//!
//! let q = &sample_point_queries(1, 3, 42)[0];
//! let mut stats = QueryStats::default();
//! let hits = tree.collect_range_query(q, 0.1, &mut stats).unwrap();
//! let nearest = tree.knn_query(q, 5, f64::INFINITY, &mut stats).unwrap();
//! assert_eq!(nearest.len(), 5);
//! assert!(stats.distance_calls > 0 && hits.len() <= 2_000);
//! ```
//!
//! The `cascade` setting selects how much ancestral information is kept:
//! [`CascadeLimit::BASELINE`] keeps none (a conventional metric tree),
//! [`CascadeLimit::PARENT`] keeps one level, [`CascadeLimit::FULL`] keeps all.

pub mod bench;
pub mod data;
pub mod metric;
pub mod persist;
pub mod query;
pub mod tree;
pub mod validate;

pub use metric::{
    AbsoluteDifference, CountingMetric, Euclidean, EuclideanPoint, Levenshtein, Metric,
    MetricError, Sequence,
};
pub use query::{
    brute_force_knn, brute_force_range, range_optimality, range_optimality_ratio, DistanceMark,
    Neighbor, Optimality, QueryStats, RangeHit, RangeResult,
};
pub use tree::{BuildConfig, BuildError, CascadeLimit, CmtNode, CmtTree, DistanceInterval, NodeId};
pub use validate::{validate_tree, Violation, ViolationKind};
