//! Cascaded metric tree layout and construction.
//!
//! Every node stores one object `p`, the number of objects in its subtree,
//! and a list of distance intervals. Interval 0 spans the distances from
//! `p` to the rest of its subtree; interval `i >= 1` spans the distances
//! from the `i`-th ancestor's object to every object in the subtree,
//! `p` included. How many ancestral intervals a node keeps is governed by
//! [`CascadeLimit`]: zero gives a conventional metric tree, one keeps only
//! the parent, unbounded keeps the whole root path.
//!
//! Nodes live in a contiguous arena in preorder, so the subtree of node
//! `i` occupies `i..i + count`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::{Metric, MetricError};

/// Index of a node in the tree arena.
pub type NodeId = usize;

/// `[near, far]` range of distances from a reference object to a set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceInterval {
    pub near: f64,
    pub far: f64,
}

impl DistanceInterval {
    /// The interval of an empty set. Any distance lies infinitely far outside it.
    pub const EMPTY: DistanceInterval = DistanceInterval {
        near: f64::INFINITY,
        far: f64::NEG_INFINITY,
    };

    pub fn new(near: f64, far: f64) -> Self {
        Self { near, far }
    }

    pub fn point(d: f64) -> Self {
        Self { near: d, far: d }
    }

    pub fn is_empty(&self) -> bool {
        self.near > self.far
    }

    pub fn include(&mut self, d: f64) {
        self.near = self.near.min(d);
        self.far = self.far.max(d);
    }

    pub fn contains(&self, d: f64) -> bool {
        self.near <= d && d <= self.far
    }

    /// How far `d` lies outside the interval; 0 inside, `+inf` when empty.
    pub fn pruning_distance(&self, d: f64) -> f64 {
        if self.is_empty() {
            f64::INFINITY
        } else if d < self.near {
            self.near - d
        } else if d > self.far {
            d - self.far
        } else {
            0.0
        }
    }
}

impl FromIterator<f64> for DistanceInterval {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut iv = DistanceInterval::EMPTY;
        for d in iter {
            iv.include(d);
        }
        iv
    }
}

/// How many ancestral distance intervals each node keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CascadeLimit {
    Levels(usize),
    Unbounded,
}

impl CascadeLimit {
    /// No ancestral information: a conventional linear-space metric tree.
    pub const BASELINE: CascadeLimit = CascadeLimit::Levels(0);
    /// Parent interval only.
    pub const PARENT: CascadeLimit = CascadeLimit::Levels(1);
    /// Intervals for every ancestor on the root path.
    pub const FULL: CascadeLimit = CascadeLimit::Unbounded;

    /// Ancestral levels stored by a node at `depth`.
    pub fn levels_at(self, depth: usize) -> usize {
        match self {
            CascadeLimit::Levels(n) => n.min(depth),
            CascadeLimit::Unbounded => depth,
        }
    }

    /// Label used in reports: `Baseline`, `CMT-1`, `CMT`, or `CMT-n`.
    pub fn label(self) -> String {
        match self {
            CascadeLimit::Levels(0) => "Baseline".to_string(),
            CascadeLimit::Levels(n) => format!("CMT-{n}"),
            CascadeLimit::Unbounded => "CMT".to_string(),
        }
    }
}

impl fmt::Display for CascadeLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CascadeLimit::Levels(n) => write!(f, "{n}"),
            CascadeLimit::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid cascade limit {0:?}: expected a non-negative integer or \"inf\"")]
pub struct ParseCascadeError(String);

impl FromStr for CascadeLimit {
    type Err = ParseCascadeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "unbounded" | "full" => Ok(CascadeLimit::Unbounded),
            other => other
                .parse()
                .map(CascadeLimit::Levels)
                .map_err(|_| ParseCascadeError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    pub cascade: CascadeLimit,
    pub seed: u64,
}

impl BuildConfig {
    pub fn new(cascade: CascadeLimit, seed: u64) -> Self {
        Self { cascade, seed }
    }
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self::new(CascadeLimit::FULL, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("metric evaluation failed between objects {left} and {right}: {source}")]
    Metric {
        left: usize,
        right: usize,
        #[source]
        source: MetricError,
    },
}

/// One tree node. Intervals are held by the tree, see [`CmtTree::intervals`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmtNode {
    pub(crate) object: usize,
    pub(crate) left: Option<NodeId>,
    pub(crate) right: Option<NodeId>,
    pub(crate) count: usize,
    pub(crate) depth: usize,
    pub(crate) first_interval: usize,
    pub(crate) interval_count: usize,
}

impl CmtNode {
    /// Index of the node-object in the tree's object list.
    pub fn object(&self) -> usize {
        self.object
    }

    pub fn left(&self) -> Option<NodeId> {
        self.left
    }

    pub fn right(&self) -> Option<NodeId> {
        self.right
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        self.left.into_iter().chain(self.right)
    }

    /// Objects in this subtree, node-object included.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_leaf(&self) -> bool {
        self.left.is_none() && self.right.is_none()
    }

    /// Number of ancestral intervals (levels `1..=n`).
    pub fn ancestral_levels(&self) -> usize {
        self.interval_count - 1
    }
}

/// A cascaded metric tree over objects of type `T` under metric `M`.
#[derive(Debug, Clone)]
pub struct CmtTree<T, M> {
    pub(crate) objects: Vec<T>,
    pub(crate) nodes: Vec<CmtNode>,
    pub(crate) intervals: Vec<DistanceInterval>,
    pub(crate) metric: M,
    pub(crate) config: BuildConfig,
    pub(crate) build_distance_calls: u64,
}

impl<T, M: Metric<T>> CmtTree<T, M> {
    /// Builds a balanced tree with seeded random pivots and balanced
    /// object-median partitioning.
    pub fn build(objects: Vec<T>, metric: M, config: BuildConfig) -> Result<Self, BuildError> {
        let n = objects.len();
        let mut tree = CmtTree {
            objects,
            nodes: Vec::with_capacity(n),
            intervals: Vec::new(),
            metric,
            config,
            build_distance_calls: 0,
        };
        if n == 0 {
            return Ok(tree);
        }

        let mut builder = Builder {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            width: balanced_height(n).max(1),
            ancestors: Vec::new(),
        };
        builder.ancestors = vec![0.0; n * builder.width];
        let mut ids: Vec<usize> = (0..n).collect();
        builder.build(&mut tree, &mut ids, 0)?;
        log::debug!(
            "built {} tree: n={} height={} distance calls={}",
            config.cascade.label(),
            n,
            tree.height(),
            tree.build_distance_calls
        );
        Ok(tree)
    }
}

/// Height (edges on the longest root path) of a balanced tree of `n` nodes.
fn balanced_height(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        n.ilog2() as usize
    }
}

struct Builder {
    rng: ChaCha8Rng,
    /// Row stride of `ancestors`.
    width: usize,
    /// `ancestors[x * width + a]` is the distance from object `x` to the
    /// pivot at depth `a` on its root path. Only needed during the build.
    ancestors: Vec<f64>,
}

impl Builder {
    fn build<T, M: Metric<T>>(
        &mut self,
        tree: &mut CmtTree<T, M>,
        ids: &mut [usize],
        depth: usize,
    ) -> Result<Option<NodeId>, BuildError> {
        if ids.is_empty() {
            return Ok(None);
        }
        let id = tree.nodes.len();
        let levels = tree.config.cascade.levels_at(depth);
        let first_interval = tree.intervals.len();
        tree.intervals
            .extend(std::iter::repeat_n(DistanceInterval::EMPTY, levels + 1));

        if ids.len() > 1 {
            let pick = self.rng.gen_range(0..ids.len());
            ids.swap(0, pick);
        }
        let pivot = ids[0];
        tree.nodes.push(CmtNode {
            object: pivot,
            left: None,
            right: None,
            count: ids.len(),
            depth,
            first_interval,
            interval_count: levels + 1,
        });

        let rest = &mut ids[1..];
        let mut own = DistanceInterval::EMPTY;
        for &x in rest.iter() {
            let d = tree
                .metric
                .distance(&tree.objects[x], &tree.objects[pivot])
                .map_err(|source| BuildError::Metric {
                    left: x,
                    right: pivot,
                    source,
                })?;
            self.ancestors[x * self.width + depth] = d;
            own.include(d);
        }
        tree.build_distance_calls += rest.len() as u64;
        tree.intervals[first_interval] = own;

        if !rest.is_empty() {
            let width = self.width;
            let dist = &self.ancestors;
            let split = partition_bom(rest, |&x| dist[x * width + depth]).split;
            let (left, right) = rest.split_at_mut(split);
            let l = self.build(tree, left, depth + 1)?;
            let r = self.build(tree, right, depth + 1)?;
            tree.nodes[id].left = l;
            tree.nodes[id].right = r;
        }

        let slots = &mut tree.intervals[first_interval..first_interval + levels + 1];
        compute_adiv(slots, ids, depth, &self.ancestors, self.width);
        Ok(Some(id))
    }
}

/// Fills the ancestral intervals `slots[1..]` of a node at `depth` whose
/// subtree (node-object included) is `members`.
///
/// `ancestor_distances[x * stride + a]` holds the distance from object `x`
/// to the ancestor at depth `a`. Level `l` refers to the ancestor at depth
/// `depth - l`. No metric calls are made.
pub fn compute_adiv(
    slots: &mut [DistanceInterval],
    members: &[usize],
    depth: usize,
    ancestor_distances: &[f64],
    stride: usize,
) {
    assert!(
        slots.len() <= depth + 1,
        "node at depth {depth} cannot hold {} ancestral intervals",
        slots.len().saturating_sub(1)
    );
    for (level, slot) in slots.iter_mut().enumerate().skip(1) {
        let ancestor_depth = depth - level;
        *slot = members
            .iter()
            .map(|&x| ancestor_distances[x * stride + ancestor_depth])
            .collect();
    }
}

/// Result of a balanced object-median split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BomSplit {
    /// Items `[..split]` form the left subset, `[split..]` the right.
    pub split: usize,
    /// Element `(n - 1) / 2` of the sorted distances.
    pub median: f64,
}

/// Reorders `items` so the first `n / 2` have distance no greater than
/// any of the remaining `n - n / 2`.
///
/// Uses order-statistic selection rather than a full sort. Ties at the
/// median land on either side as needed to keep the sizes balanced; the
/// outcome is a deterministic function of the input order.
pub fn partition_bom<I>(items: &mut [I], key: impl Fn(&I) -> f64) -> BomSplit {
    assert!(!items.is_empty(), "cannot partition an empty set");
    let n = items.len();
    let split = n / 2;
    if split == 0 {
        return BomSplit {
            split,
            median: key(&items[0]),
        };
    }
    items.select_nth_unstable_by(split, |a, b| key(a).total_cmp(&key(b)));
    let median = if n % 2 == 1 {
        key(&items[split])
    } else {
        items[..split]
            .iter()
            .map(&key)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    BomSplit { split, median }
}

impl<T, M> CmtTree<T, M> {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        if self.nodes.is_empty() {
            None
        } else {
            Some(0)
        }
    }

    pub fn node(&self, id: NodeId) -> &CmtNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[CmtNode] {
        &self.nodes
    }

    /// All intervals of a node: index 0 is its own subtree, `i >= 1` the `i`-th ancestor.
    pub fn intervals(&self, id: NodeId) -> &[DistanceInterval] {
        let n = &self.nodes[id];
        &self.intervals[n.first_interval..n.first_interval + n.interval_count]
    }

    pub(crate) fn intervals_mut(&mut self, id: NodeId) -> &mut [DistanceInterval] {
        let n = &self.nodes[id];
        &mut self.intervals[n.first_interval..n.first_interval + n.interval_count]
    }

    pub fn objects(&self) -> &[T] {
        &self.objects
    }

    pub fn object(&self, index: usize) -> &T {
        &self.objects[index]
    }

    /// The node-object of `id`.
    pub fn node_object(&self, id: NodeId) -> &T {
        &self.objects[self.nodes[id].object]
    }

    /// Node ids of the subtree rooted at `id`, in preorder.
    pub fn subtree(&self, id: NodeId) -> std::ops::Range<NodeId> {
        id..id + self.nodes[id].count
    }

    pub fn metric(&self) -> &M {
        &self.metric
    }

    pub fn config(&self) -> BuildConfig {
        self.config
    }

    pub fn cascade(&self) -> CascadeLimit {
        self.config.cascade
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn build_distance_calls(&self) -> u64 {
        self.build_distance_calls
    }

    /// Edges on the longest root-to-leaf path; 0 for empty and single-node trees.
    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Total number of stored intervals, the space overhead of cascading.
    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    /// Same tree with the left and right child of every node exchanged.
    /// Only child links change; node ids and [`CmtTree::subtree`] ranges stay valid.
    pub fn with_children_swapped(&self) -> Self
    where
        T: Clone,
        M: Clone,
    {
        let mut t = self.clone();
        for n in &mut t.nodes {
            std::mem::swap(&mut n.left, &mut n.right);
        }
        t
    }

    /// Overwrites one stored interval. Exists for fault-injection tests of
    /// the validator; a modified tree no longer gives correct query answers.
    #[doc(hidden)]
    pub fn corrupt_interval(&mut self, id: NodeId, level: usize, iv: DistanceInterval) {
        self.intervals_mut(id)[level] = iv;
    }
}
