//! Query engines: range, collecting range, counting and best-first kNN.
//!
//! All engines share the same bound kernels. A *pruning distance* is how
//! far a query-to-reference distance falls outside a stored interval; it
//! lower-bounds the distance from the query to anything the interval
//! covers. A *collection distance* is `d(q, ref) + far`, an upper bound
//! on the same set. Each distance computed on the way down a path is
//! reused against the matching ancestral interval of every deeper node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::AddAssign;

use crate::metric::{Metric, MetricError};
use crate::tree::{CmtTree, DistanceInterval, NodeId};

/// Counters gathered during one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Metric evaluations. The principal cost measure.
    pub distance_calls: u64,
    /// Nodes whose bounds were tested and not found stale.
    pub nodes_visited: u64,
    /// Subtrees added wholesale without visiting their nodes.
    pub subtrees_collected: u64,
    /// Objects added through collected subtrees.
    pub objects_collected: u64,
    /// kNN queue entries discarded on removal because the radius had shrunk.
    pub stale_pops: u64,
}

impl AddAssign for QueryStats {
    fn add_assign(&mut self, rhs: Self) {
        self.distance_calls += rhs.distance_calls;
        self.nodes_visited += rhs.nodes_visited;
        self.subtrees_collected += rhs.subtrees_collected;
        self.objects_collected += rhs.objects_collected;
        self.stale_pops += rhs.stale_pops;
    }
}

/// Pruning distance of `d_pq` against interval `level` of a node.
pub fn pruning_distance(d_pq: f64, intervals: &[DistanceInterval], level: usize) -> f64 {
    intervals[level].pruning_distance(d_pq)
}

/// Largest pruning distance over the ancestral intervals of a node.
///
/// `ancestors` yields query distances nearest ancestor first (parent,
/// grandparent, ...); it is zipped with `intervals[1..]`, so extra
/// ancestors beyond the stored levels are ignored. 0 when there are none.
pub fn max_pruning_distance(
    ancestors: impl IntoIterator<Item = f64>,
    intervals: &[DistanceInterval],
) -> f64 {
    ancestors
        .into_iter()
        .zip(&intervals[1..])
        .map(|(d, iv)| iv.pruning_distance(d))
        .fold(0.0, f64::max)
}

/// `d(q, p) + far[0]`: every object in the subtree is within this of `q`.
/// A leaf has nothing below `p`, so its bound is `d_pq` itself.
pub fn collection_distance(d_pq: f64, intervals: &[DistanceInterval]) -> f64 {
    let own = intervals[0];
    if own.is_empty() {
        d_pq
    } else {
        d_pq + own.far
    }
}

/// Smallest `dist[l] + far[l]` over the ancestral intervals; `+inf` when
/// the node has none.
pub fn min_collection_distance(
    ancestors: impl IntoIterator<Item = f64>,
    intervals: &[DistanceInterval],
) -> f64 {
    ancestors
        .into_iter()
        .zip(&intervals[1..])
        .map(|(d, iv)| d + iv.far)
        .fold(f64::INFINITY, f64::min)
}

/// An object and its exact distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub object: usize,
    pub distance: f64,
}

/// What is known about a range-query hit's distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceMark {
    Exact(f64),
    /// Collected without a metric call; the value is the bound that
    /// triggered collection.
    AtMost(f64),
}

impl DistanceMark {
    pub fn value(self) -> f64 {
        match self {
            DistanceMark::Exact(d) | DistanceMark::AtMost(d) => d,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, DistanceMark::Exact(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeHit {
    pub object: usize,
    pub mark: DistanceMark,
}

/// Objects found by a range query, in traversal order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RangeResult {
    pub hits: Vec<RangeHit>,
}

impl RangeResult {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Object indices, ascending.
    pub fn objects(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.hits.iter().map(|h| h.object).collect();
        ids.sort_unstable();
        ids
    }

    /// Replaces collection bounds with exact distances. Returns the number
    /// of metric calls spent, which are not part of the search cost.
    pub fn resolve_exact<T, M: Metric<T>>(
        &mut self,
        tree: &CmtTree<T, M>,
        query: &T,
    ) -> Result<u64, MetricError> {
        let mut calls = 0;
        for hit in &mut self.hits {
            if !hit.mark.is_exact() {
                let d = tree.metric().distance(query, tree.object(hit.object))?;
                hit.mark = DistanceMark::Exact(d);
                calls += 1;
            }
        }
        Ok(calls)
    }
}

trait RangeSink {
    fn hit(&mut self, object: usize, distance: f64);
    /// `exact` is the node-object's distance when it has already been computed.
    fn subtree<T, M>(&mut self, tree: &CmtTree<T, M>, node: NodeId, bound: f64, exact: Option<f64>);
}

impl RangeSink for RangeResult {
    fn hit(&mut self, object: usize, distance: f64) {
        self.hits.push(RangeHit {
            object,
            mark: DistanceMark::Exact(distance),
        });
    }

    fn subtree<T, M>(&mut self, tree: &CmtTree<T, M>, node: NodeId, bound: f64, exact: Option<f64>) {
        self.hits.extend(tree.subtree(node).map(|id| RangeHit {
            object: tree.node(id).object(),
            mark: match exact {
                Some(d) if id == node => DistanceMark::Exact(d),
                _ => DistanceMark::AtMost(bound),
            },
        }));
    }
}

struct Counter(usize);

impl RangeSink for Counter {
    fn hit(&mut self, _object: usize, _distance: f64) {
        self.0 += 1;
    }

    fn subtree<T, M>(&mut self, tree: &CmtTree<T, M>, node: NodeId, _bound: f64, _exact: Option<f64>) {
        self.0 += tree.node(node).count();
    }
}

struct RangeSearch<'a, T, M, S> {
    tree: &'a CmtTree<T, M>,
    query: &'a T,
    radius: f64,
    collect: bool,
    /// Query distances to the node-objects on the current path, root first.
    path: Vec<f64>,
    sink: S,
    stats: &'a mut QueryStats,
}

impl<T, M: Metric<T>, S: RangeSink> RangeSearch<'_, T, M, S> {
    fn visit(&mut self, id: NodeId) -> Result<(), MetricError> {
        let tree = self.tree;
        let node = tree.node(id);
        let intervals = tree.intervals(id);
        self.stats.nodes_visited += 1;

        if max_pruning_distance(self.path.iter().rev().copied(), intervals) > self.radius {
            return Ok(());
        }
        if self.collect {
            let bound = min_collection_distance(self.path.iter().rev().copied(), intervals);
            if bound.is_finite() && bound <= self.radius {
                self.collect_subtree(id, bound, None);
                return Ok(());
            }
        }

        let d = tree.metric().distance(self.query, tree.node_object(id))?;
        self.stats.distance_calls += 1;

        if self.collect {
            let bound = collection_distance(d, intervals);
            if bound <= self.radius {
                self.collect_subtree(id, bound, Some(d));
                return Ok(());
            }
        }
        if d <= self.radius {
            self.sink.hit(node.object(), d);
        }
        if !node.is_leaf() && intervals[0].pruning_distance(d) <= self.radius {
            self.path.push(d);
            for child in node.children() {
                self.visit(child)?;
            }
            self.path.pop();
        }
        Ok(())
    }

    fn collect_subtree(&mut self, id: NodeId, bound: f64, exact: Option<f64>) {
        self.stats.subtrees_collected += 1;
        self.stats.objects_collected += self.tree.node(id).count() as u64;
        self.sink.subtree(self.tree, id, bound, exact);
    }
}

impl<T, M: Metric<T>> CmtTree<T, M> {
    fn run_range<S: RangeSink>(
        &self,
        query: &T,
        radius: f64,
        collect: bool,
        sink: S,
        stats: &mut QueryStats,
    ) -> Result<S, MetricError> {
        assert!(radius >= 0.0, "query radius must be non-negative, got {radius}");
        let mut search = RangeSearch {
            tree: self,
            query,
            radius,
            collect,
            path: Vec::with_capacity(self.height() + 1),
            sink,
            stats,
        };
        if let Some(root) = self.root() {
            search.visit(root)?;
        }
        Ok(search.sink)
    }

    /// All objects within `radius` of `query`, each with its exact distance.
    /// No collection.
    pub fn range_query(
        &self,
        query: &T,
        radius: f64,
        stats: &mut QueryStats,
    ) -> Result<RangeResult, MetricError> {
        self.run_range(query, radius, false, RangeResult::default(), stats)
    }

    /// Range query that adds whole subtrees once an upper bound shows they
    /// lie inside the query ball. Collected hits carry that bound instead of
    /// an exact distance, see [`RangeResult::resolve_exact`].
    pub fn collect_range_query(
        &self,
        query: &T,
        radius: f64,
        stats: &mut QueryStats,
    ) -> Result<RangeResult, MetricError> {
        self.run_range(query, radius, true, RangeResult::default(), stats)
    }

    /// Number of objects within `radius`, using subtree counts where a
    /// subtree is known to lie entirely inside the ball.
    pub fn count_query(
        &self,
        query: &T,
        radius: f64,
        stats: &mut QueryStats,
    ) -> Result<usize, MetricError> {
        Ok(self.run_range(query, radius, true, Counter(0), stats)?.0)
    }

    /// The `k` objects closest to `query` among those within `radius_bound`,
    /// sorted by distance (ties by object index).
    ///
    /// Best-first search: queue entries are ordered by their largest
    /// available lower bound, smallest first, and are tested against the
    /// shrinking search radius both when pushed and when popped.
    pub fn knn_query(
        &self,
        query: &T,
        k: usize,
        radius_bound: f64,
        stats: &mut QueryStats,
    ) -> Result<Vec<Neighbor>, MetricError> {
        assert!(k >= 1, "k must be at least 1");
        assert!(radius_bound >= 0.0, "radius bound must be non-negative");
        let Some(root) = self.root() else {
            return Ok(Vec::new());
        };

        let mut entries: Vec<QueueEntry> = Vec::new();
        let mut queue = BinaryHeap::new();
        let mut held: BinaryHeap<Candidate> = BinaryHeap::new();
        let mut radius = radius_bound;
        let mut seq = 0u64;

        entries.push(QueueEntry {
            node: root,
            parent: None,
            distance: f64::NAN,
        });
        queue.push(QueueKey {
            priority: 0.0,
            seq,
            entry: 0,
        });

        while let Some(QueueKey { priority, entry, .. }) = queue.pop() {
            if priority > radius {
                stats.stale_pops += 1;
                continue;
            }
            stats.nodes_visited += 1;
            let id = entries[entry].node;
            let node = self.node(id);
            let d = self.metric().distance(query, self.node_object(id))?;
            stats.distance_calls += 1;
            entries[entry].distance = d;

            if d <= radius {
                held.push(Candidate {
                    distance: d,
                    object: node.object(),
                });
                if held.len() > k {
                    held.pop();
                }
                if held.len() == k {
                    radius = radius.min(held.peek().map_or(radius, |c| c.distance));
                }
            }

            let own = self.intervals(id)[0];
            let own_bound = own.pruning_distance(d);
            if own_bound > radius {
                continue;
            }
            for child in node.children() {
                let child_iv = self.intervals(child);
                let chain = ChainDistances {
                    entries: &entries,
                    next: Some(entry),
                };
                let priority = max_pruning_distance(chain, child_iv).max(own_bound);
                if priority <= radius {
                    entries.push(QueueEntry {
                        node: child,
                        parent: Some(entry),
                        distance: f64::NAN,
                    });
                    seq += 1;
                    queue.push(QueueKey {
                        priority,
                        seq,
                        entry: entries.len() - 1,
                    });
                }
            }
        }

        let mut out: Vec<Neighbor> = held
            .into_iter()
            .map(|c| Neighbor {
                object: c.object,
                distance: c.distance,
            })
            .collect();
        sort_neighbors(&mut out);
        Ok(out)
    }
}

/// Priority-queue record. `distance` is filled in when the entry is visited;
/// children read their ancestors' distances by walking `parent`.
#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    node: NodeId,
    parent: Option<usize>,
    distance: f64,
}

/// Walks a queue entry and its parents, yielding their query distances.
struct ChainDistances<'a> {
    entries: &'a [QueueEntry],
    next: Option<usize>,
}

impl Iterator for ChainDistances<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let e = &self.entries[self.next?];
        self.next = e.parent;
        Some(e.distance)
    }
}

/// Min-heap key on `(priority, seq)`.
#[derive(Debug, Clone, Copy)]
struct QueueKey {
    priority: f64,
    seq: u64,
    entry: usize,
}

impl PartialEq for QueueKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueKey {}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Max-heap on `(distance, object)`: the top is the one to evict.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    object: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.object.cmp(&other.object))
    }
}

fn sort_neighbors(v: &mut [Neighbor]) {
    v.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.object.cmp(&b.object)));
}

/// Linear scan: every object within `radius`, in index order.
pub fn brute_force_range<T, M: Metric<T>>(
    objects: &[T],
    metric: &M,
    query: &T,
    radius: f64,
) -> Result<Vec<Neighbor>, MetricError> {
    let mut out = Vec::new();
    for (object, x) in objects.iter().enumerate() {
        let distance = metric.distance(query, x)?;
        if distance <= radius {
            out.push(Neighbor { object, distance });
        }
    }
    Ok(out)
}

/// Linear scan: the `k` nearest objects within `radius_bound`, sorted by
/// distance with ties broken by index.
pub fn brute_force_knn<T, M: Metric<T>>(
    objects: &[T],
    metric: &M,
    query: &T,
    k: usize,
    radius_bound: f64,
) -> Result<Vec<Neighbor>, MetricError> {
    let mut all = brute_force_range(objects, metric, query, radius_bound)?;
    sort_neighbors(&mut all);
    all.truncate(k);
    Ok(all)
}

/// Outcome of comparing a kNN query with the range query it could at best match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimality {
    /// Distance of the k-th neighbor: the smallest radius enclosing the answer.
    pub radius: f64,
    pub knn: QueryStats,
    pub range: QueryStats,
}

impl Optimality {
    /// Range-query calls over kNN calls. Near 1 means the kNN search did
    /// almost no work beyond what knowing the final radius in advance costs.
    pub fn ratio(&self) -> f64 {
        if self.knn.distance_calls == 0 {
            1.0
        } else {
            self.range.distance_calls as f64 / self.knn.distance_calls as f64
        }
    }
}

/// Runs an unbounded kNN query, then a collection-free range query at the
/// k-th neighbor distance, each with fresh counters.
pub fn range_optimality<T, M: Metric<T>>(
    tree: &CmtTree<T, M>,
    query: &T,
    k: usize,
) -> Result<Optimality, MetricError> {
    let mut knn = QueryStats::default();
    let found = tree.knn_query(query, k, f64::INFINITY, &mut knn)?;
    let radius = found.last().map_or(0.0, |n| n.distance);
    let mut range = QueryStats::default();
    tree.range_query(query, radius, &mut range)?;
    Ok(Optimality { radius, knn, range })
}

/// [`range_optimality`] reduced to its ratio.
pub fn range_optimality_ratio<T, M: Metric<T>>(
    tree: &CmtTree<T, M>,
    query: &T,
    k: usize,
) -> Result<f64, MetricError> {
    Ok(range_optimality(tree, query, k)?.ratio())
}
