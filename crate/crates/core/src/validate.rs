//! Exhaustive structural check of a built tree.
//!
//! Recomputes every count and interval with direct metric calls, walking
//! child links rather than trusting stored counts or the arena layout.
//! For every node `u` one distance is computed from `u`'s object to each
//! object below it; those distances give `u`'s own interval and, folded
//! up the subtree, the level-`depth(v) - depth(u)` interval of every
//! descendant `v`. Total cost is one metric call per (ancestor,
//! descendant) pair, `O(N log N)` on a balanced tree.

use std::fmt;

use crate::metric::{Metric, MetricError};
use crate::tree::{CmtTree, DistanceInterval, NodeId};

/// Relative tolerance for real-valued metrics.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Count { stored: usize, actual: usize },
    IntervalLength { stored: usize, expected: usize },
    Near { level: usize, stored: f64, actual: f64 },
    Far { level: usize, stored: f64, actual: f64 },
    Depth { stored: usize, actual: usize },
    Unreachable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: {:?}", self.node, self.kind)
    }
}

fn agrees(stored: f64, actual: f64, exact: bool) -> bool {
    if stored == actual {
        return true;
    }
    if exact || !stored.is_finite() || !actual.is_finite() {
        return false;
    }
    (stored - actual).abs() <= RELATIVE_TOLERANCE * stored.abs().max(actual.abs())
}

/// Returns every disagreement between stored and recomputed node data.
/// An empty list means the tree is consistent.
pub fn validate_tree<T, M: Metric<T>>(tree: &CmtTree<T, M>) -> Result<Vec<Violation>, MetricError> {
    let mut out = Vec::new();
    let Some(root) = tree.root() else {
        return Ok(out);
    };
    let n = tree.nodes().len();
    let exact = tree.metric().integral();

    // Depths and true sizes from child links.
    let mut order = Vec::with_capacity(n);
    let mut depth = vec![usize::MAX; n];
    let mut stack = vec![(root, 0usize)];
    while let Some((id, d)) = stack.pop() {
        if depth[id] != usize::MAX {
            continue;
        }
        depth[id] = d;
        order.push(id);
        for c in tree.node(id).children() {
            stack.push((c, d + 1));
        }
    }
    let mut size = vec![0usize; n];
    for &id in order.iter().rev() {
        size[id] = 1 + tree.node(id).children().map(|c| size[c]).sum::<usize>();
    }

    for (id, &d) in depth.iter().enumerate() {
        if d == usize::MAX {
            out.push(Violation {
                node: id,
                kind: ViolationKind::Unreachable,
            });
        }
    }

    for &id in &order {
        let node = tree.node(id);
        if node.count() != size[id] {
            out.push(Violation {
                node: id,
                kind: ViolationKind::Count {
                    stored: node.count(),
                    actual: size[id],
                },
            });
        }
        if node.depth() != depth[id] {
            out.push(Violation {
                node: id,
                kind: ViolationKind::Depth {
                    stored: node.depth(),
                    actual: depth[id],
                },
            });
        }
        let expected = tree.cascade().levels_at(depth[id]) + 1;
        if tree.intervals(id).len() != expected {
            out.push(Violation {
                node: id,
                kind: ViolationKind::IntervalLength {
                    stored: tree.intervals(id).len(),
                    expected,
                },
            });
        }
    }

    // actual[v][l] accumulates the recomputed level-l interval of v.
    let mut actual: Vec<Vec<DistanceInterval>> = order
        .iter()
        .fold(vec![Vec::new(); n], |mut acc, &id| {
            acc[id] = vec![DistanceInterval::EMPTY; tree.intervals(id).len()];
            acc
        });

    let mut dist = vec![f64::NAN; n];
    let mut sub = vec![DistanceInterval::EMPTY; n];
    for &anchor in &order {
        let anchor_obj = tree.node_object(anchor);
        // Distances from the anchor to every node below it, folded
        // bottom-up so each descendant sees the range over its own subtree.
        let below = descendants(tree, anchor);
        for &v in &below {
            dist[v] = tree.metric().distance(anchor_obj, tree.node_object(v))?;
        }
        // `below` is in preorder, so reversing it visits children first.
        for &v in below.iter().rev() {
            sub[v] = merged(DistanceInterval::point(dist[v]), tree, v, &sub);
        }
        if let Some(own) = actual[anchor].first_mut() {
            *own = merged(DistanceInterval::EMPTY, tree, anchor, &sub);
        }
        for &v in &below {
            let level = depth[v] - depth[anchor];
            if level < actual[v].len() {
                actual[v][level] = sub[v];
            }
        }
    }

    for &id in &order {
        let stored = tree.intervals(id);
        for (level, (s, a)) in stored.iter().zip(&actual[id]).enumerate() {
            if !agrees(s.near, a.near, exact) {
                out.push(Violation {
                    node: id,
                    kind: ViolationKind::Near {
                        level,
                        stored: s.near,
                        actual: a.near,
                    },
                });
            }
            if !agrees(s.far, a.far, exact) {
                out.push(Violation {
                    node: id,
                    kind: ViolationKind::Far {
                        level,
                        stored: s.far,
                        actual: a.far,
                    },
                });
            }
        }
    }
    Ok(out)
}

fn merged<T, M>(
    mut iv: DistanceInterval,
    tree: &CmtTree<T, M>,
    id: NodeId,
    sub: &[DistanceInterval],
) -> DistanceInterval {
    for c in tree.node(id).children() {
        iv.include(sub[c].near);
        iv.include(sub[c].far);
    }
    iv
}

/// Strict descendants of `id` in preorder, following child links.
fn descendants<T, M>(tree: &CmtTree<T, M>, id: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack: Vec<NodeId> = tree.node(id).children().collect();
    stack.reverse();
    while let Some(v) = stack.pop() {
        out.push(v);
        let node = tree.node(v);
        if let Some(r) = node.right() {
            stack.push(r);
        }
        if let Some(l) = node.left() {
            stack.push(l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_uniform_points;
    use crate::metric::{AbsoluteDifference, Euclidean, Levenshtein};
    use crate::tree::{BuildConfig, CascadeLimit};

    #[test]
    fn fresh_trees_are_clean() {
        for cascade in [CascadeLimit::BASELINE, CascadeLimit::PARENT, CascadeLimit::FULL] {
            let pts = gen_uniform_points(200, 3, 11);
            let t = CmtTree::build(pts, Euclidean, BuildConfig::new(cascade, 4)).unwrap();
            assert_eq!(validate_tree(&t).unwrap(), vec![]);
        }
        let words: Vec<String> = ["kitten", "sitting", "mitten", "bitten", "knitting", "sit", "kit", "", "kitten"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let t = CmtTree::build(words, Levenshtein, BuildConfig::default()).unwrap();
        assert!(validate_tree(&t).unwrap().is_empty());
    }

    #[test]
    fn empty_tree_is_clean() {
        let t = CmtTree::build(Vec::<f64>::new(), AbsoluteDifference, BuildConfig::default()).unwrap();
        assert!(validate_tree(&t).unwrap().is_empty());
    }

    #[test]
    fn detects_one_decremented_far() {
        let pts = gen_uniform_points(200, 3, 11);
        let mut t = CmtTree::build(pts, Euclidean, BuildConfig::default()).unwrap();
        let victim = 37;
        let level = t.intervals(victim).len() - 1;
        let mut iv = t.intervals(victim)[level];
        iv.far -= 1e-3;
        t.corrupt_interval(victim, level, iv);
        let v = validate_tree(&t).unwrap();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].node, victim);
        assert!(matches!(v[0].kind, ViolationKind::Far { level: l, .. } if l == level));
    }

    #[test]
    fn integral_metrics_compare_exactly() {
        assert!(agrees(1.0, 1.0 + 1e-12, false));
        assert!(!agrees(1.0, 1.0 + 1e-12, true));
        assert!(!agrees(f64::INFINITY, 1.0, false));
    }
}
