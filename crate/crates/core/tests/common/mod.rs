#![allow(dead_code)]

use cascade_index::query::{collection_distance, max_pruning_distance, min_collection_distance, pruning_distance};
use cascade_index::{CmtTree, Metric, MetricError, NodeId};

/// Parent of every node, following child links from the root.
pub fn parents<T, M>(tree: &CmtTree<T, M>) -> Vec<Option<NodeId>> {
    let mut parent = vec![None; tree.nodes().len()];
    let mut stack: Vec<NodeId> = tree.root().into_iter().collect();
    while let Some(id) = stack.pop() {
        for c in tree.node(id).children() {
            parent[c] = Some(id);
            stack.push(c);
        }
    }
    parent
}

/// `id` and every node below it, by child links.
pub fn subtree_nodes<T, M>(tree: &CmtTree<T, M>, id: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![id];
    while let Some(v) = stack.pop() {
        out.push(v);
        stack.extend(tree.node(v).children());
    }
    out
}

fn slack(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Checks every lower and upper bound the search kernels derive at every
/// node against the true distances from `q` to that node's subtree.
/// Returns descriptions of the bounds that fail.
pub fn bound_violations<T, M: Metric<T>>(tree: &CmtTree<T, M>, q: &T) -> Result<Vec<String>, MetricError> {
    let n = tree.nodes().len();
    let mut dq = vec![0.0; n];
    for (id, d) in dq.iter_mut().enumerate() {
        *d = tree.metric().distance(q, tree.node_object(id))?;
    }
    let parent = parents(tree);
    let mut bad = Vec::new();
    for v in 0..n {
        let mut chain = Vec::new();
        let mut a = parent[v];
        while let Some(p) = a {
            chain.push(dq[p]);
            a = parent[p];
        }
        let ivs = tree.intervals(v);
        let members = subtree_nodes(tree, v);
        let lo = members.iter().map(|&x| dq[x]).fold(f64::INFINITY, f64::min);
        let hi = members.iter().map(|&x| dq[x]).fold(f64::NEG_INFINITY, f64::max);
        let below_lo = members[1..].iter().map(|&x| dq[x]).fold(f64::INFINITY, f64::min);

        let pd = max_pruning_distance(chain.iter().copied(), ivs);
        if pd > lo + slack(lo) {
            bad.push(format!("node {v}: ancestral pruning distance {pd} > nearest {lo}"));
        }
        if members.len() > 1 {
            let own = pruning_distance(dq[v], ivs, 0);
            if own > below_lo + slack(below_lo) {
                bad.push(format!("node {v}: own pruning distance {own} > nearest descendant {below_lo}"));
            }
        }
        let cd = collection_distance(dq[v], ivs);
        if cd + slack(cd) < hi {
            bad.push(format!("node {v}: collection distance {cd} < farthest {hi}"));
        }
        let mcd = min_collection_distance(chain.iter().copied(), ivs);
        if mcd.is_finite() && mcd + slack(mcd) < hi {
            bad.push(format!("node {v}: ancestral collection distance {mcd} < farthest {hi}"));
        }
    }
    Ok(bad)
}

/// Short strings over a small alphabet, so edit distances tie often.
pub fn dna_words(n: usize, seed: u64) -> Vec<String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..12);
            (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)] as char).collect()
        })
        .collect()
}
