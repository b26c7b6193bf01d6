mod common;

use cascade_index::{
    brute_force_knn, brute_force_range, AbsoluteDifference, BuildConfig, CascadeLimit, CmtTree, Euclidean,
    EuclideanPoint, Levenshtein, Metric, QueryStats,
};
use proptest::prelude::*;

const CASCADES: [CascadeLimit; 4] = [
    CascadeLimit::BASELINE,
    CascadeLimit::PARENT,
    CascadeLimit::Levels(3),
    CascadeLimit::FULL,
];

fn cascade() -> impl Strategy<Value = CascadeLimit> {
    prop::sample::select(CASCADES.to_vec())
}

/// Integer-valued reals, so duplicates and distance ties are common.
fn line_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..40).prop_map(f64::from), 0..150)
}

fn points3() -> impl Strategy<Value = Vec<EuclideanPoint>> {
    prop::collection::vec(prop::array::uniform3(0.0..1.0f64), 0..150)
        .prop_map(|v| v.into_iter().map(|p| EuclideanPoint::new(p.to_vec())).collect())
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[ACGT]{0,10}", 0..80)
}

fn check_range<T: Clone, M: Metric<T>>(tree: &CmtTree<T, M>, q: &T, r: f64) -> Result<(), TestCaseError> {
    let expected: Vec<usize> = brute_force_range(tree.objects(), tree.metric(), q, r)
        .unwrap()
        .into_iter()
        .map(|n| n.object)
        .collect();
    let mut stats = QueryStats::default();
    let plain = tree.range_query(q, r, &mut stats).unwrap();
    prop_assert_eq!(plain.objects(), expected.clone());
    let mut collected = tree.collect_range_query(q, r, &mut stats).unwrap();
    prop_assert_eq!(collected.objects(), expected.clone());
    let count = tree.count_query(q, r, &mut stats).unwrap();
    prop_assert_eq!(count, expected.len());

    // Collected hits carry an upper bound that must hold and resolve to
    // the exact distance.
    for hit in &collected.hits {
        let d = tree.metric().distance(q, tree.object(hit.object)).unwrap();
        prop_assert!(d <= hit.mark.value() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(hit.mark.value() <= r || hit.mark.is_exact());
    }
    collected.resolve_exact(tree, q).unwrap();
    for hit in &collected.hits {
        let d = tree.metric().distance(q, tree.object(hit.object)).unwrap();
        prop_assert_eq!(hit.mark.value(), d);
    }
    Ok(())
}

fn check_knn<T: Clone, M: Metric<T>>(tree: &CmtTree<T, M>, q: &T, k: usize, bound: f64) -> Result<(), TestCaseError> {
    let expected = brute_force_knn(tree.objects(), tree.metric(), q, k, bound).unwrap();
    let mut stats = QueryStats::default();
    let got = tree.knn_query(q, k, bound, &mut stats).unwrap();
    let ds = |v: &[cascade_index::Neighbor]| v.iter().map(|n| n.distance).collect::<Vec<_>>();
    prop_assert_eq!(ds(&got), ds(&expected));
    for n in &got {
        prop_assert_eq!(tree.metric().distance(q, tree.object(n.object)).unwrap(), n.distance);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn line_queries_match_scan(
        values in line_values(), c in cascade(), seed in any::<u64>(),
        q in -5.0..45.0f64, r in 0.0..20.0f64, k in 1usize..20, bound in 0.0..30.0f64,
    ) {
        let tree = CmtTree::build(values, AbsoluteDifference, BuildConfig::new(c, seed)).unwrap();
        let q = q.round();
        check_range(&tree, &q, r.round())?;
        check_range(&tree, &q, r)?;
        check_knn(&tree, &q, k, f64::INFINITY)?;
        check_knn(&tree, &q, k, bound.round())?;
    }

    #[test]
    fn point_queries_match_scan(
        pts in points3(), c in cascade(), seed in any::<u64>(),
        q in prop::array::uniform3(-0.2..1.2f64), r in 0.0..1.0f64, k in 1usize..30, bound in 0.0..1.0f64,
    ) {
        let tree = CmtTree::build(pts, Euclidean, BuildConfig::new(c, seed)).unwrap();
        let q = EuclideanPoint::new(q.to_vec());
        check_range(&tree, &q, r)?;
        check_knn(&tree, &q, k, f64::INFINITY)?;
        check_knn(&tree, &q, k, bound)?;
    }

    #[test]
    fn string_queries_match_scan(
        ws in words(), c in cascade(), seed in any::<u64>(),
        q in "[ACGT]{0,10}", r in 0u8..6, k in 1usize..10, bound in 0u8..6,
    ) {
        let tree = CmtTree::build(ws, Levenshtein, BuildConfig::new(c, seed)).unwrap();
        check_range(&tree, &q, f64::from(r))?;
        check_knn(&tree, &q, k, f64::INFINITY)?;
        check_knn(&tree, &q, k, f64::from(bound))?;
    }

    #[test]
    fn bounds_hold_at_every_node(
        pts in points3(), ws in words(), c in cascade(), seed in any::<u64>(),
        q in prop::array::uniform3(-0.5..1.5f64), qs in "[ACGT]{0,12}",
    ) {
        let t = CmtTree::build(pts, Euclidean, BuildConfig::new(c, seed)).unwrap();
        let bad = common::bound_violations(&t, &EuclideanPoint::new(q.to_vec())).unwrap();
        prop_assert!(bad.is_empty(), "{:?}", bad);
        let t = CmtTree::build(ws, Levenshtein, BuildConfig::new(c, seed)).unwrap();
        let bad = common::bound_violations(&t, &qs).unwrap();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn child_order_does_not_change_answers(
        pts in points3(), c in cascade(), seed in any::<u64>(),
        q in prop::array::uniform3(0.0..1.0f64), r in 0.0..0.8f64, k in 1usize..20,
    ) {
        let tree = CmtTree::build(pts, Euclidean, BuildConfig::new(c, seed)).unwrap();
        let swapped = tree.with_children_swapped();
        prop_assert!(cascade_index::validate_tree(&swapped).unwrap().is_empty());
        let q = EuclideanPoint::new(q.to_vec());
        let mut s = QueryStats::default();
        prop_assert_eq!(
            tree.collect_range_query(&q, r, &mut s).unwrap().objects(),
            swapped.collect_range_query(&q, r, &mut s).unwrap().objects()
        );
        prop_assert_eq!(tree.count_query(&q, r, &mut s).unwrap(), swapped.count_query(&q, r, &mut s).unwrap());
        let a: Vec<f64> = tree.knn_query(&q, k, f64::INFINITY, &mut s).unwrap().iter().map(|n| n.distance).collect();
        let b: Vec<f64> = swapped.knn_query(&q, k, f64::INFINITY, &mut s).unwrap().iter().map(|n| n.distance).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bounded_knn_is_a_filtered_prefix(
        pts in points3(), seed in any::<u64>(),
        q in prop::array::uniform3(0.0..1.0f64), k in 1usize..25, bound in 0.0..0.6f64,
    ) {
        let tree = CmtTree::build(pts, Euclidean, BuildConfig::new(CascadeLimit::FULL, seed)).unwrap();
        let q = EuclideanPoint::new(q.to_vec());
        let mut s = QueryStats::default();
        let open: Vec<f64> = tree.knn_query(&q, k, f64::INFINITY, &mut s).unwrap().iter().map(|n| n.distance).collect();
        let bounded: Vec<f64> = tree.knn_query(&q, k, bound, &mut s).unwrap().iter().map(|n| n.distance).collect();
        let filtered: Vec<f64> = open.into_iter().filter(|&d| d <= bound).collect();
        prop_assert_eq!(bounded, filtered);
    }

    #[test]
    fn deeper_cascades_never_cost_more_for_range(
        pts in points3(), seed in any::<u64>(),
        q in prop::array::uniform3(0.0..1.0f64), r in 0.0..1.0f64,
    ) {
        let q = EuclideanPoint::new(q.to_vec());
        let mut calls = Vec::new();
        for c in CASCADES {
            let tree = CmtTree::build(pts.clone(), Euclidean, BuildConfig::new(c, seed)).unwrap();
            let mut s = QueryStats::default();
            tree.range_query(&q, r, &mut s).unwrap();
            calls.push(s.distance_calls);
        }
        prop_assert!(calls.windows(2).all(|w| w[1] <= w[0]), "{:?}", calls);
    }

    #[test]
    fn covering_ball_costs_one_call(
        pts in points3(), c in cascade(), seed in any::<u64>(), q in prop::array::uniform3(0.0..1.0f64),
    ) {
        prop_assume!(!pts.is_empty());
        let n = pts.len();
        let tree = CmtTree::build(pts, Euclidean, BuildConfig::new(c, seed)).unwrap();
        let q = EuclideanPoint::new(q.to_vec());
        for r in [2.0 * 3f64.sqrt(), f64::INFINITY] {
            let mut s = QueryStats::default();
            prop_assert_eq!(tree.collect_range_query(&q, r, &mut s).unwrap().len(), n);
            prop_assert_eq!(s.distance_calls, 1);
            let mut s = QueryStats::default();
            prop_assert_eq!(tree.count_query(&q, r, &mut s).unwrap(), n);
            prop_assert_eq!(s.distance_calls, 1);
        }
    }

    #[test]
    fn knn_with_k_at_least_n_returns_everything(values in line_values(), seed in any::<u64>(), q in 0.0..40.0f64) {
        let n = values.len();
        let tree = CmtTree::build(values, AbsoluteDifference, BuildConfig::new(CascadeLimit::FULL, seed)).unwrap();
        let mut s = QueryStats::default();
        let got = tree.knn_query(&q, n + 3, f64::INFINITY, &mut s).unwrap();
        prop_assert_eq!(got.len(), n);
        prop_assert!(got.windows(2).all(|w| w[0].distance <= w[1].distance));
    }
}

#[test]
fn child_order_does_not_change_range_cost() {
    // Range queries without collection touch exactly the nodes whose
    // bounds do not prune, which is independent of visiting order.
    let pts = cascade_index::data::gen_uniform_points(3000, 3, 4);
    let tree = CmtTree::build(pts, Euclidean, BuildConfig::default()).unwrap();
    let swapped = tree.with_children_swapped();
    for q in cascade_index::data::sample_point_queries(20, 3, 4) {
        let (mut a, mut b) = (QueryStats::default(), QueryStats::default());
        tree.range_query(&q, 0.1, &mut a).unwrap();
        swapped.range_query(&q, 0.1, &mut b).unwrap();
        assert_eq!(a.distance_calls, b.distance_calls);
    }
}
