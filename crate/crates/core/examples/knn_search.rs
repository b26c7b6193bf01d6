//! k-nearest-neighbor search, unbounded and with a radius bound.
//!
//!     cargo run --release --example knn_search

use cascade_index::data::{gen_uniform_points, sample_point_queries};
use cascade_index::{brute_force_knn, BuildConfig, CascadeLimit, CmtTree, Euclidean, QueryStats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = gen_uniform_points(50_000, 3, 2);
    let queries = sample_point_queries(100, 3, 2);

    let q = &queries[0];
    let tree = CmtTree::build(points.clone(), Euclidean, BuildConfig::default())?;
    let mut stats = QueryStats::default();
    let nearest = tree.knn_query(q, 5, f64::INFINITY, &mut stats)?;
    println!("5 nearest to {:?} ({} distance calls):", q.coords(), stats.distance_calls);
    for n in &nearest {
        println!("  #{:<6} {:.5}", n.object, n.distance);
    }
    let check = brute_force_knn(tree.objects(), &Euclidean, q, 5, f64::INFINITY)?;
    assert!(nearest.iter().zip(&check).all(|(a, b)| a.distance == b.distance));

    println!("\nmean distance calls per query");
    println!("{:<9} {:>8} {:>8} {:>8} {:>14}", "cascade", "k=1", "k=10", "k=100", "k=100,r<=0.02");
    for cascade in [CascadeLimit::BASELINE, CascadeLimit::PARENT, CascadeLimit::FULL] {
        let tree = CmtTree::build(points.clone(), Euclidean, BuildConfig::new(cascade, 2))?;
        let mut row = Vec::new();
        for (k, bound) in [(1, f64::INFINITY), (10, f64::INFINITY), (100, f64::INFINITY), (100, 0.02)] {
            let mut stats = QueryStats::default();
            for q in &queries {
                tree.knn_query(q, k, bound, &mut stats)?;
            }
            row.push(stats.distance_calls as f64 / queries.len() as f64);
        }
        println!(
            "{:<9} {:>8.1} {:>8.1} {:>8.1} {:>14.1}",
            cascade.label(),
            row[0],
            row[1],
            row[2],
            row[3]
        );
    }
    Ok(())
}
