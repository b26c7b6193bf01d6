//! How close kNN search comes to a range query that already knows the
//! final radius.
//!
//!     cargo run --release --example range_optimality -- [n]

use cascade_index::data::{gen_uniform_points, sample_point_queries};
use cascade_index::{range_optimality, BuildConfig, CascadeLimit, CmtTree, Euclidean};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(100_000), |s| s.parse())?;
    let points = gen_uniform_points(n, 3, 6);
    let queries = sample_point_queries(100, 3, 6);

    println!("{:<9} {:>5} {:>10} {:>12} {:>7}", "cascade", "k", "knn calls", "range calls", "ratio");
    for cascade in [CascadeLimit::BASELINE, CascadeLimit::FULL] {
        let tree = CmtTree::build(points.clone(), Euclidean, BuildConfig::new(cascade, 6))?;
        for k in [1, 10, 100] {
            let (mut knn, mut range) = (0u64, 0u64);
            for q in &queries {
                let o = range_optimality(&tree, q, k)?;
                knn += o.knn.distance_calls;
                range += o.range.distance_calls;
            }
            let m = queries.len() as f64;
            println!(
                "{:<9} {k:>5} {:>10.1} {:>12.1} {:>7.3}",
                cascade.label(),
                knn as f64 / m,
                range as f64 / m,
                range as f64 / knn as f64
            );
        }
    }
    Ok(())
}
