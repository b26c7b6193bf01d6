//! Range and counting queries over uniform points, compared across
//! cascade settings.
//!
//!     cargo run --release --example range_queries -- [n] [dim]

use cascade_index::data::{gen_uniform_points, sample_point_queries};
use cascade_index::{BuildConfig, CascadeLimit, CmtTree, Euclidean, QueryStats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(20_000), |s| s.parse())?;
    let dim: usize = args.next().map_or(Ok(5), |s| s.parse())?;

    let points = gen_uniform_points(n, dim, 1);
    let queries = sample_point_queries(50, dim, 1);
    let radius = 0.15 * (dim as f64).sqrt();

    println!("{n} points in [0,1]^{dim}, radius {radius:.3}, {} queries", queries.len());
    println!("{:<9} {:>12} {:>12} {:>10}", "cascade", "calls/query", "collected", "hits");
    for cascade in [CascadeLimit::BASELINE, CascadeLimit::PARENT, CascadeLimit::FULL] {
        let tree = CmtTree::build(points.clone(), Euclidean, BuildConfig::new(cascade, 7))?;
        let mut stats = QueryStats::default();
        let mut hits = 0;
        for q in &queries {
            hits += tree.collect_range_query(q, radius, &mut stats)?.len();
        }
        let per = |x: u64| x as f64 / queries.len() as f64;
        println!(
            "{:<9} {:>12.1} {:>12.1} {:>10.1}",
            cascade.label(),
            per(stats.distance_calls),
            per(stats.objects_collected),
            per(hits as u64)
        );
    }

    // Counting skips materialization; with a ball covering everything the
    // root alone answers it.
    let tree = CmtTree::build(points, Euclidean, BuildConfig::default())?;
    let mut stats = QueryStats::default();
    let all = tree.count_query(&queries[0], 2.0 * (dim as f64).sqrt(), &mut stats)?;
    println!("covering count: {all} objects for {} distance call", stats.distance_calls);
    Ok(())
}
