//! Builds a tree once, writes it to disk, and queries the reloaded copy.
//!
//!     cargo run --release --example save_and_load -- [path]

use cascade_index::data::{gen_uniform_points, sample_point_queries};
use cascade_index::{BuildConfig, CmtTree, Euclidean, EuclideanPoint, QueryStats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("points.cmt"));

    let tree = CmtTree::build(gen_uniform_points(10_000, 4, 5), Euclidean, BuildConfig::default())?;
    tree.save(&path)?;
    let size = std::fs::metadata(&path)?.len();
    println!("saved {} nodes to {} ({size} bytes)", tree.len(), path.display());

    let loaded: CmtTree<EuclideanPoint, _> = CmtTree::load(&path, Euclidean)?;
    assert_eq!(loaded.to_bytes(), tree.to_bytes());

    let q = &sample_point_queries(1, 4, 5)[0];
    let (mut a, mut b) = (QueryStats::default(), QueryStats::default());
    let before = tree.knn_query(q, 3, f64::INFINITY, &mut a)?;
    let after = loaded.knn_query(q, 3, f64::INFINITY, &mut b)?;
    assert_eq!(before, after);
    assert_eq!(a, b);
    println!("reloaded tree answers identically: {after:?}");
    Ok(())
}
