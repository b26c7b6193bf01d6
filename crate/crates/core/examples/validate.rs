//! Recomputes every stored interval and count of a tree, then shows a
//! damaged interval being caught.
//!
//!     cargo run --release --example validate

use cascade_index::data::gen_uniform_points;
use cascade_index::{validate_tree, BuildConfig, CmtTree, Euclidean};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut tree = CmtTree::build(gen_uniform_points(2000, 3, 8), Euclidean, BuildConfig::default())?;
    let violations = validate_tree(&tree)?;
    println!("fresh tree: {} violations", violations.len());

    let node = 100;
    let mut iv = tree.intervals(node)[1];
    iv.near += 0.01;
    tree.corrupt_interval(node, 1, iv);
    for v in validate_tree(&tree)? {
        println!("  {v}");
    }
    Ok(())
}
