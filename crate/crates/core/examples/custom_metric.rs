//! Indexing a user-defined metric: Hamming distance on 64-bit fingerprints.
//!
//!     cargo run --release --example custom_metric

use cascade_index::{BuildConfig, CmtTree, CountingMetric, Metric, MetricError, QueryStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Hamming;

impl Metric<u64> for Hamming {
    fn distance(&self, a: &u64, b: &u64) -> Result<f64, MetricError> {
        Ok((a ^ b).count_ones() as f64)
    }

    fn tag(&self) -> &'static str {
        "hamming64"
    }

    fn integral(&self) -> bool {
        true
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Clustered fingerprints: a few hundred centers with low-weight noise.
    let centers: Vec<u64> = (0..300).map(|_| rng.gen()).collect();
    let prints: Vec<u64> = (0..30_000)
        .map(|i| {
            let mut x = centers[i % centers.len()];
            for _ in 0..rng.gen_range(0..6) {
                x ^= 1 << rng.gen_range(0..64);
            }
            x
        })
        .collect();

    let metric = CountingMetric::new(Hamming);
    let tree = CmtTree::build(prints, metric, BuildConfig::default())?;
    println!("build: {} Hamming evaluations for {} prints", tree.metric().reset(), tree.len());

    let q = centers[17] ^ 0b1011;
    let mut stats = QueryStats::default();
    let hits = tree.collect_range_query(&q, 4.0, &mut stats)?;
    println!(
        "{} prints within 4 bits of the query, {} evaluations ({} objects collected without one)",
        hits.len(),
        stats.distance_calls,
        stats.objects_collected
    );
    Ok(())
}
