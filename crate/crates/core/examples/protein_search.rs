//! Edit-distance search over protein sequences.
//!
//! Reads a FASTA file when one is given, otherwise generates a synthetic
//! proteome of related sequence families.
//!
//!     cargo run --release --example protein_search -- [file.fasta] [cap]

use cascade_index::data::{parse_fasta, sample_sequence_queries, synthetic_proteome, DEFAULT_QUERY_EDITS};
use cascade_index::{BuildConfig, CmtTree, Levenshtein, QueryStats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next();
    let cap: usize = args.next().map_or(Ok(3000), |s| s.parse())?;
    let seqs = match &path {
        Some(p) => parse_fasta(p, cap)?,
        None => synthetic_proteome(cap, 3),
    };
    let mean_len = seqs.iter().map(|s| s.len()).sum::<usize>() as f64 / seqs.len() as f64;
    println!("{} sequences, mean length {mean_len:.0}", seqs.len());

    let tree = CmtTree::build(seqs.clone(), Levenshtein, BuildConfig::default())?;
    println!("built with {} edit-distance calls, height {}", tree.build_distance_calls(), tree.height());

    let queries = sample_sequence_queries(&seqs, 10, DEFAULT_QUERY_EDITS, 3);
    let (mut open, mut bounded) = (QueryStats::default(), QueryStats::default());
    for q in &queries {
        let bound = (0.02 * q.len() as f64).floor();
        let near = tree.knn_query(q, 10, f64::INFINITY, &mut open)?;
        let close = tree.knn_query(q, 10, bound, &mut bounded)?;
        println!(
            "{:<28} nearest {:<14} at {:>3}; {} of 10 within {bound}",
            q.id,
            tree.object(near[0].object).id,
            near[0].distance,
            close.len()
        );
    }
    let per = |s: &QueryStats| s.distance_calls as f64 / queries.len() as f64;
    println!("calls/query: unbounded {:.0}, bounded {:.0}", per(&open), per(&bounded));
    Ok(())
}
