//! Writes a synthetic proteome as FASTA, e.g. as input for
//! `cascade-bench --dataset fasta`.
//!
//!     cargo run --release --example make_proteome -- out.fasta [n] [seed]

use std::fs::File;
use std::io::BufWriter;

use cascade_index::data::{synthetic_proteome, write_fasta};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().ok_or("usage: make_proteome <out.fasta> [n] [seed]")?;
    let n: usize = args.next().map_or(Ok(10_000), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;
    let seqs = synthetic_proteome(n, seed);
    write_fasta(BufWriter::new(File::create(&out)?), &seqs)?;
    eprintln!("wrote {} sequences to {out}", seqs.len());
    Ok(())
}
