//! Datasets: seeded point clouds, FASTA ingestion, query sampling.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), which produces the
//! same stream on every platform for a given seed. Query sampling uses a
//! separate ChaCha stream from dataset generation so a dataset and its
//! queries never share draws even under the same seed.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::{EuclideanPoint, Sequence};

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "CASCADE_INDEX_DATA_DIR";

/// The 20 standard amino acids.
pub const AMINO_ACIDS: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Default number of random edits applied to a dataset sequence to make a query.
pub const DEFAULT_QUERY_EDITS: usize = 5;

const DATA_STREAM: u64 = 0;
const QUERY_STREAM: u64 = 1;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Cache directory from [`DATA_DIR_ENV`], if set.
pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

/// `n` points with coordinates i.i.d. uniform on `[0, 1)`.
pub fn gen_uniform_points(n: usize, dim: usize, seed: u64) -> Vec<EuclideanPoint> {
    uniform_points_from(&mut rng(seed, DATA_STREAM), n, dim)
}

fn uniform_points_from(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<EuclideanPoint> {
    (0..n)
        .map(|_| EuclideanPoint((0..dim).map(|_| rng.gen::<f64>()).collect()))
        .collect()
}

/// Query points drawn from the query stream, independent of the dataset.
pub fn sample_point_queries(count: usize, dim: usize, seed: u64) -> Vec<EuclideanPoint> {
    uniform_points_from(&mut rng(seed, QUERY_STREAM), count, dim)
}

/// Queries near, but generally not in, the dataset: random dataset
/// sequences each altered by `edits` random single-symbol edits.
pub fn sample_sequence_queries(
    dataset: &[Sequence],
    count: usize,
    edits: usize,
    seed: u64,
) -> Vec<Sequence> {
    if dataset.is_empty() {
        return Vec::new();
    }
    let mut rng = rng(seed, QUERY_STREAM);
    (0..count)
        .map(|i| {
            let source = &dataset[rng.gen_range(0..dataset.len())];
            let mut symbols = source.symbols.clone();
            apply_random_edits(&mut symbols, edits, &mut rng);
            Sequence::new(format!("query{i}|{}", source.id), symbols)
        })
        .collect()
}

/// Applies `edits` random substitutions, insertions or deletions.
fn apply_random_edits<R: Rng>(symbols: &mut Vec<u8>, edits: usize, rng: &mut R) {
    for _ in 0..edits {
        match rng.gen_range(0..3) {
            0 if !symbols.is_empty() => {
                let at = rng.gen_range(0..symbols.len());
                let old = symbols[at];
                let new = loop {
                    let c = *AMINO_ACIDS.choose(rng).unwrap();
                    if c != old {
                        break c;
                    }
                };
                symbols[at] = new;
            }
            1 if !symbols.is_empty() => {
                let at = rng.gen_range(0..symbols.len());
                symbols.remove(at);
            }
            _ => {
                let at = rng.gen_range(0..=symbols.len());
                symbols.insert(at, *AMINO_ACIDS.choose(rng).unwrap());
            }
        }
    }
}

/// Synthetic protein families standing in for a real sequence database.
///
/// Families of roughly twenty members descend from random ancestors of
/// length 150..=570 (mean 360); each member carries its own divergence of
/// 2% to 30% random edits from the ancestor.
pub fn synthetic_proteome(n: usize, seed: u64) -> Vec<Sequence> {
    let mut rng = rng(seed, DATA_STREAM);
    let mut out = Vec::with_capacity(n);
    let mut family = 0;
    while out.len() < n {
        let len = rng.gen_range(150..=570);
        let ancestor: Vec<u8> = (0..len).map(|_| *AMINO_ACIDS.choose(&mut rng).unwrap()).collect();
        let members = rng.gen_range(5..=35).min(n - out.len());
        for m in 0..members {
            let rate = rng.gen_range(0.02..0.30);
            let edits = (rate * len as f64).round() as usize;
            let mut symbols = ancestor.clone();
            apply_random_edits(&mut symbols, edits, &mut rng);
            out.push(Sequence::new(format!("fam{family}_{m}"), symbols));
        }
        family += 1;
    }
    out
}

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: sequence data before the first '>' header")]
    SequenceBeforeHeader { line: usize },
    #[error("line {line}: invalid sequence symbol {symbol:?}")]
    InvalidSymbol { line: usize, symbol: char },
}

/// Records read from a FASTA source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FastaRead {
    pub sequences: Vec<Sequence>,
    /// Records with no sequence data, dropped.
    pub skipped_empty: usize,
}

fn valid_symbol(c: u8) -> bool {
    c.is_ascii_uppercase() || c == b'*' || c == b'-'
}

/// Parses FASTA text, keeping at most `cap` non-empty records.
///
/// Ids are the header up to the first whitespace. Sequence lines are
/// concatenated, whitespace removed and uppercased.
pub fn read_fasta<R: Read>(reader: R, cap: usize) -> Result<FastaRead, FastaError> {
    let mut out = FastaRead::default();
    let mut current: Option<Sequence> = None;
    let io_err = |source| FastaError::Io {
        path: PathBuf::from("<reader>"),
        source,
    };

    let finish = |rec: Option<Sequence>, out: &mut FastaRead| {
        if let Some(rec) = rec {
            if rec.is_empty() {
                out.skipped_empty += 1;
            } else {
                out.sequences.push(rec);
            }
        }
    };

    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = i + 1;
        if let Some(header) = line.strip_prefix('>') {
            finish(current.take(), &mut out);
            if out.sequences.len() >= cap {
                break;
            }
            let id = header.split_whitespace().next().unwrap_or("");
            current = Some(Sequence::new(id, Vec::new()));
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let rec = current
            .as_mut()
            .ok_or(FastaError::SequenceBeforeHeader { line: lineno })?;
        for c in trimmed.bytes().filter(|c| !c.is_ascii_whitespace()) {
            let c = c.to_ascii_uppercase();
            if !valid_symbol(c) {
                return Err(FastaError::InvalidSymbol {
                    line: lineno,
                    symbol: c as char,
                });
            }
            rec.symbols.push(c);
        }
    }
    finish(current.take(), &mut out);
    out.sequences.truncate(cap);
    Ok(out)
}

/// Reads up to `cap` sequences from a FASTA file.
pub fn parse_fasta(path: impl AsRef<Path>, cap: usize) -> Result<Vec<Sequence>, FastaError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| FastaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let read = read_fasta(file, cap).map_err(|e| match e {
        FastaError::Io { source, .. } => FastaError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })?;
    if read.skipped_empty > 0 {
        log::warn!("{}: skipped {} empty records", path.display(), read.skipped_empty);
    }
    Ok(read.sequences)
}

/// Writes records as FASTA with 60-column sequence lines.
pub fn write_fasta<W: Write>(mut w: W, records: &[Sequence]) -> io::Result<()> {
    for rec in records {
        writeln!(w, ">{}", rec.id)?;
        for chunk in rec.symbols.chunks(60) {
            w.write_all(chunk)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::levenshtein_distance;

    #[test]
    fn uniform_points_basics() {
        assert!(gen_uniform_points(0, 3, 1).is_empty());
        assert_eq!(gen_uniform_points(5, 3, 7), gen_uniform_points(5, 3, 7));
        assert_ne!(gen_uniform_points(5, 3, 7), gen_uniform_points(5, 3, 8));

        let pts = gen_uniform_points(10_000, 3, 99);
        for axis in 0..3 {
            let mean = pts.iter().map(|p| p.0[axis]).sum::<f64>() / pts.len() as f64;
            assert!((mean - 0.5).abs() < 0.01, "axis {axis} mean {mean}");
        }
        assert!(pts.iter().flat_map(|p| p.coords()).all(|&c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn point_queries_are_off_dataset() {
        let pts = gen_uniform_points(1000, 3, 3);
        let qs = sample_point_queries(10, 3, 3);
        assert_eq!(qs, sample_point_queries(10, 3, 3));
        for q in &qs {
            let nearest = pts
                .iter()
                .map(|p| crate::metric::euclidean_distance(&p.0, &q.0).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest > 0.0);
        }
    }

    #[test]
    fn fasta_records() {
        let text = ">a desc\nAC\nGT\n>b\nMK\n";
        let r = read_fasta(text.as_bytes(), usize::MAX).unwrap();
        assert_eq!(r.sequences, vec![Sequence::new("a", "ACGT"), Sequence::new("b", "MK")]);
        let r = read_fasta(text.as_bytes(), 1).unwrap();
        assert_eq!(r.sequences, vec![Sequence::new("a", "ACGT")]);
    }

    #[test]
    fn fasta_normalizes_and_skips_empty() {
        let text = ">x\nac gt\n\n>empty\n>y\nm k\n";
        let r = read_fasta(text.as_bytes(), usize::MAX).unwrap();
        assert_eq!(r.sequences, vec![Sequence::new("x", "ACGT"), Sequence::new("y", "MK")]);
        assert_eq!(r.skipped_empty, 1);
    }

    #[test]
    fn fasta_errors() {
        let err = read_fasta("\nACGT\n>a\n".as_bytes(), 10).unwrap_err();
        assert!(matches!(err, FastaError::SequenceBeforeHeader { line: 2 }));
        let err = read_fasta(">a\nAC1T\n".as_bytes(), 10).unwrap_err();
        assert!(matches!(err, FastaError::InvalidSymbol { line: 2, symbol: '1' }));
        let err = parse_fasta("/nonexistent/file.fasta", 10).unwrap_err();
        assert!(matches!(err, FastaError::Io { .. }));
    }

    #[test]
    fn fasta_round_trip() {
        let seqs = synthetic_proteome(40, 5);
        let mut buf = Vec::new();
        write_fasta(&mut buf, &seqs).unwrap();
        let back = read_fasta(buf.as_slice(), usize::MAX).unwrap();
        assert_eq!(back.sequences, seqs);
    }

    #[test]
    fn sequence_queries_stay_close() {
        let seqs = synthetic_proteome(100, 1);
        let qs = sample_sequence_queries(&seqs, 10, 2, 3);
        assert_eq!(qs, sample_sequence_queries(&seqs, 10, 2, 3));
        for q in &qs {
            let src_id = q.id.split_once('|').unwrap().1;
            let src = seqs.iter().find(|s| s.id == src_id).unwrap();
            assert!(levenshtein_distance(&q.symbols, &src.symbols) <= 2);
        }
    }

    #[test]
    fn proteome_shape() {
        let seqs = synthetic_proteome(2000, 9);
        assert_eq!(seqs.len(), 2000);
        let mean = seqs.iter().map(Sequence::len).sum::<usize>() as f64 / seqs.len() as f64;
        assert!((mean - 360.0).abs() < 0.2 * 360.0, "{mean}");
        assert!(seqs.iter().all(|s| s.symbols.iter().all(|c| AMINO_ACIDS.contains(c))));
    }
}
