//! Black-box metrics and the instrumented counting wrapper.
//!
//! A [`Metric`] is any function `d(x, y)` satisfying non-negativity,
//! symmetry, identity (`x = y` implies `d = 0`) and the triangle inequality.
//! The index never looks inside objects; everything it knows comes from
//! calls to `distance`, which is why the number of those calls is the
//! principal cost measure throughout the crate.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

/// Errors raised by a metric evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// A distance function over objects of type `T`.
///
/// Distances are `f64` everywhere, integer-valued metrics widen at this
/// boundary so one query engine serves all of them.
pub trait Metric<T: ?Sized> {
    fn distance(&self, a: &T, b: &T) -> Result<f64, MetricError>;

    /// Short stable name, recorded in serialized trees.
    fn tag(&self) -> &'static str;

    /// True when every distance is an exact integer. Validation then
    /// compares stored intervals exactly instead of with a relative tolerance.
    fn integral(&self) -> bool {
        false
    }
}

impl<T: ?Sized, M: Metric<T> + ?Sized> Metric<T> for &M {
    fn distance(&self, a: &T, b: &T) -> Result<f64, MetricError> {
        (**self).distance(a, b)
    }

    fn tag(&self) -> &'static str {
        (**self).tag()
    }

    fn integral(&self) -> bool {
        (**self).integral()
    }
}

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanPoint(pub Vec<f64>);

impl EuclideanPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for EuclideanPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

/// Standard L2 distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

/// L2 distance between two coordinate slices of equal length.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

impl Metric<EuclideanPoint> for Euclidean {
    fn distance(&self, a: &EuclideanPoint, b: &EuclideanPoint) -> Result<f64, MetricError> {
        euclidean_distance(&a.0, &b.0)
    }

    fn tag(&self) -> &'static str {
        "euclidean"
    }
}

impl Metric<[f64]> for Euclidean {
    fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
        euclidean_distance(a, b)
    }

    fn tag(&self) -> &'static str {
        "euclidean"
    }
}

/// `|a - b|` on the real line. Handy for small hand-checked examples.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsoluteDifference;

impl Metric<f64> for AbsoluteDifference {
    fn distance(&self, a: &f64, b: &f64) -> Result<f64, MetricError> {
        Ok((a - b).abs())
    }

    fn tag(&self) -> &'static str {
        "absdiff"
    }
}

/// A symbol string, e.g. a protein sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub id: String,
    pub symbols: Vec<u8>,
}

impl Sequence {
    pub fn new(id: impl Into<String>, symbols: impl Into<Vec<u8>>) -> Self {
        Self {
            id: id.into(),
            symbols: symbols.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols as text. Ingestion only admits ASCII, so this is lossless.
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.symbols).unwrap_or("")
    }
}

/// Unit-cost edit distance (insertions, deletions, substitutions).
#[derive(Debug, Clone, Copy, Default)]
pub struct Levenshtein;

/// Two-row dynamic program, `O(|a|·|b|)` time and `O(min(|a|,|b|))` space.
///
/// No banding or early exit: every call costs a full table so call counts
/// are comparable across queries.
pub fn levenshtein_distance(a: &[u8], b: &[u8]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0usize; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(lc != sc);
            let del = prev[j + 1] + 1;
            let ins = cur[j] + 1;
            cur[j + 1] = sub.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

impl Metric<Sequence> for Levenshtein {
    fn distance(&self, a: &Sequence, b: &Sequence) -> Result<f64, MetricError> {
        Ok(levenshtein_distance(&a.symbols, &b.symbols) as f64)
    }

    fn tag(&self) -> &'static str {
        "levenshtein"
    }

    fn integral(&self) -> bool {
        true
    }
}

impl Metric<str> for Levenshtein {
    fn distance(&self, a: &str, b: &str) -> Result<f64, MetricError> {
        Ok(levenshtein_distance(a.as_bytes(), b.as_bytes()) as f64)
    }

    fn tag(&self) -> &'static str {
        "levenshtein"
    }

    fn integral(&self) -> bool {
        true
    }
}

impl Metric<String> for Levenshtein {
    fn distance(&self, a: &String, b: &String) -> Result<f64, MetricError> {
        Ok(levenshtein_distance(a.as_bytes(), b.as_bytes()) as f64)
    }

    fn tag(&self) -> &'static str {
        "levenshtein"
    }

    fn integral(&self) -> bool {
        true
    }
}

/// Wraps a metric and counts successful evaluations.
///
/// Intended to be created per query (or per build) and read afterwards;
/// the counter is atomic so a shared instance still counts correctly.
#[derive(Debug, Default)]
pub struct CountingMetric<M> {
    inner: M,
    calls: AtomicU64,
}

impl<M> CountingMetric<M> {
    pub fn new(inner: M) -> Self {
        Self::with_calls(inner, 0)
    }

    pub fn with_calls(inner: M, calls: u64) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(calls),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) -> u64 {
        self.calls.swap(0, Ordering::Relaxed)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn into_inner(self) -> M {
        self.inner
    }
}

impl<T: ?Sized, M: Metric<T>> Metric<T> for CountingMetric<M> {
    fn distance(&self, a: &T, b: &T) -> Result<f64, MetricError> {
        let d = self.inner.distance(a, b)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(d)
    }

    fn tag(&self) -> &'static str {
        self.inner.tag()
    }

    fn integral(&self) -> bool {
        self.inner.integral()
    }
}
