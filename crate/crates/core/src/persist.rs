//! Versioned binary tree files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  "CMTINDEX"
//! version      u32
//! size         u64      number of objects (= number of nodes)
//! cascade      u64      ancestral level cap, u64::MAX for unbounded
//! metric tag   u16 length + UTF-8 bytes
//! seed         u64
//! build calls  u64
//! nodes        size records, preorder following child links:
//!                object u64, count u64, flags u8 (1 = left, 2 = right),
//!                interval count u32, then (near f64, far f64) per interval
//! objects      size records, each encoded by `ObjectCodec`
//! ```
//!
//! Floats are written as raw bit patterns, so a file read back and written
//! again is byte-identical.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::metric::{EuclideanPoint, Metric, Sequence};
use crate::tree::{BuildConfig, CascadeLimit, CmtNode, CmtTree, DistanceInterval, NodeId};

pub const MAGIC: &[u8; 8] = b"CMTINDEX";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a tree file (bad magic)")]
    BadMagic,
    #[error("unsupported tree file version {0}")]
    UnsupportedVersion(u32),
    #[error("tree was built with metric {found:?}, expected {expected:?}")]
    MetricMismatch { expected: String, found: String },
    #[error("unexpected end of tree file")]
    Truncated,
    #[error("corrupt tree file: {0}")]
    Corrupt(String),
}

/// Binary encoding of a stored object.
pub trait ObjectCodec: Sized {
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(input: &mut Cursor<'_>) -> Result<Self, PersistError>;
}

/// Read position over an in-memory tree file.
pub struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        if self.buf.len() < n {
            return Err(PersistError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn usize(&mut self) -> Result<usize, PersistError> {
        usize::try_from(self.u64()?).map_err(|_| PersistError::Corrupt("length overflow".into()))
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    put_u64(out, v.to_bits());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u64(out, b.len() as u64);
    out.extend_from_slice(b);
}

impl ObjectCodec for f64 {
    fn encode(&self, out: &mut Vec<u8>) {
        put_f64(out, *self);
    }

    fn decode(input: &mut Cursor<'_>) -> Result<Self, PersistError> {
        input.f64()
    }
}

impl ObjectCodec for EuclideanPoint {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for &c in self.coords() {
            put_f64(out, c);
        }
    }

    fn decode(input: &mut Cursor<'_>) -> Result<Self, PersistError> {
        let dim = input.u32()? as usize;
        let coords = (0..dim).map(|_| input.f64()).collect::<Result<Vec<_>, _>>()?;
        Ok(EuclideanPoint(coords))
    }
}

impl ObjectCodec for String {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, self.as_bytes());
    }

    fn decode(input: &mut Cursor<'_>) -> Result<Self, PersistError> {
        let len = input.usize()?;
        String::from_utf8(input.take(len)?.to_vec())
            .map_err(|e| PersistError::Corrupt(e.to_string()))
    }
}

impl ObjectCodec for Sequence {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, self.id.as_bytes());
        put_bytes(out, &self.symbols);
    }

    fn decode(input: &mut Cursor<'_>) -> Result<Self, PersistError> {
        let id = String::decode(input)?;
        let len = input.usize()?;
        Ok(Sequence::new(id, input.take(len)?))
    }
}

fn cascade_code(c: CascadeLimit) -> u64 {
    match c {
        CascadeLimit::Levels(n) => n as u64,
        CascadeLimit::Unbounded => u64::MAX,
    }
}

impl<T: ObjectCodec, M: Metric<T>> CmtTree<T, M> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_u64(&mut out, self.len() as u64);
        put_u64(&mut out, cascade_code(self.cascade()));
        let tag = self.metric().tag().as_bytes();
        out.extend_from_slice(&(tag.len() as u16).to_le_bytes());
        out.extend_from_slice(tag);
        put_u64(&mut out, self.seed());
        put_u64(&mut out, self.build_distance_calls());

        let mut stack: Vec<NodeId> = self.root().into_iter().collect();
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            put_u64(&mut out, node.object() as u64);
            put_u64(&mut out, node.count() as u64);
            let flags = u8::from(node.left().is_some()) | (u8::from(node.right().is_some()) << 1);
            out.push(flags);
            let ivs = self.intervals(id);
            out.extend_from_slice(&(ivs.len() as u32).to_le_bytes());
            for iv in ivs {
                put_f64(&mut out, iv.near);
                put_f64(&mut out, iv.far);
            }
            stack.extend(node.right());
            stack.extend(node.left());
        }

        for obj in &self.objects {
            obj.encode(&mut out);
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), PersistError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PersistError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Decodes a tree file. `metric` must carry the same tag as the one the
    /// tree was built with.
    pub fn from_bytes(bytes: &[u8], metric: M) -> Result<Self, PersistError> {
        let mut c = Cursor::new(bytes);
        if c.take(MAGIC.len())? != MAGIC {
            return Err(PersistError::BadMagic);
        }
        let version = c.u32()?;
        if version != VERSION {
            return Err(PersistError::UnsupportedVersion(version));
        }
        let size = c.usize()?;
        let cascade = match c.u64()? {
            u64::MAX => CascadeLimit::Unbounded,
            n => CascadeLimit::Levels(
                usize::try_from(n).map_err(|_| PersistError::Corrupt("cascade overflow".into()))?,
            ),
        };
        let tag_len = c.u16()? as usize;
        let tag = String::from_utf8_lossy(c.take(tag_len)?).into_owned();
        if tag != metric.tag() {
            return Err(PersistError::MetricMismatch {
                expected: metric.tag().to_string(),
                found: tag,
            });
        }
        let seed = c.u64()?;
        let build_distance_calls = c.u64()?;

        let mut nodes: Vec<CmtNode> = Vec::with_capacity(size);
        let mut intervals = Vec::new();
        if size > 0 {
            // (node id, flags) of nodes whose children are still to be read
            let mut pending: Vec<(NodeId, u8)> = Vec::new();
            let mut next_parent: Option<(NodeId, bool)> = None;
            loop {
                let depth = next_parent.map_or(0, |(p, _)| nodes[p].depth + 1);
                let id = nodes.len();
                if id >= size {
                    return Err(PersistError::Corrupt("more nodes than objects".into()));
                }
                let object = c.usize()?;
                let count = c.usize()?;
                let flags = c.u8()?;
                let n_iv = c.u32()? as usize;
                if n_iv == 0 {
                    return Err(PersistError::Corrupt(format!("node {id} has no intervals")));
                }
                let first_interval = intervals.len();
                for _ in 0..n_iv {
                    intervals.push(DistanceInterval::new(c.f64()?, c.f64()?));
                }
                if object >= size {
                    return Err(PersistError::Corrupt(format!("node {id} object {object} out of range")));
                }
                nodes.push(CmtNode {
                    object,
                    left: None,
                    right: None,
                    count,
                    depth,
                    first_interval,
                    interval_count: n_iv,
                });
                if let Some((p, is_left)) = next_parent {
                    if is_left {
                        nodes[p].left = Some(id);
                    } else {
                        nodes[p].right = Some(id);
                    }
                }
                pending.push((id, flags));

                // Next node in preorder: first unread child of the deepest pending node.
                next_parent = None;
                while let Some(&mut (p, ref mut f)) = pending.last_mut() {
                    if *f & 1 != 0 {
                        *f &= !1;
                        next_parent = Some((p, true));
                        break;
                    }
                    if *f & 2 != 0 {
                        *f &= !2;
                        next_parent = Some((p, false));
                        break;
                    }
                    pending.pop();
                }
                if next_parent.is_none() {
                    break;
                }
            }
            if nodes.len() != size {
                return Err(PersistError::Corrupt(format!(
                    "{} nodes for {size} objects",
                    nodes.len()
                )));
            }
        }

        let objects = (0..size).map(|_| T::decode(&mut c)).collect::<Result<Vec<_>, _>>()?;
        if !c.is_empty() {
            return Err(PersistError::Corrupt("trailing bytes".into()));
        }
        Ok(CmtTree {
            objects,
            nodes,
            intervals,
            metric,
            config: BuildConfig::new(cascade, seed),
            build_distance_calls,
        })
    }

    pub fn read_from<R: Read>(mut r: R, metric: M) -> Result<Self, PersistError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf, metric)
    }

    pub fn load(path: impl AsRef<Path>, metric: M) -> Result<Self, PersistError> {
        Self::from_bytes(&fs::read(path)?, metric)
    }
}
