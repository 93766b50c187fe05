//! Packed, immutable R-tree whose in-memory form is byte-for-byte its file.
//!
//! Records are ordered along a Hilbert curve and grouped sixteen to a node;
//! each upper level groups sixteen consecutive nodes of the level below. A
//! tree is a single buffer:
//!
//! ```text
//! [0, 4096)            header (see `Header`)
//! [4096, ..)           node boxes, root level first, 32 bytes each
//! [page aligned, ..)   leaf records, RECORD_SIZE bytes each
//! ```
//!
//! Because children are addressed arithmetically, nothing has to be parsed
//! at load time: a memory-mapped file is queried in place and pages are
//! faulted in as the traversal touches them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs::{self, File};
use std::io::Write;
use std::marker::PhantomData;
use std::ops::{ControlFlow, Range};
use std::path::Path;

use memmap2::Mmap;

use super::record::{get_f64, get_u64, put_f64, put_u64, IndexKind, Measurable, Record};
use crate::error::{Error, Result};
use crate::{BoundingBox, WorldPoint};

pub const MAGIC: [u8; 8] = *b"PXRTREE\0";
pub const FORMAT_VERSION: u32 = 1;
pub const PAGE_SIZE: usize = 4096;
pub const FANOUT: usize = 16;
const NODE_SIZE: usize = 32;
const HEADER_CRC_SPAN: usize = 100;

/// Traversal counters, accumulated across queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Tree nodes whose children were examined.
    pub nodes_visited: u64,
    /// Leaf records tested against the query.
    pub records_tested: u64,
}

impl QueryStats {
    pub fn merge(&mut self, o: &QueryStats) {
        self.nodes_visited += o.nodes_visited;
        self.records_tested += o.records_tested;
    }
}

enum Storage {
    Owned(Vec<u8>),
    Mapped(Mmap),
}

impl Storage {
    #[inline]
    fn bytes(&self) -> &[u8] {
        match self {
            Storage::Owned(v) => v,
            Storage::Mapped(m) => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Header {
    kind: IndexKind,
    record_size: u32,
    fanout: u32,
    count: u64,
    mbr: BoundingBox,
    node_count: u64,
    node_offset: u64,
    record_offset: u64,
    total_len: u64,
    body_crc: u32,
}

impl Header {
    fn write(&self, page: &mut [u8]) {
        page[..PAGE_SIZE].fill(0);
        page[0..8].copy_from_slice(&MAGIC);
        page[8..12].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        page[12..16].copy_from_slice(&(self.kind as u32).to_le_bytes());
        page[16..20].copy_from_slice(&self.record_size.to_le_bytes());
        page[20..24].copy_from_slice(&self.fanout.to_le_bytes());
        put_u64(page, 24, self.count);
        put_f64(page, 32, self.mbr.min_x);
        put_f64(page, 40, self.mbr.min_y);
        put_f64(page, 48, self.mbr.max_x);
        put_f64(page, 56, self.mbr.max_y);
        put_u64(page, 64, self.node_count);
        put_u64(page, 72, self.node_offset);
        put_u64(page, 80, self.record_offset);
        put_u64(page, 88, self.total_len);
        page[96..100].copy_from_slice(&self.body_crc.to_le_bytes());
        let crc = crc32fast::hash(&page[..HEADER_CRC_SPAN]);
        page[100..104].copy_from_slice(&crc.to_le_bytes());
    }

    fn read(buf: &[u8]) -> Result<Header> {
        if buf.len() < PAGE_SIZE {
            return Err(Error::Truncated { expected: PAGE_SIZE as u64, actual: buf.len() as u64 });
        }
        if buf[0..8] != MAGIC {
            return Err(Error::IndexFormat("bad magic".into()));
        }
        let u32_at = |off: usize| u32::from_le_bytes(buf[off..off + 4].try_into().unwrap());
        let stored_crc = u32_at(100);
        if crc32fast::hash(&buf[..HEADER_CRC_SPAN]) != stored_crc {
            return Err(Error::Checksum);
        }
        let version = u32_at(8);
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        let kind = IndexKind::from_u32(u32_at(12))
            .ok_or_else(|| Error::IndexFormat(format!("unknown node kind {}", u32_at(12))))?;
        Ok(Header {
            kind,
            record_size: u32_at(16),
            fanout: u32_at(20),
            count: get_u64(buf, 24),
            mbr: BoundingBox {
                min_x: get_f64(buf, 32),
                min_y: get_f64(buf, 40),
                max_x: get_f64(buf, 48),
                max_y: get_f64(buf, 56),
            },
            node_count: get_u64(buf, 64),
            node_offset: get_u64(buf, 72),
            record_offset: get_u64(buf, 80),
            total_len: get_u64(buf, 88),
            body_crc: u32_at(96),
        })
    }
}

/// Reads the node kind of an index file without mapping it.
pub fn peek_kind(path: &Path) -> Result<IndexKind> {
    use std::io::Read;
    let mut page = vec![0u8; PAGE_SIZE];
    let mut f = File::open(path)?;
    let mut filled = 0;
    while filled < PAGE_SIZE {
        match f.read(&mut page[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    page.truncate(filled);
    Ok(Header::read(&page)?.kind)
}

/// Node counts per level, bottom (leaf parents) first.
fn level_sizes(count: usize) -> Vec<usize> {
    let mut sizes = vec![count.div_ceil(FANOUT)];
    while *sizes.last().unwrap() > 1 {
        let next = sizes.last().unwrap().div_ceil(FANOUT);
        sizes.push(next);
    }
    sizes
}

fn round_up(v: usize, to: usize) -> usize {
    v.div_ceil(to) * to
}

/// Position along a 2^16 × 2^16 Hilbert curve.
fn hilbert(mut x: u32, mut y: u32) -> u64 {
    const N: u32 = 1 << 16;
    let mut d = 0u64;
    let mut s = N / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = N - 1 - x;
                y = N - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    level: u32,
    node: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on distance
        o.dist.total_cmp(&self.dist).then_with(|| o.node.cmp(&self.node))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Slack on the pruning bound so that box distances that round up never hide
/// a record whose own distance rounds down to the current best.
#[inline]
fn prune_limit(best: f64) -> f64 {
    best + best * 1e-12
}

pub struct PackedRTree<R> {
    storage: Storage,
    header: Header,
    /// Global node index ranges per level, root first.
    levels: Vec<Range<usize>>,
    _marker: PhantomData<fn() -> R>,
}

impl<R: Record> std::fmt::Debug for PackedRTree<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PackedRTree")
            .field("kind", &self.header.kind)
            .field("count", &self.header.count)
            .field("levels", &self.levels.len())
            .field("mapped", &self.is_mapped())
            .finish()
    }
}

impl<R: Record> PackedRTree<R> {
    /// Bulk-loads a tree. Record order in the input does not matter.
    pub fn build(records: Vec<R>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let count = records.len();
        let mbr = records.iter().fold(BoundingBox::empty(), |acc, r| acc.union(&r.bbox()));

        let scale = |v: f64, lo: f64, span: f64| -> u32 {
            if span > 0.0 {
                (((v - lo) / span) * 65535.0).clamp(0.0, 65535.0) as u32
            } else {
                0
            }
        };
        let (w, h) = (mbr.width(), mbr.height());
        let mut order: Vec<(u64, u64, u32)> = records
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let c = r.bbox().center();
                let key = hilbert(scale(c.x, mbr.min_x, w), scale(c.y, mbr.min_y, h));
                (key, r.id(), k as u32)
            })
            .collect();
        order.sort_unstable();

        let sizes = level_sizes(count);
        let node_count: usize = sizes.iter().sum();
        let node_offset = PAGE_SIZE;
        let record_offset = round_up(node_offset + node_count * NODE_SIZE, PAGE_SIZE);
        let total_len = round_up(record_offset + count * R::SIZE, PAGE_SIZE);
        let mut buf = vec![0u8; total_len];

        for (slot, &(_, _, k)) in order.iter().enumerate() {
            let off = record_offset + slot * R::SIZE;
            records[k as usize].encode(&mut buf[off..off + R::SIZE]);
        }
        drop(records);

        // Global offsets: root level first, so the bottom level sits last.
        let mut level_start = vec![0usize; sizes.len()];
        let mut acc = 0;
        for (lvl, size) in sizes.iter().enumerate().rev() {
            level_start[lvl] = acc;
            acc += size;
        }
        let write_box = |buf: &mut [u8], g: usize, b: &BoundingBox| {
            let off = node_offset + g * NODE_SIZE;
            put_f64(buf, off, b.min_x);
            put_f64(buf, off + 8, b.min_y);
            put_f64(buf, off + 16, b.max_x);
            put_f64(buf, off + 24, b.max_y);
        };
        let mut below: Vec<BoundingBox> = (0..count)
            .map(|slot| {
                let off = record_offset + slot * R::SIZE;
                R::decode(&buf[off..off + R::SIZE]).bbox()
            })
            .collect();
        for (lvl, &size) in sizes.iter().enumerate() {
            let boxes: Vec<BoundingBox> = (0..size)
                .map(|n| {
                    let end = ((n + 1) * FANOUT).min(below.len());
                    below[n * FANOUT..end].iter().fold(BoundingBox::empty(), |acc, b| acc.union(b))
                })
                .collect();
            for (n, b) in boxes.iter().enumerate() {
                write_box(&mut buf, level_start[lvl] + n, b);
            }
            below = boxes;
        }

        let mut header = Header {
            kind: R::KIND,
            record_size: R::SIZE as u32,
            fanout: FANOUT as u32,
            count: count as u64,
            mbr,
            node_count: node_count as u64,
            node_offset: node_offset as u64,
            record_offset: record_offset as u64,
            total_len: total_len as u64,
            body_crc: 0,
        };
        header.body_crc = crc32fast::hash(&buf[PAGE_SIZE..]);
        header.write(&mut buf[..PAGE_SIZE]);
        Self::from_storage(Storage::Owned(buf), header)
    }

    fn from_storage(storage: Storage, header: Header) -> Result<Self> {
        if header.kind != R::KIND {
            return Err(Error::IndexFormat(format!("expected a {:?} index, file holds {:?}", R::KIND, header.kind)));
        }
        if header.record_size as usize != R::SIZE || header.fanout as usize != FANOUT {
            return Err(Error::IndexFormat("record size or fanout mismatch".into()));
        }
        let count = header.count as usize;
        if count == 0 {
            return Err(Error::EmptyInput);
        }
        let sizes = level_sizes(count);
        let node_count: usize = sizes.iter().sum();
        let records_end = header.record_offset as usize + count * R::SIZE;
        if node_count as u64 != header.node_count
            || header.node_offset as usize != PAGE_SIZE
            || (header.record_offset as usize) < PAGE_SIZE + node_count * NODE_SIZE
            || records_end as u64 > header.total_len
        {
            return Err(Error::IndexFormat("inconsistent section layout".into()));
        }
        let actual = storage.bytes().len() as u64;
        if actual < header.total_len {
            return Err(Error::Truncated { expected: header.total_len, actual });
        }
        let mut levels = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &size in sizes.iter().rev() {
            levels.push(start..start + size);
            start += size;
        }
        Ok(PackedRTree { storage, header, levels, _marker: PhantomData })
    }

    /// Memory-maps an index file. Only the header is read eagerly.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        if len < PAGE_SIZE as u64 {
            return Err(Error::Truncated { expected: PAGE_SIZE as u64, actual: len });
        }
        // SAFETY: index files are written once via rename and never modified in place.
        let map = unsafe { Mmap::map(&file)? };
        let header = Header::read(&map)?;
        Self::from_storage(Storage::Mapped(map), header)
    }

    /// Reads the whole file into memory instead of mapping it.
    pub fn load_eager(path: &Path) -> Result<Self> {
        let buf = fs::read(path)?;
        let header = Header::read(&buf)?;
        Self::from_storage(Storage::Owned(buf), header)
    }

    /// Writes the tree atomically (temporary file + rename).
    pub fn persist(&self, path: &Path) -> Result<()> {
        let file_name = path
            .file_name()
            .ok_or_else(|| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty path")))?;
        let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&self.storage.bytes()[..self.header.total_len as usize])?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Full body checksum. Loading only validates the header.
    pub fn verify(&self) -> Result<()> {
        let body = &self.storage.bytes()[PAGE_SIZE..self.header.total_len as usize];
        if crc32fast::hash(body) != self.header.body_crc {
            return Err(Error::Checksum);
        }
        Ok(())
    }

    pub fn kind(&self) -> IndexKind {
        self.header.kind
    }

    pub fn len(&self) -> usize {
        self.header.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.header.count == 0
    }

    pub fn mbr(&self) -> BoundingBox {
        self.header.mbr
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn is_mapped(&self) -> bool {
        matches!(self.storage, Storage::Mapped(_))
    }

    /// Records in storage (Hilbert) order.
    pub fn records(&self) -> impl Iterator<Item = R> + '_ {
        (0..self.len()).map(move |k| self.record(k))
    }

    #[inline]
    fn record(&self, slot: usize) -> R {
        let off = self.header.record_offset as usize + slot * R::SIZE;
        R::decode(&self.storage.bytes()[off..off + R::SIZE])
    }

    #[inline]
    fn node_box(&self, g: usize) -> BoundingBox {
        let buf = self.storage.bytes();
        let off = self.header.node_offset as usize + g * NODE_SIZE;
        BoundingBox {
            min_x: get_f64(buf, off),
            min_y: get_f64(buf, off + 8),
            max_x: get_f64(buf, off + 16),
            max_y: get_f64(buf, off + 24),
        }
    }

    /// Children of node `g` on `level`: node indices, or record slots when
    /// `level` is the bottom level.
    #[inline]
    fn children(&self, level: usize, g: usize) -> Range<usize> {
        let local = g - self.levels[level].start;
        if level + 1 == self.levels.len() {
            local * FANOUT..((local + 1) * FANOUT).min(self.len())
        } else {
            let next = &self.levels[level + 1];
            next.start + local * FANOUT..(next.start + (local + 1) * FANOUT).min(next.end)
        }
    }

    /// Calls `f` for every record whose envelope overlaps `b`, or, when
    /// `exact`, whose geometry intersects `b`. `f` may stop the traversal.
    pub fn visit<F>(&self, b: &BoundingBox, exact: bool, stats: &mut QueryStats, mut f: F)
    where
        F: FnMut(&R) -> ControlFlow<()>,
    {
        let bottom = self.levels.len() - 1;
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(4 * FANOUT);
        if self.node_box(0).intersects(b) {
            stack.push((0, 0));
        }
        while let Some((level, g)) = stack.pop() {
            stats.nodes_visited += 1;
            let children = self.children(level, g);
            if level == bottom {
                for slot in children {
                    stats.records_tested += 1;
                    let r = self.record(slot);
                    let hit = if exact { r.intersects_box(b) } else { r.bbox().intersects(b) };
                    if hit && f(&r).is_break() {
                        return;
                    }
                }
            } else {
                for child in children.rev() {
                    if self.node_box(child).intersects(b) {
                        stack.push((level + 1, child));
                    }
                }
            }
        }
    }

    /// All records whose geometry intersects `b`.
    pub fn intersecting(&self, b: &BoundingBox) -> Vec<R> {
        let mut out = Vec::new();
        self.visit(b, true, &mut QueryStats::default(), |r| {
            out.push(*r);
            ControlFlow::Continue(())
        });
        out
    }

    /// The first record found whose geometry intersects `b` (a limit-1 query).
    pub fn any_intersecting(&self, b: &BoundingBox, stats: &mut QueryStats) -> Option<R> {
        let mut found = None;
        self.visit(b, true, stats, |r| {
            found = Some(*r);
            ControlFlow::Break(())
        });
        found
    }
}

impl<R: Measurable> PackedRTree<R> {
    /// Nearest record to `p` among those within `max_dist`, together with its distance.
    ///
    /// Equidistant records resolve to the smallest id, so the answer is a
    /// function of the record set alone and not of the tree layout.
    pub fn nearest_within(&self, p: &WorldPoint, max_dist: f64, stats: &mut QueryStats) -> Option<(R, f64)> {
        let bottom = self.levels.len() - 1;
        let mut best: Option<(R, f64)> = None;
        let mut bound = max_dist;
        let mut heap = BinaryHeap::with_capacity(2 * FANOUT);
        let root_d = self.node_box(0).distance_sq_to(p).sqrt();
        if root_d <= prune_limit(bound) {
            heap.push(Candidate { dist: root_d, level: 0, node: 0 });
        }
        while let Some(c) = heap.pop() {
            if c.dist > prune_limit(bound) {
                break;
            }
            stats.nodes_visited += 1;
            let level = c.level as usize;
            let children = self.children(level, c.node);
            if level == bottom {
                for slot in children {
                    stats.records_tested += 1;
                    let r = self.record(slot);
                    let d = r.distance_to(p);
                    if d > bound {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some((b, bd)) => d < *bd || (d == *bd && r.id() < b.id()),
                    };
                    if better {
                        best = Some((r, d));
                        bound = d;
                    }
                }
            } else {
                let limit = prune_limit(bound);
                for child in children {
                    let d = self.node_box(child).distance_sq_to(p).sqrt();
                    if d <= limit {
                        heap.push(Candidate { dist: d, level: c.level + 1, node: child });
                    }
                }
            }
        }
        best
    }

    pub fn nearest(&self, p: &WorldPoint) -> Option<(R, f64)> {
        self.nearest_within(p, f64::INFINITY, &mut QueryStats::default())
    }
}
