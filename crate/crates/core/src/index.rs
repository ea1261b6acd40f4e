//! Balanced spatial tree over feature points with minimum bounding
//! rectangles.
//!
//! The tree is packed bottom-up with sort-tile-recursive ordering: entries
//! are tiled into even chunks along successive dimensions, and each level
//! is grouped the same way until a single root remains. After `build` the
//! tree is immutable, so any number of threads may query it concurrently.
//!
//! Query statistics count logical node visits (a node is touched when its
//! contents are examined), not physical pages.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{QueryRegion, RegionPolicy};

/// Axis-aligned minimum bounding rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mbr {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl Mbr {
    fn of_point(p: &[f64]) -> Self {
        Self {
            low: p.to_vec(),
            high: p.to_vec(),
        }
    }

    fn merge_point(&mut self, p: &[f64]) {
        for ((lo, hi), &x) in self.low.iter_mut().zip(&mut self.high).zip(p) {
            *lo = lo.min(x);
            *hi = hi.max(x);
        }
    }

    fn merge(&mut self, other: &Mbr) {
        for ((lo, hi), (olo, ohi)) in self
            .low
            .iter_mut()
            .zip(&mut self.high)
            .zip(other.low.iter().zip(&other.high))
        {
            *lo = lo.min(*olo);
            *hi = hi.max(*ohi);
        }
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    fn center(&self, d: usize) -> f64 {
        0.5 * (self.low[d] + self.high[d])
    }

    fn contains_point(&self, p: &[f64]) -> bool {
        self.low
            .iter()
            .zip(&self.high)
            .zip(p)
            .all(|((lo, hi), x)| *lo <= *x && *x <= *hi)
    }

    fn contains_mbr(&self, other: &Mbr) -> bool {
        self.low
            .iter()
            .zip(&self.high)
            .zip(other.low.iter().zip(&other.high))
            .all(|((lo, hi), (olo, ohi))| *lo <= *olo && *ohi <= *hi)
    }

    fn overlaps_region(&self, region: &QueryRegion) -> bool {
        (0..self.dim()).all(|d| self.low[d] <= region.high(d) && self.high[d] >= region.low(d))
    }

    /// Overlap test after growing this rectangle by `delta` in every
    /// direction: the pruning predicate of the tree-to-tree join.
    fn extended_overlaps(&self, other: &Mbr, delta: f64) -> bool {
        (0..self.dim())
            .all(|d| self.low[d] - delta <= other.high[d] && self.high[d] + delta >= other.low[d])
    }

    /// Squared distance from `q` to the nearest point of the rectangle.
    fn min_dist_sq(&self, q: &[f64]) -> f64 {
        self.low
            .iter()
            .zip(&self.high)
            .zip(q)
            .map(|((lo, hi), x)| {
                let d = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }
}

/// Counters for one query: logical node visits and filter output size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexStats {
    pub nodes_touched: usize,
    pub candidates: usize,
}

/// A leaf payload: one feature point and the id of its source sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf(Vec<usize>),     // indices into `entries`
    Internal(Vec<usize>), // indices into `nodes`
}

#[derive(Debug, Clone)]
struct Node {
    mbr: Mbr,
    kind: NodeKind,
}

/// Immutable MBR tree built by bulk loading.
#[derive(Debug, Clone)]
pub struct MbrTree {
    dim: usize,
    max_fanout: usize,
    entries: Vec<IndexEntry>,
    nodes: Vec<Node>,
    root: Option<usize>,
    height: usize,
}

/// Split `len` items into `ceil(len / max)` consecutive chunks whose sizes
/// differ by at most one. For `len > max` every chunk holds at least
/// `max / 2` items, which is the tree's minimum fanout.
fn even_chunks(len: usize, max: usize) -> Vec<Range<usize>> {
    let count = len.div_ceil(max).max(1);
    let base = len / count;
    let rem = len % count;
    let mut ranges = Vec::with_capacity(count);
    let mut start = 0;
    for i in 0..count {
        let size = base + usize::from(i < rem);
        ranges.push(start..start + size);
        start += size;
    }
    ranges
}

/// Sort-tile-recursive ordering: sort by the current dimension, carve the
/// run into roughly `groups^(1/remaining)` slabs, and recurse on the next
/// dimension inside each slab.
fn str_tile(
    items: &mut [usize],
    key: &impl Fn(usize, usize) -> f64,
    d: usize,
    dims: usize,
    chunk: usize,
) {
    let groups = items.len().div_ceil(chunk);
    if groups <= 1 {
        return;
    }
    items.sort_by(|&a, &b| key(a, d).total_cmp(&key(b, d)));
    if d + 1 == dims {
        return;
    }
    let slabs = (groups as f64)
        .powf(1.0 / (dims - d) as f64)
        .ceil()
        .max(1.0) as usize;
    let per = items.len().div_ceil(slabs);
    let mut start = 0;
    while start < items.len() {
        let end = (start + per).min(items.len());
        str_tile(&mut items[start..end], key, d + 1, dims, chunk);
        start = end;
    }
}

impl MbrTree {
    /// Bulk-load a tree over the given points.
    pub fn build(entries: Vec<IndexEntry>, max_fanout: usize) -> Result<Self> {
        if max_fanout < 4 {
            return Err(Error::FanoutTooSmall(max_fanout));
        }
        if entries.is_empty() {
            return Ok(Self {
                dim: 0,
                max_fanout,
                entries,
                nodes: Vec::new(),
                root: None,
                height: 0,
            });
        }
        let dim = entries[0].coords.len();
        for e in &entries {
            if e.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.coords.len(),
                });
            }
            if let Some(&bad) = e.coords.iter().find(|c| !c.is_finite()) {
                return Err(Error::NonFiniteCoordinate(bad));
            }
        }

        let mut tree = Self {
            dim,
            max_fanout,
            entries,
            nodes: Vec::new(),
            root: None,
            height: 0,
        };

        // leaf level
        let mut order: Vec<usize> = (0..tree.entries.len()).collect();
        {
            let entries = &tree.entries;
            str_tile(&mut order, &|i, d| entries[i].coords[d], 0, dim, max_fanout);
        }
        let mut level: Vec<usize> = Vec::new();
        for range in even_chunks(order.len(), max_fanout) {
            let members: Vec<usize> = order[range].to_vec();
            let mut mbr = Mbr::of_point(&tree.entries[members[0]].coords);
            for &m in &members[1..] {
                mbr.merge_point(&tree.entries[m].coords);
            }
            tree.nodes.push(Node {
                mbr,
                kind: NodeKind::Leaf(members),
            });
            level.push(tree.nodes.len() - 1);
        }
        tree.height = 1;

        // upper levels
        while level.len() > 1 {
            {
                let nodes = &tree.nodes;
                str_tile(
                    &mut level,
                    &|i, d| nodes[i].mbr.center(d),
                    0,
                    dim,
                    max_fanout,
                );
            }
            let mut next = Vec::new();
            for range in even_chunks(level.len(), max_fanout) {
                let members: Vec<usize> = level[range].to_vec();
                let mut mbr = tree.nodes[members[0]].mbr.clone();
                for &m in &members[1..] {
                    let child = tree.nodes[m].mbr.clone();
                    mbr.merge(&child);
                }
                tree.nodes.push(Node {
                    mbr,
                    kind: NodeKind::Internal(members),
                });
                next.push(tree.nodes.len() - 1);
            }
            level = next;
            tree.height += 1;
        }
        tree.root = Some(level[0]);
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_fanout(&self) -> usize {
        self.max_fanout
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other,
            });
        }
        Ok(())
    }

    /// All entries whose points lie inside the closed rectangle `region`.
    pub fn range_search(&self, region: &QueryRegion) -> Result<(Vec<String>, IndexStats)> {
        let mut stats = IndexStats::default();
        let mut ids = Vec::new();
        let Some(root) = self.root else {
            return Ok((ids, stats));
        };
        self.check_dim(region.dim())?;
        self.range_rec(root, region, &mut ids, &mut stats);
        stats.candidates = ids.len();
        Ok((ids, stats))
    }

    fn range_rec(
        &self,
        node: usize,
        region: &QueryRegion,
        out: &mut Vec<String>,
        stats: &mut IndexStats,
    ) {
        stats.nodes_touched += 1;
        match &self.nodes[node].kind {
            NodeKind::Leaf(members) => {
                for &m in members {
                    let e = &self.entries[m];
                    if region.contains(&e.coords) {
                        out.push(e.id.clone());
                    }
                }
            }
            NodeKind::Internal(children) => {
                for &c in children {
                    if self.nodes[c].mbr.overlaps_region(region) {
                        self.range_rec(c, region, out, stats);
                    }
                }
            }
        }
    }

    /// Entries in nondecreasing bound distance from `q`, produced lazily by
    /// best-first traversal. Ties resolve to the smaller id.
    pub fn best_first<'a>(
        &'a self,
        q: &'a [f64],
        bound: RegionPolicy,
    ) -> Result<BestFirstIter<'a>> {
        if self.root.is_some() {
            self.check_dim(q.len())?;
        }
        let mut heap = BinaryHeap::new();
        if let Some(root) = self.root {
            heap.push(std::cmp::Reverse(QueueItem {
                dist: (bound.weight() * self.nodes[root].mbr.min_dist_sq(q)).sqrt(),
                is_entry: false,
                id: "",
                idx: root,
            }));
        }
        Ok(BestFirstIter {
            tree: self,
            q,
            bound,
            heap,
            stats: IndexStats::default(),
        })
    }

    /// The `k_out` entries with smallest bound distance to `q`.
    pub fn nearest_neighbors(
        &self,
        q: &[f64],
        k_out: usize,
        bound: RegionPolicy,
    ) -> Result<(Vec<(String, f64)>, IndexStats)> {
        if k_out == 0 {
            return Err(Error::ZeroNeighbors);
        }
        let mut iter = self.best_first(q, bound)?;
        let mut out = Vec::new();
        for (entry, dist) in iter.by_ref() {
            out.push((entry.id.clone(), dist));
            if out.len() == k_out {
                break;
            }
        }
        let mut stats = iter.stats();
        stats.candidates = out.len();
        Ok((out, stats))
    }

    /// All entry pairs from `self` x `other` whose coordinates differ by
    /// less than the policy gap in every dimension.
    pub fn join(
        &self,
        other: &MbrTree,
        epsilon: f64,
        policy: RegionPolicy,
    ) -> Result<(Vec<(String, String)>, IndexStats)> {
        self.join_impl(other, epsilon, policy, false)
    }

    /// Join of the tree with itself, excluding `(x, x)` and emitting each
    /// unordered pair once, ids in ascending order.
    pub fn self_join(
        &self,
        epsilon: f64,
        policy: RegionPolicy,
    ) -> Result<(Vec<(String, String)>, IndexStats)> {
        self.join_impl(self, epsilon, policy, true)
    }

    fn join_impl(
        &self,
        other: &MbrTree,
        epsilon: f64,
        policy: RegionPolicy,
        same: bool,
    ) -> Result<(Vec<(String, String)>, IndexStats)> {
        crate::metrics::check_epsilon(epsilon)?;
        let mut stats = IndexStats::default();
        let mut pairs = Vec::new();
        let (Some(ra), Some(rb)) = (self.root, other.root) else {
            return Ok((pairs, stats));
        };
        self.check_dim(other.dim)?;
        let delta = policy.half_width(epsilon);
        self.join_rec(other, ra, rb, delta, same, &mut pairs, &mut stats);
        stats.candidates = pairs.len();
        Ok((pairs, stats))
    }

    #[allow(clippy::too_many_arguments)]
    fn join_rec(
        &self,
        other: &MbrTree,
        a: usize,
        b: usize,
        delta: f64,
        same: bool,
        out: &mut Vec<(String, String)>,
        stats: &mut IndexStats,
    ) {
        if !self.nodes[a]
            .mbr
            .extended_overlaps(&other.nodes[b].mbr, delta)
        {
            return;
        }
        // counted like range search: a pair is touched when its contents
        // are examined, not when its rectangles are tested
        stats.nodes_touched += 1;
        match (&self.nodes[a].kind, &other.nodes[b].kind) {
            (NodeKind::Leaf(ea), NodeKind::Leaf(eb)) => {
                if same && a == b {
                    for (i, &x) in ea.iter().enumerate() {
                        for &y in &ea[i + 1..] {
                            self.emit_pair(other, x, y, delta, same, out);
                        }
                    }
                } else {
                    for &x in ea {
                        for &y in eb {
                            self.emit_pair(other, x, y, delta, same, out);
                        }
                    }
                }
            }
            (NodeKind::Internal(ca), NodeKind::Internal(cb)) => {
                if same && a == b {
                    for (i, &x) in ca.iter().enumerate() {
                        for &y in &ca[i..] {
                            self.join_rec(other, x, y, delta, same, out, stats);
                        }
                    }
                } else {
                    for &x in ca {
                        for &y in cb {
                            self.join_rec(other, x, y, delta, same, out, stats);
                        }
                    }
                }
            }
            (NodeKind::Leaf(_), NodeKind::Internal(cb)) => {
                for &y in cb {
                    self.join_rec(other, a, y, delta, same, out, stats);
                }
            }
            (NodeKind::Internal(ca), NodeKind::Leaf(_)) => {
                for &x in ca {
                    self.join_rec(other, x, b, delta, same, out, stats);
                }
            }
        }
    }

    fn emit_pair(
        &self,
        other: &MbrTree,
        x: usize,
        y: usize,
        delta: f64,
        same: bool,
        out: &mut Vec<(String, String)>,
    ) {
        let ex = &self.entries[x];
        let ey = &other.entries[y];
        let close = ex
            .coords
            .iter()
            .zip(&ey.coords)
            .all(|(p, q)| (p - q).abs() < delta);
        if !close {
            return;
        }
        if same {
            let (lo, hi) = if ex.id <= ey.id { (ex, ey) } else { (ey, ex) };
            out.push((lo.id.clone(), hi.id.clone()));
        } else {
            out.push((ex.id.clone(), ey.id.clone()));
        }
    }

    /// Write a snapshot holding dimension, fanout, and all leaf entries.
    /// Coordinates round-trip bit-exactly.
    pub fn write_snapshot<W: Write>(&self, w: W) -> Result<()> {
        let snap = Snapshot {
            dimension: self.dim,
            max_fanout: self.max_fanout,
            entries: self.entries.clone(),
        };
        serde_json::to_writer(w, &snap).map_err(|e| Error::BadSnapshot(e.to_string()))
    }

    /// Rebuild a tree from a snapshot produced by [`MbrTree::write_snapshot`].
    pub fn read_snapshot<R: Read>(r: R) -> Result<Self> {
        let snap: Snapshot =
            serde_json::from_reader(r).map_err(|e| Error::BadSnapshot(e.to_string()))?;
        if let Some(bad) = snap
            .entries
            .iter()
            .find(|e| e.coords.len() != snap.dimension)
        {
            return Err(Error::BadSnapshot(format!(
                "entry `{}` has {} coordinates, snapshot dimension is {}",
                bad.id,
                bad.coords.len(),
                snap.dimension
            )));
        }
        Self::build(snap.entries, snap.max_fanout)
    }

    /// Structural integrity check: MBR containment on a full tree walk,
    /// fanout bounds, and entry-count conservation.
    pub fn sanity_check(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else {
            return if self.entries.is_empty() {
                Ok(())
            } else {
                Err("entries present but no root".into())
            };
        };
        let mut seen = vec![false; self.entries.len()];
        self.sanity_rec(root, true, &mut seen)?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(format!("entry {missing} not reachable from the root"));
        }
        Ok(())
    }

    fn sanity_rec(
        &self,
        node: usize,
        is_root: bool,
        seen: &mut [bool],
    ) -> std::result::Result<(), String> {
        let n = &self.nodes[node];
        let min = self.max_fanout / 2;
        match &n.kind {
            NodeKind::Leaf(members) => {
                if members.is_empty() {
                    return Err(format!("leaf {node} is empty"));
                }
                if members.len() > self.max_fanout || (!is_root && members.len() < min) {
                    return Err(format!("leaf {node} has fanout {}", members.len()));
                }
                for &m in members {
                    if seen[m] {
                        return Err(format!("entry {m} reached twice"));
                    }
                    seen[m] = true;
                    if !n.mbr.contains_point(&self.entries[m].coords) {
                        return Err(format!("leaf {node} does not contain entry {m}"));
                    }
                }
            }
            NodeKind::Internal(children) => {
                if children.len() > self.max_fanout || (!is_root && children.len() < min) {
                    return Err(format!("node {node} has fanout {}", children.len()));
                }
                for &c in children {
                    if !n.mbr.contains_mbr(&self.nodes[c].mbr) {
                        return Err(format!("node {node} does not contain child {c}"));
                    }
                    self.sanity_rec(c, false, seen)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    dimension: usize,
    max_fanout: usize,
    entries: Vec<IndexEntry>,
}

struct QueueItem<'a> {
    dist: f64,
    is_entry: bool,
    id: &'a str,
    idx: usize,
}

impl PartialEq for QueueItem<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueItem<'_> {}

impl PartialOrd for QueueItem<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        // nodes sort before entries at equal distance so an entry is only
        // emitted once no closer node remains unexplored
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.is_entry.cmp(&other.is_entry))
            .then_with(|| self.id.cmp(other.id))
            .then_with(|| self.idx.cmp(&other.idx))
    }
}

/// Lazy best-first traversal; see [`MbrTree::best_first`].
pub struct BestFirstIter<'a> {
    tree: &'a MbrTree,
    q: &'a [f64],
    bound: RegionPolicy,
    heap: BinaryHeap<std::cmp::Reverse<QueueItem<'a>>>,
    stats: IndexStats,
}

impl BestFirstIter<'_> {
    /// Node visits so far; `candidates` is left to the caller's notion of
    /// how many emitted entries it consumed.
    pub fn stats(&self) -> IndexStats {
        self.stats
    }
}

impl<'a> Iterator for BestFirstIter<'a> {
    type Item = (&'a IndexEntry, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(std::cmp::Reverse(item)) = self.heap.pop() {
            if item.is_entry {
                return Some((&self.tree.entries[item.idx], item.dist));
            }
            self.stats.nodes_touched += 1;
            match &self.tree.nodes[item.idx].kind {
                NodeKind::Leaf(members) => {
                    for &m in members {
                        let e = &self.tree.entries[m];
                        self.heap.push(std::cmp::Reverse(QueueItem {
                            dist: self.bound.bound_distance(self.q, &e.coords),
                            is_entry: true,
                            id: &e.id,
                            idx: m,
                        }));
                    }
                }
                NodeKind::Internal(children) => {
                    for &c in children {
                        let mbr = &self.tree.nodes[c].mbr;
                        self.heap.push(std::cmp::Reverse(QueueItem {
                            dist: (self.bound.weight() * mbr.min_dist_sq(self.q)).sqrt(),
                            is_entry: false,
                            id: "",
                            idx: c,
                        }));
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, coords: &[f64]) -> IndexEntry {
        IndexEntry {
            id: id.into(),
            coords: coords.to_vec(),
        }
    }

    #[test]
    fn empty_tree_answers_nothing() {
        let tree = MbrTree::build(Vec::new(), 8).unwrap();
        assert!(tree.is_empty());
        let region = QueryRegion::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let (ids, stats) = tree.range_search(&region).unwrap();
        assert!(ids.is_empty());
        assert_eq!(stats.nodes_touched, 0);
        let (nn, _) = tree
            .nearest_neighbors(&[0.0, 0.0], 3, RegionPolicy::Symmetric)
            .unwrap();
        assert!(nn.is_empty());
        let (pairs, _) = tree.self_join(1.0, RegionPolicy::Baseline).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn single_point_tree_has_degenerate_mbr() {
        let tree = MbrTree::build(vec![entry("a", &[1.5, -2.0])], 8).unwrap();
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.height(), 1);
        tree.sanity_check().unwrap();
        let region = QueryRegion::new(vec![1.5, -2.0], vec![0.0, 0.0]).unwrap();
        let (ids, _) = tree.range_search(&region).unwrap();
        assert_eq!(ids, vec!["a".to_string()]);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            MbrTree::build(vec![entry("a", &[0.0])], 2),
            Err(Error::FanoutTooSmall(2))
        ));
        let mixed = vec![entry("a", &[0.0, 0.0]), entry("b", &[1.0])];
        assert!(matches!(
            MbrTree::build(mixed, 8),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn range_search_checks_dimensions() {
        let tree = MbrTree::build(vec![entry("a", &[0.0, 0.0])], 8).unwrap();
        let region = QueryRegion::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            tree.range_search(&region),
            Err(Error::DimensionMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn full_extent_region_returns_everything() {
        let entries: Vec<IndexEntry> = (0..100)
            .map(|i| entry(&format!("e{i:03}"), &[i as f64, (i * 7 % 13) as f64]))
            .collect();
        let tree = MbrTree::build(entries, 8).unwrap();
        tree.sanity_check().unwrap();
        let region = QueryRegion::new(vec![50.0, 6.0], vec![100.0, 100.0]).unwrap();
        let (ids, stats) = tree.range_search(&region).unwrap();
        assert_eq!(ids.len(), 100);
        assert_eq!(stats.candidates, 100);
    }

    #[test]
    fn nearest_neighbor_finds_exact_match_and_breaks_ties_by_id() {
        let entries = vec![
            entry("b", &[1.0, 0.0]),
            entry("a", &[1.0, 0.0]),
            entry("c", &[5.0, 5.0]),
        ];
        let tree = MbrTree::build(entries, 8).unwrap();
        let (nn, _) = tree
            .nearest_neighbors(&[1.0, 0.0], 2, RegionPolicy::Symmetric)
            .unwrap();
        assert_eq!(nn[0].0, "a");
        assert_eq!(nn[0].1, 0.0);
        assert_eq!(nn[1].0, "b");
    }

    #[test]
    fn knn_with_k_equal_to_size_returns_all_sorted() {
        let entries: Vec<IndexEntry> = (0..50)
            .map(|i| {
                entry(
                    &format!("e{i:02}"),
                    &[(i as f64 * 0.37).sin(), (i as f64 * 0.61).cos()],
                )
            })
            .collect();
        let tree = MbrTree::build(entries, 8).unwrap();
        let (nn, _) = tree
            .nearest_neighbors(&[0.2, -0.3], 50, RegionPolicy::Baseline)
            .unwrap();
        assert_eq!(nn.len(), 50);
        for w in nn.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn join_boundary_gap_is_excluded() {
        let eps = 0.25;
        let a = MbrTree::build(
            vec![
                entry("p", &[0.0, 0.0]),
                entry("q", &[eps, 0.0]),
                entry("r", &[0.1, 0.0]),
            ],
            8,
        )
        .unwrap();
        let (pairs, _) = a.self_join(eps, RegionPolicy::Baseline).unwrap();
        // (p, q) sit at per-dimension gap exactly eps: excluded
        assert!(pairs.contains(&("p".into(), "r".into())));
        assert!(pairs.contains(&("q".into(), "r".into())));
        assert!(!pairs.iter().any(|(x, y)| x == "p" && y == "q"));
    }

    #[test]
    fn self_join_with_huge_epsilon_yields_all_pairs() {
        let entries: Vec<IndexEntry> = (0..20)
            .map(|i| entry(&format!("e{i:02}"), &[i as f64, -(i as f64)]))
            .collect();
        let tree = MbrTree::build(entries, 4).unwrap();
        let (pairs, _) = tree.self_join(1e6, RegionPolicy::Symmetric).unwrap();
        assert_eq!(pairs.len(), 20 * 19 / 2);
        // each unordered pair exactly once
        let mut sorted = pairs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), pairs.len());
    }

    #[test]
    fn snapshot_round_trips_coordinates_bit_exactly() {
        let entries: Vec<IndexEntry> = (0..37)
            .map(|i| {
                let x = (i as f64 * 0.123456789).sin() * 1e-3;
                let y = (i as f64 * 9.87654321).cos() * 1e7;
                entry(&format!("s{i}"), &[x, y])
            })
            .collect();
        let tree = MbrTree::build(entries.clone(), 8).unwrap();
        let mut buf = Vec::new();
        tree.write_snapshot(&mut buf).unwrap();
        let reloaded = MbrTree::read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(reloaded.dim(), tree.dim());
        assert_eq!(reloaded.max_fanout(), tree.max_fanout());
        let mut orig = entries;
        let mut back = reloaded.entries().to_vec();
        orig.sort_by(|a, b| a.id.cmp(&b.id));
        back.sort_by(|a, b| a.id.cmp(&b.id));
        for (a, b) in orig.iter().zip(&back) {
            assert_eq!(a.id, b.id);
            for (x, y) in a.coords.iter().zip(&b.coords) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn even_chunks_respects_min_fanout() {
        for len in 1..200usize {
            for max in [4usize, 8, 16] {
                let chunks = even_chunks(len, max);
                assert_eq!(chunks.iter().map(|r| r.len()).sum::<usize>(), len);
                for r in &chunks {
                    assert!(r.len() <= max);
                    if len > max {
                        assert!(r.len() >= max / 2, "len={len} max={max} chunk={}", r.len());
                    }
                }
            }
        }
    }
}
