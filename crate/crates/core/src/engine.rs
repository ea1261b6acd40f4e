//! Filter-and-refine query pipelines over an indexed dataset.
//!
//! Queries run in the normalized space: the query and every candidate are
//! brought to normal form before the exact distance is computed. The index
//! filter never dismisses a true answer, so refinement only removes false
//! positives.
//!
//! Indexing is exclusive; a built engine is immutable and all query
//! operations may run concurrently from any number of threads.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BinaryHeap;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::datagen::{export_csv, ingest_csv, CsvLayout, IngestOptions};
use crate::error::{Error, Result};
use crate::index::{IndexEntry, MbrTree};
use crate::metrics::{make_region, true_distance, RegionPolicy};
use crate::signal::{extract_features, normalize, NormalizationParams, TimeSequence};

/// A raw sequence kept for the refine step, with the parameters that were
/// removed when its feature point was extracted.
#[derive(Debug, Clone)]
pub struct StoredSequence {
    pub sequence: TimeSequence,
    pub norm: NormalizationParams,
}

/// Id-keyed map of the raw sequences behind the index.
#[derive(Debug, Clone, Default)]
pub struct SequenceStore {
    map: BTreeMap<String, StoredSequence>,
}

impl SequenceStore {
    pub fn get(&self, id: &str) -> Option<&StoredSequence> {
        self.map.get(id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &StoredSequence)> {
        self.map.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }
}

/// A sequence the indexer could not admit, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedSequence {
    pub id: String,
    pub reason: String,
}

/// Outcome of one query: exact answers plus filter-cost accounting.
#[derive(Debug, Clone)]
pub struct QueryReport<A> {
    pub policy: RegionPolicy,
    pub epsilon: Option<f64>,
    pub answers: Vec<A>,
    pub candidates: usize,
    pub false_positives: usize,
    pub nodes_touched: usize,
    pub elapsed: Duration,
    pub note: Option<String>,
}

pub type RangeReport = QueryReport<(String, f64)>;
pub type PairReport = QueryReport<(String, String, f64)>;

pub const REPORT_CSV_HEADER: &str =
    "policy,epsilon,answers,candidates,false_positives,nodes_touched,elapsed_micros";

impl<A> QueryReport<A> {
    pub fn csv_row(&self) -> String {
        let eps = self.epsilon.map(|e| e.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.policy.label(),
            eps,
            self.answers.len(),
            self.candidates,
            self.false_positives,
            self.nodes_touched,
            self.elapsed.as_micros()
        )
    }
}

/// An indexed dataset: spatial tree over feature points plus the raw
/// sequence store used for refinement.
#[derive(Debug, Clone)]
pub struct Engine {
    tree: MbrTree,
    store: SequenceStore,
    k: usize,
    seq_len: usize,
}

impl Engine {
    /// Normalize, feature, and index every sequence. Constant sequences
    /// have no normal form; they are skipped and reported.
    pub fn index_dataset(
        seqs: Vec<TimeSequence>,
        k: usize,
        max_fanout: usize,
    ) -> Result<(Engine, Vec<SkippedSequence>)> {
        let mut store = SequenceStore::default();
        let mut entries = Vec::new();
        let mut skipped = Vec::new();
        let mut seq_len = 0usize;

        for seq in seqs {
            if seq_len == 0 {
                seq_len = seq.len();
            } else if seq.len() != seq_len {
                return Err(Error::RaggedLengths {
                    id: seq.id().to_string(),
                    left: seq_len,
                    right: seq.len(),
                });
            }
            match extract_features(&seq, k) {
                Ok(feature) => {
                    if store.map.contains_key(seq.id()) {
                        return Err(Error::DuplicateId {
                            id: seq.id().to_string(),
                        });
                    }
                    entries.push(IndexEntry {
                        id: feature.id.clone(),
                        coords: feature.coords,
                    });
                    store.map.insert(
                        seq.id().to_string(),
                        StoredSequence {
                            sequence: seq,
                            norm: feature.norm,
                        },
                    );
                }
                Err(Error::ZeroStd { id }) => skipped.push(SkippedSequence {
                    id,
                    reason: "zero standard deviation".into(),
                }),
                Err(other) => return Err(other),
            }
        }

        let tree = MbrTree::build(entries, max_fanout)?;
        Ok((
            Engine {
                tree,
                store,
                k,
                seq_len,
            },
            skipped,
        ))
    }

    pub fn tree(&self) -> &MbrTree {
        &self.tree
    }

    pub fn store(&self) -> &SequenceStore {
        &self.store
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Common length of the indexed sequences.
    pub fn sequence_len(&self) -> usize {
        self.seq_len
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    /// Largest amplitude of the first stored coefficient over the dataset;
    /// the natural unit for query thresholds.
    pub fn max_amp(&self) -> Result<f64> {
        if self.tree.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(self
            .tree
            .entries()
            .iter()
            .map(|e| e.coords[0].hypot(e.coords[1]))
            .fold(0.0, f64::max))
    }

    fn query_features(&self, q: &TimeSequence) -> Result<(TimeSequence, Vec<f64>)> {
        if q.len() != self.seq_len {
            return Err(Error::LengthMismatch {
                left: self.seq_len,
                right: q.len(),
            });
        }
        let feature = extract_features(q, self.k)?;
        let (normalized, _) = normalize(q)?;
        Ok((normalized, feature.coords))
    }

    /// Exact normalized distance from an already-normalized query to the
    /// stored sequence `id`, re-normalized on the fly.
    fn refine_distance(&self, q_norm: &TimeSequence, id: &str) -> Result<f64> {
        let stored = self
            .store
            .get(id)
            .ok_or_else(|| Error::UnknownSequence { id: id.to_string() })?;
        let (x_norm, _) = normalize(&stored.sequence)?;
        true_distance(q_norm, &x_norm)
    }

    /// All sequences within normalized distance `epsilon` of `q`.
    ///
    /// Both policies return the same answer set; they differ only in how
    /// many candidates and node visits the filter costs.
    pub fn range_query(
        &self,
        q: &TimeSequence,
        epsilon: f64,
        policy: RegionPolicy,
    ) -> Result<RangeReport> {
        crate::metrics::check_epsilon(epsilon)?;
        if self.is_empty() {
            return Ok(QueryReport {
                policy,
                epsilon: Some(epsilon),
                answers: Vec::new(),
                candidates: 0,
                false_positives: 0,
                nodes_touched: 0,
                elapsed: Duration::ZERO,
                note: Some("empty index".into()),
            });
        }
        let start = Instant::now();
        let (q_norm, coords) = self.query_features(q)?;
        let feature = crate::signal::SpectrumFeature {
            id: q.id().to_string(),
            k: self.k,
            coords,
            norm: NormalizationParams {
                mean: 0.0,
                std: 1.0,
            },
        };
        let region = make_region(&feature, epsilon, policy)?;
        let (candidate_ids, stats) = self.tree.range_search(&region)?;

        let mut answers = Vec::new();
        for id in &candidate_ids {
            let dist = self.refine_distance(&q_norm, id)?;
            if dist < epsilon {
                answers.push((id.clone(), dist));
            }
        }
        answers.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

        Ok(QueryReport {
            policy,
            epsilon: Some(epsilon),
            false_positives: stats.candidates - answers.len(),
            answers,
            candidates: stats.candidates,
            nodes_touched: stats.nodes_touched,
            elapsed: start.elapsed(),
            note: None,
        })
    }

    /// Exact k nearest sequences by normalized distance, via best-first
    /// traversal on the double-weighted lower bound.
    pub fn knn_query(&self, q: &TimeSequence, k_out: usize) -> Result<RangeReport> {
        self.knn_query_with_bound(q, k_out, RegionPolicy::Symmetric)
    }

    /// As [`Engine::knn_query`], but traversing under the chosen bound
    /// distance. Both bounds give the same exact answers; the tighter one
    /// refines fewer candidates.
    pub fn knn_query_with_bound(
        &self,
        q: &TimeSequence,
        k_out: usize,
        bound: RegionPolicy,
    ) -> Result<RangeReport> {
        if k_out == 0 {
            return Err(Error::ZeroNeighbors);
        }
        let note = if k_out > self.len() {
            Some(format!(
                "k_out {} exceeds dataset size {}; returning all",
                k_out,
                self.len()
            ))
        } else {
            None
        };
        if self.is_empty() {
            return Ok(QueryReport {
                policy: bound,
                epsilon: None,
                answers: Vec::new(),
                candidates: 0,
                false_positives: 0,
                nodes_touched: 0,
                elapsed: Duration::ZERO,
                note,
            });
        }

        let start = Instant::now();
        let (q_norm, coords) = self.query_features(q)?;
        let mut iter = self.tree.best_first(&coords, bound)?;
        let mut top: BinaryHeap<RefineItem> = BinaryHeap::new();
        let mut refined = 0usize;

        // a candidate is final once its true distance is at most the best
        // lower bound of everything unexplored
        for (entry, bound_dist) in iter.by_ref() {
            if top.len() == k_out {
                let worst = top.peek().expect("heap is non-empty");
                if bound_dist > worst.dist {
                    break;
                }
            }
            let dist = self.refine_distance(&q_norm, &entry.id)?;
            refined += 1;
            top.push(RefineItem {
                dist,
                id: entry.id.clone(),
            });
            if top.len() > k_out {
                top.pop();
            }
        }

        let mut answers: Vec<(String, f64)> =
            top.into_iter().map(|item| (item.id, item.dist)).collect();
        answers.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

        Ok(QueryReport {
            policy: bound,
            epsilon: None,
            false_positives: refined - answers.len(),
            answers,
            candidates: refined,
            nodes_touched: iter.stats().nodes_touched,
            elapsed: start.elapsed(),
            note,
        })
    }

    /// All unordered pairs of indexed sequences within normalized distance
    /// `epsilon` of each other.
    pub fn all_pairs(&self, epsilon: f64, policy: RegionPolicy) -> Result<PairReport> {
        crate::metrics::check_epsilon(epsilon)?;
        let start = Instant::now();
        let (pairs, stats) = self.tree.self_join(epsilon, policy)?;

        let mut answers = Vec::new();
        for (a, b) in &pairs {
            let a_norm = normalize(&self.store.get(a).expect("indexed id").sequence)?.0;
            let dist = self.refine_distance(&a_norm, b)?;
            if dist < epsilon {
                answers.push((a.clone(), b.clone(), dist));
            }
        }
        answers.sort_by(|x, y| {
            x.2.total_cmp(&y.2)
                .then_with(|| x.0.cmp(&y.0))
                .then_with(|| x.1.cmp(&y.1))
        });

        Ok(QueryReport {
            policy,
            epsilon: Some(epsilon),
            false_positives: stats.candidates - answers.len(),
            answers,
            candidates: stats.candidates,
            nodes_touched: stats.nodes_touched,
            elapsed: start.elapsed(),
            note: None,
        })
    }

    /// All cross pairs within normalized distance `epsilon`, one sequence
    /// from each engine. Same recursion as [`Engine::all_pairs`], without
    /// the self-pair exclusion.
    pub fn join_with(
        &self,
        other: &Engine,
        epsilon: f64,
        policy: RegionPolicy,
    ) -> Result<PairReport> {
        crate::metrics::check_epsilon(epsilon)?;
        if !self.is_empty() && !other.is_empty() && self.seq_len != other.seq_len {
            return Err(Error::LengthMismatch {
                left: self.seq_len,
                right: other.seq_len,
            });
        }
        let start = Instant::now();
        let (pairs, stats) = self.tree.join(&other.tree, epsilon, policy)?;

        let mut answers = Vec::new();
        for (a, b) in &pairs {
            let a_norm = normalize(&self.store.get(a).expect("indexed id").sequence)?.0;
            let dist = other.refine_distance(&a_norm, b)?;
            if dist < epsilon {
                answers.push((a.clone(), b.clone(), dist));
            }
        }
        answers.sort_by(|x, y| {
            x.2.total_cmp(&y.2)
                .then_with(|| x.0.cmp(&y.0))
                .then_with(|| x.1.cmp(&y.1))
        });

        Ok(QueryReport {
            policy,
            epsilon: Some(epsilon),
            false_positives: stats.candidates - answers.len(),
            answers,
            candidates: stats.candidates,
            nodes_touched: stats.nodes_touched,
            elapsed: start.elapsed(),
            note: None,
        })
    }

    /// Write the dataset snapshot: index file plus sequence store file.
    pub fn save(&self, index_path: &Path, store_path: &Path) -> Result<()> {
        let file = std::fs::File::create(index_path)?;
        self.tree.write_snapshot(std::io::BufWriter::new(file))?;
        let seqs: Vec<TimeSequence> = self.store.iter().map(|(_, s)| s.sequence.clone()).collect();
        export_csv(&seqs, store_path, CsvLayout::Row)
    }

    /// Rebuild an engine from the two snapshot files.
    pub fn load(index_path: &Path, store_path: &Path) -> Result<Engine> {
        let file = std::fs::File::open(index_path)?;
        let tree = MbrTree::read_snapshot(std::io::BufReader::new(file))?;
        let seqs = ingest_csv(store_path, CsvLayout::Row, &IngestOptions::default())?;

        let mut store = SequenceStore::default();
        let mut seq_len = 0usize;
        for seq in seqs {
            seq_len = seq.len();
            let (_, norm) = normalize(&seq)?;
            store.map.insert(
                seq.id().to_string(),
                StoredSequence {
                    sequence: seq,
                    norm,
                },
            );
        }
        for entry in tree.entries() {
            if store.get(&entry.id).is_none() {
                return Err(Error::BadSnapshot(format!(
                    "indexed id `{}` missing from the sequence store",
                    entry.id
                )));
            }
        }
        let k = tree.dim() / 2;
        Ok(Engine {
            tree,
            store,
            k,
            seq_len,
        })
    }
}

struct RefineItem {
    dist: f64,
    id: String,
}

impl PartialEq for RefineItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RefineItem {}

impl PartialOrd for RefineItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RefineItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap keeps the worst (distance, id) on top so ties keep the
        // smaller id
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.id.cmp(&other.id))
    }
}
