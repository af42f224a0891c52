//! Incremental experience memory: outcome logging through a redundancy
//! gate, seed bootstrapping, and line-delimited snapshots.
//!
//! Aging happens at retrieval ([`IntentStore::retrieve_topk`]); nothing
//! here ever deletes an entry — redundant experiences are merged instead.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intent::{embed, IntentEntry, IntentStore};
use crate::qoe::{PreferenceVector, QoEMetrics};

/// Snapshot format version accepted by [`load`].
pub const SNAPSHOT_VERSION: u32 = 1;

/// What the redundancy gate did with a candidate entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOutcome {
    /// Candidate was novel; stored at `index`.
    Inserted { index: usize },
    /// Candidate folded into the existing entry at `index`.
    Merged { index: usize },
}

impl GateOutcome {
    /// Index of the entry that now carries the candidate's experience.
    pub fn index(&self) -> usize {
        match self {
            GateOutcome::Inserted { index } | GateOutcome::Merged { index } => *index,
        }
    }
}

/// Log one slicing outcome as a memory entry.
///
/// The text is embedded at the store's width, stamped with `timestamp`,
/// and passed through [`redundancy_gate`]; the store clock advances past
/// `timestamp` so retrieval ages this entry from zero.
pub fn log_outcome(
    store: &mut IntentStore,
    intent_text: &str,
    preference: PreferenceVector,
    metrics: Option<QoEMetrics>,
    timestamp: u64,
    tau: f64,
) -> Result<GateOutcome> {
    if intent_text.trim().is_empty() {
        return Err(Error::InvalidArgument("intent text is empty".into()));
    }
    preference.check_simplex()?;
    let candidate = IntentEntry {
        intent_text: intent_text.to_owned(),
        embedding: embed(intent_text, store.dim)?,
        preference,
        timestamp,
        merge_count: 1,
        outcome_summary: metrics,
    };
    let outcome = redundancy_gate(store, candidate, tau)?;
    store.clock = store.clock.max(timestamp + 1);
    Ok(outcome)
}

/// Insert `candidate` or fold it into its nearest neighbor.
///
/// If the best cosine against the store reaches `tau`, the candidate merges
/// into that entry: merge-count-weighted mean preference (kept on the
/// simplex), weighted mean embedding (re-unit-normalized), the newer
/// timestamp, and the candidate's outcome summary when it has one. No entry
/// is ever deleted.
pub fn redundancy_gate(
    store: &mut IntentStore,
    candidate: IntentEntry,
    tau: f64,
) -> Result<GateOutcome> {
    if !tau.is_finite() {
        return Err(Error::InvalidArgument("redundancy threshold must be finite".into()));
    }
    if candidate.embedding.len() != store.dim {
        return Err(Error::InvalidArgument(format!(
            "candidate dimension {} does not match store dimension {}",
            candidate.embedding.len(),
            store.dim
        )));
    }
    candidate.validate()?;
    match store.max_cosine(&candidate.embedding) {
        Some((index, best)) if best >= tau => {
            merge_into(&mut store.entries[index], &candidate)?;
            Ok(GateOutcome::Merged { index })
        }
        _ => {
            store.entries.push(candidate);
            Ok(GateOutcome::Inserted { index: store.entries.len() - 1 })
        }
    }
}

/// Fold `candidate` into `entry`, weighting by how many raw experiences
/// each side already represents.
fn merge_into(entry: &mut IntentEntry, candidate: &IntentEntry) -> Result<()> {
    let w_old = f64::from(entry.merge_count);
    let w_new = f64::from(candidate.merge_count);
    let mean = |a: f64, b: f64| (w_old * a + w_new * b) / (w_old + w_new);

    let p = entry.preference.as_array();
    let q = candidate.preference.as_array();
    entry.preference =
        PreferenceVector::from_raw(mean(p[0], q[0]), mean(p[1], q[1]), mean(p[2], q[2]))?;

    for (e, c) in entry.embedding.iter_mut().zip(&candidate.embedding) {
        *e = mean(*e, *c);
    }
    let norm = entry.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 1e-9 {
        return Err(Error::InvalidArgument(
            "merged embedding collapsed to zero; redundancy threshold too permissive".into(),
        ));
    }
    for e in entry.embedding.iter_mut() {
        *e /= norm;
    }

    entry.timestamp = entry.timestamp.max(candidate.timestamp);
    entry.merge_count += candidate.merge_count;
    if candidate.outcome_summary.is_some() {
        entry.outcome_summary = candidate.outcome_summary;
    }
    Ok(())
}

/// One record of the bundled bootstrap corpus: an intent and the preference
/// weights its slice ended up with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub intent_text: String,
    /// (latency, reliability, economics) weights.
    pub preference: [f64; 3],
}

static SEED: OnceLock<Vec<SeedRecord>> = OnceLock::new();

/// The bootstrap corpus shipped with the crate (see `data/memory_seed.json`).
pub fn seed_records() -> &'static [SeedRecord] {
    SEED.get_or_init(|| {
        serde_json::from_str(include_str!("../data/memory_seed.json"))
            .expect("bundled memory seed parses")
    })
}

/// Outcome of a bootstrap pass over a record list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BootstrapReport {
    pub inserted: usize,
    pub merged: usize,
    /// (record index, why it was skipped).
    pub skipped: Vec<(usize, String)>,
}

/// Log `records` through the redundancy gate, all at timestamp 0.
///
/// Invalid records are skipped and reported rather than aborting the pass.
pub fn bootstrap(store: &mut IntentStore, records: &[SeedRecord], tau: f64) -> BootstrapReport {
    let mut report = BootstrapReport::default();
    for (i, r) in records.iter().enumerate() {
        let pref = match PreferenceVector::new(r.preference[0], r.preference[1], r.preference[2]) {
            Ok(p) => p,
            Err(e) => {
                report.skipped.push((i, e.to_string()));
                continue;
            }
        };
        match log_outcome(store, &r.intent_text, pref, None, 0, tau) {
            Ok(GateOutcome::Inserted { .. }) => report.inserted += 1,
            Ok(GateOutcome::Merged { .. }) => report.merged += 1,
            Err(e) => report.skipped.push((i, e.to_string())),
        }
    }
    report
}

/// On-disk shape of one snapshot line.
#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    version: u32,
    intent_text: String,
    embedding: Vec<f64>,
    preference: [f64; 3],
    timestamp: u64,
    merge_count: u32,
}

/// Write `store` as line-delimited JSON, one entry per line.
///
/// Outcome summaries are diagnostic and not persisted.
pub fn snapshot(store: &IntentStore, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for e in &store.entries {
        let rec = SnapshotRecord {
            version: SNAPSHOT_VERSION,
            intent_text: e.intent_text.clone(),
            embedding: e.embedding.clone(),
            preference: e.preference.as_array(),
            timestamp: e.timestamp,
            merge_count: e.merge_count,
        };
        let line = serde_json::to_string(&rec)
            .map_err(|err| Error::Parse(format!("serializing snapshot record: {err}")))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a snapshot back into a store.
///
/// The store width comes from the first record (default width for an empty
/// file); the clock resumes one past the newest timestamp. Any malformed
/// line fails with its 1-based line number.
pub fn load(path: &Path) -> Result<IntentStore> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries: Vec<IntentEntry> = Vec::new();
    let mut dim = embed::DEFAULT_DIM;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SnapshotRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Snapshot { line: line_no, reason: e.to_string() })?;
        if rec.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot {
                line: line_no,
                reason: format!("unsupported version {} (expected {SNAPSHOT_VERSION})", rec.version),
            });
        }
        let preference =
            PreferenceVector::new(rec.preference[0], rec.preference[1], rec.preference[2])
                .map_err(|e| Error::Snapshot { line: line_no, reason: e.to_string() })?;
        let entry = IntentEntry {
            intent_text: rec.intent_text,
            embedding: rec.embedding,
            preference,
            timestamp: rec.timestamp,
            merge_count: rec.merge_count,
            outcome_summary: None,
        };
        entry.validate().map_err(|e| Error::Snapshot { line: line_no, reason: e.to_string() })?;
        if entries.is_empty() {
            dim = entry.embedding.len();
        } else if entry.embedding.len() != dim {
            return Err(Error::Snapshot {
                line: line_no,
                reason: format!(
                    "embedding width {} differs from first record's {dim}",
                    entry.embedding.len()
                ),
            });
        }
        entries.push(entry);
    }
    let clock = entries.iter().map(|e| e.timestamp + 1).max().unwrap_or(0);
    Ok(IntentStore { entries, clock, dim })
}
