//! In-memory vector store of ⟨intent, preference⟩ pairs with soft aging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intent::embed::cosine;
use crate::qoe::{PreferenceVector, QoEMetrics};

/// One stored experience: an intent, its embedding, and the preference it
/// maps to. `merge_count` tracks how many raw experiences were folded in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentEntry {
    pub intent_text: String,
    pub embedding: Vec<f64>,
    pub preference: PreferenceVector,
    /// Event-counter timestamp (not wall clock): deterministic tests.
    pub timestamp: u64,
    pub merge_count: u32,
    pub outcome_summary: Option<QoEMetrics>,
}

impl IntentEntry {
    /// Unit-norm embedding and simplex preference, both within 1e-6.
    pub fn validate(&self) -> Result<()> {
        let norm: f64 = self.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "entry {:?} has non-unit embedding (norm {norm})",
                self.intent_text
            )));
        }
        self.preference.check_simplex()?;
        if self.merge_count == 0 {
            return Err(Error::InvalidArgument("merge_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Exhaustive-scan vector store with an event-counter clock.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntentStore {
    pub entries: Vec<IntentEntry>,
    /// Next timestamp to hand out; also "now" for aging.
    pub clock: u64,
    /// Embedding width every entry must match.
    pub dim: usize,
}

impl IntentStore {
    pub fn new(dim: usize) -> Self {
        IntentStore { entries: Vec::new(), clock: 0, dim }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Hand out the current event time and advance the clock.
    pub fn tick(&mut self) -> u64 {
        let now = self.clock;
        self.clock += 1;
        now
    }

    /// Indices and aged scores of the up-to-`k` best entries.
    ///
    /// Score = cosine(query, entry) · exp(−λ · age) with age measured from
    /// the store clock; ties prefer the newer entry. Exhaustive scan.
    pub fn retrieve_topk(&self, query: &[f64], k: usize, lambda: f64) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("retrieval needs k >= 1".into()));
        }
        if query.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "query dimension {} does not match store dimension {}",
                query.len(),
                self.dim
            )));
        }
        if lambda < 0.0 {
            return Err(Error::InvalidArgument("aging lambda must be non-negative".into()));
        }
        let now = self.clock;
        let mut scored: Vec<(usize, f64)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let age = now.saturating_sub(e.timestamp) as f64;
                (i, cosine(query, &e.embedding) * (-lambda * age).exp())
            })
            .collect();
        scored.sort_by(|(ia, sa), (ib, sb)| {
            sb.partial_cmp(sa)
                .expect("scores are finite")
                .then_with(|| self.entries[*ib].timestamp.cmp(&self.entries[*ia].timestamp))
                .then_with(|| ia.cmp(ib))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Index and similarity of the most similar entry, if any.
    pub fn max_cosine(&self, embedding: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let c = cosine(embedding, &e.embedding);
            // Strict comparison keeps the earliest entry on ties.
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((i, c));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::embed::{embed, DEFAULT_DIM};

    fn entry(text: &str, ts: u64) -> IntentEntry {
        IntentEntry {
            intent_text: text.into(),
            embedding: embed(text, DEFAULT_DIM).unwrap(),
            preference: PreferenceVector::uniform(),
            timestamp: ts,
            merge_count: 1,
            outcome_summary: None,
        }
    }

    fn store_with(texts: &[(&str, u64)]) -> IntentStore {
        let mut s = IntentStore::new(DEFAULT_DIM);
        for (t, ts) in texts {
            s.entries.push(entry(t, *ts));
            s.clock = s.clock.max(ts + 1);
        }
        s
    }

    #[test]
    fn self_query_ranks_first_with_unit_score_when_aging_off() {
        let s = store_with(&[("video surveillance feed", 0), ("budget batch sync", 1)]);
        let q = embed("video surveillance feed", DEFAULT_DIM).unwrap();
        let top = s.retrieve_topk(&q, 1, 0.0).unwrap();
        assert_eq!(top[0].0, 0);
        assert!((top[0].1 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn aged_score_matches_hand_arithmetic() {
        // cosine 0.9 at age 100 under lambda 0.01 → 0.9·e^{-1} ≈ 0.33109.
        let mut s = store_with(&[("alpha beta gamma", 0)]);
        s.clock = 100;
        let q = embed("alpha beta gamma", DEFAULT_DIM).unwrap();
        let top = s.retrieve_topk(&q, 1, 0.01).unwrap();
        let expect = 1.0 * (-1.0f64).exp();
        assert!((top[0].1 - expect).abs() <= 1e-9, "score {}", top[0].1);
    }

    #[test]
    fn equal_scores_break_toward_newer_entries() {
        let s = store_with(&[("identical wording", 3), ("identical wording", 7)]);
        let q = embed("identical wording", DEFAULT_DIM).unwrap();
        let top = s.retrieve_topk(&q, 2, 0.0).unwrap();
        assert_eq!(top[0].0, 1, "newer entry must rank first on ties");
        assert_eq!(top[1].0, 0);
    }

    #[test]
    fn k_truncates_and_oversized_k_returns_everything() {
        let s = store_with(&[("one", 0), ("two", 1), ("three", 2)]);
        let q = embed("one", DEFAULT_DIM).unwrap();
        assert_eq!(s.retrieve_topk(&q, 2, 0.0).unwrap().len(), 2);
        assert_eq!(s.retrieve_topk(&q, 99, 0.0).unwrap().len(), 3);
        assert!(s.retrieve_topk(&q, 0, 0.0).is_err());
    }

    #[test]
    fn empty_store_returns_empty_list() {
        let s = IntentStore::new(DEFAULT_DIM);
        let q = embed("anything", DEFAULT_DIM).unwrap();
        assert!(s.retrieve_topk(&q, 4, 0.002).unwrap().is_empty());
    }

    #[test]
    fn topk_with_zero_lambda_matches_brute_force_cosine_sort() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let words = ["link", "edge", "core", "video", "probe", "cache", "radio", "fiber"];
        let mut s = IntentStore::new(DEFAULT_DIM);
        for ts in 0..200u64 {
            let text: Vec<&str> =
                (0..rng.gen_range(2..6)).map(|_| words[rng.gen_range(0..words.len())]).collect();
            s.entries.push(entry(&text.join(" "), ts));
        }
        s.clock = 200;
        let q = embed("video edge cache", DEFAULT_DIM).unwrap();
        let top = s.retrieve_topk(&q, 10, 0.0).unwrap();
        let mut brute: Vec<(usize, f64)> = s
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, cosine(&q, &e.embedding)))
            .collect();
        brute.sort_by(|(ia, sa), (ib, sb)| {
            sb.partial_cmp(sa)
                .unwrap()
                .then_with(|| s.entries[*ib].timestamp.cmp(&s.entries[*ia].timestamp))
                .then_with(|| ia.cmp(ib))
        });
        for (got, want) in top.iter().zip(brute.iter().take(10)) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = IntentStore::new(DEFAULT_DIM);
        assert!(s.retrieve_topk(&[0.5; 8], 1, 0.0).is_err());
    }
}
