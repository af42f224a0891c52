//! Intent-to-preference inference: embedding, retrieval, few-shot prompting,
//! a pluggable completion client, and total (never-failing) parsing with a
//! class-default fallback.

pub mod client;
pub mod embed;
pub mod parse;
pub mod prompt;
pub mod store;

pub use client::{LlmClient, MockLlm};
pub use embed::{cosine, embed};
pub use parse::parse_preference;
pub use prompt::build_prompt;
pub use store::{IntentEntry, IntentStore};

use crate::config::{QoEClassId, RagConfig};
use crate::env::types::SliceRequest;
use crate::qoe::{class_default_preferences, PreferenceVector};
use crate::rl::train::PreferenceProvider;

/// Everything observable about one inference, for inspection tooling.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceDetail {
    pub preferences: PreferenceVector,
    /// Retrieved exemplar texts with their aged scores, best first.
    pub exemplars: Vec<(String, f64)>,
    /// True when both attempts failed and the class default was used.
    pub fell_back: bool,
}

/// End-to-end inference pipeline owning the store and a client handle.
pub struct IntentPipeline<C: LlmClient> {
    pub store: IntentStore,
    pub client: C,
    pub top_k: usize,
    pub aging_lambda: f64,
    /// Number of requests resolved by the class-default fallback.
    pub fallback_count: u64,
}

impl<C: LlmClient> IntentPipeline<C> {
    pub fn new(store: IntentStore, client: C, rag: &RagConfig) -> Self {
        IntentPipeline {
            store,
            client,
            top_k: rag.top_k,
            aging_lambda: rag.aging_lambda,
            fallback_count: 0,
        }
    }

    /// Infer preference weights for an intent text. Total: embedding or
    /// retrieval trouble degrades to zero-shot prompting, and two failed
    /// client/parse attempts fall back to the class default.
    pub fn infer_detailed(&mut self, intent_text: &str, class: QoEClassId) -> InferenceDetail {
        let retrieved: Vec<(usize, f64)> = embed::embed(intent_text, self.store.dim)
            .ok()
            .and_then(|q| self.store.retrieve_topk(&q, self.top_k.max(1), self.aging_lambda).ok())
            .unwrap_or_default();
        let exemplar_refs: Vec<&IntentEntry> =
            retrieved.iter().map(|(i, _)| &self.store.entries[*i]).collect();
        let prompt = build_prompt(intent_text, &exemplar_refs);
        let exemplars: Vec<(String, f64)> = retrieved
            .iter()
            .map(|(i, s)| (self.store.entries[*i].intent_text.clone(), *s))
            .collect();

        for _attempt in 0..2 {
            if let Ok(raw) = self.client.complete(&prompt) {
                if let Ok(prefs) = parse_preference(&raw) {
                    return InferenceDetail { preferences: prefs, exemplars, fell_back: false };
                }
            }
        }
        self.fallback_count += 1;
        InferenceDetail {
            preferences: class_default_preferences(class),
            exemplars,
            fell_back: true,
        }
    }

    /// Preference weights for a slice request.
    pub fn infer(&mut self, request: &SliceRequest) -> PreferenceVector {
        self.infer_detailed(&request.intent_text, request.class).preferences
    }
}

impl<C: LlmClient> PreferenceProvider for IntentPipeline<C> {
    fn preferences(&mut self, request: &SliceRequest) -> PreferenceVector {
        self.infer(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RagConfig;
    use crate::env::types::SliceId;
    use crate::intent::client::ScriptedClient;
    use crate::intent::embed::DEFAULT_DIM;

    fn request(text: &str, class: QoEClassId) -> SliceRequest {
        SliceRequest {
            id: SliceId(0),
            class,
            cpu: 2,
            mem: 2,
            chain_length: 2,
            intent_text: text.into(),
            arrival_index: 0,
        }
    }

    fn pipeline_with_mock() -> IntentPipeline<MockLlm> {
        IntentPipeline::new(IntentStore::new(DEFAULT_DIM), MockLlm, &RagConfig::default())
    }

    #[test]
    fn safety_intent_maps_through_the_mock_table() {
        let mut p = pipeline_with_mock();
        let req = request("safety critical actuator loop", QoEClassId::HighPriority);
        let prefs = p.infer(&req);
        assert_eq!(prefs.as_array(), [0.3, 0.5, 0.2]);
        assert_eq!(p.fallback_count, 0);
    }

    #[test]
    fn budget_intent_maps_to_economics_dominant_weights() {
        let mut p = pipeline_with_mock();
        let req = request("budget replication of archives", QoEClassId::BestEffort);
        assert_eq!(p.infer(&req).as_array(), [0.2, 0.2, 0.6]);
    }

    #[test]
    fn two_malformed_responses_fall_back_to_class_default() {
        let client = ScriptedClient {
            script: vec![Ok("garbage".into()), Ok("[9, 9, 9]".into())],
            calls: 0,
        };
        let mut p = IntentPipeline::new(
            IntentStore::new(DEFAULT_DIM),
            client,
            &RagConfig::default(),
        );
        let req = request("anything at all", QoEClassId::MediumPriority);
        let detail = p.infer_detailed(&req.intent_text, req.class);
        assert!(detail.fell_back);
        assert_eq!(detail.preferences, class_default_preferences(QoEClassId::MediumPriority));
        assert_eq!(p.fallback_count, 1);
        assert_eq!(p.client.calls, 2, "must retry exactly once");
    }

    #[test]
    fn first_failure_then_valid_response_succeeds_without_fallback() {
        let client = ScriptedClient {
            script: vec![
                Err(crate::error::Error::Client("connection reset".into())),
                Ok("[0.25, 0.5, 0.25]".into()),
            ],
            calls: 0,
        };
        let mut p = IntentPipeline::new(
            IntentStore::new(DEFAULT_DIM),
            client,
            &RagConfig::default(),
        );
        let detail = p.infer_detailed("some request", QoEClassId::BestEffort);
        assert!(!detail.fell_back);
        assert_eq!(detail.preferences.as_array(), [0.25, 0.5, 0.25]);
        assert_eq!(p.fallback_count, 0);
    }

    #[test]
    fn inference_always_lands_on_the_simplex() {
        let mut p = pipeline_with_mock();
        for (text, class) in [
            ("anything", QoEClassId::HighPriority),
            ("???", QoEClassId::MediumPriority),
            ("video budget safety latency", QoEClassId::BestEffort),
        ] {
            let detail = p.infer_detailed(text, class);
            detail.preferences.check_simplex().expect("simplex invariant");
        }
    }

    #[test]
    fn retrieval_populates_exemplars_once_store_has_entries() {
        let mut p = pipeline_with_mock();
        p.store.entries.push(IntentEntry {
            intent_text: "video wall for the atrium".into(),
            embedding: embed::embed("video wall for the atrium", DEFAULT_DIM).unwrap(),
            preference: PreferenceVector::new(0.4, 0.2, 0.4).unwrap(),
            timestamp: 0,
            merge_count: 1,
            outcome_summary: None,
        });
        p.store.clock = 1;
        let detail = p.infer_detailed("video feed for the lobby", QoEClassId::MediumPriority);
        assert_eq!(detail.exemplars.len(), 1);
        assert!(detail.exemplars[0].1 > 0.0);
    }
}
