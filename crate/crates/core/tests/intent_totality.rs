//! The intent pipeline is total: whatever the language-model client returns
//! (or refuses to return), every inference yields a valid preference simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slicesim::config::{Config, QoEClassId};
use slicesim::env::generate::intent_templates;
use slicesim::error::{Error, Result};
use slicesim::intent::client::LlmClient;
use slicesim::intent::store::IntentStore;
use slicesim::intent::IntentPipeline;
use slicesim::memory::{bootstrap, seed_records};

const CALLS: usize = 10_000;

/// Adversarial client cycling through valid, malformed, and failing replies.
struct FuzzClient {
    rng: ChaCha8Rng,
}

impl LlmClient for FuzzClient {
    fn complete(&mut self, _prompt: &str) -> Result<String> {
        let roll = self.rng.gen_range(0..12u32);
        Ok(match roll {
            0 => {
                let a: f64 = self.rng.gen();
                let b: f64 = self.rng.gen_range(0.0..(1.0 - a).max(1e-9));
                format!("[{a:.4}, {b:.4}, {:.4}]", (1.0 - a - b).max(0.0))
            }
            1 => "[0.55, 0.30, 0.15]".to_string(),
            2 => format!(
                "[{}, {}, {}]",
                self.rng.gen_range(-5.0..5.0),
                self.rng.gen_range(-5.0..5.0),
                self.rng.gen_range(-5.0..5.0)
            ),
            3 => "[NaN, 0.5, 0.5]".to_string(),
            4 => "[inf, -inf, 1.0]".to_string(),
            5 => "[0.5, 0.5]".to_string(),
            6 => "[0.1, 0.2, 0.3, 0.4]".to_string(),
            7 => String::new(),
            8 => "the weights should balance latency against cost".to_string(),
            9 => r#"{"latency": 0.5, "reliability": 0.3, "econ": 0.2}"#.to_string(),
            10 => format!("[{:e}, {:e}, 0.0]", f64::MAX, f64::MIN_POSITIVE),
            _ => return Err(Error::Client("synthetic outage".to_string())),
        })
    }
}

#[test]
fn ten_thousand_fuzzed_completions_always_yield_a_simplex() {
    let cfg = Config::default();
    let mut store = IntentStore::new(cfg.rag.embed_dim);
    let report = bootstrap(&mut store, seed_records(), cfg.rag.redundancy_tau);
    assert!(report.inserted > 0);
    let client = FuzzClient { rng: ChaCha8Rng::seed_from_u64(0xF022) };
    let mut pipeline = IntentPipeline::new(store, client, &cfg.rag);

    let templates = intent_templates();
    let classes = [QoEClassId::HighPriority, QoEClassId::MediumPriority, QoEClassId::BestEffort];
    let mut text_rng = ChaCha8Rng::seed_from_u64(0x7E57);

    for call in 0..CALLS {
        let class = classes[text_rng.gen_range(0..classes.len())];
        let text: String = match text_rng.gen_range(0..4u32) {
            // Realistic intents most of the time, degenerate text sometimes.
            0 | 1 => {
                let pool = templates.for_class(class);
                pool[text_rng.gen_range(0..pool.len())].clone()
            }
            2 => String::new(),
            _ => (0..text_rng.gen_range(0..40))
                .map(|_| char::from_u32(text_rng.gen_range(0x20..0x2FF)).unwrap_or('?'))
                .collect(),
        };
        let detail = pipeline.infer_detailed(&text, class);
        detail
            .preferences
            .check_simplex()
            .unwrap_or_else(|e| panic!("call {call} produced a non-simplex: {e}"));
        if detail.fell_back {
            detail.preferences.check_simplex().unwrap();
        }
    }
    // The adversarial mix must actually exercise the fallback path.
    assert!(pipeline.fallback_count > 0, "fuzz mix never forced the class-default fallback");
    assert!(
        pipeline.fallback_count < CALLS as u64,
        "fuzz mix never produced a parsable completion"
    );
}

#[test]
fn zero_shot_pipeline_is_total_on_an_empty_store() {
    let cfg = Config::default();
    let store = IntentStore::new(cfg.rag.embed_dim);
    let client = FuzzClient { rng: ChaCha8Rng::seed_from_u64(3) };
    let mut pipeline = IntentPipeline::new(store, client, &cfg.rag);
    for i in 0..500 {
        let detail = pipeline.infer_detailed("keep the feed smooth", QoEClassId::BestEffort);
        assert!(detail.exemplars.is_empty(), "empty store returned exemplars at call {i}");
        detail.preferences.check_simplex().unwrap();
    }
}
