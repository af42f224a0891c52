//! Memory-bank guarantees: aging favours fresh experience, the redundancy
//! gate bounds growth, snapshots are lossless, and logged traffic actually
//! improves retrieval for unseen intents.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slicesim::config::{Config, QoEClassId};
use slicesim::env::generate::intent_templates;
use slicesim::intent::embed::embed;
use slicesim::intent::store::IntentStore;
use slicesim::memory::{bootstrap, load, log_outcome, seed_records, snapshot};
use slicesim::qoe::{class_default_preferences, PreferenceVector};

fn random_simplex(rng: &mut ChaCha8Rng) -> PreferenceVector {
    let raw: [f64; 3] = [rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0)];
    PreferenceVector::from_raw(raw[0], raw[1], raw[2]).unwrap()
}

fn all_templates() -> Vec<(String, QoEClassId)> {
    let t = intent_templates();
    let mut out = Vec::new();
    for (texts, class) in [
        (&t.high_priority, QoEClassId::HighPriority),
        (&t.medium_priority, QoEClassId::MediumPriority),
        (&t.best_effort, QoEClassId::BestEffort),
    ] {
        out.extend(texts.iter().map(|s| (s.clone(), class)));
    }
    out
}

proptest! {
    // Identical embeddings isolate the aging factor: with any positive
    // lambda the newer copy must strictly outrank the older one.
    #[test]
    fn positive_aging_strictly_prefers_newer_equal_matches(
        ts_old in 0u64..400,
        gap in 1u64..100,
        lambda in 1e-4f64..0.5,
        pick in 0usize..15,
    ) {
        let cfg = Config::default();
        let (text, _) = all_templates()[pick].clone();
        let mut store = IntentStore::new(cfg.rag.embed_dim);
        // tau above 1 disables merging so both copies persist.
        log_outcome(&mut store, &text, PreferenceVector::uniform(), None, ts_old, 2.0).unwrap();
        log_outcome(&mut store, &text, PreferenceVector::uniform(), None, ts_old + gap, 2.0).unwrap();
        prop_assert_eq!(store.len(), 2);

        let query = embed(&text, cfg.rag.embed_dim).unwrap();
        let top = store.retrieve_topk(&query, 2, lambda).unwrap();
        prop_assert_eq!(top[0].0, 1, "newer entry must rank first");
        prop_assert!(top[0].1 > top[1].1, "aged scores must fall strictly with age");

        // Without aging the scores tie and only the timestamp tiebreak holds.
        let flat = store.retrieve_topk(&query, 2, 0.0).unwrap();
        prop_assert_eq!(flat[0].0, 1);
        prop_assert!((flat[0].1 - flat[1].1).abs() <= 1e-12);
    }

    // The decay factor itself is monotone over a whole age ladder.
    #[test]
    fn aged_score_is_monotone_over_an_age_ladder(
        lambda in 1e-4f64..0.5,
        rungs in 2usize..12,
    ) {
        let cfg = Config::default();
        let text = "hold the uplink budget steady";
        let mut store = IntentStore::new(cfg.rag.embed_dim);
        for i in 0..rungs {
            log_outcome(&mut store, text, PreferenceVector::uniform(), None, (i as u64) * 37, 2.0).unwrap();
        }
        let query = embed(text, cfg.rag.embed_dim).unwrap();
        let top = store.retrieve_topk(&query, rungs, lambda).unwrap();
        for pair in top.windows(2) {
            prop_assert!(pair[0].1 > pair[1].1);
            let (newer, older) = (pair[0].0, pair[1].0);
            prop_assert!(store.entries[newer].timestamp > store.entries[older].timestamp);
        }
    }
}

#[test]
fn a_thousand_template_logs_stay_bounded_by_distinct_templates() {
    let cfg = Config::default();
    let templates = all_templates();
    let mut store = IntentStore::new(cfg.rag.embed_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(0x10C5);
    for i in 0..1000u64 {
        let (text, _) = &templates[rng.gen_range(0..templates.len())];
        log_outcome(&mut store, text, random_simplex(&mut rng), None, i, cfg.rag.redundancy_tau)
            .unwrap();
    }
    assert!(
        store.len() <= templates.len(),
        "store grew to {} entries from {} distinct templates",
        store.len(),
        templates.len()
    );
    let folded: u32 = store.entries.iter().map(|e| e.merge_count).sum();
    assert_eq!(folded, 1000, "every logged experience must be accounted for");
    for e in &store.entries {
        e.validate().unwrap();
    }
}

#[test]
fn snapshot_round_trip_is_identity_on_a_thousand_entries() {
    let cfg = Config::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bank.jsonl");
    let words = ["uplink", "camera", "ledger", "batch", "sensor", "relay", "queue", "grid"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x51AB);
    let mut store = IntentStore::new(cfg.rag.embed_dim);
    for i in 0..1000u64 {
        let text = format!(
            "{} {} {} case {i}",
            words[rng.gen_range(0..words.len())],
            words[rng.gen_range(0..words.len())],
            words[rng.gen_range(0..words.len())]
        );
        log_outcome(&mut store, &text, random_simplex(&mut rng), None, i, 2.0).unwrap();
    }
    assert_eq!(store.len(), 1000);

    snapshot(&store, &path).unwrap();
    let restored = load(&path).unwrap();
    assert_eq!(store, restored, "snapshot round trip must be lossless");

    // And the round trip is idempotent: snapshotting the restored store
    // produces byte-identical output.
    let path2 = dir.path().join("bank2.jsonl");
    snapshot(&restored, &path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn logged_traffic_enriches_retrieval_for_unseen_intents() {
    let cfg = Config::default();
    let mut before = IntentStore::new(cfg.rag.embed_dim);
    bootstrap(&mut before, seed_records(), cfg.rag.redundancy_tau);
    let mut after = before.clone();

    // Hold one template per class out of the traffic so queries are unseen.
    let templates = intent_templates();
    let held_out: Vec<(&String, QoEClassId)> = [
        QoEClassId::HighPriority,
        QoEClassId::MediumPriority,
        QoEClassId::BestEffort,
    ]
    .iter()
    .map(|&c| (&templates.for_class(c)[0], c))
    .collect();
    let traffic: Vec<(String, QoEClassId)> = all_templates()
        .into_iter()
        .filter(|(t, _)| held_out.iter().all(|(h, _)| t != *h))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0x0907);
    let start = after.clock;
    for i in 0..200u64 {
        let (text, class) = &traffic[rng.gen_range(0..traffic.len())];
        log_outcome(
            &mut after,
            text,
            class_default_preferences(*class),
            None,
            start + i,
            cfg.rag.redundancy_tau,
        )
        .unwrap();
    }
    assert!(after.len() > before.len(), "traffic never inserted anything new");

    // Content enrichment is judged unaged: aging deliberately discounts
    // stale entries, which would conflate recency with relevance here.
    // Per query the best match must never degrade; in aggregate the traffic
    // must measurably improve at least one class.
    let mut gain = 0.0;
    for (query_text, class) in held_out {
        let query = embed(query_text, cfg.rag.embed_dim).unwrap();
        let best_before = before.retrieve_topk(&query, 1, 0.0).unwrap()[0].1;
        let best_after = after.retrieve_topk(&query, 1, 0.0).unwrap()[0].1;
        assert!(
            best_after >= best_before - 1e-12,
            "retrieval degraded for a fresh {class} intent: {best_before:.4} -> {best_after:.4}"
        );
        gain += best_after - best_before;

        // Under the production aging factor the fresh traffic must actually
        // surface in the exemplar window.
        let aged = after.retrieve_topk(&query, cfg.rag.top_k, cfg.rag.aging_lambda).unwrap();
        assert!(
            aged.iter().any(|(i, _)| after.entries[*i].timestamp >= start),
            "top-{} for {class} never surfaced logged traffic",
            cfg.rag.top_k
        );
    }
    assert!(gain > 1e-6, "traffic never improved best-match relevance for any class");
}
