//! Request-sequence generation and the shipped intent template table.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::config::{validate_mix, EnvConfig, QoEClassId};
use crate::error::Result;
use crate::env::types::{SliceId, SliceRequest};

/// Fixed natural-language intent templates, keyed by class.
#[derive(Debug, Clone, Deserialize)]
pub struct TemplateTable {
    pub high_priority: Vec<String>,
    pub medium_priority: Vec<String>,
    pub best_effort: Vec<String>,
}

impl TemplateTable {
    pub fn for_class(&self, class: QoEClassId) -> &[String] {
        match class {
            QoEClassId::HighPriority => &self.high_priority,
            QoEClassId::MediumPriority => &self.medium_priority,
            QoEClassId::BestEffort => &self.best_effort,
        }
    }
}

static TEMPLATES: OnceLock<TemplateTable> = OnceLock::new();

/// The intent templates shipped with the crate (see `data/intent_templates.json`).
pub fn intent_templates() -> &'static TemplateTable {
    TEMPLATES.get_or_init(|| {
        serde_json::from_str(include_str!("../../data/intent_templates.json"))
            .expect("bundled template table parses")
    })
}

/// Draw `n` slice requests with classes sampled from `class_mix` and demands
/// from the per-class ranges. Deterministic in `seed`.
pub fn generate_requests(
    cfg: &EnvConfig,
    n: usize,
    seed: u64,
    class_mix: &[f64; 3],
) -> Result<Vec<SliceRequest>> {
    validate_mix(class_mix)?;
    let templates = intent_templates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut requests = Vec::with_capacity(n);
    for i in 0..n {
        let class = sample_class(&mut rng, class_mix);
        let spec = cfg.class(class);
        let cpu = rng.gen_range(spec.cpu_demand_range[0]..=spec.cpu_demand_range[1]);
        let mem = rng.gen_range(spec.mem_demand_range[0]..=spec.mem_demand_range[1]);
        let chain_length = rng.gen_range(spec.chain_length_range[0]..=spec.chain_length_range[1]);
        let pool = templates.for_class(class);
        let intent_text = pool[rng.gen_range(0..pool.len())].clone();
        requests.push(SliceRequest {
            id: SliceId(i as u64),
            class,
            cpu,
            mem,
            chain_length,
            intent_text,
            arrival_index: i as u32,
        });
    }
    Ok(requests)
}

fn sample_class(rng: &mut ChaCha8Rng, mix: &[f64; 3]) -> QoEClassId {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in mix.iter().enumerate() {
        acc += p;
        if draw < acc {
            return QoEClassId::ALL[i];
        }
    }
    QoEClassId::BestEffort
}
