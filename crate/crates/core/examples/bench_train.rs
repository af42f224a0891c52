//! Dev probe: train one variant and print throughput plus the reward curve.

use slicesim::config::{Config, RagConfig};
use slicesim::intent::{IntentPipeline, IntentStore, MockLlm};
use slicesim::rl::{train, PreferenceProvider, UniformPrefs, Variant};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_480);
    let variant: Variant = args.next().and_then(|s| s.parse().ok()).unwrap_or(Variant::Ppo);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = Config::default();
    let mut uniform = UniformPrefs;
    let mut pipeline = IntentPipeline::new(
        IntentStore::new(RagConfig::default().embed_dim),
        MockLlm,
        &RagConfig::default(),
    );
    let provider: &mut dyn PreferenceProvider = match variant {
        Variant::Ppo => &mut uniform,
        Variant::Qappo => &mut pipeline,
    };
    let t0 = Instant::now();
    let out = train(&cfg, variant, provider, steps, seed).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("{variant} seed {seed}: {steps} steps in {dt:.1}s -> {:.0} steps/s", steps as f64 / dt);
    for p in out.curve.iter() {
        println!("step {} mean_reward {:.3}", p.step, p.mean_reward);
    }
    let s = out.stats.last().unwrap();
    println!(
        "last update: policy_loss {:.4} value_loss {:.4} entropy {:.4} clip_frac {:.3}",
        s.policy_loss, s.value_loss, s.entropy, s.clip_fraction
    );
}
