//! Dev probe: train both variants, sweep all four policies, and print the
//! margins the acceptance checks care about.

use slicesim::config::Config;
use slicesim::harness::{run_compare, run_train, PolicyKind, EPISODES_PER_POINT, SWEEP_COUNTS};
use slicesim::rl::train::Variant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let steps: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(300_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = Config::default();
    let dir = std::env::temp_dir().join(format!("probe_accept_{seed}"));

    for variant in [Variant::Ppo, Variant::Qappo] {
        let t0 = std::time::Instant::now();
        let art = run_train(&cfg, variant, seed, steps, &dir).unwrap();
        let curve = &art.curve;
        let k = (curve.len() / 10).max(1);
        let first: f64 = curve[..k].iter().map(|p| p.mean_reward).sum::<f64>() / k as f64;
        let last: f64 =
            curve[curve.len() - k..].iter().map(|p| p.mean_reward).sum::<f64>() / k as f64;
        println!(
            "{variant}: trained {steps} steps in {:.0?} first10 {first:.3} final10 {last:.3} improvement {:.1}%",
            t0.elapsed(),
            (last - first) / first.abs() * 100.0
        );
    }

    let t0 = std::time::Instant::now();
    let table =
        run_compare(&cfg, &PolicyKind::ALL, &SWEEP_COUNTS, EPISODES_PER_POINT, seed, &dir)
            .unwrap();
    println!("sweep in {:.0?}", t0.elapsed());
    println!(
        "{:<12} {:>3} {:>10} {:>9} {:>8} {:>8}",
        "policy", "n", "latency", "cost", "rel", "avail"
    );
    for row in &table.rows {
        let r = &row.report;
        println!(
            "{:<12} {:>3} {:>10.2} {:>9.2} {:>8.3} {:>8.3}",
            row.policy.to_string(),
            r.n_requests,
            r.mean_latency_ms,
            r.mean_cost,
            r.mean_reliability_cost,
            r.availability
        );
    }
}
