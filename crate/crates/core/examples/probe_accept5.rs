//! Dev probe: 5-seed dry run of the comparison-based acceptance checks.

use std::collections::BTreeMap;
use std::time::Instant;

use slicesim::config::Config;
use slicesim::harness::{run_compare, run_train, PolicyKind, EPISODES_PER_POINT, SWEEP_COUNTS};
use slicesim::rl::train::CurvePoint;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn window_mean(curve: &[CurvePoint], last: bool) -> f64 {
    let w = (curve.len() / 10).max(1);
    let slice = if last { &curve[curve.len() - w..] } else { &curve[..w] };
    slice.iter().map(|p| p.mean_reward).sum::<f64>() / slice.len() as f64
}

fn main() {
    let steps: usize =
        std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300_000);
    let cfg = Config::default();
    let base = std::env::temp_dir().join(format!("probe_accept5_{steps}"));
    let t0 = Instant::now();

    // avail[(policy, n)] -> per-seed values; same for latency/cost/rel.
    let mut avail: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    let mut latency: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    let mut cost: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    let mut rel: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    let mut firsts: BTreeMap<(String, u64), f64> = BTreeMap::new();
    let mut finals: BTreeMap<(String, u64), f64> = BTreeMap::new();

    for seed in SEEDS {
        let dir = base.join(format!("s{seed}"));
        for kind in [PolicyKind::Qappo, PolicyKind::Ppo] {
            let t = Instant::now();
            let art = run_train(&cfg, kind.variant().unwrap(), seed, steps, &dir).unwrap();
            firsts.insert((kind.to_string(), seed), window_mean(&art.curve, false));
            finals.insert((kind.to_string(), seed), window_mean(&art.curve, true));
            eprintln!("seed {seed} {kind}: {:.0}s", t.elapsed().as_secs_f64());
        }
        let table =
            run_compare(&cfg, &PolicyKind::ALL, &SWEEP_COUNTS, EPISODES_PER_POINT, seed, &dir)
                .unwrap();
        for row in &table.rows {
            let key = (row.policy.to_string(), row.report.n_requests);
            avail.entry(key.clone()).or_default().push(row.report.availability);
            latency.entry(key.clone()).or_default().push(row.report.mean_latency_ms);
            cost.entry(key.clone()).or_default().push(row.report.mean_cost);
            rel.entry(key).or_default().push(row.report.mean_reliability_cost);
        }
    }
    let elapsed_min = t0.elapsed().as_secs_f64() / 60.0;

    let mean = |m: &BTreeMap<(String, u32), Vec<f64>>, p: &str, n: u32| -> f64 {
        let v = &m[&(p.to_string(), n)];
        v.iter().sum::<f64>() / v.len() as f64
    };

    println!("seed-averaged table ({} seeds, {steps} steps, {elapsed_min:.1} min)", SEEDS.len());
    println!("{:<12} {:>3} {:>9} {:>8} {:>6} {:>7}", "policy", "n", "latency", "cost", "rel", "avail");
    for p in ["qappo", "ppo", "local-first", "cloud-only"] {
        for &n in &SWEEP_COUNTS {
            println!(
                "{p:<12} {n:>3} {:>9.2} {:>8.2} {:>6.3} {:>7.3}",
                mean(&latency, p, n),
                mean(&cost, p, n),
                mean(&rel, p, n),
                mean(&avail, p, n)
            );
        }
    }

    // Criterion-style verdicts.
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    let a = |p: &str, n: u32| mean(&avail, p, n);
    let l = |p: &str, n: u32| mean(&latency, p, n);
    let c = |p: &str, n: u32| mean(&cost, p, n);
    let r = |p: &str, n: u32| mean(&rel, p, n);

    check(
        "1-order",
        [12u32, 16, 20].iter().all(|&n| a("qappo", n) >= a("ppo", n))
            && a("local-first", 20) <= a("ppo", 20)
            && a("cloud-only", 20) <= a("ppo", 20),
        format!(
            "qappo {:.3}/{:.3}/{:.3} ppo {:.3}/{:.3}/{:.3} lf {:.3} co {:.3}",
            a("qappo", 12), a("qappo", 16), a("qappo", 20),
            a("ppo", 12), a("ppo", 16), a("ppo", 20),
            a("local-first", 20), a("cloud-only", 20)
        ),
    );
    check(
        "1-calib",
        a("qappo", 20) >= 0.60
            && (0.50..=0.80).contains(&a("ppo", 20))
            && a("local-first", 20) < 0.65
            && a("cloud-only", 20) < 0.65,
        format!("qappo {:.3} ppo {:.3} lf {:.3} co {:.3}", a("qappo", 20), a("ppo", 20), a("local-first", 20), a("cloud-only", 20)),
    );
    check("1-runtime", elapsed_min <= 30.0, format!("{elapsed_min:.1} min"));
    let best_other =
        a("ppo", 16).max(a("local-first", 16)).max(a("cloud-only", 16));
    check(
        "2-margin",
        a("qappo", 16) - best_other >= 0.08,
        format!("qappo {:.3} best-other {best_other:.3} gap {:.3}", a("qappo", 16), a("qappo", 16) - best_other),
    );
    let lf_lowest = SWEEP_COUNTS
        .iter()
        .all(|&n| ["qappo", "ppo", "cloud-only"].iter().all(|p| l("local-first", n) <= l(p, n)));
    let qappo_second = [12u32, 16, 20]
        .iter()
        .all(|&n| ["ppo", "cloud-only"].iter().all(|p| l("qappo", n) <= l(p, n)));
    check(
        "3-latency",
        lf_lowest && qappo_second,
        format!(
            "lf lowest {lf_lowest} qappo-second {qappo_second}; n=20 lf {:.2} qappo {:.2} ppo {:.2}",
            l("local-first", 20), l("qappo", 20), l("ppo", 20)
        ),
    );
    let co_increasing = SWEEP_COUNTS.windows(2).all(|w| c("cloud-only", w[0]) < c("cloud-only", w[1]));
    let co_lowest_4 = ["qappo", "ppo", "local-first"].iter().all(|p| c("cloud-only", 4) <= c(p, 4));
    let qappo_lowest_20 = ["ppo", "local-first", "cloud-only"].iter().all(|p| c("qappo", 20) <= c(p, 20));
    check(
        "4-cost",
        co_increasing && co_lowest_4 && qappo_lowest_20,
        format!(
            "co@4 {:.2} increasing {co_increasing}; n=20 qappo {:.2} ppo {:.2} lf {:.2} co {:.2}",
            c("cloud-only", 4), c("qappo", 20), c("ppo", 20), c("local-first", 20), c("cloud-only", 20)
        ),
    );
    let lf_lowest_rel_4 = ["qappo", "ppo", "cloud-only"].iter().all(|p| r("local-first", 4) <= r(p, 4));
    check(
        "5-reliability",
        lf_lowest_rel_4 && r("local-first", 20) > r("qappo", 20),
        format!(
            "n=4 lf {:.3} qappo {:.3} ppo {:.3} co {:.3}; n=20 lf {:.3} qappo {:.3}",
            r("local-first", 4), r("qappo", 4), r("ppo", 4), r("cloud-only", 4),
            r("local-first", 20), r("qappo", 20)
        ),
    );
    let mut improved = true;
    let mut beat = 0;
    for seed in SEEDS {
        let f = firsts[&("qappo".to_string(), seed)];
        let g = finals[&("qappo".to_string(), seed)];
        let imp = (g - f) / f.abs();
        if imp < 0.25 {
            improved = false;
        }
        if g > finals[&("ppo".to_string(), seed)] {
            beat += 1;
        }
        println!(
            "  seed {seed}: qappo {f:.3} -> {g:.3} ({:+.1}%) ppo-final {:.3}",
            imp * 100.0,
            finals[&("ppo".to_string(), seed)]
        );
    }
    check("6-training", improved && beat >= 4, format!("improved-all {improved} beat {beat}/5"));
}
