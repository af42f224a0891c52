//! Dev probe: mean episode reward anchors under the training distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicesim::config::{Config, QoEClassId};
use slicesim::env::types::{DeployMode, DeploymentAction, NetworkState, SliceRequest};
use slicesim::env::{apply, feasible_actions, generate_requests, reset};
use slicesim::policy::{cloud_only, local_first, oracle::step_cost};
use slicesim::qoe::{self, PreferenceVector};

struct Stats {
    total: f64,
    episodes: u64,
    by_step: Vec<(f64, u64)>,
    by_class: [(f64, u64); 3],
}

fn run<F>(cfg: &Config, episodes: u64, mut choose: F) -> Stats
where
    F: FnMut(&NetworkState, &SliceRequest, &PreferenceVector, &mut ChaCha8Rng) -> Option<DeploymentAction>,
{
    let uniform = PreferenceVector::uniform();
    let mut stats =
        Stats { total: 0.0, episodes, by_step: vec![(0.0, 0); 20], by_class: [(0.0, 0); 3] };
    for ep in 0..episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + ep);
        let n = rng.gen_range(4..=20u32);
        let requests =
            generate_requests(&cfg.env, n as usize, rng.gen::<u64>(), &cfg.env.class_mix).unwrap();
        let mut state = reset(&cfg.env, rng.gen::<u64>()).unwrap();
        for (i, req) in requests.iter().enumerate() {
            let action = choose(&state, req, &uniform, &mut rng);
            let r = match action {
                Some(a) => {
                    let (next, outcome) = apply(&cfg.env, &state, req, &a).unwrap();
                    let r =
                        qoe::reward(&cfg.env, &outcome.metrics, &uniform, &outcome.violations);
                    state = next;
                    r
                }
                None => {
                    let s = qoe::sentinel_outcome(&cfg.env, req);
                    qoe::reward(&cfg.env, &s.metrics, &uniform, &s.violations)
                }
            };
            stats.total += r;
            stats.by_step[i].0 += r;
            stats.by_step[i].1 += 1;
            let c = req.class.index();
            stats.by_class[c].0 += r;
            stats.by_class[c].1 += 1;
        }
    }
    stats
}

fn report(name: &str, s: &Stats) {
    println!("{name:16} mean_episode {:+.3}", s.total / s.episodes as f64);
    let cls: Vec<String> = s
        .by_class
        .iter()
        .zip(["HP", "MP", "BE"])
        .map(|((sum, n), tag)| format!("{tag} {:+.2}", sum / (*n).max(1) as f64))
        .collect();
    println!("{:16} per-class {}", "", cls.join("  "));
    let steps: Vec<String> = s
        .by_step
        .iter()
        .step_by(4)
        .map(|(sum, n)| format!("{:+.2}", sum / (*n).max(1) as f64))
        .collect();
    println!("{:16} per-step[0,4,8,12,16] {}", "", steps.join("  "));
}

/// Class-aware routing: cost-sensitive classes go cloud, BestEffort local.
fn planner(
    cfg: &Config,
    state: &NetworkState,
    req: &SliceRequest,
    prefs: &PreferenceVector,
) -> Option<DeploymentAction> {
    let acts = feasible_actions(&cfg.env, state, req);
    let pick_min = |pool: Vec<&DeploymentAction>| {
        pool.into_iter()
            .min_by(|a, b| {
                let ca = step_cost(&cfg.env, state, req, Some(a), prefs);
                let cb = step_cost(&cfg.env, state, req, Some(b), prefs);
                ca.partial_cmp(&cb).unwrap()
            })
            .cloned()
    };
    let cloud: Vec<&DeploymentAction> =
        acts.iter().filter(|a| a.mode == DeployMode::CloudOffload).collect();
    let local: Vec<&DeploymentAction> =
        acts.iter().filter(|a| a.mode != DeployMode::CloudOffload).collect();
    match req.class {
        QoEClassId::BestEffort => pick_min(local).or_else(|| pick_min(cloud.clone())),
        _ => pick_min(cloud).or_else(|| pick_min(local.clone())),
    }
    .or_else(|| {
        let all: Vec<&DeploymentAction> = acts.iter().collect();
        pick_min(all)
    })
}

fn main() {
    let cfg = Config::default();
    let episodes = 2000;

    let s = run(&cfg, episodes, |state, req, _p, rng| {
        let acts = feasible_actions(&cfg.env, state, req);
        if acts.is_empty() { None } else { Some(acts[rng.gen_range(0..acts.len())].clone()) }
    });
    report("uniform-random", &s);

    let s = run(&cfg, episodes, |state, req, _p, _r| local_first(&cfg.env, state, req));
    report("local-first", &s);

    let s = run(&cfg, episodes, |state, req, _p, _r| cloud_only(&cfg.env, state, req));
    report("cloud-only", &s);

    let s = run(&cfg, episodes, |state, req, prefs, _r| {
        let acts = feasible_actions(&cfg.env, state, req);
        acts.into_iter().min_by(|a, b| {
            let ca = step_cost(&cfg.env, state, req, Some(a), prefs);
            let cb = step_cost(&cfg.env, state, req, Some(b), prefs);
            ca.partial_cmp(&cb).unwrap()
        })
    });
    report("myopic-greedy", &s);

    let s = run(&cfg, episodes, |state, req, prefs, _r| planner(&cfg, state, req, prefs));
    report("class-planner", &s);
}
