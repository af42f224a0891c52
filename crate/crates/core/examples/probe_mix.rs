//! Dev probe: class-mix sweep over availability and reward-spread anchors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicesim::config::{Config, QoEClassId};
use slicesim::env::types::{DeployMode, DeploymentAction, NetworkState, SliceRequest};
use slicesim::env::{apply, feasible_actions, generate_requests, reset};
use slicesim::policy::{cloud_only, local_first, oracle::step_cost};
use slicesim::qoe::{self, PreferenceVector};
use slicesim::rl::{run_eval_episodes, UniformPrefs, Variant};

fn mean_reward<F>(cfg: &Config, episodes: u64, mut choose: F) -> f64
where
    F: FnMut(&NetworkState, &SliceRequest, &PreferenceVector, &mut ChaCha8Rng) -> Option<DeploymentAction>,
{
    let uniform = PreferenceVector::uniform();
    let mut total = 0.0;
    for ep in 0..episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + ep);
        let n = rng.gen_range(4..=20u32);
        let requests =
            generate_requests(&cfg.env, n as usize, rng.gen::<u64>(), &cfg.env.class_mix).unwrap();
        let mut state = reset(&cfg.env, rng.gen::<u64>()).unwrap();
        for req in &requests {
            match choose(&state, req, &uniform, &mut rng) {
                Some(a) => {
                    let (next, outcome) = apply(&cfg.env, &state, req, &a).unwrap();
                    total += qoe::reward(&cfg.env, &outcome.metrics, &uniform, &outcome.violations);
                    state = next;
                }
                None => {
                    let s = qoe::sentinel_outcome(&cfg.env, req);
                    total += qoe::reward(&cfg.env, &s.metrics, &uniform, &s.violations);
                }
            }
        }
    }
    total / episodes as f64
}

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
    .or_else(|| pick_min(acts.iter().collect()))
}

fn availability(
    cfg: &Config,
    n: u32,
    mut choose: impl FnMut(&NetworkState, &SliceRequest, &PreferenceVector) -> Option<DeploymentAction>,
) -> f64 {
    let report = run_eval_episodes(cfg, n, 40, 777, Variant::Ppo, &mut UniformPrefs, &mut choose)
        .unwrap();
    report.availability
}

fn main() {
    let mixes: Vec<[f64; 3]> = vec![
        [0.2, 0.4, 0.4],
        [0.2, 0.3, 0.5],
        [0.2, 0.25, 0.55],
        [0.15, 0.3, 0.55],
        [0.1, 0.3, 0.6],
        [0.2, 0.2, 0.6],
        [0.15, 0.25, 0.6],
    ];
    for mix in mixes {
        let mut cfg = Config::default();
        cfg.env.class_mix = mix;
        println!("mix {:?}", mix);

        let rnd = mean_reward(&cfg, 1500, |state, req, _p, rng| {
            let acts = feasible_actions(&cfg.env, state, req);
            if acts.is_empty() { None } else { Some(acts[rng.gen_range(0..acts.len())].clone()) }
        });
        let plan = mean_reward(&cfg, 1500, |state, req, prefs, _r| planner(&cfg, state, req, prefs));
        println!("  reward random {rnd:+.2} planner {plan:+.2} spread {:.1}%", 100.0 * (plan - rnd) / rnd.abs());

        for n in [12u32, 16, 20] {
            let lf = availability(&cfg, n, |s, r, _| local_first(&cfg.env, s, r));
            let co = availability(&cfg, n, |s, r, _| cloud_only(&cfg.env, s, r));
            let pl = availability(&cfg, n, |s, r, p| planner(&cfg, s, r, p));
            println!("  n={n:2} avail local-first {lf:.2} cloud-only {co:.2} planner {pl:.2}");
        }
    }
}
