//! Dev probe: empirical availability ceiling via a hand-crafted router.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicesim::config::{Config, QoEClassId};
use slicesim::env::types::{DeployMode, DeploymentAction, HostKind, NetworkState, SliceRequest};
use slicesim::rl::Variant;
use slicesim::qoe::PreferenceVector;
use slicesim::rl::train::run_eval_episodes;
use slicesim::rl::train::UniformPrefs;

fn smart(cfg: &Config, state: &NetworkState, request: &SliceRequest) -> Option<DeploymentAction> {
    let chain = request.chain_length as usize;
    let class = cfg.env.class(request.class);
    match request.class {
        QoEClassId::HighPriority => None,
        QoEClassId::MediumPriority => {
            // Cloud only; need nodes whose FINAL tenancy stays <= 2. Keep MP on
            // dedicated nodes: prefer nodes already hosting exactly one MP-ish
            // tenant, else fresh; never mix with BE-stacked nodes.
            let mut cands: Vec<_> = state
                .nodes
                .iter()
                .filter(|n| n.host == HostKind::Cloud && n.tenant_count() + 1 <= class.max_share)
                .map(|n| (n.tenant_count(), n.deploy_cost, n.node_id))
                .collect();
            cands.sort();
            if cands.len() < chain {
                return None;
            }
            let node_ids = cands[..chain].iter().map(|c| c.2).collect();
            Some(DeploymentAction { mode: DeployMode::CloudOffload, node_ids, target_container: None })
        }
        QoEClassId::BestEffort => {
            // Local first if capacity and econ bound allow; else stack cloud on
            // the most-tenanted sub-cap nodes (leave fresh nodes for MP).
            if state.local_cpu_free >= request.cpu && state.local_mem_free >= request.mem {
                let locals: Vec<_> = state
                    .nodes
                    .iter()
                    .filter(|n| n.host == HostKind::Local && n.tenant_count() + 1 <= class.max_share)
                    .map(|n| (n.delay_ms, n.node_id))
                    .collect();
                if locals.len() >= chain {
                    let mut l = locals;
                    l.sort();
                    let node_ids: Vec<_> = l[..chain].iter().map(|c| c.1).collect();
                    let mode = if state.containers.is_empty() {
                        DeployMode::HorizontalLocal
                    } else {
                        DeployMode::VerticalLocal
                    };
                    let target = if mode == DeployMode::VerticalLocal {
                        state.containers.iter().map(|c| c.container_id).next()
                    } else {
                        None
                    };
                    return Some(DeploymentAction { mode, node_ids, target_container: target });
                }
            }
            // Cloud fallback: most-tenanted first but never onto nodes that
            // would break an MP co-tenant (tenancy currently < 2 means an MP
            // could be there... conservatively only stack nodes with 2+ tenants
            // or fresh ones).
            let mut cands: Vec<_> = state
                .nodes
                .iter()
                .filter(|n| n.host == HostKind::Cloud && n.tenant_count() + 1 <= class.max_share)
                .map(|n| (std::cmp::Reverse(n.tenant_count()), n.deploy_cost, n.node_id))
                .collect();
            cands.sort();
            if cands.len() < chain {
                return None;
            }
            let node_ids = cands[..chain].iter().map(|c| c.2).collect();
            Some(DeploymentAction { mode: DeployMode::CloudOffload, node_ids, target_container: None })
        }
    }
}

fn main() {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [4u32, 8, 12, 16, 20] {
        let point_seed: u64 = rng.gen();
        let report = run_eval_episodes(
            &cfg,
            n,
            20,
            point_seed,
            Variant::Ppo,
            &mut UniformPrefs,
            &mut |state, request, _| smart(&cfg, state, request),
        )
        .unwrap();
        println!(
            "smart n={n:>2} latency {:>6.2} cost {:>6.2} rel {:>5.3} avail {:.3}",
            report.mean_latency_ms, report.mean_cost, report.mean_reliability_cost, report.availability
        );
    }
}
