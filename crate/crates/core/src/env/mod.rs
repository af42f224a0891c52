//! Sequential VNF-deployment environment.
//!
//! A reset samples the node pool; each incoming slice request is then placed
//! by one of three modes (vertical/horizontal local scaling or cloud offload),
//! and released later. `apply` is pure: it returns a new state plus the scored
//! outcome, leaving the caller's state untouched.

pub mod generate;
pub mod types;

pub use generate::{generate_requests, intent_templates};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::EnvConfig;
use crate::error::{Error, Result};
use crate::qoe;
use types::{
    Container, ContainerId, DeployMode, DeploymentAction, DeploymentOutcome, DeploymentRecord,
    HostKind, NetworkState, NodeId, SliceRequest, VnfNode,
};

/// Sample a fresh substrate: empty local server, undeployed node pool.
pub fn reset(cfg: &EnvConfig, seed: u64) -> Result<NetworkState> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let local_count = cfg.local_count();
    let nodes = (0..cfg.pool_size)
        .map(|i| {
            let delay_ms = rng.gen_range(cfg.node_delay_range[0]..=cfg.node_delay_range[1]);
            let deploy_cost = rng.gen_range(cfg.node_cost_range[0]..=cfg.node_cost_range[1]);
            VnfNode {
                node_id: NodeId(i),
                host: if i < local_count { HostKind::Local } else { HostKind::Cloud },
                delay_ms,
                deploy_cost,
                deployed: false,
                tenants: Default::default(),
            }
        })
        .collect();
    Ok(NetworkState {
        nodes,
        containers: Vec::new(),
        local_cpu_free: cfg.local_cpu,
        local_mem_free: cfg.local_mem,
        local_cpu_capacity: cfg.local_cpu,
        local_mem_capacity: cfg.local_mem,
        active_slices: Default::default(),
        step_index: 0,
        next_container_id: 0,
    })
}

/// Nodes on `host` that can still accept a tenant of a class capped at
/// `max_share` slices per node.
pub fn selectable_nodes(state: &NetworkState, host: HostKind, max_share: u32) -> Vec<NodeId> {
    state
        .nodes
        .iter()
        .filter(|n| n.host == host && n.tenant_count() < max_share)
        .map(|n| n.node_id)
        .collect()
}

/// Feasibility of (VerticalLocal, HorizontalLocal, CloudOffload) for `request`.
pub fn feasible_modes(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest) -> [bool; 3] {
    let max_share = cfg.class(request.class).max_share;
    let chain = request.chain_length as usize;
    let local_ok = selectable_nodes(state, HostKind::Local, max_share).len() >= chain;
    let cloud_ok = selectable_nodes(state, HostKind::Cloud, max_share).len() >= chain;
    let pool_ok = state.local_cpu_free >= request.cpu && state.local_mem_free >= request.mem;
    [
        !state.containers.is_empty() && pool_ok && local_ok,
        pool_ok && local_ok,
        cloud_ok,
    ]
}

/// Container a VerticalLocal action grows when the policy does not pick one:
/// the feasible container with most slack, ties to the lowest id. Containers
/// are sized exactly to their residents, so slack is uniformly zero and the
/// comparator degenerates to the lowest id.
pub fn default_vertical_target(state: &NetworkState) -> Option<ContainerId> {
    state.containers.iter().map(|c| c.container_id).min()
}

fn combinations(pool: &[NodeId], k: usize) -> Vec<Vec<NodeId>> {
    // Ascending-id node sets; orderings within a set are score-equivalent.
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(pool: &[NodeId], k: usize, start: usize, current: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..pool.len() {
            current.push(pool[i]);
            go(pool, k, i + 1, current, out);
            current.pop();
        }
    }
    go(pool, k, 0, &mut current, &mut out);
    out
}

/// Every feasible action for `request`, one entry per distinct node set, in
/// lexicographic (mode, container, node-set) order.
pub fn feasible_actions(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest) -> Vec<DeploymentAction> {
    let max_share = cfg.class(request.class).max_share;
    let chain = request.chain_length as usize;
    let modes = feasible_modes(cfg, state, request);
    let mut actions = Vec::new();
    if modes[DeployMode::VerticalLocal.index()] {
        let local = selectable_nodes(state, HostKind::Local, max_share);
        for container in &state.containers {
            for node_ids in combinations(&local, chain) {
                actions.push(DeploymentAction {
                    mode: DeployMode::VerticalLocal,
                    node_ids,
                    target_container: Some(container.container_id),
                });
            }
        }
    }
    if modes[DeployMode::HorizontalLocal.index()] {
        let local = selectable_nodes(state, HostKind::Local, max_share);
        for node_ids in combinations(&local, chain) {
            actions.push(DeploymentAction { mode: DeployMode::HorizontalLocal, node_ids, target_container: None });
        }
    }
    if modes[DeployMode::CloudOffload.index()] {
        let cloud = selectable_nodes(state, HostKind::Cloud, max_share);
        for node_ids in combinations(&cloud, chain) {
            actions.push(DeploymentAction { mode: DeployMode::CloudOffload, node_ids, target_container: None });
        }
    }
    actions
}

/// Check every feasibility rule `apply` relies on, without mutating anything.
pub fn validate_action(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest, action: &DeploymentAction) -> Result<()> {
    let class = cfg.class(request.class);
    if action.node_ids.len() != request.chain_length as usize {
        return Err(Error::InfeasibleAction(format!(
            "{} nodes selected for a chain of {}",
            action.node_ids.len(),
            request.chain_length
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for id in &action.node_ids {
        if id.0 as usize >= state.nodes.len() {
            return Err(Error::InfeasibleAction(format!("node {} does not exist", id.0)));
        }
        if !seen.insert(*id) {
            return Err(Error::InfeasibleAction(format!("node {} selected twice", id.0)));
        }
        let node = state.node(*id);
        let wanted = if action.mode.is_local() { HostKind::Local } else { HostKind::Cloud };
        if node.host != wanted {
            return Err(Error::InfeasibleAction(format!("node {} is on the wrong host for {}", id.0, action.mode)));
        }
        if node.tenant_count() >= class.max_share {
            return Err(Error::InfeasibleAction(format!(
                "node {} already serves {} slices (cap {})",
                id.0,
                node.tenant_count(),
                class.max_share
            )));
        }
    }
    match action.mode {
        DeployMode::VerticalLocal => {
            let Some(target) = action.target_container else {
                return Err(Error::InfeasibleAction("VerticalLocal requires a target container".into()));
            };
            if state.container(target).is_none() {
                return Err(Error::InfeasibleAction(format!("container {} does not exist", target.0)));
            }
        }
        DeployMode::HorizontalLocal | DeployMode::CloudOffload => {
            if action.target_container.is_some() {
                return Err(Error::InfeasibleAction(format!("{} takes no target container", action.mode)));
            }
        }
    }
    if action.mode.is_local()
        && (state.local_cpu_free < request.cpu || state.local_mem_free < request.mem)
    {
        return Err(Error::InfeasibleAction(format!(
            "local pool has {}/{} cpu/mem free, request needs {}/{}",
            state.local_cpu_free, state.local_mem_free, request.cpu, request.mem
        )));
    }
    if state.active_slices.contains_key(&request.id) {
        return Err(Error::InfeasibleAction(format!("slice {} is already active", request.id)));
    }
    Ok(())
}

/// Deploy `request` via `action`, returning the successor state and outcome.
pub fn apply(
    cfg: &EnvConfig,
    state: &NetworkState,
    request: &SliceRequest,
    action: &DeploymentAction,
) -> Result<(NetworkState, DeploymentOutcome)> {
    validate_action(cfg, state, request, action)?;
    let metrics = qoe::action_metrics(cfg, state, request, action);

    let mut next = state.clone();
    let container = match action.mode {
        DeployMode::VerticalLocal => {
            next.local_cpu_free -= request.cpu;
            next.local_mem_free -= request.mem;
            let target = action.target_container.expect("validated above");
            let c = next
                .containers
                .iter_mut()
                .find(|c| c.container_id == target)
                .expect("validated above");
            c.cpu_alloc += request.cpu;
            c.mem_alloc += request.mem;
            c.residents.insert(request.id);
            Some(target)
        }
        DeployMode::HorizontalLocal => {
            next.local_cpu_free -= request.cpu;
            next.local_mem_free -= request.mem;
            let id = ContainerId(next.next_container_id);
            next.next_container_id += 1;
            next.containers.push(Container {
                container_id: id,
                cpu_alloc: request.cpu,
                mem_alloc: request.mem,
                residents: [request.id].into_iter().collect(),
            });
            Some(id)
        }
        DeployMode::CloudOffload => None,
    };
    for id in &action.node_ids {
        let node = &mut next.nodes[id.0 as usize];
        node.deployed = true;
        node.tenants.insert(request.id);
    }
    let post_counts: Vec<u32> = action.node_ids.iter().map(|id| next.node(*id).tenant_count()).collect();
    let violations = qoe::check_constraints(&metrics, cfg.class(request.class), &post_counts);

    next.active_slices.insert(
        request.id,
        DeploymentRecord {
            slice: request.id,
            class: request.class,
            mode: action.mode,
            node_ids: action.node_ids.clone(),
            container,
            cpu: request.cpu,
            mem: request.mem,
        },
    );
    next.step_index += 1;

    let served = violations.is_empty();
    let outcome = DeploymentOutcome {
        slice: request.id,
        class: request.class,
        action: Some(action.clone()),
        metrics,
        violations,
        served,
    };
    Ok((next, outcome))
}

/// Tear down an active slice, restoring pool headroom and tenancy. Nodes stay
/// deployed (warm), so re-deploying them later charges no new deploy cost.
pub fn release(state: &NetworkState, slice: types::SliceId) -> Result<NetworkState> {
    let Some(record) = state.active_slices.get(&slice) else {
        return Err(Error::SliceNotFound(slice.0));
    };
    let mut next = state.clone();
    for id in &record.node_ids {
        next.nodes[id.0 as usize].tenants.remove(&slice);
    }
    if record.mode.is_local() {
        next.local_cpu_free += record.cpu;
        next.local_mem_free += record.mem;
        let target = record.container.expect("local deployments always record a container");
        let idx = next
            .containers
            .iter()
            .position(|c| c.container_id == target)
            .expect("record points at a live container");
        let c = &mut next.containers[idx];
        c.cpu_alloc -= record.cpu;
        c.mem_alloc -= record.mem;
        c.residents.remove(&slice);
        if c.residents.is_empty() {
            next.containers.remove(idx);
        }
    }
    next.active_slices.remove(&slice);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::QoEClassId;
    use crate::env::types::SliceId;
    use crate::qoe::Violation;

    fn request(id: u64, class: QoEClassId, cpu: u32, mem: u32, chain: u32) -> SliceRequest {
        SliceRequest {
            id: SliceId(id),
            class,
            cpu,
            mem,
            chain_length: chain,
            intent_text: String::new(),
            arrival_index: id as u32,
        }
    }

    /// Substrate with pinned node tables: local delays/costs then cloud.
    fn fixed_state(cfg: &EnvConfig, local: &[(u32, u32)], cloud: &[(u32, u32)]) -> NetworkState {
        let mut nodes = Vec::new();
        for (i, (delay, cost)) in local.iter().chain(cloud.iter()).enumerate() {
            nodes.push(VnfNode {
                node_id: NodeId(i as u32),
                host: if i < local.len() { HostKind::Local } else { HostKind::Cloud },
                delay_ms: *delay,
                deploy_cost: *cost,
                deployed: false,
                tenants: Default::default(),
            });
        }
        NetworkState {
            nodes,
            containers: Vec::new(),
            local_cpu_free: cfg.local_cpu,
            local_mem_free: cfg.local_mem,
            local_cpu_capacity: cfg.local_cpu,
            local_mem_capacity: cfg.local_mem,
            active_slices: Default::default(),
            step_index: 0,
            next_container_id: 0,
        }
    }

    fn two_node_action(mode: DeployMode, a: u32, b: u32, container: Option<ContainerId>) -> DeploymentAction {
        DeploymentAction { mode, node_ids: vec![NodeId(a), NodeId(b)], target_container: container }
    }

    #[test]
    fn reset_is_deterministic_and_in_range() {
        let cfg = EnvConfig::default();
        let a = reset(&cfg, 42).unwrap();
        let b = reset(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = reset(&cfg, 43).unwrap();
        assert_ne!(a, c, "different seeds should draw different tables");
        assert_eq!(a.nodes.len(), 12);
        assert_eq!(a.nodes.iter().filter(|n| n.host == HostKind::Local).count(), 6);
        for node in &a.nodes {
            assert!((10..=15).contains(&node.delay_ms));
            assert!((2..=4).contains(&node.deploy_cost));
            assert!(!node.deployed);
            assert!(node.tenants.is_empty());
        }
        assert_eq!(a.local_cpu_free, 40);
        assert_eq!(a.local_mem_free, 30);
    }

    #[test]
    fn reset_rejects_pool_smaller_than_chain() {
        let mut cfg = EnvConfig::default();
        cfg.pool_size = 2;
        assert!(matches!(reset(&cfg, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn fresh_state_offers_horizontal_and_cloud_but_not_vertical() {
        let cfg = EnvConfig::default();
        let state = reset(&cfg, 7).unwrap();
        let req = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let actions = feasible_actions(&cfg, &state, &req);
        assert!(actions.iter().any(|a| a.mode == DeployMode::HorizontalLocal));
        assert!(actions.iter().any(|a| a.mode == DeployMode::CloudOffload));
        assert!(
            !actions.iter().any(|a| a.mode == DeployMode::VerticalLocal),
            "no container exists yet"
        );
        // Node sets hold chain_length distinct, host-consistent entries.
        for action in &actions {
            assert_eq!(action.node_ids.len(), 2);
            let set: std::collections::BTreeSet<_> = action.node_ids.iter().collect();
            assert_eq!(set.len(), 2);
        }
    }

    #[test]
    fn horizontal_latency_adds_boot_delay() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let req = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let action = two_node_action(DeployMode::HorizontalLocal, 0, 1, None);
        let (next, outcome) = apply(&cfg, &state, &req, &action).unwrap();
        assert_eq!(outcome.metrics.latency_ms, 55.0, "30 boot + 10 + 15");
        assert_eq!(outcome.metrics.econ_cost, 35.0, "30 fee + 2 + 3 fresh deploys");
        assert_eq!(outcome.metrics.reliability_cost, 0);
        assert!(outcome.served);
        assert_eq!(next.local_cpu_free, 36);
        assert_eq!(next.local_mem_free, 26);
        assert_eq!(next.containers.len(), 1);
        assert_eq!(next.step_index, 1);
        // The caller's state is untouched.
        assert_eq!(state.step_index, 0);
        assert!(state.containers.is_empty());
    }

    #[test]
    fn vertical_reuse_skips_boot_and_warm_deploys() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let first = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let (state, _) = apply(&cfg, &state, &first, &two_node_action(DeployMode::HorizontalLocal, 0, 1, None)).unwrap();
        let second = request(1, QoEClassId::BestEffort, 3, 3, 2);
        let action = two_node_action(DeployMode::VerticalLocal, 0, 1, Some(ContainerId(0)));
        let (next, outcome) = apply(&cfg, &state, &second, &action).unwrap();
        assert_eq!(outcome.metrics.latency_ms, 25.0, "no boot delay on reuse");
        assert_eq!(outcome.metrics.econ_cost, 30.0, "fee only: both nodes already deployed");
        assert_eq!(outcome.metrics.reliability_cost, 2, "both nodes now shared");
        let c = next.container(ContainerId(0)).unwrap();
        assert_eq!((c.cpu_alloc, c.mem_alloc), (7, 7));
        assert_eq!(c.residents.len(), 2);
    }

    #[test]
    fn cloud_offload_adds_offload_delay_and_cloud_fee() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let req = request(0, QoEClassId::MediumPriority, 4, 4, 2);
        let action = two_node_action(DeployMode::CloudOffload, 3, 4, None);
        let (next, outcome) = apply(&cfg, &state, &req, &action).unwrap();
        assert_eq!(outcome.metrics.latency_ms, 65.0, "40 offload + 10 + 15");
        assert_eq!(outcome.metrics.econ_cost, 15.0, "10 fee + 2 + 3");
        assert!(outcome.served);
        // Cloud placements leave the local pool alone.
        assert_eq!(next.local_cpu_free, 40);
        assert_eq!(next.local_mem_free, 30);
    }

    #[test]
    fn high_priority_latency_violation_is_flagged() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let req = request(0, QoEClassId::HighPriority, 2, 2, 2);
        let (_, outcome) =
            apply(&cfg, &state, &req, &two_node_action(DeployMode::HorizontalLocal, 0, 1, None)).unwrap();
        assert!(outcome.violations.contains(&Violation::Latency), "55 ms > 30 ms bound");
        assert!(outcome.violations.contains(&Violation::Economics), "35 units > 25 bound");
        assert!(!outcome.served);
    }

    #[test]
    fn share_capped_nodes_are_excluded() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        // A HighPriority tenant pins node 3; its cap of 1 blocks other HP picks.
        let hp = request(0, QoEClassId::HighPriority, 2, 2, 2);
        let (state, _) = apply(&cfg, &state, &hp, &two_node_action(DeployMode::CloudOffload, 3, 4, None)).unwrap();
        let hp2 = request(1, QoEClassId::HighPriority, 2, 2, 2);
        let selectable = selectable_nodes(&state, HostKind::Cloud, cfg.class(hp2.class).max_share);
        assert_eq!(selectable, vec![NodeId(5)]);
        let actions = feasible_actions(&cfg, &state, &hp2);
        assert!(
            actions.iter().all(|a| a.mode != DeployMode::CloudOffload),
            "only one empty cloud node remains, chain needs two"
        );
        // A BestEffort request may still join those nodes (cap 4).
        let be = request(2, QoEClassId::BestEffort, 3, 3, 2);
        let actions = feasible_actions(&cfg, &state, &be);
        assert!(actions
            .iter()
            .any(|a| a.mode == DeployMode::CloudOffload && a.node_ids == vec![NodeId(3), NodeId(4)]));
    }

    #[test]
    fn apply_rejects_infeasible_shapes() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let req = request(0, QoEClassId::BestEffort, 4, 4, 2);
        // Wrong node count.
        let bad = DeploymentAction {
            mode: DeployMode::CloudOffload,
            node_ids: vec![NodeId(3)],
            target_container: None,
        };
        assert!(matches!(apply(&cfg, &state, &req, &bad), Err(Error::InfeasibleAction(_))));
        // Duplicate node.
        let bad = two_node_action(DeployMode::CloudOffload, 3, 3, None);
        assert!(apply(&cfg, &state, &req, &bad).is_err());
        // Host mismatch.
        let bad = two_node_action(DeployMode::CloudOffload, 0, 1, None);
        assert!(apply(&cfg, &state, &req, &bad).is_err());
        // Vertical without a container.
        let bad = two_node_action(DeployMode::VerticalLocal, 0, 1, None);
        assert!(apply(&cfg, &state, &req, &bad).is_err());
        // Local pool exhausted.
        let greedy = request(1, QoEClassId::BestEffort, 41, 4, 2);
        let bad = two_node_action(DeployMode::HorizontalLocal, 0, 1, None);
        assert!(apply(&cfg, &state, &greedy, &bad).is_err());
    }

    #[test]
    fn release_restores_pool_and_keeps_nodes_warm() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let req = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let (deployed, _) =
            apply(&cfg, &state, &req, &two_node_action(DeployMode::HorizontalLocal, 0, 1, None)).unwrap();
        let released = release(&deployed, SliceId(0)).unwrap();
        assert_eq!(released.local_cpu_free, 40);
        assert_eq!(released.local_mem_free, 30);
        assert!(released.containers.is_empty(), "empty container is removed");
        assert!(released.active_slices.is_empty());
        assert!(released.node(NodeId(0)).deployed, "warm node stays deployed");
        assert!(released.node(NodeId(0)).tenants.is_empty());
        // Redeploying a warm node charges no deploy cost.
        let req2 = request(1, QoEClassId::BestEffort, 4, 4, 2);
        let (_, outcome) =
            apply(&cfg, &released, &req2, &two_node_action(DeployMode::HorizontalLocal, 0, 1, None)).unwrap();
        assert_eq!(outcome.metrics.econ_cost, 30.0, "fee only");
    }

    #[test]
    fn release_of_shared_node_preserves_other_tenant() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let a = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let (state, _) = apply(&cfg, &state, &a, &two_node_action(DeployMode::CloudOffload, 3, 4, None)).unwrap();
        let b = request(1, QoEClassId::BestEffort, 4, 4, 2);
        let (state, _) = apply(&cfg, &state, &b, &two_node_action(DeployMode::CloudOffload, 3, 4, None)).unwrap();
        let after = release(&state, SliceId(0)).unwrap();
        assert_eq!(after.node(NodeId(3)).tenant_count(), 1);
        assert!(after.node(NodeId(3)).tenants.contains(&SliceId(1)));
    }

    #[test]
    fn release_unknown_slice_errors() {
        let cfg = EnvConfig::default();
        let state = reset(&cfg, 1).unwrap();
        assert!(matches!(release(&state, SliceId(99)), Err(Error::SliceNotFound(99))));
    }

    #[test]
    fn vertical_needs_pool_headroom_not_container_slack() {
        let cfg = EnvConfig::default();
        let state = fixed_state(&cfg, &[(10, 2), (15, 3), (11, 2)], &[(10, 2), (15, 3), (11, 4)]);
        let first = request(0, QoEClassId::BestEffort, 4, 4, 2);
        let (state, _) =
            apply(&cfg, &state, &first, &two_node_action(DeployMode::HorizontalLocal, 0, 1, None)).unwrap();
        // 36 CPU free: a 36-CPU vertical growth is feasible, 37 is not.
        let fits = request(1, QoEClassId::BestEffort, 36, 3, 2);
        assert!(feasible_modes(&cfg, &state, &fits)[DeployMode::VerticalLocal.index()]);
        let too_big = request(2, QoEClassId::BestEffort, 37, 3, 2);
        assert!(!feasible_modes(&cfg, &state, &too_big)[DeployMode::VerticalLocal.index()]);
    }
}
