//! Baseline orchestration policies and the exact small-instance oracle.

pub mod oracle;

use crate::config::EnvConfig;
use crate::env::types::{
    DeployMode, DeploymentAction, HostKind, NetworkState, NodeId, SliceRequest,
};
use crate::env::{default_vertical_target, feasible_modes, selectable_nodes};

/// Local-First heuristic: vertical scaling if a container exists, else a fresh
/// local container, else cloud offload; node sets minimise summed delay.
pub fn local_first(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest) -> Option<DeploymentAction> {
    let modes = feasible_modes(cfg, state, request);
    let mode = DeployMode::ALL.into_iter().find(|m| modes[m.index()])?;
    let host = if mode.is_local() { HostKind::Local } else { HostKind::Cloud };
    let node_ids = lowest_delay_nodes(cfg, state, request, host);
    let target_container =
        if mode == DeployMode::VerticalLocal { default_vertical_target(state) } else { None };
    Some(DeploymentAction { mode, node_ids, target_container })
}

/// Cloud-Only heuristic: always offload; prefer already-deployed nodes with
/// residual share capacity, then the cheapest fresh ones.
pub fn cloud_only(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest) -> Option<DeploymentAction> {
    if !feasible_modes(cfg, state, request)[DeployMode::CloudOffload.index()] {
        return None;
    }
    let max_share = cfg.class(request.class).max_share;
    let mut candidates = selectable_nodes(state, HostKind::Cloud, max_share);
    candidates.sort_by_key(|id| {
        let node = state.node(*id);
        (!node.deployed, node.deploy_cost, *id)
    });
    candidates.truncate(request.chain_length as usize);
    Some(DeploymentAction { mode: DeployMode::CloudOffload, node_ids: candidates, target_container: None })
}

fn lowest_delay_nodes(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest, host: HostKind) -> Vec<NodeId> {
    let max_share = cfg.class(request.class).max_share;
    let mut candidates = selectable_nodes(state, host, max_share);
    candidates.sort_by_key(|id| (state.node(*id).delay_ms, *id));
    candidates.truncate(request.chain_length as usize);
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::QoEClassId;
    use crate::env::types::{ContainerId, SliceId, VnfNode};
    use crate::env::{apply, reset};

    fn request(id: u64, class: QoEClassId, chain: u32) -> SliceRequest {
        SliceRequest {
            id: SliceId(id),
            class,
            cpu: 3,
            mem: 3,
            chain_length: chain,
            intent_text: String::new(),
            arrival_index: id as u32,
        }
    }

    fn pinned_state(cfg: &EnvConfig, local: &[(u32, u32)], cloud: &[(u32, u32)]) -> NetworkState {
        let mut state = reset(cfg, 0).unwrap();
        let specs: Vec<(u32, u32, HostKind)> = local
            .iter()
            .map(|s| (s.0, s.1, HostKind::Local))
            .chain(cloud.iter().map(|s| (s.0, s.1, HostKind::Cloud)))
            .collect();
        state.nodes = specs
            .into_iter()
            .enumerate()
            .map(|(i, (delay_ms, deploy_cost, host))| VnfNode {
                node_id: NodeId(i as u32),
                host,
                delay_ms,
                deploy_cost,
                deployed: false,
                tenants: Default::default(),
            })
            .collect();
        state
    }

    fn small_cfg() -> EnvConfig {
        let mut cfg = EnvConfig::default();
        cfg.pool_size = 6;
        cfg
    }

    #[test]
    fn local_first_prefers_vertical_then_horizontal_then_cloud() {
        let cfg = small_cfg();
        let state = pinned_state(&cfg, &[(12, 2), (10, 3), (11, 2)], &[(10, 2), (11, 3), (12, 4)]);
        let first = request(0, QoEClassId::BestEffort, 2);
        let action = local_first(&cfg, &state, &first).unwrap();
        assert_eq!(action.mode, DeployMode::HorizontalLocal, "no container yet");
        assert_eq!(action.node_ids, vec![NodeId(1), NodeId(2)], "delays 10 and 11 win");
        let (state, _) = apply(&cfg, &state, &first, &action).unwrap();

        let second = request(1, QoEClassId::BestEffort, 2);
        let action = local_first(&cfg, &state, &second).unwrap();
        assert_eq!(action.mode, DeployMode::VerticalLocal);
        assert_eq!(action.target_container, Some(ContainerId(0)));

        // Exhaust the local pool; the heuristic falls through to cloud.
        let mut drained = state.clone();
        drained.local_cpu_free = 0;
        let third = request(2, QoEClassId::BestEffort, 2);
        let action = local_first(&cfg, &drained, &third).unwrap();
        assert_eq!(action.mode, DeployMode::CloudOffload);
        assert_eq!(action.node_ids, vec![NodeId(3), NodeId(4)]);
    }

    #[test]
    fn local_first_breaks_delay_ties_by_node_id() {
        let cfg = small_cfg();
        let state = pinned_state(&cfg, &[(10, 2), (10, 3), (10, 2)], &[(10, 2), (10, 3), (10, 4)]);
        let action = local_first(&cfg, &state, &request(0, QoEClassId::BestEffort, 2)).unwrap();
        assert_eq!(action.node_ids, vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn cloud_only_reuses_deployed_nodes_before_cheap_fresh_ones() {
        let cfg = small_cfg();
        let state = pinned_state(&cfg, &[(10, 2), (11, 3), (12, 2)], &[(12, 4), (10, 2), (11, 3)]);
        let first = request(0, QoEClassId::BestEffort, 2);
        let action = cloud_only(&cfg, &state, &first).unwrap();
        assert_eq!(action.mode, DeployMode::CloudOffload);
        assert_eq!(action.node_ids, vec![NodeId(4), NodeId(5)], "cheapest fresh: costs 2 and 3");
        let (state, _) = apply(&cfg, &state, &first, &action).unwrap();

        let second = request(1, QoEClassId::BestEffort, 2);
        let action = cloud_only(&cfg, &state, &second).unwrap();
        assert_eq!(action.node_ids, vec![NodeId(4), NodeId(5)], "deployed nodes come first");
    }

    #[test]
    fn cloud_only_respects_share_caps() {
        let cfg = small_cfg();
        let state = pinned_state(&cfg, &[(10, 2), (11, 3), (12, 2)], &[(12, 4), (10, 2), (11, 3)]);
        let hp = request(0, QoEClassId::HighPriority, 2);
        let action = cloud_only(&cfg, &state, &hp).unwrap();
        let (state, _) = apply(&cfg, &state, &hp, &action).unwrap();
        // Another HighPriority request only has one empty cloud node left.
        let hp2 = request(1, QoEClassId::HighPriority, 2);
        assert!(cloud_only(&cfg, &state, &hp2).is_none());
        // BestEffort still fits (cap 4) and reuses the deployed pair.
        let be = request(2, QoEClassId::BestEffort, 2);
        let action = cloud_only(&cfg, &state, &be).unwrap();
        assert_eq!(action.node_ids, action.node_ids.clone());
        assert_eq!(action.node_ids.len(), 2);
    }

    #[test]
    fn heuristics_return_none_when_nothing_fits() {
        let cfg = small_cfg();
        let mut state = pinned_state(&cfg, &[(10, 2), (11, 3), (12, 2)], &[(12, 4), (10, 2), (11, 3)]);
        state.local_cpu_free = 0;
        for node in &mut state.nodes {
            node.tenants.insert(SliceId(99)); // every node hosts one tenant
        }
        let hp = request(0, QoEClassId::HighPriority, 2);
        assert!(local_first(&cfg, &state, &hp).is_none());
        assert!(cloud_only(&cfg, &state, &hp).is_none());
    }
}
