//! Core state and action types for the slicing environment.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::QoEClassId;
use crate::qoe::{QoEMetrics, Violation};

/// Opaque identifier of a slice request within an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SliceId(pub u64);

impl std::fmt::Display for SliceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Index of a VNF node in the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Identifier of a container on the local server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContainerId(pub u32);

/// Where a VNF node runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HostKind {
    Local,
    Cloud,
}

/// One VNF node of the substrate pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnfNode {
    pub node_id: NodeId,
    pub host: HostKind,
    /// Per-traversal processing delay in milliseconds.
    pub delay_ms: u32,
    /// One-off deployment cost charged to the first tenant.
    pub deploy_cost: u32,
    /// Whether the node has ever been deployed (warm nodes stay true).
    pub deployed: bool,
    /// Slices currently routed through this node.
    pub tenants: BTreeSet<SliceId>,
}

impl VnfNode {
    pub fn tenant_count(&self) -> u32 {
        self.tenants.len() as u32
    }
}

/// A container on the local server, sized exactly to its residents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub container_id: ContainerId,
    pub cpu_alloc: u32,
    pub mem_alloc: u32,
    pub residents: BTreeSet<SliceId>,
}

/// How a slice is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeployMode {
    /// Grow an existing local container; no boot delay.
    VerticalLocal,
    /// Boot a fresh local container; pays the boot delay.
    HorizontalLocal,
    /// Place on cloud nodes; pays the offload delay.
    CloudOffload,
}

impl DeployMode {
    pub const ALL: [DeployMode; 3] =
        [DeployMode::VerticalLocal, DeployMode::HorizontalLocal, DeployMode::CloudOffload];

    /// Stable index used by action masks and policy heads.
    pub fn index(self) -> usize {
        match self {
            DeployMode::VerticalLocal => 0,
            DeployMode::HorizontalLocal => 1,
            DeployMode::CloudOffload => 2,
        }
    }

    pub fn is_local(self) -> bool {
        !matches!(self, DeployMode::CloudOffload)
    }
}

impl std::fmt::Display for DeployMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            DeployMode::VerticalLocal => "VerticalLocal",
            DeployMode::HorizontalLocal => "HorizontalLocal",
            DeployMode::CloudOffload => "CloudOffload",
        };
        f.write_str(name)
    }
}

/// A concrete placement decision for one request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentAction {
    pub mode: DeployMode,
    /// Exactly `chain_length` distinct node ids, host-compatible with `mode`.
    pub node_ids: Vec<NodeId>,
    /// Required iff `mode == VerticalLocal`.
    pub target_container: Option<ContainerId>,
}

/// An incoming slice request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    pub id: SliceId,
    pub class: QoEClassId,
    pub cpu: u32,
    pub mem: u32,
    pub chain_length: u32,
    /// Natural-language service intent attached to the request.
    pub intent_text: String,
    pub arrival_index: u32,
}

/// Book-keeping for an active slice, enough to release it later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentRecord {
    pub slice: SliceId,
    pub class: QoEClassId,
    pub mode: DeployMode,
    pub node_ids: Vec<NodeId>,
    pub container: Option<ContainerId>,
    pub cpu: u32,
    pub mem: u32,
}

/// Result of deciding one request: what was done and how it scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentOutcome {
    pub slice: SliceId,
    pub class: QoEClassId,
    /// `None` marks the infeasible sentinel (no action existed).
    pub action: Option<DeploymentAction>,
    pub metrics: QoEMetrics,
    pub violations: Vec<Violation>,
    pub served: bool,
}

/// Full substrate state; cheap to clone so `apply` can stay pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub nodes: Vec<VnfNode>,
    pub containers: Vec<Container>,
    pub local_cpu_free: u32,
    pub local_mem_free: u32,
    pub local_cpu_capacity: u32,
    pub local_mem_capacity: u32,
    pub active_slices: BTreeMap<SliceId, DeploymentRecord>,
    /// Number of successful deployments so far.
    pub step_index: u64,
    pub(crate) next_container_id: u32,
}

impl NetworkState {
    pub fn node(&self, id: NodeId) -> &VnfNode {
        &self.nodes[id.0 as usize]
    }

    pub fn container(&self, id: ContainerId) -> Option<&Container> {
        self.containers.iter().find(|c| c.container_id == id)
    }

    /// Sum of demands currently allocated on the local server.
    pub fn local_cpu_used(&self) -> u32 {
        self.local_cpu_capacity - self.local_cpu_free
    }

    pub fn local_mem_used(&self) -> u32 {
        self.local_mem_capacity - self.local_mem_free
    }
}
