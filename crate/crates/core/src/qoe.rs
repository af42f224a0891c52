//! Multi-objective QoE cost model: metrics, constraint checks, and reward.
//!
//! Raw metrics (latency ms, economic units, shared-node counts) are computed
//! against the pre-deployment state so heuristics and the oracle can score
//! candidate actions without cloning the environment. Constraint checks use
//! post-deployment tenant counts, and an end-of-episode audit re-checks
//! reliability once all arrivals have landed.

use serde::{Deserialize, Serialize};

use crate::config::{EnvConfig, QoEClass, QoEClassId};
use crate::env::types::{
    DeployMode, DeploymentAction, DeploymentOutcome, NetworkState, SliceRequest,
};
use crate::error::{Error, Result};

/// A QoE constraint broken by a deployment (or the infeasible sentinel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    Latency,
    Reliability,
    Economics,
    Infeasible,
}

/// Raw per-slice metrics; `chain_length` is kept for normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoEMetrics {
    pub latency_ms: f64,
    pub econ_cost: f64,
    /// Number of the slice's own nodes shared with at least one other slice.
    pub reliability_cost: u32,
    pub chain_length: u32,
}

impl QoEMetrics {
    /// Normalised (latency, economics, reliability) triple used by the cost.
    pub fn normalized(&self, cfg: &EnvConfig) -> [f64; 3] {
        let chain = self.chain_length.max(1) as f64;
        [
            self.latency_ms / cfg.latency_norm,
            self.econ_cost / cfg.cost_norm,
            self.reliability_cost as f64 / chain,
        ]
    }
}

/// Preference weights over (latency, reliability, economics); a simplex point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector {
    pub latency: f64,
    pub reliability: f64,
    pub econ: f64,
}

impl PreferenceVector {
    /// Simplex tolerance accepted by [`PreferenceVector::new`].
    pub const TOLERANCE: f64 = 1e-6;

    pub fn new(latency: f64, reliability: f64, econ: f64) -> Result<Self> {
        let v = PreferenceVector { latency, reliability, econ };
        v.check_simplex()?;
        Ok(v)
    }

    /// Build from raw non-negative weights, rescaling them onto the simplex.
    pub fn from_raw(latency: f64, reliability: f64, econ: f64) -> Result<Self> {
        if latency < 0.0 || reliability < 0.0 || econ < 0.0 {
            return Err(Error::InvalidArgument("preference weights must be non-negative".into()));
        }
        let sum = latency + reliability + econ;
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidArgument("preference weights sum to zero".into()));
        }
        Ok(PreferenceVector { latency: latency / sum, reliability: reliability / sum, econ: econ / sum })
    }

    pub fn uniform() -> Self {
        PreferenceVector { latency: 1.0 / 3.0, reliability: 1.0 / 3.0, econ: 1.0 / 3.0 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.latency, self.reliability, self.econ]
    }

    pub fn check_simplex(&self) -> Result<()> {
        let arr = self.as_array();
        if arr.iter().any(|w| !w.is_finite() || *w < -Self::TOLERANCE) {
            return Err(Error::InvalidArgument(format!("preference weights out of range: {arr:?}")));
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::InvalidArgument(format!("preference weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Default preference anchor per class, used when the LLM path falls through.
pub fn class_default_preferences(class: QoEClassId) -> PreferenceVector {
    match class {
        QoEClassId::HighPriority => PreferenceVector { latency: 0.45, reliability: 0.45, econ: 0.10 },
        QoEClassId::MediumPriority => PreferenceVector { latency: 0.35, reliability: 0.30, econ: 0.35 },
        QoEClassId::BestEffort => PreferenceVector { latency: 0.15, reliability: 0.15, econ: 0.70 },
    }
}

/// End-to-end latency of an action against the pre-deployment state.
pub fn latency_ms(cfg: &EnvConfig, state: &NetworkState, action: &DeploymentAction) -> f64 {
    let boot = if action.mode == DeployMode::HorizontalLocal { cfg.boot_delay_ms } else { 0 };
    let offload = if action.mode == DeployMode::CloudOffload { cfg.offload_delay_ms } else { 0 };
    let path: u32 = action.node_ids.iter().map(|id| state.node(*id).delay_ms).sum();
    (boot + path + offload) as f64
}

/// Economic cost: server fee plus deploy costs of nodes not yet deployed.
pub fn econ_cost(cfg: &EnvConfig, state: &NetworkState, action: &DeploymentAction) -> f64 {
    let fee = if action.mode.is_local() { cfg.local_server_cost } else { cfg.cloud_server_cost };
    let fresh: u32 = action
        .node_ids
        .iter()
        .map(|id| state.node(*id))
        .filter(|n| !n.deployed)
        .map(|n| n.deploy_cost)
        .sum();
    (fee + fresh) as f64
}

/// Shared-node count the slice would observe immediately after deployment.
pub fn reliability_cost(state: &NetworkState, action: &DeploymentAction) -> u32 {
    // A selected node is shared iff someone already sits on it; adding this
    // slice then brings its tenancy to two or more.
    action.node_ids.iter().filter(|id| state.node(**id).tenant_count() >= 1).count() as u32
}

/// All three raw metrics of a candidate action, without applying it.
pub fn action_metrics(
    cfg: &EnvConfig,
    state: &NetworkState,
    request: &SliceRequest,
    action: &DeploymentAction,
) -> QoEMetrics {
    QoEMetrics {
        latency_ms: latency_ms(cfg, state, action),
        econ_cost: econ_cost(cfg, state, action),
        reliability_cost: reliability_cost(state, action),
        chain_length: request.chain_length,
    }
}

/// Constraint check against post-deployment tenant counts of the slice's nodes.
pub fn check_constraints(metrics: &QoEMetrics, class: &QoEClass, post_tenant_counts: &[u32]) -> Vec<Violation> {
    let mut violations = Vec::new();
    if metrics.latency_ms > class.latency_bound_ms as f64 {
        violations.push(Violation::Latency);
    }
    if post_tenant_counts.iter().any(|&c| c > class.max_share) {
        violations.push(Violation::Reliability);
    }
    if metrics.econ_cost > class.cost_bound as f64 {
        violations.push(Violation::Economics);
    }
    violations
}

/// Preference-weighted normalised cost J.
pub fn weighted_cost(cfg: &EnvConfig, metrics: &QoEMetrics, prefs: &PreferenceVector) -> f64 {
    let [lat, econ, rel] = metrics.normalized(cfg);
    prefs.latency * lat + prefs.econ * econ + prefs.reliability * rel
}

/// Step reward: negative weighted cost minus a penalty per violation.
pub fn reward(cfg: &EnvConfig, metrics: &QoEMetrics, prefs: &PreferenceVector, violations: &[Violation]) -> f64 {
    -weighted_cost(cfg, metrics, prefs) - cfg.violation_penalty * violations.len() as f64
}

/// Fraction of outcomes with every constraint met; empty slates count as 1.
pub fn availability_ratio(outcomes: &[DeploymentOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 1.0;
    }
    let served = outcomes.iter().filter(|o| o.served).count();
    served as f64 / outcomes.len() as f64
}

/// Outcome recorded when no feasible action exists for a request.
///
/// Latency/economics sit one unit past the class bounds and every chain node
/// counts as shared, so the sentinel's reward is strictly below -1 for any
/// preference vector.
pub fn sentinel_outcome(cfg: &EnvConfig, request: &SliceRequest) -> DeploymentOutcome {
    let class = cfg.class(request.class);
    DeploymentOutcome {
        slice: request.id,
        class: request.class,
        action: None,
        metrics: QoEMetrics {
            latency_ms: (class.latency_bound_ms + 1) as f64,
            econ_cost: (class.cost_bound + 1) as f64,
            reliability_cost: request.chain_length,
            chain_length: request.chain_length,
        },
        violations: vec![Violation::Infeasible],
        served: false,
    }
}

/// End-of-episode audit: later arrivals can push tenancy past an earlier
/// slice's sharing cap, so reliability is re-checked against the final state.
/// Metrics stay as recorded at deployment time; only violations/served move.
pub fn audit_outcomes(cfg: &EnvConfig, state: &NetworkState, outcomes: &mut [DeploymentOutcome]) {
    for outcome in outcomes.iter_mut() {
        if outcome.action.is_none() {
            continue; // sentinel: nothing was deployed
        }
        let Some(record) = state.active_slices.get(&outcome.slice) else {
            continue; // already released; its deployment-time verdict stands
        };
        let max_share = cfg.class(outcome.class).max_share;
        let broken = record.node_ids.iter().any(|id| state.node(*id).tenant_count() > max_share);
        if broken && !outcome.violations.contains(&Violation::Reliability) {
            outcome.violations.push(Violation::Reliability);
            outcome.served = false;
        }
    }
}
