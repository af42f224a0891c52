//! Exhaustive-search oracle for small instances.
//!
//! Enumerates every feasible action sequence for a short request list and
//! returns one minimising the summed weighted QoE cost plus violation
//! penalties. Instance size is guarded so the search stays tractable.

use crate::config::EnvConfig;
use crate::env::types::{DeploymentAction, NetworkState, SliceRequest};
use crate::env::{apply, feasible_actions};
use crate::error::{Error, Result};
use crate::qoe::{self, PreferenceVector};

/// Largest request count the oracle accepts.
pub const MAX_REQUESTS: usize = 3;
/// Largest chain length the oracle accepts.
pub const MAX_CHAIN: u32 = 2;
/// Largest node pool the oracle accepts.
pub const MAX_POOL: usize = 6;

/// An optimal plan: one decision per request (`None` = infeasible sentinel).
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePlan {
    pub actions: Vec<Option<DeploymentAction>>,
    pub total_cost: f64,
}

/// Cost contribution of one decision, shared with policy scoring so oracle
/// and baselines are compared on identical terms.
pub fn step_cost(
    cfg: &EnvConfig,
    state: &NetworkState,
    request: &SliceRequest,
    action: Option<&DeploymentAction>,
    prefs: &PreferenceVector,
) -> f64 {
    let (metrics, violations) = match action {
        Some(action) => {
            let metrics = qoe::action_metrics(cfg, state, request, action);
            // Post-deployment tenancy of each selected node is current + 1.
            let post: Vec<u32> =
                action.node_ids.iter().map(|id| state.node(*id).tenant_count() + 1).collect();
            (metrics, qoe::check_constraints(&metrics, cfg.class(request.class), &post))
        }
        None => {
            let sentinel = qoe::sentinel_outcome(cfg, request);
            (sentinel.metrics, sentinel.violations)
        }
    };
    qoe::weighted_cost(cfg, &metrics, prefs) + cfg.violation_penalty * violations.len() as f64
}

/// Exhaustively search the decision tree rooted at `state`.
///
/// `prefs` pairs one preference vector with each request. Errors if the
/// instance exceeds the guarded size.
pub fn brute_force_optimal(
    cfg: &EnvConfig,
    state: &NetworkState,
    requests: &[SliceRequest],
    prefs: &[PreferenceVector],
) -> Result<OraclePlan> {
    if requests.len() > MAX_REQUESTS {
        return Err(Error::InvalidArgument(format!(
            "oracle accepts at most {MAX_REQUESTS} requests, got {}",
            requests.len()
        )));
    }
    if let Some(r) = requests.iter().find(|r| r.chain_length > MAX_CHAIN) {
        return Err(Error::InvalidArgument(format!(
            "oracle accepts chains up to {MAX_CHAIN}, request {} asks for {}",
            r.id, r.chain_length
        )));
    }
    if state.nodes.len() > MAX_POOL {
        return Err(Error::InvalidArgument(format!(
            "oracle accepts pools up to {MAX_POOL} nodes, state has {}",
            state.nodes.len()
        )));
    }
    if prefs.len() != requests.len() {
        return Err(Error::InvalidArgument(format!(
            "{} preference vectors for {} requests",
            prefs.len(),
            requests.len()
        )));
    }

    let mut best: Option<OraclePlan> = None;
    let mut trail: Vec<Option<DeploymentAction>> = Vec::with_capacity(requests.len());
    search(cfg, state, requests, prefs, 0.0, &mut trail, &mut best)?;
    Ok(best.expect("the sentinel path always yields a plan"))
}

fn search(
    cfg: &EnvConfig,
    state: &NetworkState,
    remaining: &[SliceRequest],
    prefs: &[PreferenceVector],
    cost_so_far: f64,
    trail: &mut Vec<Option<DeploymentAction>>,
    best: &mut Option<OraclePlan>,
) -> Result<()> {
    if let Some(plan) = best {
        // Step costs are non-negative, so a partial sum at or past the best
        // full plan can be cut. Strict `<` keeps the first (lexicographically
        // smallest) optimum found.
        if cost_so_far >= plan.total_cost {
            return Ok(());
        }
    }
    let Some((request, rest)) = remaining.split_first() else {
        let plan = OraclePlan { actions: trail.clone(), total_cost: cost_so_far };
        if best.as_ref().is_none_or(|b| plan.total_cost < b.total_cost) {
            *best = Some(plan);
        }
        return Ok(());
    };
    let pref = &prefs[prefs.len() - remaining.len()];
    for action in feasible_actions(cfg, state, request) {
        let cost = cost_so_far + step_cost(cfg, state, request, Some(&action), pref);
        let (next, _) = apply(cfg, state, request, &action)?;
        trail.push(Some(action));
        search(cfg, &next, rest, prefs, cost, trail, best)?;
        trail.pop();
    }
    // Declining is always realizable — every policy falls back to the
    // sentinel when its preferred mode is blocked — so the oracle must
    // search that branch unconditionally to stay a true lower bound.
    let cost = cost_so_far + step_cost(cfg, state, request, None, pref);
    trail.push(None);
    search(cfg, state, rest, prefs, cost, trail, best)?;
    trail.pop();
    Ok(())
}
