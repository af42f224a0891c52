//! State encoding: network status, request demands, and preference weights
//! flattened into a fixed-length normalized feature vector.

use crate::config::EnvConfig;
use crate::env::types::{HostKind, NetworkState, SliceRequest};
use crate::qoe::PreferenceVector;

/// Feature vector length for a pool of `pool_size` nodes.
pub fn feature_dim(pool_size: usize) -> usize {
    11 + 4 * pool_size
}

/// Encode one decision point. `prefs = None` zeroes the preference block
/// (the preference-blind variant); all entries land in [0, 1].
pub fn encode_state(
    cfg: &EnvConfig,
    state: &NetworkState,
    request: &SliceRequest,
    prefs: Option<&PreferenceVector>,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(feature_dim(cfg.pool_size as usize));
    out.push(f64::from(state.local_cpu_free) / f64::from(cfg.local_cpu));
    out.push(f64::from(state.local_mem_free) / f64::from(cfg.local_mem));
    out.push(f64::from(request.cpu) / f64::from(cfg.max_cpu_demand()));
    out.push(f64::from(request.mem) / f64::from(cfg.max_mem_demand()));
    out.push(f64::from(request.chain_length) / f64::from(cfg.max_chain_length()));
    for class in crate::config::QoEClassId::ALL {
        out.push(if class == request.class { 1.0 } else { 0.0 });
    }
    let max_delay = f64::from(cfg.node_delay_range[1]);
    let max_cost = f64::from(cfg.node_cost_range[1]);
    let max_share = f64::from(cfg.max_share());
    for node in &state.nodes {
        out.push(f64::from(node.delay_ms) / max_delay);
        out.push(f64::from(node.deploy_cost) / max_cost);
        out.push((f64::from(node.tenant_count()) / max_share).min(1.0));
        out.push(if node.host == HostKind::Cloud { 1.0 } else { 0.0 });
    }
    let pref_block = prefs.map_or([0.0; 3], PreferenceVector::as_array);
    out.extend_from_slice(&pref_block);
    debug_assert_eq!(out.len(), feature_dim(cfg.pool_size as usize));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::QoEClassId;
    use crate::env::reset;
    use crate::env::types::SliceId;

    fn sample_request() -> SliceRequest {
        SliceRequest {
            id: SliceId(0),
            class: QoEClassId::MediumPriority,
            cpu: 3,
            mem: 3,
            chain_length: 2,
            intent_text: String::new(),
            arrival_index: 0,
        }
    }

    #[test]
    fn fresh_state_reports_full_capacity() {
        let cfg = EnvConfig::default();
        let state = reset(&cfg, 0).unwrap();
        let feats = encode_state(&cfg, &state, &sample_request(), None);
        assert_eq!(feats.len(), feature_dim(cfg.pool_size as usize));
        assert_eq!(feats[0], 1.0);
        assert_eq!(feats[1], 1.0);
    }

    #[test]
    fn preference_block_zeroes_without_prefs_and_copies_with() {
        let cfg = EnvConfig::default();
        let state = reset(&cfg, 0).unwrap();
        let req = sample_request();
        let blind = encode_state(&cfg, &state, &req, None);
        assert_eq!(&blind[blind.len() - 3..], &[0.0, 0.0, 0.0]);

        let prefs = PreferenceVector::new(0.5, 0.3, 0.2).unwrap();
        let aware = encode_state(&cfg, &state, &req, Some(&prefs));
        assert_eq!(&aware[aware.len() - 3..], &[0.5, 0.3, 0.2]);
        // The two encodings agree everywhere else.
        assert_eq!(&blind[..blind.len() - 3], &aware[..aware.len() - 3]);
    }

    #[test]
    fn every_entry_stays_in_unit_interval() {
        let cfg = EnvConfig::default();
        for seed in 0..20u64 {
            let state = reset(&cfg, seed).unwrap();
            let feats = encode_state(&cfg, &state, &sample_request(), None);
            for (i, f) in feats.iter().enumerate() {
                assert!((0.0..=1.0).contains(f), "entry {i} = {f} out of range");
            }
        }
    }

    #[test]
    fn class_one_hot_marks_the_request_class() {
        let cfg = EnvConfig::default();
        let state = reset(&cfg, 1).unwrap();
        let mut req = sample_request();
        req.class = QoEClassId::BestEffort;
        let feats = encode_state(&cfg, &state, &req, None);
        assert_eq!(&feats[5..8], &[0.0, 0.0, 1.0]);
    }
}
