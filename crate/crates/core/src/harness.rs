//! Experiment runner: training runs, the four-policy comparison sweep, the
//! exhaustive-oracle audit, intent inspection, and memory snapshots — every
//! table as CSV with a config-hash column so outputs are self-identifying.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, EnvConfig, QoEClassId};
use crate::env::types::{DeploymentAction, NetworkState, SliceRequest};
use crate::env::{apply, generate_requests, reset};
use crate::error::{Error, Result};
use crate::intent::{IntentPipeline, IntentStore, LlmClient, MockLlm};
use crate::memory;
use crate::policy::{cloud_only, local_first, oracle};
use crate::qoe::{class_default_preferences, PreferenceVector};
use crate::rl::checkpoint;
use crate::rl::train::{
    evaluate, run_eval_episodes, train, CurvePoint, EvalReport, PreferenceProvider, UniformPrefs,
    Variant,
};

/// Request counts swept by the comparison run.
pub const SWEEP_COUNTS: [u32; 5] = [4, 8, 12, 16, 20];

/// Evaluation episodes per sweep point.
pub const EPISODES_PER_POINT: u32 = 20;

/// A benchmarked orchestration policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Qappo,
    Ppo,
    LocalFirst,
    CloudOnly,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Qappo, PolicyKind::Ppo, PolicyKind::LocalFirst, PolicyKind::CloudOnly];

    /// The trained variant backing this policy, if it is a learned one.
    pub fn variant(self) -> Option<Variant> {
        match self {
            PolicyKind::Qappo => Some(Variant::Qappo),
            PolicyKind::Ppo => Some(Variant::Ppo),
            _ => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Qappo => "qappo",
            PolicyKind::Ppo => "ppo",
            PolicyKind::LocalFirst => "local-first",
            PolicyKind::CloudOnly => "cloud-only",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "qappo" => Ok(PolicyKind::Qappo),
            "ppo" => Ok(PolicyKind::Ppo),
            "local-first" => Ok(PolicyKind::LocalFirst),
            "cloud-only" => Ok(PolicyKind::CloudOnly),
            other => Err(Error::InvalidArgument(format!("unknown policy '{other}'"))),
        }
    }
}

/// Preference source used for training and evaluating a variant: equal
/// weights for the plain variant, the mock-client intent pipeline (seeded
/// with the bundled bootstrap corpus) for the preference-conditioned one.
pub fn preference_provider(cfg: &Config, variant: Variant) -> Box<dyn PreferenceProvider> {
    match variant {
        Variant::Ppo => Box::new(UniformPrefs),
        Variant::Qappo => {
            let mut store = IntentStore::new(cfg.rag.embed_dim);
            memory::bootstrap(&mut store, memory::seed_records(), cfg.rag.redundancy_tau);
            Box::new(IntentPipeline::new(store, MockLlm, &cfg.rag))
        }
    }
}

/// File name a `(variant, seed)` training run writes inside the out dir.
pub fn checkpoint_name(variant: Variant, seed: u64) -> String {
    format!("policy_{variant}_{seed}.ckpt")
}

/// Artifacts produced by one training run.
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub checkpoint_path: PathBuf,
    pub curve_path: PathBuf,
    pub curve: Vec<CurvePoint>,
}

/// Train one variant and persist its checkpoint plus a curve CSV.
pub fn run_train(
    cfg: &Config,
    variant: Variant,
    seed: u64,
    steps: usize,
    out_dir: &Path,
) -> Result<TrainArtifacts> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut provider = preference_provider(cfg, variant);
    let out = train(cfg, variant, provider.as_mut(), steps, seed)?;

    let hash = cfg.config_hash();
    let curve_path = out_dir.join(format!("curve_{variant}_{seed}.csv"));
    let mut w = csv::Writer::from_path(&curve_path)?;
    w.write_record(["step", "mean_reward", "variant", "seed", "config_hash"])?;
    for p in &out.curve {
        w.write_record(&[
            p.step.to_string(),
            format!("{:.6}", p.mean_reward),
            variant.to_string(),
            seed.to_string(),
            hash.clone(),
        ])?;
    }
    w.flush()?;

    let checkpoint_path = out_dir.join(checkpoint_name(variant, seed));
    checkpoint::save(&checkpoint_path, &out.policy, variant, seed)?;
    Ok(TrainArtifacts { checkpoint_path, curve_path, curve: out.curve })
}

/// Load the checkpoint a comparison expects, failing with its path.
fn load_trained(out_dir: &Path, variant: Variant, seed: u64) -> Result<checkpoint::CheckpointMeta> {
    // Split so the "missing" case names the exact expected path.
    let path = out_dir.join(checkpoint_name(variant, seed));
    if !path.exists() {
        return Err(Error::Checkpoint(format!(
            "missing checkpoint {}; run train --variant {variant} --seed {seed} first",
            path.display()
        )));
    }
    let (_, meta) = checkpoint::load(&path)?;
    Ok(meta)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub policy: PolicyKind,
    pub report: EvalReport,
}

/// Comparison sweep result: rows in policy-major, count-minor order.
#[derive(Debug, Clone)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub path: PathBuf,
}

/// Evaluate `policies` across `counts` and write `compare_{seed}.csv`.
///
/// Every policy sees identical request streams at a given count (the
/// per-point seed depends only on `seed` and the count's position), so the
/// comparison is paired. Learned policies are restored from checkpoints in
/// `out_dir`; a missing file fails with the expected path.
pub fn run_compare(
    cfg: &Config,
    policies: &[PolicyKind],
    counts: &[u32],
    episodes_per_point: u32,
    seed: u64,
    out_dir: &Path,
) -> Result<CompareTable> {
    cfg.validate()?;
    if policies.is_empty() || counts.is_empty() {
        return Err(Error::InvalidArgument("comparison needs at least one policy and count".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut point_rng = ChaCha8Rng::seed_from_u64(seed);
    let point_seeds: Vec<u64> = counts.iter().map(|_| point_rng.gen()).collect();

    let mut rows = Vec::with_capacity(policies.len() * counts.len());
    for kind in policies {
        let loaded = match kind.variant() {
            Some(variant) => {
                let path = out_dir.join(checkpoint_name(variant, seed));
                load_trained(out_dir, variant, seed)?;
                Some((checkpoint::load(&path)?.0, variant))
            }
            None => None,
        };
        for (i, &n) in counts.iter().enumerate() {
            let point_seed = point_seeds[i];
            let report = match (&loaded, kind) {
                (Some((policy, variant)), _) => {
                    let mut provider = preference_provider(cfg, *variant);
                    evaluate(policy, cfg, *variant, n, provider.as_mut(), episodes_per_point, point_seed)?
                }
                (None, PolicyKind::LocalFirst) => {
                    heuristic_report(cfg, local_first, n, episodes_per_point, point_seed)?
                }
                (None, PolicyKind::CloudOnly) => {
                    heuristic_report(cfg, cloud_only, n, episodes_per_point, point_seed)?
                }
                (None, _) => unreachable!("learned kinds always load a checkpoint"),
            };
            rows.push(CompareRow { policy: *kind, report });
        }
    }

    let hash = cfg.config_hash();
    let path = out_dir.join(format!("compare_{seed}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "policy",
        "n_requests",
        "mean_latency_ms",
        "mean_cost",
        "mean_reliability_cost",
        "availability_ratio",
        "episodes",
        "seed",
        "config_hash",
    ])?;
    for row in &rows {
        let r = &row.report;
        w.write_record(&[
            row.policy.to_string(),
            r.n_requests.to_string(),
            format!("{:.6}", r.mean_latency_ms),
            format!("{:.6}", r.mean_cost),
            format!("{:.6}", r.mean_reliability_cost),
            format!("{:.6}", r.availability),
            r.episodes.to_string(),
            seed.to_string(),
            hash.clone(),
        ])?;
    }
    w.flush()?;
    Ok(CompareTable { rows, path })
}

/// Run one heuristic through the shared evaluation driver.
fn heuristic_report(
    cfg: &Config,
    pick: fn(&EnvConfig, &NetworkState, &SliceRequest) -> Option<DeploymentAction>,
    n: u32,
    episodes: u32,
    seed: u64,
) -> Result<EvalReport> {
    let mut choose =
        |state: &NetworkState, request: &SliceRequest, _prefs: &PreferenceVector| {
            pick(&cfg.env, state, request)
        };
    run_eval_episodes(cfg, n, episodes, seed, Variant::Ppo, &mut UniformPrefs, &mut choose)
}

/// What one intent inference produced, for printing.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentReport {
    pub preferences: PreferenceVector,
    /// Retrieved exemplar texts with aged scores, best first.
    pub exemplars: Vec<(String, f64)>,
    pub fell_back: bool,
    /// Entries available for retrieval (0 = zero-shot).
    pub store_len: usize,
}

/// Infer a preference vector for `text` against an optional store snapshot.
///
/// A missing snapshot path is treated as an empty store (zero-shot).
pub fn run_intent<C: LlmClient>(
    cfg: &Config,
    text: &str,
    class: QoEClassId,
    store_path: Option<&Path>,
    client: C,
) -> Result<IntentReport> {
    let store = match store_path {
        Some(p) if p.exists() => memory::load(p)?,
        _ => IntentStore::new(cfg.rag.embed_dim),
    };
    let store_len = store.len();
    let mut pipeline = IntentPipeline::new(store, client, &cfg.rag);
    let detail = pipeline.infer_detailed(text, class);
    Ok(IntentReport {
        preferences: detail.preferences,
        exemplars: detail.exemplars,
        fell_back: detail.fell_back,
        store_len,
    })
}

/// Per-instance audit row: exhaustive-search cost vs heuristic rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub instance: u32,
    pub oracle_cost: f64,
    pub local_first_cost: f64,
    pub cloud_only_cost: f64,
}

/// Mean/max optimality gap (cost ratio − 1) of one policy over the audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSummary {
    pub mean_gap: f64,
    pub max_gap: f64,
}

/// Audit result with per-policy gap summaries.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub local_first: GapSummary,
    pub cloud_only: GapSummary,
    pub path: PathBuf,
}

/// Shrink an environment to the exhaustive-search guard (pool and chain
/// lengths clamped; everything else untouched).
pub fn guarded_env(env: &EnvConfig) -> EnvConfig {
    let mut small = env.clone();
    small.pool_size = small.pool_size.min(oracle::MAX_POOL as u32);
    let clamp = |r: [u32; 2]| [r[0].min(oracle::MAX_CHAIN), r[1].min(oracle::MAX_CHAIN)];
    small.chain_length_range = clamp(small.chain_length_range);
    for class in &mut small.classes {
        class.chain_length_range = clamp(class.chain_length_range);
    }
    small
}

/// Audit both heuristics against the exhaustive oracle on random guarded
/// instances; write `oracle_audit_{seed}.csv`.
pub fn run_oracle_audit(
    cfg: &Config,
    instances: u32,
    requests_per_instance: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<AuditReport> {
    if instances == 0 {
        return Err(Error::InvalidArgument("audit needs at least one instance".into()));
    }
    if requests_per_instance == 0 || requests_per_instance > oracle::MAX_REQUESTS {
        return Err(Error::InvalidArgument(format!(
            "the search guard caps audit instances at {} requests, got {requests_per_instance}",
            oracle::MAX_REQUESTS
        )));
    }
    let env = guarded_env(&cfg.env);
    env.validate()?;
    fs::create_dir_all(out_dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(instances as usize);
    for instance in 0..instances {
        let env_seed = rng.gen::<u64>();
        let req_seed = rng.gen::<u64>();
        let state = reset(&env, env_seed)?;
        let requests = generate_requests(&env, requests_per_instance, req_seed, &env.class_mix)?;
        let prefs: Vec<PreferenceVector> =
            requests.iter().map(|r| class_default_preferences(r.class)).collect();
        let plan = oracle::brute_force_optimal(&env, &state, &requests, &prefs)?;
        rows.push(AuditRow {
            instance,
            oracle_cost: plan.total_cost,
            local_first_cost: rollout_cost(&env, &state, &requests, &prefs, local_first)?,
            cloud_only_cost: rollout_cost(&env, &state, &requests, &prefs, cloud_only)?,
        });
    }

    let summarize = |cost: fn(&AuditRow) -> f64| {
        let gaps: Vec<f64> = rows.iter().map(|r| cost(r) / r.oracle_cost - 1.0).collect();
        GapSummary {
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
            max_gap: gaps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
        }
    };
    let local = summarize(|r| r.local_first_cost);
    let cloud = summarize(|r| r.cloud_only_cost);

    let hash = cfg.config_hash();
    let path = out_dir.join(format!("oracle_audit_{seed}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "instance",
        "oracle_cost",
        "local_first_cost",
        "local_first_ratio",
        "cloud_only_cost",
        "cloud_only_ratio",
        "config_hash",
    ])?;
    for r in &rows {
        w.write_record(&[
            r.instance.to_string(),
            format!("{:.6}", r.oracle_cost),
            format!("{:.6}", r.local_first_cost),
            format!("{:.6}", r.local_first_cost / r.oracle_cost),
            format!("{:.6}", r.cloud_only_cost),
            format!("{:.6}", r.cloud_only_cost / r.oracle_cost),
            hash.clone(),
        ])?;
    }
    w.flush()?;
    Ok(AuditReport { rows, local_first: local, cloud_only: cloud, path })
}

/// Sequential rollout cost of one heuristic on a fixed instance, scored
/// with the same step cost the oracle minimizes.
fn rollout_cost(
    env: &EnvConfig,
    state: &NetworkState,
    requests: &[SliceRequest],
    prefs: &[PreferenceVector],
    pick: fn(&EnvConfig, &NetworkState, &SliceRequest) -> Option<DeploymentAction>,
) -> Result<f64> {
    let mut rolling = state.clone();
    let mut cost = 0.0;
    for (request, pref) in requests.iter().zip(prefs) {
        let action = pick(env, &rolling, request);
        cost += oracle::step_cost(env, &rolling, request, action.as_ref(), pref);
        if let Some(action) = action {
            rolling = apply(env, &rolling, request, &action)?.0;
        }
    }
    Ok(cost)
}

/// Digest of one stored memory entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRow {
    pub intent_text: String,
    pub preference: [f64; 3],
    pub timestamp: u64,
    pub merge_count: u32,
}

/// Summary of a memory snapshot for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryInspection {
    pub entries: usize,
    pub clock: u64,
    pub dim: usize,
    /// Raw experiences folded into the store (sum of merge counts).
    pub total_experiences: u64,
    pub rows: Vec<MemoryRow>,
}

/// Load a snapshot and summarize it, newest entries first.
pub fn inspect_memory(path: &Path) -> Result<MemoryInspection> {
    let store = memory::load(path)?;
    let mut rows: Vec<MemoryRow> = store
        .entries
        .iter()
        .map(|e| MemoryRow {
            intent_text: e.intent_text.clone(),
            preference: e.preference.as_array(),
            timestamp: e.timestamp,
            merge_count: e.merge_count,
        })
        .collect();
    rows.sort_by(|a, b| b.timestamp.cmp(&a.timestamp).then(a.intent_text.cmp(&b.intent_text)));
    Ok(MemoryInspection {
        entries: store.len(),
        clock: store.clock,
        dim: store.dim,
        total_experiences: store.entries.iter().map(|e| u64::from(e.merge_count)).sum(),
        rows,
    })
}
