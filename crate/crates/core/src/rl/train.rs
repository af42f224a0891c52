//! Rollout collection, the training loop, and greedy evaluation episodes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::env::types::{DeployMode, DeploymentAction, DeploymentOutcome, NetworkState, NodeId, SliceRequest};
use crate::env::{apply, default_vertical_target, generate_requests, reset};
use crate::error::{Error, Result};
use crate::nn::Adam;
use crate::qoe::{self, PreferenceVector};
use crate::rl::actor::{ActionMask, ActionSample, PolicyNet};
use crate::rl::features::encode_state;
use crate::rl::gae::{gae, normalize_advantages};
use crate::rl::ppo::{ppo_update, Transition, UpdateStats};

/// Which policy family is being trained or evaluated.
///
/// `Ppo` scores every request with equal weights and sees zeroed preference
/// features; `Qappo` conditions both reward and features on per-request
/// preference vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Ppo,
    Qappo,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Ppo, Variant::Qappo];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Ppo => "ppo",
            Variant::Qappo => "qappo",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ppo" => Ok(Variant::Ppo),
            "qappo" => Ok(Variant::Qappo),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// Supplies one preference vector per arriving request.
pub trait PreferenceProvider {
    fn preferences(&mut self, request: &SliceRequest) -> PreferenceVector;
}

/// Equal weights for every request.
pub struct UniformPrefs;

impl PreferenceProvider for UniformPrefs {
    fn preferences(&mut self, _request: &SliceRequest) -> PreferenceVector {
        PreferenceVector::uniform()
    }
}

/// The same fixed vector for every request.
pub struct FixedPrefs(pub PreferenceVector);

impl PreferenceProvider for FixedPrefs {
    fn preferences(&mut self, _request: &SliceRequest) -> PreferenceVector {
        self.0
    }
}

/// Per-class default vectors, bypassing intent text entirely.
pub struct ClassDefaultPrefs;

impl PreferenceProvider for ClassDefaultPrefs {
    fn preferences(&mut self, request: &SliceRequest) -> PreferenceVector {
        qoe::class_default_preferences(request.class)
    }
}

/// One logged point of the training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Environment steps completed when the point was logged.
    pub step: usize,
    /// Mean total reward of episodes completed since the previous point.
    pub mean_reward: f64,
}

/// Result of a training run.
pub struct TrainOutput {
    pub policy: PolicyNet,
    pub curve: Vec<CurvePoint>,
    pub stats: Vec<UpdateStats>,
}

struct Episode {
    state: NetworkState,
    requests: Vec<SliceRequest>,
    prefs: Vec<PreferenceVector>,
    idx: usize,
    reward_sum: f64,
}

fn new_episode(
    cfg: &Config,
    variant: Variant,
    provider: &mut dyn PreferenceProvider,
    seed: u64,
    n_requests: Option<u32>,
) -> Result<Episode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = cfg.algo.episode_requests;
    let n = n_requests.unwrap_or_else(|| rng.gen_range(lo..=hi));
    let req_seed = rng.gen::<u64>();
    let env_seed = rng.gen::<u64>();
    let requests = generate_requests(&cfg.env, n as usize, req_seed, &cfg.env.class_mix)?;
    let prefs = match variant {
        Variant::Ppo => vec![PreferenceVector::uniform(); requests.len()],
        Variant::Qappo => requests.iter().map(|r| provider.preferences(r)).collect(),
    };
    Ok(Episode { state: reset(&cfg.env, env_seed)?, requests, prefs, idx: 0, reward_sum: 0.0 })
}

/// Assemble the concrete deployment action for a sampled policy output.
pub fn action_from_sample(state: &NetworkState, sample: &ActionSample) -> DeploymentAction {
    DeploymentAction {
        mode: sample.mode,
        node_ids: sample.picks.iter().map(|j| NodeId(*j)).collect(),
        target_container: if sample.mode == DeployMode::VerticalLocal {
            default_vertical_target(state)
        } else {
            None
        },
    }
}

/// Train a policy for `total_steps` environment steps.
///
/// Fully deterministic in `(cfg, variant, provider, seed)`; the provider is
/// consulted once per request at episode construction.
pub fn train(
    cfg: &Config,
    variant: Variant,
    provider: &mut dyn PreferenceProvider,
    total_steps: usize,
    seed: u64,
) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let net_seed = master.gen::<u64>();
    let mut sample_rng = ChaCha8Rng::seed_from_u64(master.gen::<u64>());
    let mut episode_seeds = ChaCha8Rng::seed_from_u64(master.gen::<u64>());
    let mut update_seeds = ChaCha8Rng::seed_from_u64(master.gen::<u64>());

    let mut policy = PolicyNet::new(&cfg.env, &cfg.algo, net_seed);
    let mut opt_actor = Adam::new(policy.actor.params.len(), cfg.algo.learning_rate);
    let mut opt_critic = Adam::new(policy.critic.params.len(), cfg.algo.learning_rate);
    let mut scratch = policy.scratch();

    let mut buffer: Vec<Transition> = Vec::with_capacity(cfg.algo.horizon);
    let mut completed: Vec<f64> = Vec::new();
    let mut curve = Vec::new();
    let mut stats = Vec::new();
    let mut episode: Option<Episode> = None;
    let mut steps_done = 0usize;

    while steps_done < total_steps {
        if episode.is_none() {
            episode =
                Some(new_episode(cfg, variant, provider, episode_seeds.gen::<u64>(), None)?);
        }
        let ep = episode.as_mut().expect("episode ensured above");
        let request = ep.requests[ep.idx].clone();
        let reward_prefs = ep.prefs[ep.idx];
        let feature_prefs = match variant {
            Variant::Ppo => None,
            Variant::Qappo => Some(&ep.prefs[ep.idx]),
        };
        let is_last = ep.idx + 1 == ep.requests.len();
        let mask = ActionMask::build(&cfg.env, &ep.state, &request);
        let features = encode_state(&cfg.env, &ep.state, &request, feature_prefs);

        match policy.act(&features, &mask, request.chain_length, false, &mut sample_rng, &mut scratch)
        {
            None => {
                // Infeasible: score the sentinel and fold it into the last
                // acted step still in the buffer (dropped if none remains).
                let sentinel = qoe::sentinel_outcome(&cfg.env, &request);
                let r =
                    qoe::reward(&cfg.env, &sentinel.metrics, &reward_prefs, &sentinel.violations);
                ep.reward_sum += r;
                if let Some(last) = buffer.last_mut() {
                    last.reward += r;
                    if is_last {
                        last.done = true;
                    }
                }
                ep.idx += 1;
            }
            Some(sample) => {
                let action = action_from_sample(&ep.state, &sample);
                let (next, outcome) = apply(&cfg.env, &ep.state, &request, &action)?;
                let r =
                    qoe::reward(&cfg.env, &outcome.metrics, &reward_prefs, &outcome.violations);
                ep.reward_sum += r;
                buffer.push(Transition {
                    features,
                    mode_idx: sample.mode.index(),
                    mode_mask: sample.mode_mask,
                    node_mask: sample.node_mask,
                    picks: sample.picks,
                    log_prob: sample.log_prob,
                    value: sample.value,
                    reward: r,
                    done: is_last,
                });
                ep.state = next;
                ep.idx += 1;
                steps_done += 1;
            }
        }
        if episode.as_ref().is_some_and(|e| e.idx == e.requests.len()) {
            let ep = episode.take().expect("checked above");
            completed.push(ep.reward_sum);
        }

        if !buffer.is_empty() && (buffer.len() == cfg.algo.horizon || steps_done == total_steps) {
            let bootstrap = match (buffer.last(), &episode) {
                (Some(last), Some(ep)) if !last.done => {
                    let req = &ep.requests[ep.idx];
                    let prefs = match variant {
                        Variant::Ppo => None,
                        Variant::Qappo => Some(&ep.prefs[ep.idx]),
                    };
                    let feats = encode_state(&cfg.env, &ep.state, req, prefs);
                    policy.value(&feats, &mut scratch)
                }
                _ => 0.0,
            };
            let rewards: Vec<f64> = buffer.iter().map(|t| t.reward).collect();
            let values: Vec<f64> = buffer.iter().map(|t| t.value).collect();
            let dones: Vec<bool> = buffer.iter().map(|t| t.done).collect();
            let (mut advantages, returns) =
                gae(&rewards, &values, &dones, bootstrap, cfg.algo.gamma, cfg.algo.gae_lambda)?;
            normalize_advantages(&mut advantages);
            let s = ppo_update(
                &mut policy,
                &mut opt_actor,
                &mut opt_critic,
                &buffer,
                &advantages,
                &returns,
                &cfg.algo,
                update_seeds.gen::<u64>(),
            )?;
            stats.push(s);
            let mean = if completed.is_empty() {
                f64::NAN
            } else {
                completed.iter().sum::<f64>() / completed.len() as f64
            };
            curve.push(CurvePoint { step: steps_done, mean_reward: mean });
            completed.clear();
            buffer.clear();
        }
    }
    Ok(TrainOutput { policy, curve, stats })
}

/// Aggregated evaluation metrics over fixed-size episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mean_latency_ms: f64,
    pub mean_cost: f64,
    pub mean_reliability_cost: f64,
    pub availability: f64,
    pub episodes: u32,
    pub n_requests: u32,
}

/// Shared evaluation driver: runs `episodes` episodes of `n_requests`
/// requests each, consulting `choose` per request and auditing reliability
/// at episode end. Episode seeds derive only from `seed`, so different
/// policies evaluated with the same seed see identical request streams.
pub fn run_eval_episodes(
    cfg: &Config,
    n_requests: u32,
    episodes: u32,
    seed: u64,
    variant: Variant,
    provider: &mut dyn PreferenceProvider,
    choose: &mut dyn FnMut(
        &NetworkState,
        &SliceRequest,
        &PreferenceVector,
    ) -> Option<DeploymentAction>,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::InvalidArgument("evaluation needs at least one episode".into()));
    }
    let [lo, hi] = cfg.algo.episode_requests;
    if !(lo..=hi).contains(&n_requests) {
        return Err(Error::InvalidArgument(format!(
            "n_requests {n_requests} outside the supported range [{lo}, {hi}]"
        )));
    }
    let mut episode_seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut latency = 0.0;
    let mut cost = 0.0;
    let mut reliability = 0.0;
    let mut served = 0usize;
    let mut total = 0usize;
    for _ in 0..episodes {
        let mut ep =
            new_episode(cfg, variant, provider, episode_seeds.gen::<u64>(), Some(n_requests))?;
        let mut outcomes: Vec<DeploymentOutcome> = Vec::with_capacity(ep.requests.len());
        for (request, prefs) in ep.requests.iter().zip(&ep.prefs) {
            match choose(&ep.state, request, prefs) {
                Some(action) => {
                    let (next, outcome) = apply(&cfg.env, &ep.state, request, &action)?;
                    ep.state = next;
                    outcomes.push(outcome);
                }
                None => outcomes.push(qoe::sentinel_outcome(&cfg.env, request)),
            }
        }
        qoe::audit_outcomes(&cfg.env, &ep.state, &mut outcomes);
        for o in &outcomes {
            latency += o.metrics.latency_ms;
            cost += o.metrics.econ_cost;
            reliability += f64::from(o.metrics.reliability_cost);
            served += usize::from(o.served);
            total += 1;
        }
    }
    let n = total as f64;
    Ok(EvalReport {
        mean_latency_ms: latency / n,
        mean_cost: cost / n,
        mean_reliability_cost: reliability / n,
        availability: served as f64 / n,
        episodes,
        n_requests,
    })
}

/// Greedy evaluation of a trained (or fresh) network policy.
pub fn evaluate(
    policy: &PolicyNet,
    cfg: &Config,
    variant: Variant,
    n_requests: u32,
    provider: &mut dyn PreferenceProvider,
    episodes: u32,
    seed: u64,
) -> Result<EvalReport> {
    let mut scratch = policy.scratch();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut choose = |state: &NetworkState, request: &SliceRequest, prefs: &PreferenceVector| {
        let mask = ActionMask::build(&cfg.env, state, request);
        let feature_prefs = match variant {
            Variant::Ppo => None,
            Variant::Qappo => Some(prefs),
        };
        let features = encode_state(&cfg.env, state, request, feature_prefs);
        policy
            .act(&features, &mask, request.chain_length, true, &mut rng, &mut scratch)
            .map(|sample| action_from_sample(state, &sample))
    };
    run_eval_episodes(cfg, n_requests, episodes, seed, variant, provider, &mut choose)
}
