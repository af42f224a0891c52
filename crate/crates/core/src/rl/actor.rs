//! Factorized masked policy: a categorical over deployment modes followed by
//! chain-length sequential masked picks over the node pool, plus a scalar
//! value head on a separate network.
//!
//! Node picks are canonical: strictly ascending in node id, with a lookahead
//! mask that hides any candidate that would strand the remaining picks. This
//! makes ordered pick sequences bijective with node subsets, so the sampled
//! sequence's probability *is* the composite action's probability.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{AlgoConfig, EnvConfig};
use crate::env::types::{DeployMode, HostKind, NetworkState, SliceRequest};
use crate::env::{feasible_modes, selectable_nodes};
use crate::nn::{Mlp, Workspace};
use crate::rl::features::feature_dim;

/// Number of deployment-mode logits.
pub const MODE_HEAD: usize = 3;

/// Feasibility mask for one decision point, as bitmasks over heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionMask {
    /// Bit m set ⇔ `DeployMode::ALL[m]` is feasible.
    pub modes: u64,
    /// Bit j set ⇔ local node j is selectable for this request's class.
    pub local_nodes: u64,
    /// Bit j set ⇔ cloud node j is selectable for this request's class.
    pub cloud_nodes: u64,
}

impl ActionMask {
    /// Derive the mask from environment feasibility rules.
    pub fn build(cfg: &EnvConfig, state: &NetworkState, request: &SliceRequest) -> Self {
        let feasible = feasible_modes(cfg, state, request);
        let mut modes = 0u64;
        for (m, ok) in feasible.iter().enumerate() {
            if *ok {
                modes |= (*ok as u64) << m;
            }
        }
        let share = cfg.class(request.class).max_share;
        let bits = |host: HostKind| {
            selectable_nodes(state, host, share).iter().fold(0u64, |acc, id| acc | 1 << id.0)
        };
        ActionMask { modes, local_nodes: bits(HostKind::Local), cloud_nodes: bits(HostKind::Cloud) }
    }

    pub fn any(&self) -> bool {
        self.modes != 0
    }

    /// Node candidates for a given mode.
    pub fn nodes_for(&self, mode: DeployMode) -> u64 {
        if mode.is_local() {
            self.local_nodes
        } else {
            self.cloud_nodes
        }
    }
}

/// One sampled (or greedily chosen) composite action with its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSample {
    pub mode: DeployMode,
    /// Node indices in ascending order.
    pub picks: Vec<u32>,
    /// Mode-head feasibility bits at decision time.
    pub mode_mask: u64,
    /// Node candidates for the chosen mode at decision time.
    pub node_mask: u64,
    pub log_prob: f64,
    pub value: f64,
}

/// Log-probability and entropy of a composite action under given logits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionEval {
    pub log_prob: f64,
    pub entropy: f64,
}

/// Actor-critic pair over the slicing feature encoding.
#[derive(Debug, Clone)]
pub struct PolicyNet {
    pub actor: Mlp,
    pub critic: Mlp,
    pub pool_size: usize,
}

/// Reusable forward/backward buffers for both networks.
#[derive(Debug, Clone)]
pub struct Scratch {
    pub actor_ws: Workspace,
    pub critic_ws: Workspace,
}

impl PolicyNet {
    /// Fresh Xavier-initialized networks; the actor's final layer is scaled
    /// down so the initial policy is near-uniform over feasible actions.
    pub fn new(env: &EnvConfig, algo: &AlgoConfig, seed: u64) -> Self {
        let feat = feature_dim(env.pool_size as usize);
        let [h0, h1] = algo.hidden;
        let actor_dims = vec![feat, h0, h1, MODE_HEAD + env.pool_size as usize];
        let critic_dims = vec![feat, h0, h1, 1];
        PolicyNet {
            actor: Mlp::new(actor_dims, seed.wrapping_mul(2).wrapping_add(1), 0.01),
            critic: Mlp::new(critic_dims, seed.wrapping_mul(2).wrapping_add(2), 1.0),
            pool_size: env.pool_size as usize,
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch { actor_ws: Workspace::new(&self.actor), critic_ws: Workspace::new(&self.critic) }
    }

    /// Critic estimate for one feature vector.
    pub fn value(&self, features: &[f64], scratch: &mut Scratch) -> f64 {
        self.critic.forward(features, &mut scratch.critic_ws)[0]
    }

    /// Choose a composite action; `None` when no mode is feasible (the caller
    /// takes the infeasible-sentinel path).
    ///
    /// `rng` is only consumed when `greedy` is false.
    pub fn act(
        &self,
        features: &[f64],
        mask: &ActionMask,
        chain_length: u32,
        greedy: bool,
        rng: &mut ChaCha8Rng,
        scratch: &mut Scratch,
    ) -> Option<ActionSample> {
        if !mask.any() {
            return None;
        }
        let value = self.value(features, scratch);
        let logits = self.actor.forward(features, &mut scratch.actor_ws);
        let mut probs = vec![0.0; self.pool_size.max(MODE_HEAD)];

        let mode_lp = head_distribution(&logits[..MODE_HEAD], mask.modes, &mut probs);
        let mode_idx = if greedy { argmax(&probs[..MODE_HEAD]) } else { sample(&probs[..MODE_HEAD], rng) };
        let mode = DeployMode::ALL[mode_idx];
        let mut log_prob = mode_lp[mode_idx];

        let node_logits = &logits[MODE_HEAD..];
        let node_mask = mask.nodes_for(mode);
        let mut picks = Vec::with_capacity(chain_length as usize);
        let mut last: Option<u32> = None;
        for t in 0..chain_length {
            let allowed = pick_mask(node_mask, last, chain_length - t - 1);
            debug_assert_ne!(allowed, 0, "feasible mode guarantees enough candidates");
            let lps = head_distribution(node_logits, allowed, &mut probs);
            let j = if greedy { argmax(&probs[..self.pool_size]) } else { sample(&probs[..self.pool_size], rng) };
            log_prob += lps[j];
            picks.push(j as u32);
            last = Some(j as u32);
        }
        Some(ActionSample { mode, picks, mode_mask: mask.modes, node_mask, log_prob, value })
    }
}

/// Candidates for pick number `T - remaining_after - 1`: strictly above the
/// previous pick and with at least `remaining_after` candidates above them.
pub fn pick_mask(node_mask: u64, last: Option<u32>, remaining_after: u32) -> u64 {
    let base = node_mask & last.map_or(u64::MAX, bits_above);
    let mut allowed = 0u64;
    let mut rest = base;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        if (base & bits_above(j)).count_ones() >= remaining_after {
            allowed |= 1 << j;
        }
    }
    allowed
}

fn bits_above(j: u32) -> u64 {
    if j >= 63 {
        0
    } else {
        !((1u64 << (j + 1)) - 1)
    }
}

/// Stable masked softmax: fills `probs` (zero at masked slots) and returns
/// per-slot log-probabilities (`-inf` at masked slots).
fn head_distribution(logits: &[f64], mask: u64, probs: &mut [f64]) -> Vec<f64> {
    debug_assert_ne!(mask, 0, "head must keep at least one candidate");
    let mut max = f64::NEG_INFINITY;
    for (j, l) in logits.iter().enumerate() {
        if mask & (1 << j) != 0 {
            max = max.max(*l);
        }
    }
    let mut sum = 0.0;
    for (j, l) in logits.iter().enumerate() {
        let p = if mask & (1 << j) != 0 { (l - max).exp() } else { 0.0 };
        probs[j] = p;
        sum += p;
    }
    let log_sum = sum.ln();
    let mut lps = vec![f64::NEG_INFINITY; logits.len()];
    for (j, l) in logits.iter().enumerate() {
        if mask & (1 << j) != 0 {
            probs[j] /= sum;
            lps[j] = (l - max) - log_sum;
        } else {
            probs[j] = 0.0;
        }
    }
    lps
}

fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    let mut fallback = 0;
    for (j, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            fallback = j;
            if r < acc {
                return j;
            }
        }
    }
    fallback
}

fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (j, p) in probs.iter().enumerate() {
        if *p > best_p {
            best_p = *p;
            best = j;
        }
    }
    best
}

/// Log-probability, entropy, and (optionally) logit gradients of a stored
/// composite action under fresh `logits`.
///
/// When gradient buffers are given (length `MODE_HEAD + pool_size`), the
/// log-prob gradient is accumulated into `dlp` and the entropy gradient into
/// `dent`; masked slots receive exactly zero.
pub fn eval_logits(
    logits: &[f64],
    pool_size: usize,
    mode_idx: usize,
    mode_mask: u64,
    node_mask: u64,
    picks: &[u32],
    mut grads: Option<(&mut [f64], &mut [f64])>,
) -> ActionEval {
    let mut probs = vec![0.0; pool_size.max(MODE_HEAD)];
    let mut log_prob = 0.0;
    let mut entropy = 0.0;

    let head = |logit_slice: &[f64], offset: usize, mask: u64, chosen: usize,
                    probs: &mut [f64],
                    grads: &mut Option<(&mut [f64], &mut [f64])>| {
        let lps = head_distribution(logit_slice, mask, probs);
        let mut h = 0.0;
        for (j, p) in probs.iter().enumerate().take(logit_slice.len()) {
            if *p > 0.0 {
                h -= p * p.ln();
            }
            debug_assert!(!(mask & (1 << j) == 0 && *p != 0.0));
        }
        if let Some((dlp, dent)) = grads {
            for (j, p) in probs.iter().enumerate().take(logit_slice.len()) {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let indicator = if j == chosen { 1.0 } else { 0.0 };
                dlp[offset + j] += indicator - p;
                if *p > 0.0 {
                    dent[offset + j] += -p * (p.ln() + h);
                }
            }
        }
        (lps[chosen], h)
    };

    let (lp, h) = head(&logits[..MODE_HEAD], 0, mode_mask, mode_idx, &mut probs, &mut grads);
    log_prob += lp;
    entropy += h;

    let node_logits = &logits[MODE_HEAD..];
    let mut last: Option<u32> = None;
    let total = picks.len() as u32;
    for (t, pick) in picks.iter().enumerate() {
        let allowed = pick_mask(node_mask, last, total - t as u32 - 1);
        let (lp, h) =
            head(node_logits, MODE_HEAD, allowed, *pick as usize, &mut probs, &mut grads);
        log_prob += lp;
        entropy += h;
        last = Some(*pick);
    }
    ActionEval { log_prob, entropy }
}
