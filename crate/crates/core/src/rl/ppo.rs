//! Clipped-surrogate policy optimization over collected rollout batches.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::AlgoConfig;
use crate::error::{Error, Result};
use crate::nn::{clip_grad_norm, Adam};
use crate::rl::actor::{eval_logits, PolicyNet, MODE_HEAD};

/// One stored environment step, sufficient to re-evaluate the action's
/// probability under updated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub features: Vec<f64>,
    pub mode_idx: usize,
    pub mode_mask: u64,
    pub node_mask: u64,
    pub picks: Vec<u32>,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// Batch-averaged diagnostics of one optimization phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

/// Clipped surrogate objective for one sample; returns the objective value
/// and whether gradient flows through the ratio.
pub(crate) fn clip_objective(ratio: f64, advantage: f64, clip: f64) -> (f64, bool) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    let active = if advantage >= 0.0 { ratio <= 1.0 + clip } else { ratio >= 1.0 - clip };
    (unclipped.min(clipped), active)
}

/// Run `algo.epochs` passes of shuffled minibatch updates over the batch.
///
/// `advantages` must already be normalized; `returns` are the critic targets.
pub fn ppo_update(
    policy: &mut PolicyNet,
    opt_actor: &mut Adam,
    opt_critic: &mut Adam,
    batch: &[Transition],
    advantages: &[f64],
    returns: &[f64],
    algo: &AlgoConfig,
    seed: u64,
) -> Result<UpdateStats> {
    if batch.len() != advantages.len() || batch.len() != returns.len() {
        return Err(Error::InvalidArgument(format!(
            "batch {} vs advantages {} vs returns {}",
            batch.len(),
            advantages.len(),
            returns.len()
        )));
    }
    if batch.is_empty() {
        return Ok(UpdateStats { policy_loss: 0.0, value_loss: 0.0, entropy: 0.0, clip_fraction: 0.0 });
    }

    let width = MODE_HEAD + policy.pool_size;
    let mut scratch = policy.scratch();
    let mut grad_actor = vec![0.0; policy.actor.params.len()];
    let mut grad_critic = vec![0.0; policy.critic.params.len()];
    let mut dlp = vec![0.0; width];
    let mut dent = vec![0.0; width];
    let mut dlogits = vec![0.0; width];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..batch.len()).collect();

    let mut policy_loss_sum = 0.0;
    let mut value_loss_sum = 0.0;
    let mut entropy_sum = 0.0;
    let mut clipped_count = 0usize;
    let mut visits = 0usize;

    for _ in 0..algo.epochs {
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(algo.minibatch) {
            grad_actor.fill(0.0);
            grad_critic.fill(0.0);
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let t = &batch[i];
                let logits = policy.actor.forward(&t.features, &mut scratch.actor_ws);
                dlp.fill(0.0);
                dent.fill(0.0);
                let eval = eval_logits(
                    logits,
                    policy.pool_size,
                    t.mode_idx,
                    t.mode_mask,
                    t.node_mask,
                    &t.picks,
                    Some((&mut dlp, &mut dent)),
                );
                let ratio = (eval.log_prob - t.log_prob).exp();
                let advantage = advantages[i];
                let (objective, active) = clip_objective(ratio, advantage, algo.clip);
                if !objective.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "surrogate objective diverged: ratio {ratio}, advantage {advantage}, \
                         new log-prob {}, old log-prob {}",
                        eval.log_prob, t.log_prob
                    )));
                }
                policy_loss_sum += -objective;
                entropy_sum += eval.entropy;
                if active { /* ratio inside trust region */ } else {
                    clipped_count += 1;
                }
                visits += 1;

                let pol_coef = if active { -advantage * ratio } else { 0.0 };
                for j in 0..width {
                    dlogits[j] = (pol_coef * dlp[j] - algo.entropy_coef * dent[j]) * scale;
                }
                policy.actor.backward(&mut scratch.actor_ws, &dlogits, &mut grad_actor);

                let value = policy.critic.forward(&t.features, &mut scratch.critic_ws)[0];
                let err = value - returns[i];
                if !err.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "critic error diverged: value {value}, return {}",
                        returns[i]
                    )));
                }
                value_loss_sum += 0.5 * err * err;
                policy.critic.backward(&mut scratch.critic_ws, &[err * scale], &mut grad_critic);
            }
            clip_grad_norm(&mut grad_actor, algo.grad_clip);
            clip_grad_norm(&mut grad_critic, algo.grad_clip);
            opt_actor.step(&mut policy.actor.params, &grad_actor);
            opt_critic.step(&mut policy.critic.params, &grad_critic);
        }
    }

    let n = visits as f64;
    Ok(UpdateStats {
        policy_loss: policy_loss_sum / n,
        value_loss: value_loss_sum / n,
        entropy: entropy_sum / n,
        clip_fraction: clipped_count as f64 / n,
    })
}
