//! Generalized advantage estimation and batch advantage normalization.

use crate::error::{Error, Result};

/// Compute GAE advantages and discounted returns.
///
/// `bootstrap` is the value estimate of the state following the last step,
/// used only when that step is not terminal.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() || rewards.len() != dones.len() {
        return Err(Error::InvalidArgument(format!(
            "mismatched lengths: {} rewards, {} values, {} dones",
            rewards.len(),
            values.len(),
            dones.len()
        )));
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}

/// In-place shift/scale to zero mean and unit variance (population).
pub fn normalize_advantages(advantages: &mut [f64]) {
    if advantages.is_empty() {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in advantages.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_step_reduces_to_reward_minus_value() {
        let (adv, ret) = gae(&[2.0], &[0.5], &[true], 9.9, 0.99, 0.95).unwrap();
        assert!((adv[0] - 1.5).abs() < 1e-12);
        assert!((ret[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_zero_reduces_to_one_step_td() {
        let rewards = [1.0, -0.5, 0.25];
        let values = [0.3, 0.6, -0.2];
        let dones = [false, false, false];
        let bootstrap = 0.4;
        let (adv, _) = gae(&rewards, &values, &dones, bootstrap, 0.9, 0.0).unwrap();
        let nexts = [values[1], values[2], bootstrap];
        for t in 0..3 {
            let td = rewards[t] + 0.9 * nexts[t] - values[t];
            assert!((adv[t] - td).abs() < 1e-12, "step {t}");
        }
    }

    #[test]
    fn undiscounted_full_lambda_sums_future_rewards() {
        let (adv, _) =
            gae(&[1.0, 1.0, 1.0], &[0.0; 3], &[false, false, true], 0.0, 1.0, 1.0).unwrap();
        assert_eq!(adv, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn episode_boundary_blocks_credit_flow() {
        let (adv, _) =
            gae(&[1.0, 5.0], &[0.0, 0.0], &[true, true], 0.0, 0.99, 0.95).unwrap();
        // The first step must not see the second episode's reward.
        assert!((adv[0] - 1.0).abs() < 1e-12);
        assert!((adv[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(gae(&[1.0], &[0.0, 0.0], &[true], 0.0, 0.99, 0.95).is_err());
        assert!(gae(&[1.0], &[0.0], &[true, false], 0.0, 0.99, 0.95).is_err());
    }

    #[test]
    fn normalization_hits_zero_mean_unit_variance() {
        let mut adv: Vec<f64> = (0..64).map(|i| (i as f64) * 0.37 - 5.0).collect();
        normalize_advantages(&mut adv);
        let n = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / n;
        let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        assert!(mean.abs() <= 1e-6, "mean {mean}");
        assert!((var - 1.0).abs() <= 1e-6, "variance {var}");
    }
}
