//! Policy checkpoints: a versioned JSON header followed by flat
//! little-endian `f32` parameter arrays for actor and critic.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::rl::actor::{PolicyNet, MODE_HEAD};
use crate::rl::features::feature_dim;
use crate::rl::train::Variant;

const MAGIC: &[u8; 4] = b"SLPC";
const VERSION: u32 = 1;

/// Describes the stored network layout and provenance of a checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub version: u32,
    pub variant: String,
    pub seed: u64,
    pub feature_dim: usize,
    pub pool_size: usize,
    pub hidden: Vec<usize>,
    pub actor_len: usize,
    pub critic_len: usize,
}

impl CheckpointMeta {
    pub fn variant(&self) -> Result<Variant> {
        self.variant.parse()
    }
}

fn dims(meta: &CheckpointMeta) -> (Vec<usize>, Vec<usize>) {
    let mut actor = vec![meta.feature_dim];
    actor.extend(&meta.hidden);
    actor.push(MODE_HEAD + meta.pool_size);
    let mut critic = vec![meta.feature_dim];
    critic.extend(&meta.hidden);
    critic.push(1);
    (actor, critic)
}

/// Write `policy` to `path`.
pub fn save(path: &Path, policy: &PolicyNet, variant: Variant, seed: u64) -> Result<()> {
    let hidden: Vec<usize> = policy.actor.dims()[1..policy.actor.dims().len() - 1].to_vec();
    let meta = CheckpointMeta {
        version: VERSION,
        variant: variant.to_string(),
        seed,
        feature_dim: policy.actor.in_dim(),
        pool_size: policy.pool_size,
        hidden,
        actor_len: policy.actor.params.len(),
        critic_len: policy.critic.params.len(),
    };
    let header = serde_json::to_vec(&meta).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&u32::try_from(header.len()).expect("header fits in u32").to_le_bytes())?;
    w.write_all(&header)?;
    for p in policy.actor.params.iter().chain(&policy.critic.params) {
        w.write_all(&(*p as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a checkpoint back into a usable policy.
pub fn load(path: &Path) -> Result<(PolicyNet, CheckpointMeta)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic {magic:?}",
            path.display()
        )));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut header)?;
    let meta: CheckpointMeta = serde_json::from_slice(&header)
        .map_err(|e| Error::Checkpoint(format!("{}: invalid header: {e}", path.display())))?;
    if meta.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported version {} (expected {VERSION})",
            path.display(),
            meta.version
        )));
    }
    if meta.feature_dim != feature_dim(meta.pool_size) {
        return Err(Error::Checkpoint(format!(
            "{}: feature dim {} inconsistent with pool size {}",
            path.display(),
            meta.feature_dim,
            meta.pool_size
        )));
    }
    meta.variant()?;

    let (actor_dims, critic_dims) = dims(&meta);
    let mut read_params = |n: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; n * 4];
        r.read_exact(&mut buf).map_err(|e| {
            Error::Checkpoint(format!("{}: truncated parameters: {e}", path.display()))
        })?;
        Ok(buf
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect())
    };
    let actor = Mlp::from_params(actor_dims, read_params(meta.actor_len)?)?;
    let critic = Mlp::from_params(critic_dims, read_params(meta.critic_len)?)?;
    Ok((PolicyNet { actor, critic, pool_size: meta.pool_size }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn round_trip_preserves_layout_and_values_to_f32() {
        let cfg = Config::default();
        let policy = PolicyNet::new(&cfg.env, &cfg.algo, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ckpt");
        save(&path, &policy, Variant::Qappo, 42).unwrap();
        let (loaded, meta) = load(&path).unwrap();
        assert_eq!(meta.variant().unwrap(), Variant::Qappo);
        assert_eq!(meta.seed, 42);
        assert_eq!(loaded.actor.dims(), policy.actor.dims());
        assert_eq!(loaded.pool_size, policy.pool_size);
        for (a, b) in loaded.actor.params.iter().zip(&policy.actor.params) {
            assert!((a - b).abs() <= f64::from(f32::EPSILON) * b.abs().max(1.0));
        }
    }

    #[test]
    fn corrupt_files_are_rejected_with_reasons() {
        let cfg = Config::default();
        let policy = PolicyNet::new(&cfg.env, &cfg.algo, 1);
        let dir = tempfile::tempdir().unwrap();

        let bad_magic = dir.path().join("bad_magic.ckpt");
        std::fs::write(&bad_magic, b"NOPE\x00\x00\x00\x00").unwrap();
        assert!(load(&bad_magic).unwrap_err().to_string().contains("bad magic"));

        let truncated = dir.path().join("trunc.ckpt");
        save(&truncated, &policy, Variant::Ppo, 0).unwrap();
        let bytes = std::fs::read(&truncated).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() - 64]).unwrap();
        assert!(load(&truncated).unwrap_err().to_string().contains("truncated"));
    }

    #[test]
    fn loaded_policy_acts_identically_to_f32_precision() {
        use crate::rl::train::{evaluate, UniformPrefs, Variant};
        let cfg = Config::default();
        let policy = PolicyNet::new(&cfg.env, &cfg.algo, 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ckpt");
        save(&path, &policy, Variant::Ppo, 9).unwrap();
        let (loaded, _) = load(&path).unwrap();
        let a = evaluate(&loaded, &cfg, Variant::Ppo, 8, &mut UniformPrefs, 3, 5).unwrap();
        let b = evaluate(&loaded, &cfg, Variant::Ppo, 8, &mut UniformPrefs, 3, 5).unwrap();
        assert_eq!(a, b);
    }
}
