//! Workbench configuration: environment, training, and retrieval settings.
//!
//! Everything is plain data with serde derives so a single TOML file can pin a
//! whole experiment. `Config::config_hash` fingerprints that file for CSV
//! provenance columns.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Service class of a slice request, ordered from strictest to loosest QoE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QoEClassId {
    HighPriority,
    MediumPriority,
    BestEffort,
}

impl QoEClassId {
    pub const ALL: [QoEClassId; 3] = [
        QoEClassId::HighPriority,
        QoEClassId::MediumPriority,
        QoEClassId::BestEffort,
    ];

    /// Stable index into per-class tables (and the one-hot feature block).
    pub fn index(self) -> usize {
        match self {
            QoEClassId::HighPriority => 0,
            QoEClassId::MediumPriority => 1,
            QoEClassId::BestEffort => 2,
        }
    }
}

impl std::fmt::Display for QoEClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            QoEClassId::HighPriority => "HighPriority",
            QoEClassId::MediumPriority => "MediumPriority",
            QoEClassId::BestEffort => "BestEffort",
        };
        f.write_str(name)
    }
}

/// Per-class QoE contract: latency/cost bounds, sharing cap, demand ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoEClass {
    pub class_id: QoEClassId,
    pub latency_bound_ms: u32,
    pub max_share: u32,
    pub cost_bound: u32,
    /// Inclusive [lo, hi] CPU units demanded per request.
    pub cpu_demand_range: [u32; 2],
    /// Inclusive [lo, hi] memory units demanded per request.
    pub mem_demand_range: [u32; 2],
    /// Inclusive [lo, hi] VNF chain length per request.
    pub chain_length_range: [u32; 2],
}

/// Environment parameters: the substrate topology, delays, and fees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Total number of VNF nodes in the pool.
    pub pool_size: u32,
    /// Fraction of the pool hosted on the local server (rounded to a count).
    pub local_fraction: f64,
    /// Local server CPU capacity shared by all containers.
    pub local_cpu: u32,
    /// Local server memory capacity shared by all containers.
    pub local_mem: u32,
    /// Container boot-up delay charged by HorizontalLocal deployments.
    pub boot_delay_ms: u32,
    /// Extra path delay charged by CloudOffload deployments.
    pub offload_delay_ms: u32,
    /// Inclusive per-node processing delay range, sampled at reset.
    pub node_delay_range: [u32; 2],
    /// Inclusive per-node deployment cost range, sampled at reset.
    pub node_cost_range: [u32; 2],
    /// Server fee charged by local-mode deployments.
    pub local_server_cost: u32,
    /// Server fee charged by cloud deployments.
    pub cloud_server_cost: u32,
    /// Inclusive chain length range (per-class ranges may narrow it).
    pub chain_length_range: [u32; 2],
    /// Latency normalizer for weighted QoE cost (loosest latency bound).
    pub latency_norm: f64,
    /// Economics normalizer for weighted QoE cost (loosest cost bound).
    pub cost_norm: f64,
    /// Reward penalty per constraint violation.
    pub violation_penalty: f64,
    /// Sampling mix over (HighPriority, MediumPriority, BestEffort).
    pub class_mix: [f64; 3],
    /// The three service classes, ordered High, Medium, BestEffort.
    pub classes: [QoEClass; 3],
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            pool_size: 12,
            local_fraction: 0.5,
            local_cpu: 40,
            local_mem: 30,
            boot_delay_ms: 30,
            offload_delay_ms: 40,
            node_delay_range: [10, 15],
            node_cost_range: [2, 4],
            local_server_cost: 30,
            cloud_server_cost: 10,
            chain_length_range: [2, 3],
            latency_norm: 150.0,
            cost_norm: 40.0,
            violation_penalty: 1.0,
            class_mix: [0.1, 0.3, 0.6],
            classes: [
                QoEClass {
                    class_id: QoEClassId::HighPriority,
                    latency_bound_ms: 30,
                    max_share: 1,
                    cost_bound: 25,
                    cpu_demand_range: [2, 5],
                    mem_demand_range: [2, 4],
                    chain_length_range: [2, 3],
                },
                QoEClass {
                    class_id: QoEClassId::MediumPriority,
                    latency_bound_ms: 100,
                    max_share: 2,
                    cost_bound: 25,
                    cpu_demand_range: [3, 6],
                    mem_demand_range: [3, 6],
                    chain_length_range: [2, 3],
                },
                QoEClass {
                    class_id: QoEClassId::BestEffort,
                    latency_bound_ms: 150,
                    max_share: 4,
                    cost_bound: 40,
                    cpu_demand_range: [3, 6],
                    mem_demand_range: [3, 6],
                    chain_length_range: [2, 3],
                },
            ],
        }
    }
}

impl EnvConfig {
    /// Number of pool nodes hosted locally.
    pub fn local_count(&self) -> u32 {
        (self.pool_size as f64 * self.local_fraction).round() as u32
    }

    /// Number of pool nodes hosted in the cloud.
    pub fn cloud_count(&self) -> u32 {
        self.pool_size - self.local_count()
    }

    /// Class table lookup by id.
    pub fn class(&self, id: QoEClassId) -> &QoEClass {
        &self.classes[id.index()]
    }

    /// Largest chain length any request can ask for.
    pub fn max_chain_length(&self) -> u32 {
        self.classes
            .iter()
            .map(|c| c.chain_length_range[1])
            .chain(std::iter::once(self.chain_length_range[1]))
            .max()
            .unwrap_or(1)
    }

    /// Largest per-request CPU demand across classes (feature normalizer).
    pub fn max_cpu_demand(&self) -> u32 {
        self.classes.iter().map(|c| c.cpu_demand_range[1]).max().unwrap_or(1)
    }

    /// Largest per-request memory demand across classes (feature normalizer).
    pub fn max_mem_demand(&self) -> u32 {
        self.classes.iter().map(|c| c.mem_demand_range[1]).max().unwrap_or(1)
    }

    /// Largest sharing cap across classes (feature normalizer).
    pub fn max_share(&self) -> u32 {
        self.classes.iter().map(|c| c.max_share).max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 {
            return Err(Error::InvalidConfig("pool_size must be positive".into()));
        }
        if self.pool_size > 64 {
            return Err(Error::InvalidConfig("pool_size above 64 is unsupported".into()));
        }
        if !(0.0..=1.0).contains(&self.local_fraction) {
            return Err(Error::InvalidConfig("local_fraction must lie in [0, 1]".into()));
        }
        for (name, range) in [
            ("node_delay_range", self.node_delay_range),
            ("node_cost_range", self.node_cost_range),
            ("chain_length_range", self.chain_length_range),
        ] {
            if range[0] > range[1] {
                return Err(Error::InvalidConfig(format!("{name} is empty: {range:?}")));
            }
        }
        if self.chain_length_range[0] == 0 {
            return Err(Error::InvalidConfig("chain lengths must be positive".into()));
        }
        if self.pool_size < self.max_chain_length() {
            return Err(Error::InvalidConfig(format!(
                "pool_size {} cannot host chains of length {}",
                self.pool_size,
                self.max_chain_length()
            )));
        }
        if self.latency_norm <= 0.0 || self.cost_norm <= 0.0 {
            return Err(Error::InvalidConfig("normalizers must be positive".into()));
        }
        if self.violation_penalty < 0.0 {
            return Err(Error::InvalidConfig("violation_penalty must be non-negative".into()));
        }
        validate_mix(&self.class_mix)?;
        for (i, class) in self.classes.iter().enumerate() {
            if class.class_id != QoEClassId::ALL[i] {
                return Err(Error::InvalidConfig(
                    "classes must be ordered HighPriority, MediumPriority, BestEffort".into(),
                ));
            }
            if class.max_share == 0 {
                return Err(Error::InvalidConfig(format!("{} max_share must be positive", class.class_id)));
            }
            for (name, range) in [
                ("cpu_demand_range", class.cpu_demand_range),
                ("mem_demand_range", class.mem_demand_range),
                ("chain_length_range", class.chain_length_range),
            ] {
                if range[0] > range[1] || range[0] == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "{} {name} is empty or zero: {range:?}",
                        class.class_id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Mix vectors must be non-negative and sum to 1 (within 1e-9).
pub fn validate_mix(mix: &[f64; 3]) -> Result<()> {
    if mix.iter().any(|p| *p < 0.0) {
        return Err(Error::InvalidArgument("class mix entries must be non-negative".into()));
    }
    let sum: f64 = mix.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("class mix sums to {sum}, expected 1")));
    }
    Ok(())
}

/// PPO/QAPPO optimisation hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    /// Total environment steps collected over a training run.
    pub total_steps: usize,
    /// Steps per rollout before each optimisation phase.
    pub horizon: usize,
    /// Minibatch size within an optimisation phase.
    pub minibatch: usize,
    /// Optimisation epochs per rollout.
    pub epochs: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// PPO clipping radius epsilon.
    pub clip: f64,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    /// Global gradient-norm ceiling per network.
    pub grad_clip: f64,
    /// Hidden layer widths of actor and critic.
    pub hidden: [usize; 2],
    /// Inclusive range of requests per training episode.
    pub episode_requests: [u32; 2],
}

impl Default for AlgoConfig {
    fn default() -> Self {
        AlgoConfig {
            total_steps: 300_000,
            horizon: 4096,
            minibatch: 1024,
            epochs: 10,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.1,
            learning_rate: 1e-4,
            entropy_coef: 0.01,
            grad_clip: 0.5,
            hidden: [128, 128],
            episode_requests: [4, 20],
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.minibatch == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("horizon, minibatch, and epochs must be positive".into()));
        }
        if self.minibatch > self.horizon {
            return Err(Error::InvalidConfig("minibatch cannot exceed horizon".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::InvalidConfig("gamma and gae_lambda must lie in [0, 1]".into()));
        }
        if self.clip <= 0.0 || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("clip and learning_rate must be positive".into()));
        }
        if self.episode_requests[0] == 0 || self.episode_requests[0] > self.episode_requests[1] {
            return Err(Error::InvalidConfig("episode_requests range is empty or zero".into()));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::InvalidConfig("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

/// Retrieval and memory-bank settings for the intent pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagConfig {
    /// Feature-hashing embedding dimension.
    pub embed_dim: usize,
    /// Exemplars retrieved per inference.
    pub top_k: usize,
    /// Aging rate lambda in the exp(-lambda * age) retrieval discount.
    pub aging_lambda: f64,
    /// Cosine threshold above which a logged intent merges into an entry.
    pub redundancy_tau: f64,
}

impl Default for RagConfig {
    fn default() -> Self {
        RagConfig { embed_dim: 256, top_k: 4, aging_lambda: 0.002, redundancy_tau: 0.95 }
    }
}

impl RagConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(Error::InvalidConfig("embed_dim must be positive".into()));
        }
        if self.aging_lambda < 0.0 {
            return Err(Error::InvalidConfig("aging_lambda must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.redundancy_tau) {
            return Err(Error::InvalidConfig("redundancy_tau must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Full experiment configuration as serialised to/from TOML.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub env: EnvConfig,
    pub algo: AlgoConfig,
    pub rag: RagConfig,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.algo.validate()?;
        self.rag.validate()
    }

    pub fn from_toml_str(raw: &str) -> Result<Config> {
        let cfg: Config =
            toml::from_str(raw).map_err(|e| Error::InvalidConfig(format!("TOML parse failed: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let raw = std::fs::read_to_string(path)?;
        Self::from_toml_str(&raw)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Short hex fingerprint of the canonical TOML form, for CSV provenance.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml_string().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(12);
        for byte in digest.iter().take(6) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
