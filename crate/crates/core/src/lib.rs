//! QoE-aware network-slicing workbench.
//!
//! The crate bundles a deterministic VNF-deployment environment, a
//! multi-objective QoE cost model, heuristic and brute-force baselines, an
//! in-house PPO learner with a preference-conditioned variant (QAPPO), an
//! intent-to-preference retrieval pipeline backed by an incremental memory
//! bank, and the benchmark harness that compares all of the above.

pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod intent;
pub mod memory;
pub mod nn;
pub mod policy;
pub mod qoe;
pub mod rl;

pub use config::{AlgoConfig, Config, EnvConfig, QoEClass, QoEClassId, RagConfig};
pub use error::{Error, Result};
