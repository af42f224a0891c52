//! slicebench: train, compare, and inspect QoE-aware slicing policies.

mod remote;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use slicesim::config::{Config, QoEClassId};
use slicesim::harness::{
    inspect_memory, run_compare, run_intent, run_oracle_audit, run_train, IntentReport,
    PolicyKind, EPISODES_PER_POINT, SWEEP_COUNTS,
};
use slicesim::intent::MockLlm;
use slicesim::rl::train::Variant;

use crate::remote::RemoteLlm;

/// Benchmark workbench for QoE-aware network slice orchestration.
#[derive(Parser, Debug)]
#[command(name = "slicebench", version, about)]
struct Cli {
    /// TOML config file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for the subcommand.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Directory for checkpoints and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

/// Completion client backing intent inference.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ClientArg {
    Mock,
    Remote,
}

/// QoE class used when inference has to fall back.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ClassArg {
    HighPriority,
    MediumPriority,
    BestEffort,
}

impl From<ClassArg> for QoEClassId {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::HighPriority => QoEClassId::HighPriority,
            ClassArg::MediumPriority => QoEClassId::MediumPriority,
            ClassArg::BestEffort => QoEClassId::BestEffort,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one policy variant; writes a checkpoint and a curve CSV.
    Train {
        /// Variant to train: ppo or qappo.
        #[arg(long, value_parser = Variant::from_str, default_value = "qappo")]
        variant: Variant,

        /// Environment steps to train for (config default when omitted).
        #[arg(long)]
        steps: Option<usize>,
    },

    /// Evaluate policies across request counts; writes compare_{seed}.csv.
    Compare {
        /// Comma-separated policies to include.
        #[arg(long, value_parser = PolicyKind::from_str, value_delimiter = ',',
              default_values_t = PolicyKind::ALL)]
        policies: Vec<PolicyKind>,

        /// Comma-separated request counts to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_COUNTS)]
        counts: Vec<u32>,

        /// Evaluation episodes per sweep point.
        #[arg(long, default_value_t = EPISODES_PER_POINT)]
        episodes: u32,
    },

    /// Infer preference weights for one intent text.
    Intent {
        /// The intent to analyze.
        text: String,

        /// Completion client.
        #[arg(long, value_enum, default_value_t = ClientArg::Mock)]
        client: ClientArg,

        /// Memory snapshot to retrieve exemplars from (zero-shot when absent).
        #[arg(long)]
        store: Option<PathBuf>,

        /// QoE class for the fallback default.
        #[arg(long, value_enum, default_value_t = ClassArg::MediumPriority)]
        class: ClassArg,
    },

    /// Audit the heuristics against the exhaustive oracle on small instances.
    OracleAudit {
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        instances: u32,

        /// Requests per instance (capped by the search guard).
        #[arg(long, default_value_t = 3)]
        requests: usize,
    },

    /// Summarize a memory snapshot.
    MemoryInspect {
        /// Snapshot path.
        path: PathBuf,

        /// Entries to print (newest first).
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => Config::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => Config::default(),
    };

    match cli.command {
        Command::Train { variant, steps } => {
            let steps = steps.unwrap_or(cfg.algo.total_steps);
            let art = run_train(&cfg, variant, cli.seed, steps, &cli.out)?;
            println!("checkpoint: {}", art.checkpoint_path.display());
            println!("curve:      {}", art.curve_path.display());
            if let Some(last) = art.curve.last() {
                println!("final point: step {} mean_reward {:.3}", last.step, last.mean_reward);
            }
        }
        Command::Compare { policies, counts, episodes } => {
            let table = run_compare(&cfg, &policies, &counts, episodes, cli.seed, &cli.out)?;
            println!(
                "{:<12} {:>10} {:>12} {:>10} {:>12} {:>13}",
                "policy", "n_requests", "latency_ms", "cost", "reliability", "availability"
            );
            for row in &table.rows {
                let r = &row.report;
                println!(
                    "{:<12} {:>10} {:>12.2} {:>10.2} {:>12.3} {:>13.3}",
                    row.policy.to_string(),
                    r.n_requests,
                    r.mean_latency_ms,
                    r.mean_cost,
                    r.mean_reliability_cost,
                    r.availability
                );
            }
            println!("table: {}", table.path.display());
        }
        Command::Intent { text, client, store, class } => {
            let report = match client {
                ClientArg::Mock => {
                    run_intent(&cfg, &text, class.into(), store.as_deref(), MockLlm)?
                }
                ClientArg::Remote => {
                    let remote = RemoteLlm::from_env()?;
                    run_intent(&cfg, &text, class.into(), store.as_deref(), remote)?
                }
            };
            print_intent(&report);
        }
        Command::OracleAudit { instances, requests } => {
            let audit = run_oracle_audit(&cfg, instances, requests, cli.seed, &cli.out)?;
            println!(
                "local-first  mean gap {:.4}  max gap {:.4}",
                audit.local_first.mean_gap, audit.local_first.max_gap
            );
            println!(
                "cloud-only   mean gap {:.4}  max gap {:.4}",
                audit.cloud_only.mean_gap, audit.cloud_only.max_gap
            );
            println!("{} instances audited; report: {}", audit.rows.len(), audit.path.display());
        }
        Command::MemoryInspect { path, limit } => {
            let view = inspect_memory(&path)?;
            println!(
                "{} entries ({} raw experiences), clock {}, dim {}",
                view.entries, view.total_experiences, view.clock, view.dim
            );
            for row in view.rows.iter().take(limit) {
                let [l, r, e] = row.preference;
                println!(
                    "  t={:<6} x{:<3} ({l:.3}, {r:.3}, {e:.3})  {}",
                    row.timestamp, row.merge_count, row.intent_text
                );
            }
        }
    }
    Ok(())
}

fn print_intent(report: &IntentReport) {
    let [l, r, e] = report.preferences.as_array();
    println!("preferences: ({l}, {r}, {e})");
    if report.fell_back {
        println!("note: class-default fallback used");
    }
    if report.exemplars.is_empty() {
        println!("0 exemplars (zero-shot, store has {} entries)", report.store_len);
    } else {
        println!("{} exemplars:", report.exemplars.len());
        for (text, score) in &report.exemplars {
            println!("  {score:.4}  {text}");
        }
    }
}
