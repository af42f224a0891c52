//! Dev probe: dev/release floating-point reproducibility of training curves.

use slicesim::config::Config;
use slicesim::harness::{run_train, PolicyKind};

fn main() {
    let mut cfg = Config::default();
    cfg.algo.total_steps = 20_000;
    let dir = std::env::temp_dir().join(format!("probe_det_{}", std::env::args().nth(1).unwrap()));
    std::fs::create_dir_all(&dir).unwrap();
    let art = run_train(&cfg, PolicyKind::Qappo.variant().unwrap(), 5, cfg.algo.total_steps, &dir).unwrap();
    let bytes = std::fs::read(&art.curve_path).unwrap();
    let mut h = 0u64;
    for b in bytes {
        h = h.wrapping_mul(1099511628211).wrapping_add(b as u64);
    }
    println!("curve hash {h:016x}");
    let ck = std::fs::read(&art.checkpoint_path).unwrap();
    let mut h2 = 0u64;
    for b in ck {
        h2 = h2.wrapping_mul(1099511628211).wrapping_add(b as u64);
    }
    println!("ckpt hash {h2:016x}");
}
