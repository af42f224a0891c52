//! Dev probe: raw forward/backward kernel throughput on training-sized nets.

use std::time::Instant;

use slicesim::nn::{Mlp, Workspace};

fn main() {
    let dims = vec![59usize, 128, 128, 15];
    let net = Mlp::new(dims.clone(), 1, 1.0);
    let mut ws = Workspace::new(&net);
    let input: Vec<f64> = (0..59).map(|i| (i as f64 * 0.37).sin().abs()).collect();
    let mut grad = vec![0.0f64; net.params.len()];
    let dl: Vec<f64> = (0..15).map(|i| (i as f64 * 0.11).cos() * 0.01).collect();

    let iters = 200_000u64;
    let t0 = Instant::now();
    let mut sink = 0.0;
    for _ in 0..iters {
        let out = net.forward(&input, &mut ws);
        sink += out[0];
    }
    let fwd = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    for _ in 0..iters {
        net.forward(&input, &mut ws);
        net.backward(&mut ws, &dl, &mut grad);
    }
    let both = t0.elapsed().as_secs_f64();

    let macs = (59 * 128 + 128 * 128 + 128 * 15) as f64;
    println!("forward  {:.2} us/iter  {:.2} GMAC/s", 1e6 * fwd / iters as f64, macs * iters as f64 / fwd / 1e9);
    println!("fwd+bwd  {:.2} us/iter  {:.2} GMAC/s", 1e6 * both / iters as f64, 3.0 * macs * iters as f64 / both / 1e9);
    println!("(sink {sink:.3}, grad[0] {:.6})", grad[0]);
}
