//! Runs a scaled-down AlexNet through the cycle-level arrays following its
//! dataflow plans, then checks every output element against the loop-nest
//! reference.
//!
//! Run with `cargo run --release --example functional_sim [seed]`.

use mpna::model::{builtin, HardwareConfig};
use mpna::sim::{random_input, random_weights, simulate_and_check, TransferKind};

fn main() -> mpna::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let net = builtin::alexnet_mini();
    let cfg = HardwareConfig::default();
    let weights = random_weights(&net, seed);
    let input = random_input(&net, seed);
    let outcome = simulate_and_check(&net, &input, &weights, &cfg, false)?;
    println!(
        "{} with seed {seed}: output matches the reference",
        net.name
    );
    for (idx, (layer, stats)) in net.layers.iter().zip(&outcome.layers).enumerate() {
        let t = |k| outcome.transfers.total(Some(idx), Some(k));
        println!(
            "  {:<6} runs={:>5} cycles={:>8} spm={:>7} dram in/w/out={}/{}/{} shift={}",
            layer.name,
            stats.array_runs,
            stats.array_cycles,
            stats.spm_accesses,
            t(TransferKind::InputActivations),
            t(TransferKind::Weights),
            t(TransferKind::OutputActivations),
            stats.requant_shift
        );
    }
    println!("  first outputs: {:?}", &outcome.output.data()[..8]);
    Ok(())
}
