//! Describes a small network in the TOML network format, plans it on a
//! smaller accelerator and times it.
//!
//! Run with `cargo run --example custom_network`.

use std::path::Path;

use mpna::model::format::{parse_hardware, parse_network};
use mpna::planner::plan_network;
use mpna::timing::time_mpna;

const NETWORK: &str = r#"
name = "tiny"

[[layer]]
name = "conv1"
kind = "conv"
I = 3
J = 16
M = 30
N = 30
P = 3
Q = 3
stride = 1
pad = 1
activation = "leaky_relu"
pool_window = 2
pool_stride = 2

[[layer]]
name = "conv2"
kind = "conv"
I = 16
J = 32
M = 15
N = 15
P = 3
Q = 3
pad = 1
activation = "relu"

[[layer]]
name = "fc"
kind = "fc"
I = 7200
J = 10
"#;

const HARDWARE: &str = r#"
sa_rows = 4
sa_cols = 4
spm_entries = 128
weight_buffer_bytes = 4096
data_buffer_bytes = 16384
dram_bandwidth_bytes_per_s = 4.0e9
clock_hz = 200.0e6
"#;

fn main() -> mpna::Result<()> {
    let net = parse_network(NETWORK, Path::new("tiny.toml"))?;
    let cfg = parse_hardware(HARDWARE, Path::new("small.toml"))?;
    for (layer, plan) in net.layers.iter().zip(plan_network(&net, &cfg)?) {
        let plan = plan.expect("all layers compute");
        let t = time_mpna(layer, &cfg, &plan);
        println!("{plan}");
        println!(
            "    {} cycles, {}-bound, utilization {:.3}",
            t.total_cycles,
            t.bound.as_str(),
            t.utilization
        );
    }
    Ok(())
}
