//! Dataflow case, tiling and DRAM traffic for every layer, against the
//! no-reuse streaming reference.
//!
//! Run with `cargo run --example plan_dataflow [network]`.

use mpna::cli::resolve_network;
use mpna::model::HardwareConfig;
use mpna::planner::{naive_traffic, plan_network};

fn main() -> mpna::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "alexnet".into());
    let net = resolve_network(&name)?;
    let cfg = HardwareConfig::default();
    let plans = plan_network(&net, &cfg)?;
    let (mut planned, mut naive) = (0, 0);
    for (layer, plan) in net.layers.iter().zip(&plans) {
        let Some(plan) = plan else {
            println!("{}: handled by the pooling unit", layer.name);
            continue;
        };
        plan.validate(layer, &cfg)?;
        println!("{plan}");
        planned += plan.traffic.dram_total();
        naive += naive_traffic(layer)?.dram_total();
    }
    println!(
        "DRAM elements: planned {planned}, naive {naive} ({:.2}% of naive)",
        100.0 * planned as f64 / naive as f64
    );
    Ok(())
}
