//! Speedup of the conventional single-array design and of the dual-array
//! design over a 1x1 array, for CONV and FC layers separately.
//!
//! Run with `cargo run --release --example timing_sweep [network]`.

use mpna::cli::resolve_network;
use mpna::model::HardwareConfig;
use mpna::timing::speedup_report;

fn main() -> mpna::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "alexnet".into());
    let net = resolve_network(&name)?;
    let rows = speedup_report(&net, &HardwareConfig::default(), &[1, 2, 4, 8, 16])?;
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "array", "conv/conv", "conv/fc", "mpna/conv", "mpna/fc", "mpna/conv."
    );
    for r in rows {
        println!(
            "{:>5} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            format!("{0}x{0}", r.array_size),
            r.conventional_conv_speedup,
            r.conventional_fc_speedup,
            r.mpna_conv_speedup,
            r.mpna_fc_speedup,
            r.mpna_over_conventional
        );
    }
    Ok(())
}
