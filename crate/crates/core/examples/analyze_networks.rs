//! MAC, weight and reuse statistics for the bundled networks.
//!
//! Run with `cargo run --example analyze_networks`.

use mpna::model::{builtin_networks, mac_count, network_totals, reuse_profile, weight_count};

fn main() -> mpna::Result<()> {
    for net in builtin_networks() {
        let t = network_totals(&net);
        println!("{}", net.name);
        println!(
            "  CONV: {:.2} G MACs, {:.2} M weights | FC: {:.2} M MACs, {:.2} M weights",
            t.conv_macs as f64 / 1e9,
            t.conv_weights as f64 / 1e6,
            t.fc_macs as f64 / 1e6,
            t.fc_weights as f64 / 1e6
        );
        println!(
            "  {:<6} {:>12} {:>10} {:>9} {:>9} {:>8}",
            "layer", "macs", "weights", "in_reuse", "out_reuse", "w_reuse"
        );
        for layer in net.compute_layers() {
            let r = reuse_profile(layer)?;
            println!(
                "  {:<6} {:>12} {:>10} {:>9} {:>9} {:>8}",
                layer.name,
                mac_count(layer)?,
                weight_count(layer)?,
                r.input_act_reuse,
                r.output_act_reuse,
                r.weight_reuse
            );
        }
    }
    Ok(())
}
