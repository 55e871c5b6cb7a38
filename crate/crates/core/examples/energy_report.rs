//! Relative energy of the planned dual-array design against a conventional
//! array with naive streaming, and how the gap moves when each cost
//! coefficient is halved or doubled.
//!
//! Run with `cargo run --release --example energy_report`.

use mpna::metrics::{baseline_report, compare, energy_sensitivity, mpna_report, EnergyCostTable};
use mpna::model::{builtin, HardwareConfig};
use mpna::report::{comparison_line, summary};

fn main() -> mpna::Result<()> {
    let net = builtin::alexnet();
    let cfg = HardwareConfig::default();
    let costs = EnergyCostTable::default();
    let mpna = mpna_report(&net, &cfg, &costs)?;
    let base = baseline_report(&net, &cfg, &costs)?;
    print!("{}{}", summary(&mpna), summary(&base));
    println!(
        "{}",
        comparison_line("mpna / baseline", &compare(&mpna, &base))
    );
    println!("\n{:<14} {:>6} {:>9}", "coefficient", "factor", "savings");
    for row in energy_sensitivity(&net, &cfg, &costs)? {
        println!(
            "{:<14} {:>6} {:>8.2}%",
            row.coefficient,
            row.factor,
            100.0 * row.savings()
        );
    }
    Ok(())
}
