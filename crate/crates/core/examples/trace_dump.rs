//! Per-cycle PE activity of a 3x3 SA-CONV and SA-FC streaming a few vectors.
//!
//! Run with `cargo run --example trace_dump`.

use mpna::model::HardwareConfig;
use mpna::sim::{run_sa_conv, run_sa_fc, WeightTile};

fn main() -> mpna::Result<()> {
    let cfg = HardwareConfig {
        sa_rows: 3,
        sa_cols: 3,
        ..HardwareConfig::default()
    };
    let inputs = vec![vec![1, 2, 3], vec![4, 5, 6], vec![-1, 0, 1]];
    let tile = WeightTile::new(3, 2, vec![1, -1, 2, 0, 3, 1])?;
    let run = run_sa_conv(&inputs, &tile, &cfg, true)?;
    println!(
        "SA-CONV: preload {} cycles, stream {} cycles",
        run.preload_cycles, run.cycles
    );
    print!("{}", run.trace.as_ref().expect("trace requested").dump(0));
    println!(
        "outputs {:?} at cycles {:?}\n",
        run.outputs, run.output_cycles
    );

    // a different weight set for every vector
    let stream: Vec<WeightTile> = (0..3)
        .map(|t| WeightTile::filled(3, 3, t as i8 + 1))
        .collect();
    let run = run_sa_fc(&inputs, &stream, &cfg, true)?;
    println!("SA-FC: stream {} cycles", run.cycles);
    print!("{}", run.trace.as_ref().expect("trace requested").dump(0));
    println!("outputs {:?}", run.outputs);
    Ok(())
}
