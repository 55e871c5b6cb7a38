//! Command-line front end.
//!
//! Every mode writes a plain-text report whose first line records the mode,
//! network, array size and seed. With `--out DIR` the report goes to
//! `DIR/report.txt` next to CSV tables and `x,y` plot series; otherwise it is
//! printed. Identical arguments always produce identical bytes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::metrics::{
    baseline_report, compare, conventional_report, energy_sensitivity, mpna_report, EnergyCostTable,
};
use crate::model::format::{load_hardware, load_network};
use crate::model::{
    builtin, mac_count, network_totals, reuse_profile, weight_count, HardwareConfig,
    NetworkDescriptor,
};
use crate::planner::{naive_traffic, plan_network};
use crate::report;
use crate::sim::{oracle_network, random_input, random_weights, simulate_network, TransferKind};
use crate::timing::{speedup_report, time_conventional, time_mpna};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Per-layer MAC, weight and reuse statistics
    Analyze,
    /// Dataflow case, tiling and traffic per layer
    Plan,
    /// Functional run on the cycle-level arrays
    Simulate,
    /// Cycle, traffic and energy report
    Time,
    /// Speedup over array sizes
    Sweep,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::Plan => "plan",
            Mode::Simulate => "simulate",
            Mode::Time => "time",
            Mode::Sweep => "sweep",
        }
    }
}

/// Simulator and planning toolkit for a dual systolic-array CNN accelerator.
#[derive(Debug, Clone, Parser)]
#[command(name = "mpna", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Builtin network (alexnet, vgg16, alexnet-mini) or a network TOML file
    #[arg(long, default_value = "alexnet")]
    pub network: String,
    /// Hardware TOML file; defaults to 8x8 arrays, 36 KB / 256 KB buffers, 12.8 GB/s at 280 MHz
    #[arg(long)]
    pub hw: Option<PathBuf>,
    /// Seed for random weights and activations
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for the report, CSV tables and plot series
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare the simulated output with the loop-nest reference and fail on any difference
    #[arg(long)]
    pub check: bool,
    /// Include per-cycle PE activity in the simulate report
    #[arg(long)]
    pub trace: bool,
    /// Square array sizes for sweep mode
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub array_sizes: Vec<usize>,
    /// Energy cost TOML file with dram, data_buffer, weight_buffer, spm and mac
    #[arg(long)]
    pub cost_table: Option<PathBuf>,
}

/// Report text plus extra files destined for the output directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub report: String,
    pub files: Vec<(String, String)>,
}

pub fn resolve_network(name: &str) -> Result<NetworkDescriptor> {
    match builtin::builtin(name) {
        Ok(net) => Ok(net),
        Err(e) => {
            let path = Path::new(name);
            if path.exists() || path.extension().is_some() {
                load_network(path)
            } else {
                Err(e)
            }
        }
    }
}

fn hardware(args: &Args) -> Result<HardwareConfig> {
    match &args.hw {
        Some(p) => load_hardware(p),
        None => Ok(HardwareConfig::default()),
    }
}

fn costs(args: &Args) -> Result<EnergyCostTable> {
    match &args.cost_table {
        Some(p) => EnergyCostTable::load(p),
        None => Ok(EnergyCostTable::default()),
    }
}

pub fn run(args: &Args) -> Result<Output> {
    let net = resolve_network(&args.network)?;
    let cfg = hardware(args)?;
    cfg.validate()?;
    let costs = costs(args)?;
    let mut out = Output::default();
    let _ = writeln!(
        out.report,
        "# mpna mode={} network={} array={}x{} seed={}",
        args.mode.as_str(),
        net.name,
        cfg.sa_rows,
        cfg.sa_cols,
        args.seed
    );
    match args.mode {
        Mode::Analyze => analyze(&net, &mut out)?,
        Mode::Plan => plan(&net, &cfg, &mut out)?,
        Mode::Simulate => simulate(&net, &cfg, args, &mut out)?,
        Mode::Time => time(&net, &cfg, &costs, &mut out)?,
        Mode::Sweep => sweep(&net, &cfg, &args.array_sizes, &mut out)?,
    }
    Ok(out)
}

fn analyze(net: &NetworkDescriptor, out: &mut Output) -> Result<()> {
    let r = &mut out.report;
    let _ = writeln!(
        r,
        "{:<8} {:>7} {:>5} {:>5} {:>4} {:>4} {:>3} {:>3} {:>14} {:>10} {:>9} {:>9} {:>7}",
        "layer",
        "kind",
        "I",
        "J",
        "M",
        "N",
        "P",
        "Q",
        "macs",
        "weights",
        "in_reuse",
        "out_reuse",
        "w_reuse"
    );
    for l in net.compute_layers() {
        let rp = reuse_profile(l)?;
        let _ = writeln!(
            r,
            "{:<8} {:>7} {:>5} {:>5} {:>4} {:>4} {:>3} {:>3} {:>14} {:>10} {:>9} {:>9} {:>7}",
            l.name,
            l.kind.as_str(),
            l.in_maps,
            l.out_maps,
            l.out_rows,
            l.out_cols,
            l.kernel_rows,
            l.kernel_cols,
            mac_count(l)?,
            weight_count(l)?,
            rp.input_act_reuse,
            rp.output_act_reuse,
            rp.weight_reuse
        );
    }
    let t = network_totals(net);
    let _ = writeln!(
        r,
        "conv_macs    {:>14} ({:.3} G)",
        t.conv_macs,
        t.conv_macs as f64 / 1e9
    );
    let _ = writeln!(
        r,
        "fc_macs      {:>14} ({:.2} M)",
        t.fc_macs,
        t.fc_macs as f64 / 1e6
    );
    let _ = writeln!(
        r,
        "conv_weights {:>14} ({:.2} M)",
        t.conv_weights,
        t.conv_weights as f64 / 1e6
    );
    let _ = writeln!(
        r,
        "fc_weights   {:>14} ({:.2} M)",
        t.fc_weights,
        t.fc_weights as f64 / 1e6
    );
    Ok(())
}

fn plan(net: &NetworkDescriptor, cfg: &HardwareConfig, out: &mut Output) -> Result<()> {
    let plans = plan_network(net, cfg)?;
    let (mut planned, mut naive) = (0u64, 0u64);
    for (layer, p) in net.layers.iter().zip(&plans) {
        if let Some(p) = p {
            let _ = writeln!(out.report, "{}", p.dump_line());
            planned += p.traffic.dram_total();
            naive += naive_traffic(layer)?.dram_total();
        }
    }
    let _ = writeln!(
        out.report,
        "dram_planned={planned} dram_naive={naive} ratio={:.4}",
        planned as f64 / naive as f64
    );
    Ok(())
}

fn checksum(data: &[i8]) -> u64 {
    // FNV-1a
    data.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u8 as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn simulate(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    args: &Args,
    out: &mut Output,
) -> Result<()> {
    let weights = random_weights(net, args.seed);
    let input = random_input(net, args.seed);
    let plans = plan_network(net, cfg)?;
    let sim = simulate_network(net, &input, &weights, cfg, &plans, args.trace)?;
    let r = &mut out.report;
    let _ = writeln!(
        r,
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>10} {:>6}",
        "layer", "dram_in", "dram_w", "dram_out", "spm", "passes", "shift"
    );
    for (idx, (layer, stats)) in net.layers.iter().zip(&sim.layers).enumerate() {
        let t = |k| sim.transfers.total(Some(idx), Some(k));
        let _ = writeln!(
            r,
            "{:<8} {:>12} {:>12} {:>12} {:>12} {:>10} {:>6}",
            layer.name,
            t(TransferKind::InputActivations),
            t(TransferKind::Weights),
            t(TransferKind::OutputActivations),
            stats.spm_accesses,
            stats.array_runs,
            stats.requant_shift
        );
    }
    let _ = writeln!(
        r,
        "output dims={:?} checksum={:016x}",
        sim.output.dims(),
        checksum(sim.output.data())
    );
    if args.check {
        let expected = oracle_network(net, &input, &weights)?;
        if let Some((index, (&s, &o))) = sim
            .output
            .data()
            .iter()
            .zip(expected.data())
            .enumerate()
            .find(|(_, (s, o))| s != o)
        {
            return Err(Error::OracleMismatch {
                layer: net
                    .layers
                    .last()
                    .map(|l| l.name.clone())
                    .unwrap_or_default(),
                index,
                simulated: s as i64,
                oracle: o as i64,
            });
        }
        let _ = writeln!(r, "check: oracle match ({} elements)", expected.len());
    }
    if let Some(trace) = sim.trace {
        if args.out.is_some() {
            out.files.push(("trace.txt".into(), trace));
        } else {
            out.report.push_str(&trace);
        }
    }
    Ok(())
}

fn time(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    costs: &EnergyCostTable,
    out: &mut Output,
) -> Result<()> {
    let plans = plan_network(net, cfg)?;
    let r = &mut out.report;
    let _ = writeln!(
        r,
        "{:<8} {:<13} {:>7} {:>12} {:>12} {:>12} {:>12} {:>6}",
        "layer", "design", "bound", "compute", "preload", "fill", "dram", "util"
    );
    for (layer, p) in net.layers.iter().zip(&plans) {
        let Some(p) = p else { continue };
        for (design, t) in [
            ("conventional", time_conventional(layer, cfg, p)),
            ("mpna", time_mpna(layer, cfg, p)),
        ] {
            let _ = writeln!(
                r,
                "{:<8} {:<13} {:>7} {:>12} {:>12} {:>12} {:>12} {:>6.3}  total={}",
                layer.name,
                design,
                t.bound.as_str(),
                t.compute_cycles,
                t.weight_load_cycles,
                t.fill_drain_cycles,
                t.dram_transfer_cycles,
                t.utilization,
                t.total_cycles
            );
        }
    }
    let mpna = mpna_report(net, cfg, costs)?;
    let conventional = conventional_report(net, cfg, costs)?;
    let baseline = baseline_report(net, cfg, costs)?;
    r.push('\n');
    for rep in [&mpna, &conventional, &baseline] {
        r.push_str(&report::summary(rep));
    }
    let _ = writeln!(
        r,
        "{}",
        report::comparison_line("mpna vs conventional", &compare(&mpna, &conventional))
    );
    let _ = writeln!(
        r,
        "{}",
        report::comparison_line("mpna vs baseline", &compare(&mpna, &baseline))
    );
    let sens = energy_sensitivity(net, cfg, costs)?;
    let sens_csv = report::sensitivity_csv(&sens)?;
    let _ = writeln!(
        r,
        "\nenergy sensitivity (baseline: conventional array, naive streaming)"
    );
    r.push_str(&sens_csv);
    let mut layers = report::layer_csv(&mpna)?;
    for rep in [&conventional, &baseline] {
        let body = report::layer_csv(rep)?;
        layers.push_str(body.split_once('\n').map_or("", |(_, rest)| rest));
    }
    out.files.push(("layers.csv".into(), layers));
    out.files.push(("sensitivity.csv".into(), sens_csv));
    out.files.extend(report::traffic_series(&mpna));
    out.files.extend(report::traffic_series(&baseline));
    Ok(())
}

fn sweep(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    sizes: &[usize],
    out: &mut Output,
) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidHardware(
            "array sizes must be positive".into(),
        ));
    }
    let rows = speedup_report(net, cfg, sizes)?;
    let table = report::speedup_csv(&rows)?;
    out.report.push_str(&table);
    out.files.push(("speedup.csv".into(), table));
    out.files.extend(report::speedup_series(&rows));
    Ok(())
}

/// Parses arguments, runs, and writes outputs. Returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args).and_then(|o| emit(&args, &o)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn emit(args: &Args, out: &Output) -> Result<()> {
    match &args.out {
        Some(dir) => {
            let mut files = out.files.clone();
            files.push(("report.txt".into(), out.report.clone()));
            report::write_files(dir, &files)
        }
        None => {
            print!("{}", out.report);
            Ok(())
        }
    }
}
