//! Text emitters: CSV tables, readable summaries and `x,y` plot series.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::metrics::{gops, seconds, Comparison, SensitivityRow, SimReport};
use crate::timing::SpeedupRow;

fn to_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per compute layer followed by a `total` row.
pub fn layer_csv(report: &SimReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "design",
        "layer",
        "kind",
        "case",
        "bound",
        "cycles",
        "seconds",
        "macs",
        "gops",
        "dram_in",
        "dram_weights",
        "dram_out",
        "dram_bytes",
        "data_buffer",
        "weight_buffer",
        "spm",
        "energy",
        "utilization",
    ])?;
    let bpe = report.bytes_per_element as u64;
    for l in &report.layers {
        let s = seconds(l.cycles, report.clock_hz);
        w.write_record([
            report.design.clone(),
            l.name.clone(),
            l.kind.as_str().to_string(),
            l.case.map(|c| c.to_string()).unwrap_or_default(),
            l.bound.map(|b| b.as_str().to_string()).unwrap_or_default(),
            l.cycles.to_string(),
            format!("{s:.9}"),
            l.macs.to_string(),
            format!("{:.3}", gops(l.macs, s)),
            l.traffic.dram_in_act.to_string(),
            l.traffic.dram_weights.to_string(),
            l.traffic.dram_out_act.to_string(),
            (l.traffic.dram_total() * bpe).to_string(),
            l.traffic.onchip.data_buffer.to_string(),
            l.traffic.onchip.weight_buffer.to_string(),
            l.traffic.onchip.spm.to_string(),
            format!("{:.1}", l.energy),
            format!("{:.4}", l.utilization),
        ])?;
    }
    let t = report.traffic();
    w.write_record([
        report.design.clone(),
        "total".into(),
        String::new(),
        String::new(),
        String::new(),
        report.cycles().to_string(),
        format!("{:.9}", report.seconds()),
        report.macs().to_string(),
        format!("{:.3}", report.gops()),
        t.dram_in_act.to_string(),
        t.dram_weights.to_string(),
        t.dram_out_act.to_string(),
        report.dram_bytes().to_string(),
        t.onchip.data_buffer.to_string(),
        t.onchip.weight_buffer.to_string(),
        t.onchip.spm.to_string(),
        format!("{:.1}", report.energy()),
        String::new(),
    ])?;
    to_string(w)
}

pub fn summary(report: &SimReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} on {}", report.design, report.network);
    let _ = writeln!(s, "  cycles       {}", report.cycles());
    let _ = writeln!(s, "  time         {:.6} ms", report.seconds() * 1e3);
    let _ = writeln!(s, "  MACs         {}", report.macs());
    let _ = writeln!(s, "  throughput   {:.3} GOPS", report.gops());
    let _ = writeln!(s, "  DRAM         {} bytes", report.dram_bytes());
    let _ = writeln!(
        s,
        "  on-chip      {} accesses",
        report.traffic().onchip.total()
    );
    let _ = writeln!(s, "  energy       {:.4e} (relative)", report.energy());
    s
}

pub fn comparison_line(label: &str, c: &Comparison) -> String {
    format!(
        "{label}: cycles x{:.4} dram x{:.4} onchip x{:.4} energy x{:.4} (speedup {:.3})",
        c.cycles,
        c.dram,
        c.onchip,
        c.energy,
        c.speedup()
    )
}

pub fn speedup_csv(rows: &[SpeedupRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "array",
        "conventional_conv_cycles",
        "conventional_fc_cycles",
        "mpna_conv_cycles",
        "mpna_fc_cycles",
        "conventional_conv_speedup",
        "conventional_fc_speedup",
        "mpna_conv_speedup",
        "mpna_fc_speedup",
        "mpna_over_conventional",
    ])?;
    for r in rows {
        w.write_record([
            format!("{0}x{0}", r.array_size),
            r.conventional.conv.to_string(),
            r.conventional.fc.to_string(),
            r.mpna.conv.to_string(),
            r.mpna.fc.to_string(),
            format!("{:.4}", r.conventional_conv_speedup),
            format!("{:.4}", r.conventional_fc_speedup),
            format!("{:.4}", r.mpna_conv_speedup),
            format!("{:.4}", r.mpna_fc_speedup),
            format!("{:.4}", r.mpna_over_conventional),
        ])?;
    }
    to_string(w)
}

pub fn sensitivity_csv(rows: &[SensitivityRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "coefficient",
        "factor",
        "mpna_energy",
        "baseline_energy",
        "ratio",
        "savings",
    ])?;
    for r in rows {
        w.write_record([
            r.coefficient.to_string(),
            r.factor.to_string(),
            format!("{:.1}", r.mpna_energy),
            format!("{:.1}", r.baseline_energy),
            format!("{:.6}", r.ratio()),
            format!("{:.6}", r.savings()),
        ])?;
    }
    to_string(w)
}

/// `x,y` lines with a `# name` header line.
pub fn series(name: &str, points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = format!("# {name}\nx,y\n");
    for (x, y) in points {
        let _ = writeln!(s, "{x},{y}");
    }
    s
}

/// Speedup-versus-array-size series, one per design and layer type.
#[allow(clippy::type_complexity)]
pub fn speedup_series(rows: &[SpeedupRow]) -> Vec<(String, String)> {
    let pick: [(&str, fn(&SpeedupRow) -> f64); 5] = [
        ("speedup_conventional_conv", |r| r.conventional_conv_speedup),
        ("speedup_conventional_fc", |r| r.conventional_fc_speedup),
        ("speedup_mpna_conv", |r| r.mpna_conv_speedup),
        ("speedup_mpna_fc", |r| r.mpna_fc_speedup),
        ("mpna_over_conventional", |r| r.mpna_over_conventional),
    ];
    pick.iter()
        .map(|(name, f)| {
            let pts = rows.iter().map(|r| (r.array_size as f64, f(r)));
            (format!("{name}.csv"), series(name, pts))
        })
        .collect()
}

/// Per-layer DRAM traffic split, x = layer position.
#[allow(clippy::type_complexity)]
pub fn traffic_series(report: &SimReport) -> Vec<(String, String)> {
    let parts: [(&str, fn(&crate::planner::Traffic) -> u64); 3] = [
        ("ifmap", |t| t.dram_in_act),
        ("weights", |t| t.dram_weights),
        ("ofmap", |t| t.dram_out_act),
    ];
    parts
        .iter()
        .map(|(part, f)| {
            let name = format!("traffic_{}_{part}", report.design);
            let pts = report
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| (i as f64, f(&l.traffic) as f64));
            (format!("{name}.csv"), series(&name, pts))
        })
        .collect()
}

/// Writes `(file name, contents)` pairs into `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
