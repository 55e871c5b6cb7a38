//! Cycle counts for CONV and FC work on SA-CONV and SA-FC.
//!
//! A weight tile of at most `K x L` that streams `T` lowered vectors costs
//! `T` compute cycles plus `K + L - 1` cycles of pipeline fill and drain. On
//! SA-CONV the next tile moves into the shadow registers while the current
//! one streams, so a `K`-cycle preload is hidden unless `T < K`, leaving
//! `K - T` exposed cycles. SA-FC takes weights through per-PE ports and never
//! preloads. DRAM traffic of the plan is moved at a flat bytes-per-cycle
//! ceiling, and a layer takes whichever of the compute side and the DRAM side
//! is longer.
//!
//! The tiles of a layer come from its [`DataflowPlan`]: every (group, block,
//! chunk) step issues one tile per `K`-row piece of the chunk and per
//! `L`-filter subgroup of the group. With two arrays, subgroup `s` of a group
//! runs on SA-CONV when `s` is even and on SA-FC when odd.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{mac_count, HardwareConfig, LayerDescriptor, LayerKind, NetworkDescriptor};
use crate::planner::schedule::split;
use crate::planner::{plan_network, DataflowPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    ComputeBound,
    MemoryBound,
}

impl Bound {
    pub fn as_str(self) -> &'static str {
        match self {
            Bound::ComputeBound => "compute",
            Bound::MemoryBound => "memory",
        }
    }
}

/// Cycle breakdown of one layer. With two arrays, the compute-side fields
/// describe the array that finishes last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTiming {
    pub compute_cycles: u64,
    pub weight_load_cycles: u64,
    pub fill_drain_cycles: u64,
    pub dram_transfer_cycles: u64,
    pub bound: Bound,
    pub total_cycles: u64,
    /// MACs performed by the array the compute fields describe.
    pub macs: u64,
    /// `macs / (compute_cycles * K * L)`.
    pub utilization: f64,
}

impl LayerTiming {
    pub fn compute_side(&self) -> u64 {
        self.compute_cycles + self.weight_load_cycles + self.fill_drain_cycles
    }

    fn assemble(
        compute: u64,
        preload: u64,
        fill: u64,
        dram: u64,
        macs: u64,
        cfg: &HardwareConfig,
    ) -> Self {
        let side = compute + preload + fill;
        let bound = if dram > side {
            Bound::MemoryBound
        } else {
            Bound::ComputeBound
        };
        let lanes = (cfg.sa_rows * cfg.sa_cols) as u64;
        let utilization = if compute == 0 {
            0.0
        } else {
            macs as f64 / (compute * lanes) as f64
        };
        Self {
            compute_cycles: compute,
            weight_load_cycles: preload,
            fill_drain_cycles: fill,
            dram_transfer_cycles: dram,
            bound,
            total_cycles: side.max(dram),
            macs,
            utilization,
        }
    }
}

/// Cycles to move `elements` words at the configured bandwidth.
pub fn dram_cycles(elements: u64, cfg: &HardwareConfig) -> u64 {
    let bytes = (elements * cfg.bytes_per_element as u64) as f64;
    (bytes * cfg.clock_hz / cfg.dram_bandwidth_bytes_per_s).ceil() as u64
}

/// SA-CONV timing of a planned layer on `arrays` arrays (1 for a
/// conventional design, 2 when SA-FC shares CONV work).
pub fn time_sa_conv(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
    arrays: usize,
) -> LayerTiming {
    let (k, l) = (cfg.sa_rows, cfg.sa_cols);
    let t = &plan.tiling;
    let pq = layer.kernel_rows * layer.kernel_cols;
    let pieces: u64 = split(layer.in_maps, t.channels)
        .iter()
        .map(|c| (c.len * pq).div_ceil(k) as u64)
        .sum();
    // subgroups per array and the filters they carry
    let mut subgroups = [0u64; 2];
    let mut filters = [0u64; 2];
    for g in split(layer.out_maps, t.filters) {
        for (s, sub) in split(g.len, l).iter().enumerate() {
            let a = if arrays >= 2 { s % 2 } else { 0 };
            subgroups[a] += 1;
            filters[a] += sub.len as u64;
        }
    }
    let row_blocks = split(layer.out_rows, t.block_rows);
    let col_blocks = split(layer.out_cols, t.block_cols);
    let blocks = (row_blocks.len() * col_blocks.len()) as u64;
    let pixels = (layer.out_rows * layer.out_cols) as u64;
    let exposed: u64 = row_blocks
        .iter()
        .flat_map(|r| col_blocks.iter().map(move |c| r.len * c.len))
        .map(|len| k.saturating_sub(len) as u64)
        .sum();
    let macs_per_filter = mac_count(layer).unwrap_or(0) / layer.out_maps as u64;

    let per_array = |a: usize| {
        let tiles_per_block = subgroups[a] * pieces;
        let compute = tiles_per_block * pixels;
        let fill = tiles_per_block * blocks * (k + l - 1) as u64;
        // SA-FC takes weights through its ports: nothing to preload
        let preload = if a == 0 { tiles_per_block * exposed } else { 0 };
        (compute, preload, fill, filters[a] * macs_per_filter)
    };
    let a = if arrays >= 2 {
        let (c0, p0, f0, _) = per_array(0);
        let (c1, p1, f1, _) = per_array(1);
        usize::from(c1 + p1 + f1 > c0 + p0 + f0)
    } else {
        0
    };
    let (compute, preload, fill, macs) = per_array(a);
    let dram = dram_cycles(plan.traffic.dram_total(), cfg);
    LayerTiming::assemble(compute, preload, fill, dram, macs, cfg)
}

/// SA-FC timing: one stream element per (`K`-input slice, `L`-output
/// subgroup) with a single pipeline fill; weights arrive every cycle.
pub fn time_sa_fc(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
) -> LayerTiming {
    let (k, l) = (cfg.sa_rows, cfg.sa_cols);
    let lowered = layer.lowered_len();
    let compute = (lowered.div_ceil(k) * layer.out_maps.div_ceil(l)) as u64
        * (layer.out_rows * layer.out_cols) as u64;
    let fill = (k + l - 1) as u64;
    let dram = dram_cycles(plan.traffic.dram_total(), cfg);
    LayerTiming::assemble(compute, 0, fill, dram, mac_count(layer).unwrap_or(0), cfg)
}

/// Conventional design: every compute layer on one SA-CONV.
pub fn time_conventional(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
) -> LayerTiming {
    time_sa_conv(layer, cfg, plan, 1)
}

/// MPNA: CONV on both arrays, FC on SA-FC.
pub fn time_mpna(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
) -> LayerTiming {
    match layer.kind {
        LayerKind::FullyConnected => time_sa_fc(layer, cfg, plan),
        _ => time_sa_conv(layer, cfg, plan, 2),
    }
}

/// Cycles split by layer type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CycleTotals {
    pub conv: u64,
    pub fc: u64,
}

impl CycleTotals {
    pub fn total(&self) -> u64 {
        self.conv + self.fc
    }

    fn add(&mut self, kind: LayerKind, cycles: u64) {
        match kind {
            LayerKind::FullyConnected => self.fc += cycles,
            _ => self.conv += cycles,
        }
    }
}

/// Network cycles on both designs for one configuration.
pub fn network_cycles(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
) -> Result<(CycleTotals, CycleTotals)> {
    let plans = plan_network(net, cfg)?;
    let mut conventional = CycleTotals::default();
    let mut mpna = CycleTotals::default();
    for (layer, plan) in net.layers.iter().zip(&plans) {
        if let Some(plan) = plan {
            conventional.add(layer.kind, time_conventional(layer, cfg, plan).total_cycles);
            mpna.add(layer.kind, time_mpna(layer, cfg, plan).total_cycles);
        }
    }
    Ok((conventional, mpna))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub array_size: usize,
    pub conventional: CycleTotals,
    pub mpna: CycleTotals,
    /// Speedups over the conventional design with a 1x1 array.
    pub conventional_conv_speedup: f64,
    pub conventional_fc_speedup: f64,
    pub mpna_conv_speedup: f64,
    pub mpna_fc_speedup: f64,
    /// Conventional total cycles over MPNA total cycles at this size.
    pub mpna_over_conventional: f64,
}

/// Sweeps square array sizes; rows come back in the order of `sizes`.
pub fn speedup_report(
    net: &NetworkDescriptor,
    base: &HardwareConfig,
    sizes: &[usize],
) -> Result<Vec<SpeedupRow>> {
    let at = |size: usize| {
        let cfg = HardwareConfig {
            sa_rows: size,
            sa_cols: size,
            ..base.clone()
        };
        network_cycles(net, &cfg)
    };
    let mut all: Vec<usize> = sizes.to_vec();
    all.push(1);
    let results: Vec<Result<(CycleTotals, CycleTotals)>> = all.par_iter().map(|&s| at(s)).collect();
    let mut results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (reference, _) = results.pop().expect("reference size");
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(sizes
        .iter()
        .zip(results)
        .map(|(&array_size, (conventional, mpna))| SpeedupRow {
            array_size,
            conventional,
            mpna,
            conventional_conv_speedup: ratio(reference.conv, conventional.conv),
            conventional_fc_speedup: ratio(reference.fc, conventional.fc),
            mpna_conv_speedup: ratio(reference.conv, mpna.conv),
            mpna_fc_speedup: ratio(reference.fc, mpna.fc),
            mpna_over_conventional: ratio(conventional.total(), mpna.total()),
        })
        .collect())
}
