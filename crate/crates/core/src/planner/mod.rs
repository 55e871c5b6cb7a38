//! Dataflow case selection, tiling search and DRAM traffic estimation.
//!
//! Four dataflows are distinguished by what stays on chip:
//!
//! | case | input maps | output maps | notes |
//! |------|------------|-------------|-------|
//! | 1 | resident | resident | one output map fits one SPM, so no spatial blocking |
//! | 2 | resident | resident | output maps are cut into SPM-sized blocks; `L` or `2L` whole filters per group |
//! | 3 | resident | streamed out | outputs leave per completed block |
//! | 4 | tiled | streamed out | exhaustive tiling search |
//!
//! Traffic follows from the loop nest in [`schedule`]: a weight tile `(group,
//! chunk)` or input tile `(block, chunk)` is fetched from DRAM whenever it
//! differs from the one used by the previous iteration. Resident input maps
//! are fetched once, and each output element is written at most once.

pub mod schedule;

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{mac_count, weight_count, HardwareConfig, LayerDescriptor, NetworkDescriptor};
use schedule::{input_reach, split, Geometry, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataflowCase {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl DataflowCase {
    pub const ALL: [DataflowCase; 4] = [Self::One, Self::Two, Self::Three, Self::Four];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn input_resident(self) -> bool {
        !matches!(self, Self::Four)
    }

    pub fn output_resident(self) -> bool {
        matches!(self, Self::One | Self::Two)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopOrder {
    /// Filter groups outermost: weights of a group stay while blocks stream.
    FilterOuter,
    /// Output blocks outermost: an input block stays while groups stream.
    BlockOuter,
}

impl LoopOrder {
    pub const ALL: [LoopOrder; 2] = [Self::FilterOuter, Self::BlockOuter];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FilterOuter => "filter-outer",
            Self::BlockOuter => "block-outer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tiling {
    /// `Tj`: filters processed together, a multiple of `L` or all of `J`.
    pub filters: usize,
    /// `Ti`: input channels per chunk; `Ti*P*Q` is a multiple of `K` unless `Ti = I`.
    pub channels: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    pub order: LoopOrder,
}

/// Whether the layer's input arrives from DRAM and whether its output must
/// be written back (as opposed to staying on chip for the next layer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerIo {
    pub input_from_dram: bool,
    pub output_to_dram: bool,
}

impl Default for LayerIo {
    fn default() -> Self {
        Self {
            input_from_dram: true,
            output_to_dram: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OnChipAccesses {
    pub data_buffer: u64,
    pub weight_buffer: u64,
    pub spm: u64,
}

impl OnChipAccesses {
    pub fn total(&self) -> u64 {
        self.data_buffer + self.weight_buffer + self.spm
    }
}

/// Access counts in elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Traffic {
    pub dram_in_act: u64,
    pub dram_out_act: u64,
    pub dram_weights: u64,
    pub onchip: OnChipAccesses,
}

impl Traffic {
    pub fn dram_total(&self) -> u64 {
        self.dram_in_act + self.dram_out_act + self.dram_weights
    }

    pub fn scaled(&self, k: u64) -> Self {
        Self {
            dram_in_act: self.dram_in_act * k,
            dram_out_act: self.dram_out_act * k,
            dram_weights: self.dram_weights * k,
            onchip: OnChipAccesses {
                data_buffer: self.onchip.data_buffer * k,
                weight_buffer: self.onchip.weight_buffer * k,
                spm: self.onchip.spm * k,
            },
        }
    }
}

impl std::ops::Add for Traffic {
    type Output = Traffic;
    fn add(self, o: Traffic) -> Traffic {
        Traffic {
            dram_in_act: self.dram_in_act + o.dram_in_act,
            dram_out_act: self.dram_out_act + o.dram_out_act,
            dram_weights: self.dram_weights + o.dram_weights,
            onchip: OnChipAccesses {
                data_buffer: self.onchip.data_buffer + o.onchip.data_buffer,
                weight_buffer: self.onchip.weight_buffer + o.onchip.weight_buffer,
                spm: self.onchip.spm + o.onchip.spm,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataflowPlan {
    pub layer: String,
    pub case: DataflowCase,
    pub tiling: Tiling,
    pub io: LayerIo,
    pub traffic: Traffic,
}

impl DataflowPlan {
    /// Accumulator location `(bank, address)` of local filter `f` of a group
    /// at pixel `pixel` of the current block.
    pub fn spm_location(
        &self,
        cfg: &HardwareConfig,
        local_filter: usize,
        pixel: usize,
    ) -> (usize, usize) {
        let (bank, slot) = schedule::spm_slot(local_filter, cfg.sa_cols);
        (
            bank,
            slot * self.tiling.block_rows * self.tiling.block_cols + pixel,
        )
    }

    /// Walks every iteration and checks the multiplicity constraints and the
    /// capacity of the weight buffer, data buffer and SPMs.
    pub fn validate(&self, layer: &LayerDescriptor, cfg: &HardwareConfig) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::Infeasible {
                layer: layer.name.clone(),
                reason,
            })
        };
        let t = &self.tiling;
        let (k, l) = (cfg.sa_rows, cfg.sa_cols);
        let pq = layer.kernel_rows * layer.kernel_cols;
        if t.filters == 0 || t.channels == 0 || t.block_rows == 0 || t.block_cols == 0 {
            return fail("zero tile extent".into());
        }
        if t.filters > layer.out_maps || t.channels > layer.in_maps {
            return fail("tile larger than the layer".into());
        }
        if t.block_rows > layer.out_rows || t.block_cols > layer.out_cols {
            return fail("block larger than the output map".into());
        }
        if !t.filters.is_multiple_of(l) && t.filters != layer.out_maps {
            return fail(format!(
                "{} filters per group is not a multiple of {l}",
                t.filters
            ));
        }
        if !(t.channels * pq).is_multiple_of(k) && t.channels != layer.in_maps {
            return fail(format!(
                "{} weights per filter chunk is not a multiple of {k}",
                t.channels * pq
            ));
        }
        if self.case == DataflowCase::One
            && (t.block_rows, t.block_cols) != (layer.out_rows, layer.out_cols)
        {
            return fail("case 1 keeps whole output maps in the SPM".into());
        }
        let geo = Geometry::new(layer, t);
        let wb = cfg.weight_buffer_elements();
        let db = cfg.data_buffer_elements();
        let banks = cfg.accumulator_banks();
        let whole_input = layer.input_elements();
        let whole_output = layer.output_elements();
        for step in geo.steps(t.order) {
            let group = geo.groups[step.group];
            let chunk = geo.chunks[step.chunk];
            let (rows, cols) = geo.block(step.block);
            let block_len = rows.len * cols.len;
            let weights = group.len * chunk.len * pq;
            if weights > wb {
                return fail(format!("weight tile of {weights} elements exceeds {wb}"));
            }
            let slots = group.len.div_ceil(banks);
            if slots * block_len > cfg.spm_entries {
                return fail(format!(
                    "{slots} slot(s) of {block_len} partial sums exceed {} SPM entries",
                    cfg.spm_entries
                ));
            }
            let input = if self.case.input_resident() {
                whole_input
            } else {
                let (ir, ic) = geo.block_input(layer, step.block);
                chunk.len * ir * ic
            };
            let output = if self.case.output_resident() {
                whole_output
            } else {
                group.len * block_len
            };
            if input + output > db {
                return fail(format!(
                    "data buffer needs {} elements, has {db}",
                    input + output
                ));
            }
        }
        Ok(())
    }

    /// One-line record for plan dumps.
    pub fn dump_line(&self) -> String {
        let t = &self.tiling;
        let tr = &self.traffic;
        format!(
            "layer={} case={} order={} tj={} ti={} tm={} tn={} in_from_dram={} out_to_dram={} \
             dram_in={} dram_w={} dram_out={} dram_total={} db={} wb={} spm={}",
            self.layer,
            self.case.id(),
            t.order.as_str(),
            t.filters,
            t.channels,
            t.block_rows,
            t.block_cols,
            self.io.input_from_dram as u8,
            self.io.output_to_dram as u8,
            tr.dram_in_act,
            tr.dram_weights,
            tr.dram_out_act,
            tr.dram_total(),
            tr.onchip.data_buffer,
            tr.onchip.weight_buffer,
            tr.onchip.spm,
        )
    }
}

impl fmt::Display for DataflowPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump_line())
    }
}

fn require_compute(layer: &LayerDescriptor) -> Result<()> {
    if layer.is_compute() {
        Ok(())
    } else {
        Err(Error::NotApplicable {
            op: "plan",
            kind: layer.kind.as_str(),
        })
    }
}

/// Picks the dataflow case from buffer and SPM fit.
pub fn classify(layer: &LayerDescriptor, cfg: &HardwareConfig) -> DataflowCase {
    let db = cfg.data_buffer_elements();
    let wb = cfg.weight_buffer_elements();
    let input = layer.input_elements();
    let output = layer.output_elements();
    let both_fit = input + output <= db;
    let map_fits_spm = layer.out_rows * layer.out_cols <= cfg.spm_entries;
    let l_filters = cfg.sa_cols.min(layer.out_maps) * layer.lowered_len();
    if both_fit && map_fits_spm {
        DataflowCase::One
    } else if both_fit && l_filters <= wb {
        DataflowCase::Two
    } else if !both_fit && input + cfg.sa_cols.min(layer.out_maps) <= db {
        DataflowCase::Three
    } else {
        DataflowCase::Four
    }
}

/// Per-axis input reach summed and maximised over the blocks of each block size.
struct AxisSpans {
    /// `sum[t-1]`: total input extent read over all blocks of size `t`.
    sum: Vec<u64>,
    /// `max[t-1]`: largest input extent of a single block of size `t`.
    max: Vec<usize>,
    /// Input extent read by the whole output range.
    whole: usize,
}

impl AxisSpans {
    fn new(out: usize, stride: usize, kernel: usize, pad: usize, extent: usize) -> Self {
        let mut sum = Vec::with_capacity(out);
        let mut max = Vec::with_capacity(out);
        for size in 1..=out {
            let spans: Vec<usize> = split(out, size)
                .into_iter()
                .map(|s| input_reach(s, stride, kernel, pad, extent))
                .collect();
            sum.push(spans.iter().map(|&v| v as u64).sum());
            max.push(spans.iter().copied().max().unwrap_or(0));
        }
        let whole = input_reach(Span { start: 0, len: out }, stride, kernel, pad, extent);
        Self { sum, max, whole }
    }
}

struct LayerStats {
    macs: u64,
    weights: u64,
    input: u64,
    output: u64,
    pq: usize,
    rows: AxisSpans,
    cols: AxisSpans,
}

impl LayerStats {
    fn new(layer: &LayerDescriptor) -> Result<Self> {
        Ok(Self {
            macs: mac_count(layer)?,
            weights: weight_count(layer)?,
            input: layer.input_elements() as u64,
            output: layer.output_elements() as u64,
            pq: layer.kernel_rows * layer.kernel_cols,
            rows: AxisSpans::new(
                layer.out_rows,
                layer.stride,
                layer.kernel_rows,
                layer.pad,
                layer.input_rows(),
            ),
            cols: AxisSpans::new(
                layer.out_cols,
                layer.stride,
                layer.kernel_cols,
                layer.pad,
                layer.input_cols(),
            ),
        })
    }
}

/// Array passes over `total` items cut into groups of `size`, each group
/// split into runs of at most `width`.
pub(crate) fn tile_passes(total: usize, size: usize, width: usize) -> u64 {
    let full = (total / size) as u64 * size.div_ceil(width) as u64;
    full + (total % size).div_ceil(width) as u64
}

/// `K`-row pieces over all channel chunks of `Ti` channels.
pub(crate) fn piece_count(channels: usize, chunk: usize, pq: usize, k: usize) -> u64 {
    let full = (channels / chunk) as u64 * (chunk * pq).div_ceil(k) as u64;
    full + ((channels % chunk) * pq).div_ceil(k) as u64
}

/// Closed-form traffic of a tiling (see module docs for the fetch rule).
fn traffic_of(
    layer: &LayerDescriptor,
    stats: &LayerStats,
    cfg: &HardwareConfig,
    case: DataflowCase,
    t: &Tiling,
    io: LayerIo,
) -> Traffic {
    let (k, l) = (cfg.sa_rows, cfg.sa_cols);
    let i_maps = layer.in_maps as u64;
    let gn = layer.out_maps.div_ceil(t.filters) as u64;
    let cn = layer.in_maps.div_ceil(t.channels) as u64;
    let bn = (layer.out_rows.div_ceil(t.block_rows) * layer.out_cols.div_ceil(t.block_cols)) as u64;
    let area_sum = stats.rows.sum[t.block_rows - 1] * stats.cols.sum[t.block_cols - 1];

    let dram_weights = match t.order {
        LoopOrder::FilterOuter if cn == 1 => stats.weights,
        LoopOrder::BlockOuter if gn * cn == 1 => stats.weights,
        _ => bn * stats.weights,
    };
    let dram_in_act = if case.input_resident() {
        if io.input_from_dram {
            i_maps * (stats.rows.whole * stats.cols.whole) as u64
        } else {
            0
        }
    } else {
        let once = match t.order {
            LoopOrder::FilterOuter => bn * cn == 1,
            LoopOrder::BlockOuter => cn == 1,
        };
        if once {
            i_maps * area_sum
        } else {
            gn * i_maps * area_sum
        }
    };
    let dram_out_act = if case.output_resident() && !io.output_to_dram {
        0
    } else {
        stats.output
    };

    // subgroups of L filters summed over groups
    let subgroups = tile_passes(layer.out_maps, t.filters, l);
    // K-row pieces summed over channel chunks
    let pieces = piece_count(layer.in_maps, t.channels, stats.pq, k);
    let pixels = (layer.out_rows * layer.out_cols) as u64;
    let lowered = layer.lowered_len() as u64;
    let onchip = OnChipAccesses {
        // DRAM fills, lowered-vector reads by the arrays, completed outputs
        data_buffer: dram_in_act + subgroups * pixels * lowered + stats.output,
        // DRAM fills plus one read per weight per array load
        weight_buffer: dram_weights + bn * stats.weights,
        // one read-modify-write per arriving partial sum, one read per drain
        spm: pixels * layer.out_maps as u64 * pieces + stats.output,
    };
    debug_assert!(subgroups * pixels * lowered >= stats.macs / l as u64);
    Traffic {
        dram_in_act,
        dram_out_act,
        dram_weights,
        onchip,
    }
}

fn filter_candidates(layer: &LayerDescriptor, cfg: &HardwareConfig) -> Vec<usize> {
    let l = cfg.sa_cols;
    let mut v: Vec<usize> = (1..=layer.out_maps / l).map(|m| m * l).collect();
    if !layer.out_maps.is_multiple_of(l) {
        v.push(layer.out_maps);
    }
    v
}

fn channel_candidates(layer: &LayerDescriptor, cfg: &HardwareConfig) -> Vec<usize> {
    let pq = layer.kernel_rows * layer.kernel_cols;
    let mut v: Vec<usize> = (1..layer.in_maps)
        .filter(|ti| (ti * pq).is_multiple_of(cfg.sa_rows))
        .collect();
    v.push(layer.in_maps);
    v
}

/// Ordering key: DRAM traffic first, then fewer array passes, then larger tiles.
type Score = (
    u64,
    u64,
    std::cmp::Reverse<usize>,
    std::cmp::Reverse<usize>,
    usize,
);

fn score(layer: &LayerDescriptor, cfg: &HardwareConfig, t: &Tiling, traffic: &Traffic) -> Score {
    let subgroups = tile_passes(layer.out_maps, t.filters, cfg.sa_cols);
    let pq = layer.kernel_rows * layer.kernel_cols;
    let pieces = piece_count(layer.in_maps, t.channels, pq, cfg.sa_rows);
    let blocks =
        (layer.out_rows.div_ceil(t.block_rows) * layer.out_cols.div_ceil(t.block_cols)) as u64;
    (
        traffic.dram_total(),
        subgroups * pieces * blocks,
        std::cmp::Reverse(t.filters),
        std::cmp::Reverse(t.channels),
        match t.order {
            LoopOrder::FilterOuter => 0,
            LoopOrder::BlockOuter => 1,
        },
    )
}

/// Best tiling for a given case under the case's own constraints.
pub fn plan_with_case(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    case: DataflowCase,
    io: LayerIo,
) -> Result<DataflowPlan> {
    require_compute(layer)?;
    layer.validate()?;
    cfg.validate()?;
    let stats = LayerStats::new(layer)?;
    let l = cfg.sa_cols;
    let pq = stats.pq;
    let wb = cfg.weight_buffer_elements();
    let db = cfg.data_buffer_elements();
    let banks = cfg.accumulator_banks();

    let filters = match case {
        DataflowCase::Two => {
            let two = 2 * l;
            if layer.out_maps >= two && two * layer.lowered_len() <= wb {
                vec![two]
            } else {
                vec![l.min(layer.out_maps)]
            }
        }
        _ => filter_candidates(layer, cfg),
    };
    let channels = match case {
        DataflowCase::Two => vec![layer.in_maps],
        _ => channel_candidates(layer, cfg),
    };
    let (row_sizes, col_sizes): (Vec<usize>, Vec<usize>) = match case {
        DataflowCase::One => (vec![layer.out_rows], vec![layer.out_cols]),
        _ => (
            (1..=layer.out_rows).collect(),
            (1..=layer.out_cols).collect(),
        ),
    };

    let mut best: Option<(Score, Tiling, Traffic)> = None;
    for &tj in &filters {
        let slots = tj.div_ceil(banks);
        for &ti in &channels {
            if tj * ti * pq > wb {
                continue;
            }
            for &tm in &row_sizes {
                if slots * tm > cfg.spm_entries {
                    break;
                }
                for &tn in &col_sizes {
                    let block = tm * tn;
                    if slots * block > cfg.spm_entries {
                        break;
                    }
                    let input = if case.input_resident() {
                        stats.input as usize
                    } else {
                        ti * stats.rows.max[tm - 1] * stats.cols.max[tn - 1]
                    };
                    let output = if case.output_resident() {
                        stats.output as usize
                    } else {
                        tj * block
                    };
                    if input + output > db {
                        continue;
                    }
                    for order in LoopOrder::ALL {
                        let tiling = Tiling {
                            filters: tj,
                            channels: ti,
                            block_rows: tm,
                            block_cols: tn,
                            order,
                        };
                        let traffic = traffic_of(layer, &stats, cfg, case, &tiling, io);
                        let s = score(layer, cfg, &tiling, &traffic);
                        if best.as_ref().is_none_or(|(b, _, _)| s < *b) {
                            best = Some((s, tiling, traffic));
                        }
                    }
                }
            }
        }
    }
    let (_, tiling, traffic) = best.ok_or_else(|| Error::Infeasible {
        layer: layer.name.clone(),
        reason: format!("no case-{} tiling fits the buffers", case.id()),
    })?;
    Ok(DataflowPlan {
        layer: layer.name.clone(),
        case,
        tiling,
        io,
        traffic,
    })
}

/// Classifies the layer and plans it as a standalone layer (input read from
/// and output written to DRAM).
pub fn plan(layer: &LayerDescriptor, cfg: &HardwareConfig) -> Result<DataflowPlan> {
    plan_with_io(layer, cfg, LayerIo::default())
}

pub fn plan_with_io(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    io: LayerIo,
) -> Result<DataflowPlan> {
    require_compute(layer)?;
    plan_with_case(layer, cfg, classify(layer, cfg), io)
}

/// Plans every compute layer of a network. A layer's output stays on chip
/// when its case keeps outputs resident and the next compute layer keeps its
/// input resident; pooling layers in between run in the pooling unit and
/// get no plan.
pub fn plan_network(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
) -> Result<Vec<Option<DataflowPlan>>> {
    net.validate()?;
    let cases: Vec<Option<DataflowCase>> = net
        .layers
        .iter()
        .map(|l| l.is_compute().then(|| classify(l, cfg)))
        .collect();
    let compute_idx: Vec<usize> = (0..net.layers.len())
        .filter(|&i| cases[i].is_some())
        .collect();
    let mut plans: Vec<Option<DataflowPlan>> = vec![None; net.layers.len()];
    for (pos, &idx) in compute_idx.iter().enumerate() {
        let case = cases[idx].expect("compute layer");
        let handoff_in = pos > 0 && {
            let prev = cases[compute_idx[pos - 1]].expect("compute layer");
            prev.output_resident() && case.input_resident()
        };
        let handoff_out = pos + 1 < compute_idx.len() && {
            let next = cases[compute_idx[pos + 1]].expect("compute layer");
            case.output_resident() && next.input_resident()
        };
        let io = LayerIo {
            input_from_dram: !handoff_in,
            output_to_dram: !handoff_out,
        };
        plans[idx] = Some(plan_with_case(&net.layers[idx], cfg, case, io)?);
    }
    Ok(plans)
}

/// No-reuse reference: every MAC reads its input activation and weight from
/// DRAM and writes its partial sum back, `3 * J*M*N*I*P*Q` elements in all.
pub fn naive_traffic(layer: &LayerDescriptor) -> Result<Traffic> {
    let macs = mac_count(layer)?;
    Ok(Traffic {
        dram_in_act: macs,
        dram_out_act: macs,
        dram_weights: macs,
        onchip: OnChipAccesses::default(),
    })
}
