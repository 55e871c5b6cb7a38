//! Independent reference models shared by the integration tests.
//!
//! Nothing here calls the planner's or timing model's closed forms: traffic
//! and feasibility come from walking the loop nest directly, and cycle counts
//! from an event-driven replay of the tile schedule.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use mpna::model::{HardwareConfig, LayerDescriptor, LayerKind};
use mpna::planner::{DataflowCase, DataflowPlan, LayerIo, LoopOrder, Tiling};
use rand::Rng;

/// `(start, len)` pieces of `0..total` in steps of `size`.
pub fn chunks(total: usize, size: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    let mut s = 0;
    while s < total {
        v.push((s, size.min(total - s)));
        s += size;
    }
    v
}

/// Input rows (or columns) read by outputs `start..start+len`, found by
/// marking every tap.
pub fn reach(
    start: usize,
    len: usize,
    stride: usize,
    kernel: usize,
    pad: usize,
    extent: usize,
) -> usize {
    let mut read = vec![false; extent];
    for m in start..start + len {
        for p in 0..kernel {
            let y = (m * stride + p) as isize - pad as isize;
            if y >= 0 && (y as usize) < extent {
                read[y as usize] = true;
            }
        }
    }
    read.iter().filter(|&&r| r).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Walked {
    pub dram_in: u64,
    pub dram_w: u64,
    pub dram_out: u64,
}

impl Walked {
    pub fn total(&self) -> u64 {
        self.dram_in + self.dram_w + self.dram_out
    }
}

/// Walks the loop nest of `tiling`; returns `None` when any iteration
/// overflows a buffer or SPM, else the DRAM elements moved. A tile is fetched
/// whenever it differs from the previous iteration's tile.
pub fn walk(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    case: DataflowCase,
    t: &Tiling,
    io: LayerIo,
) -> Option<Walked> {
    let pq = layer.kernel_rows * layer.kernel_cols;
    let (h, w) = (layer.input_rows(), layer.input_cols());
    let groups = chunks(layer.out_maps, t.filters);
    let chans = chunks(layer.in_maps, t.channels);
    let rows = chunks(layer.out_rows, t.block_rows);
    let cols = chunks(layer.out_cols, t.block_cols);
    let blocks: Vec<((usize, usize), (usize, usize))> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect();
    let in_res = case != DataflowCase::Four;
    let out_res = matches!(case, DataflowCase::One | DataflowCase::Two);
    let db = cfg.data_buffer_bytes / cfg.bytes_per_element;
    let wb = cfg.weight_buffer_bytes / cfg.bytes_per_element;

    let mut iters = Vec::new();
    match t.order {
        LoopOrder::FilterOuter => {
            for g in 0..groups.len() {
                for b in 0..blocks.len() {
                    for c in 0..chans.len() {
                        iters.push((g, b, c));
                    }
                }
            }
        }
        LoopOrder::BlockOuter => {
            for b in 0..blocks.len() {
                for g in 0..groups.len() {
                    for c in 0..chans.len() {
                        iters.push((g, b, c));
                    }
                }
            }
        }
    }

    let mut out = Walked {
        dram_in: 0,
        dram_w: 0,
        dram_out: 0,
    };
    if in_res && io.input_from_dram {
        let rr = reach(
            0,
            layer.out_rows,
            layer.stride,
            layer.kernel_rows,
            layer.pad,
            h,
        );
        let cc = reach(
            0,
            layer.out_cols,
            layer.stride,
            layer.kernel_cols,
            layer.pad,
            w,
        );
        out.dram_in += (layer.in_maps * rr * cc) as u64;
    }
    let (mut prev_w, mut prev_in) = (None, None);
    for (g, b, c) in iters {
        let glen = groups[g].1;
        let clen = chans[c].1;
        let ((r0, rl), (c0, cl)) = blocks[b];
        let ir = reach(r0, rl, layer.stride, layer.kernel_rows, layer.pad, h);
        let ic = reach(c0, cl, layer.stride, layer.kernel_cols, layer.pad, w);
        if glen * clen * pq > wb {
            return None;
        }
        if glen.div_ceil(2 * cfg.sa_cols) * rl * cl > cfg.spm_entries {
            return None;
        }
        let input = if in_res {
            layer.input_elements()
        } else {
            clen * ir * ic
        };
        let output = if out_res {
            layer.output_elements()
        } else {
            glen * rl * cl
        };
        if input + output > db {
            return None;
        }
        if prev_w != Some((g, c)) {
            out.dram_w += (glen * clen * pq) as u64;
            prev_w = Some((g, c));
        }
        if !in_res && prev_in != Some((b, c)) {
            out.dram_in += (clen * ir * ic) as u64;
            prev_in = Some((b, c));
        }
        if c + 1 == chans.len() && (!out_res || io.output_to_dram) {
            out.dram_out += (glen * rl * cl) as u64;
        }
    }
    Some(out)
}

/// Every tiling the case admits, before capacity checks.
pub fn candidate_tilings(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    case: DataflowCase,
) -> Vec<Tiling> {
    let (k, l) = (cfg.sa_rows, cfg.sa_cols);
    let pq = layer.kernel_rows * layer.kernel_cols;
    let (j, i) = (layer.out_maps, layer.in_maps);
    let wb = cfg.weight_buffer_bytes / cfg.bytes_per_element;
    let tjs: Vec<usize> = if case == DataflowCase::Two {
        if j >= 2 * l && 2 * l * i * pq <= wb {
            vec![2 * l]
        } else {
            vec![l.min(j)]
        }
    } else {
        (1..=j).filter(|tj| tj % l == 0 || *tj == j).collect()
    };
    let tis: Vec<usize> = if case == DataflowCase::Two {
        vec![i]
    } else {
        (1..=i)
            .filter(|ti| (ti * pq).is_multiple_of(k) || *ti == i)
            .collect()
    };
    let (tms, tns): (Vec<usize>, Vec<usize>) = if case == DataflowCase::One {
        (vec![layer.out_rows], vec![layer.out_cols])
    } else {
        (
            (1..=layer.out_rows).collect(),
            (1..=layer.out_cols).collect(),
        )
    };
    let mut v = Vec::new();
    for &tj in &tjs {
        for &ti in &tis {
            for &tm in &tms {
                for &tn in &tns {
                    for order in [LoopOrder::FilterOuter, LoopOrder::BlockOuter] {
                        v.push(Tiling {
                            filters: tj,
                            channels: ti,
                            block_rows: tm,
                            block_cols: tn,
                            order,
                        });
                    }
                }
            }
        }
    }
    v
}

/// Smallest walked DRAM total over every feasible tiling of the case.
pub fn enumerated_minimum(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    case: DataflowCase,
    io: LayerIo,
) -> Option<u64> {
    candidate_tilings(layer, cfg, case)
        .iter()
        .filter_map(|t| walk(layer, cfg, case, t, io))
        .map(|w| w.total())
        .min()
}

/// Random valid CONV layer with every extent at most `max`.
pub fn random_conv<R: Rng>(
    rng: &mut R,
    name: &str,
    max_maps: usize,
    max_out: usize,
    max_kernel: usize,
) -> LayerDescriptor {
    let p = rng.gen_range(1..=max_kernel);
    let q = rng.gen_range(1..=max_kernel);
    let stride = rng.gen_range(1..=2);
    let pad = if p.min(q) >= 3 && rng.gen_bool(0.5) {
        1
    } else {
        0
    };
    LayerDescriptor::conv(
        name,
        rng.gen_range(1..=max_maps),
        rng.gen_range(1..=max_maps),
        rng.gen_range(1..=max_out),
        rng.gen_range(1..=max_out),
        p,
        q,
        stride,
        pad,
    )
}

pub fn random_fc<R: Rng>(rng: &mut R, name: &str, max: usize) -> LayerDescriptor {
    LayerDescriptor::fc(name, rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Small accelerator whose buffers are tight enough to exercise every case.
pub fn random_small_hw<R: Rng>(rng: &mut R) -> HardwareConfig {
    HardwareConfig {
        sa_rows: rng.gen_range(1..=4),
        sa_cols: rng.gen_range(1..=4),
        spm_entries: rng.gen_range(4..=40),
        weight_buffer_bytes: rng.gen_range(64..=600),
        data_buffer_bytes: rng.gen_range(100..=1500),
        dram_bandwidth_bytes_per_s: rng.gen_range(0.5e9..=20e9),
        clock_hz: 280e6,
        bytes_per_element: 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    /// Array becomes free to start streaming its next tile.
    ArrayFree { array: usize },
}

/// Event-driven replay of a plan's tile schedule.
///
/// Each array serves its own queue of tiles. A tile on SA-CONV needs its
/// weights in the shadow registers, which takes `K` cycles starting when the
/// previous tile began streaming; it then streams `T` vectors and the last
/// result leaves the array `K + L - 1` cycles after the last vector entered.
/// On SA-FC the weights stream with the data, so there is no preload. DRAM
/// moves the plan's traffic in parallel. Returns the finishing cycle.
///
/// With `dual` set, CONV subgroups alternate between SA-CONV and SA-FC and
/// FC layers stream through SA-FC alone; otherwise everything runs on one
/// SA-CONV.
pub fn replay(
    layer: &LayerDescriptor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
    dual: bool,
) -> u64 {
    let arrays = if dual { 2 } else { 1 };
    let (k, l) = (cfg.sa_rows as u64, cfg.sa_cols as u64);
    let t = &plan.tiling;
    let pq = layer.kernel_rows * layer.kernel_cols;
    let fc_only = dual && layer.kind == LayerKind::FullyConnected;
    let groups = chunks(layer.out_maps, t.filters);
    let chans = chunks(layer.in_maps, t.channels);
    let rows = chunks(layer.out_rows, t.block_rows);
    let cols = chunks(layer.out_cols, t.block_cols);
    let blocks: Vec<u64> = rows
        .iter()
        .flat_map(|r| cols.iter().map(move |c| (r.1 * c.1) as u64))
        .collect();

    // queues of (array, streamed vectors)
    let mut queues: [Vec<u64>; 2] = [Vec::new(), Vec::new()];
    let (gn, bn, cn) = (groups.len(), blocks.len(), chans.len());
    let order: Vec<(usize, usize, usize)> = match t.order {
        LoopOrder::FilterOuter => (0..gn)
            .flat_map(|g| (0..bn).flat_map(move |b| (0..cn).map(move |c| (g, b, c))))
            .collect(),
        LoopOrder::BlockOuter => (0..bn)
            .flat_map(|b| (0..gn).flat_map(move |g| (0..cn).map(move |c| (g, b, c))))
            .collect(),
    };
    for (g, b, c) in order {
        let pieces = (chans[c].1 * pq).div_ceil(cfg.sa_rows);
        let subgroups = groups[g].1.div_ceil(cfg.sa_cols);
        for _ in 0..pieces {
            for s in 0..subgroups {
                let a = if arrays == 2 && !fc_only { s % 2 } else { 0 };
                queues[a].push(blocks[b]);
            }
        }
    }

    let bytes = plan.traffic.dram_total() * cfg.bytes_per_element as u64;
    let dram_done = (bytes as f64 * cfg.clock_hz / cfg.dram_bandwidth_bytes_per_s).ceil() as u64;

    if fc_only {
        // a single stream of one vector per tile, one pipeline fill
        let n: u64 = queues[0].len() as u64;
        return (n + k + l - 1).max(dram_done);
    }

    let mut heap = BinaryHeap::new();
    let mut next = [0usize; 2];
    // when the shadow registers of each array finish loading the next tile;
    // the first tile's weights arrive while the previous layer drains
    let mut shadow_ready = [0u64; 2];
    let mut finish = [0u64; 2];
    for a in 0..2 {
        heap.push(Reverse((0u64, Event::ArrayFree { array: a })));
    }
    while let Some(Reverse((now, Event::ArrayFree { array }))) = heap.pop() {
        let Some(&vectors) = queues[array].get(next[array]) else {
            continue;
        };
        next[array] += 1;
        let sa_fc = array == 1;
        let start = if sa_fc {
            now
        } else {
            now.max(shadow_ready[array])
        };
        if !sa_fc {
            // following tile preloads while this one streams
            shadow_ready[array] = start + k;
        }
        let last_in = start + vectors;
        let streaming_done = if sa_fc {
            last_in
        } else {
            last_in.max(shadow_ready[array])
        };
        let done = streaming_done + k + l - 1;
        finish[array] = done;
        heap.push(Reverse((done, Event::ArrayFree { array })));
    }
    finish[0].max(finish[1]).max(dram_done)
}
