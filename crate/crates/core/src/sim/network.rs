//! Plan-driven execution of whole networks on the two arrays.
//!
//! Each compute layer follows its [`DataflowPlan`]: the schedule is walked
//! step by step, lowered input pieces of at most `K` rows stream through an
//! array, and partial sums land in the accumulation unit at the location the
//! plan assigns. CONV subgroups alternate between SA-CONV (even) and SA-FC
//! (odd, fed the same tile every cycle); FC layers run on SA-FC alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{HardwareConfig, LayerDescriptor, LayerKind, NetworkDescriptor, PoolSpec};
use crate::planner::schedule::{split, Geometry, Span};
use crate::planner::{plan_network, DataflowPlan};
use crate::sim::accum::AccumulatorBank;
use crate::sim::array::{run_sa_conv, run_sa_fc, ArrayRun, WeightTile};
use crate::sim::oracle::{filter_bank, input_volume, oracle_network};
use crate::sim::postproc::pool_activate;
use crate::tensor::{AccTensor, QuantTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferKind {
    InputActivations,
    Weights,
    OutputActivations,
}

impl TransferKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::InputActivations => "ifmap",
            Self::Weights => "weights",
            Self::OutputActivations => "ofmap",
        }
    }
}

/// One DRAM burst issued by the simulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DramTransfer {
    pub layer: usize,
    pub kind: TransferKind,
    pub elements: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferLog {
    pub entries: Vec<DramTransfer>,
}

impl TransferLog {
    fn push(&mut self, layer: usize, kind: TransferKind, elements: u64) {
        if elements > 0 {
            self.entries.push(DramTransfer {
                layer,
                kind,
                elements,
            });
        }
    }

    pub fn total(&self, layer: Option<usize>, kind: Option<TransferKind>) -> u64 {
        self.entries
            .iter()
            .filter(|t| layer.is_none_or(|l| t.layer == l) && kind.is_none_or(|k| t.kind == k))
            .map(|t| t.elements)
            .sum()
    }
}

/// Per-layer counters gathered while executing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerStatsSim {
    pub spm_accesses: u64,
    pub array_runs: u64,
    pub array_cycles: u64,
    pub requant_shift: u32,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub output: QuantTensor,
    pub transfers: TransferLog,
    pub layers: Vec<LayerStatsSim>,
    /// Per-cycle PE activity, one block per array run, when tracing is on.
    pub trace: Option<String>,
}

/// Deterministic 8-bit weights for every compute layer, `[J, I, P, Q]`.
pub fn random_weights(net: &NetworkDescriptor, seed: u64) -> Vec<Option<QuantTensor>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    net.layers
        .iter()
        .map(|l| {
            l.is_compute().then(|| {
                QuantTensor::random(
                    &[l.out_maps, l.in_maps, l.kernel_rows, l.kernel_cols],
                    &mut rng,
                )
            })
        })
        .collect()
}

/// Deterministic 8-bit input volume for the network's first layer.
pub fn random_input(net: &NetworkDescriptor, seed: u64) -> QuantTensor {
    // separate stream from the weights
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    QuantTensor::random(&net.input_dims(), &mut rng)
}

struct LayerRun<'a> {
    idx: usize,
    layer: &'a LayerDescriptor,
    plan: &'a DataflowPlan,
    cfg: &'a HardwareConfig,
    input: QuantTensor,
    filters: QuantTensor,
    log: &'a mut TransferLog,
    stats: LayerStatsSim,
    trace: Option<&'a mut String>,
}

impl LayerRun<'_> {
    /// Lowered `(i, p, q)` vector of output pixel `(m, n)` over channel chunk `chunk`.
    fn lowered(&self, chunk: Span, m: usize, n: usize) -> Vec<i8> {
        let l = self.layer;
        let (h, w) = (l.input_rows() as isize, l.input_cols() as isize);
        let mut v = Vec::with_capacity(chunk.len * l.kernel_rows * l.kernel_cols);
        for i in chunk.start..chunk.end() {
            for p in 0..l.kernel_rows {
                for q in 0..l.kernel_cols {
                    let y = (m * l.stride + p) as isize - l.pad as isize;
                    let x = (n * l.stride + q) as isize - l.pad as isize;
                    let inside = y >= 0 && x >= 0 && y < h && x < w;
                    v.push(if inside {
                        self.input.at3(i, y as usize, x as usize)
                    } else {
                        0
                    });
                }
            }
        }
        v
    }

    /// Weight tile for filters `filters` over lowered rows `rows` of chunk `chunk`.
    fn tile(&self, filters: Span, chunk: Span, rows: Span) -> Result<WeightTile> {
        let l = self.layer;
        let pq = l.kernel_rows * l.kernel_cols;
        let mut data = Vec::with_capacity(rows.len * filters.len);
        for r in rows.start..rows.end() {
            let (i, rest) = (chunk.start + r / pq, r % pq);
            let (p, q) = (rest / l.kernel_cols, rest % l.kernel_cols);
            for j in filters.start..filters.end() {
                data.push(self.filters.at4(j, i, p, q));
            }
        }
        WeightTile::new(rows.len, filters.len, data)
    }

    fn record(&mut self, run: &ArrayRun, label: &str) {
        self.stats.array_runs += 1;
        self.stats.array_cycles += run.cycles as u64;
        if let (Some(out), Some(trace)) = (self.trace.as_deref_mut(), run.trace.as_ref()) {
            out.push_str(&format!("# layer={} {label}\n", self.layer.name));
            out.push_str(&trace.dump(0));
        }
    }

    fn execute(mut self) -> Result<(AccTensor, LayerStatsSim)> {
        let layer = self.layer;
        let plan = self.plan;
        let cfg = self.cfg;
        let t = plan.tiling;
        let (k, l_cols) = (cfg.sa_rows, cfg.sa_cols);
        let geo = Geometry::new(layer, &t);
        let pq = layer.kernel_rows * layer.kernel_cols;
        let mut acc = AccumulatorBank::new(cfg.accumulator_banks(), cfg.spm_entries);
        let mut out = AccTensor::zeros(&layer.output_dims());
        let (m_out, n_out) = (layer.out_rows, layer.out_cols);

        if plan.case.input_resident() && plan.io.input_from_dram {
            let (rows, cols) = Geometry::layer_input(layer);
            let area = rows * cols;
            self.log.push(
                self.idx,
                TransferKind::InputActivations,
                (layer.in_maps * area) as u64,
            );
        }
        let write_out = !plan.case.output_resident() || plan.io.output_to_dram;

        let mut last_weights: Option<(usize, usize)> = None;
        let mut last_input: Option<(usize, usize)> = None;
        let last_chunk = geo.chunks.len() - 1;
        let tracing = self.trace.is_some();
        for step in geo.steps(t.order) {
            let group = geo.groups[step.group];
            let chunk = geo.chunks[step.chunk];
            let (rows, cols) = geo.block(step.block);
            let block_len = rows.len * cols.len;

            if last_weights != Some((step.group, step.chunk)) {
                self.log.push(
                    self.idx,
                    TransferKind::Weights,
                    (group.len * chunk.len * pq) as u64,
                );
                last_weights = Some((step.group, step.chunk));
            }
            if !plan.case.input_resident() && last_input != Some((step.block, step.chunk)) {
                let (ir, ic) = geo.block_input(layer, step.block);
                self.log.push(
                    self.idx,
                    TransferKind::InputActivations,
                    (chunk.len * ir * ic) as u64,
                );
                last_input = Some((step.block, step.chunk));
            }

            let vectors: Vec<Vec<i8>> = (rows.start..rows.end())
                .flat_map(|m| (cols.start..cols.end()).map(move |n| (m, n)))
                .map(|(m, n)| self.lowered(chunk, m, n))
                .collect();
            let pieces = split(chunk.len * pq, k);
            let subgroups = split(group.len, l_cols);

            if layer.kind == LayerKind::FullyConnected {
                // one stream element per (piece, subgroup); the block is a single pixel
                let mut inputs = Vec::new();
                let mut stream = Vec::new();
                let mut owners = Vec::new();
                for piece in &pieces {
                    for (s, sub) in subgroups.iter().enumerate() {
                        let filters = Span {
                            start: group.start + sub.start,
                            len: sub.len,
                        };
                        inputs.push(vectors[0][piece.start..piece.end()].to_vec());
                        stream.push(self.tile(filters, chunk, *piece)?);
                        owners.push(s);
                    }
                }
                let run = run_sa_fc(&inputs, &stream, cfg, tracing)?;
                for (e, s) in owners.iter().enumerate() {
                    for (c, &v) in run.outputs[e].iter().enumerate() {
                        let (bank, slot) =
                            crate::planner::schedule::spm_slot(s * l_cols + c, l_cols);
                        acc.accumulate(bank, slot * block_len, v)?;
                    }
                }
                self.record(
                    &run,
                    &format!(
                        "step={:?} array=sa-fc",
                        (step.group, step.block, step.chunk)
                    ),
                );
            } else {
                for piece in &pieces {
                    let piece_inputs: Vec<Vec<i8>> = vectors
                        .iter()
                        .map(|v| v[piece.start..piece.end()].to_vec())
                        .collect();
                    for (s, sub) in subgroups.iter().enumerate() {
                        let filters = Span {
                            start: group.start + sub.start,
                            len: sub.len,
                        };
                        let tile = self.tile(filters, chunk, *piece)?;
                        let run = if s % 2 == 0 {
                            run_sa_conv(&piece_inputs, &tile, cfg, tracing)?
                        } else {
                            let stream = vec![tile; piece_inputs.len()];
                            run_sa_fc(&piece_inputs, &stream, cfg, tracing)?
                        };
                        for (px, outs) in run.outputs.iter().enumerate() {
                            for (c, &v) in outs.iter().enumerate() {
                                let (bank, addr) = plan.spm_location(cfg, s * l_cols + c, px);
                                acc.accumulate(bank, addr, v)?;
                            }
                        }
                        let array = if s % 2 == 0 { "sa-conv" } else { "sa-fc" };
                        self.record(
                            &run,
                            &format!(
                                "group={} block={} chunk={} subgroup={s} rows={}..{} array={array}",
                                step.group,
                                step.block,
                                step.chunk,
                                piece.start,
                                piece.end()
                            ),
                        );
                    }
                }
            }

            if step.chunk == last_chunk {
                let data = out.data_mut();
                for f in 0..group.len {
                    for (px, (m, n)) in (rows.start..rows.end())
                        .flat_map(|m| (cols.start..cols.end()).map(move |n| (m, n)))
                        .enumerate()
                    {
                        let (bank, addr) = plan.spm_location(cfg, f, px);
                        data[((group.start + f) * m_out + m) * n_out + n] =
                            acc.drain(bank, addr)?;
                    }
                }
                self.stats.spm_accesses += (group.len * block_len) as u64;
                if write_out {
                    self.log.push(
                        self.idx,
                        TransferKind::OutputActivations,
                        (group.len * block_len) as u64,
                    );
                }
            }
        }
        self.stats.spm_accesses += acc.accesses();
        Ok((out, self.stats))
    }
}

fn missing_weights(layer: &LayerDescriptor) -> Error {
    Error::InvalidLayer {
        layer: layer.name.clone(),
        reason: "missing weights".into(),
    }
}

/// Runs one compute layer as planned and returns its wide `[J, M, N]`
/// result before pooling and activation.
#[allow(clippy::too_many_arguments)]
pub fn execute_layer(
    layer: &LayerDescriptor,
    input: &QuantTensor,
    filters: &QuantTensor,
    cfg: &HardwareConfig,
    plan: &DataflowPlan,
    log: &mut TransferLog,
    layer_index: usize,
    trace: Option<&mut String>,
) -> Result<(AccTensor, LayerStatsSim)> {
    if !layer.is_compute() {
        return Err(Error::NotApplicable {
            op: "execute_layer",
            kind: layer.kind.as_str(),
        });
    }
    plan.validate(layer, cfg)?;
    LayerRun {
        idx: layer_index,
        layer,
        plan,
        cfg,
        input: input_volume(input, layer)?,
        filters: filter_bank(filters, layer)?,
        log,
        stats: LayerStatsSim::default(),
        trace,
    }
    .execute()
}

/// Executes the network layer by layer: array passes, accumulation, pooling
/// and activation, then requantization of each layer's output to 8 bits.
pub fn simulate_network(
    net: &NetworkDescriptor,
    input: &QuantTensor,
    weights: &[Option<QuantTensor>],
    cfg: &HardwareConfig,
    plans: &[Option<DataflowPlan>],
    trace: bool,
) -> Result<SimOutcome> {
    net.validate()?;
    cfg.validate()?;
    let mut log = TransferLog::default();
    let mut text = trace.then(String::new);
    let mut layers = Vec::with_capacity(net.layers.len());
    let mut act = input.clone();
    for (idx, layer) in net.layers.iter().enumerate() {
        let (wide, mut stats) =
            match layer.kind {
                LayerKind::MaxPool => {
                    let x = input_volume(&act, layer)?.widen();
                    let pool = Some(PoolSpec::new(layer.kernel_rows, layer.stride));
                    (
                        pool_activate(&x, pool, layer.activation)?,
                        LayerStatsSim::default(),
                    )
                }
                _ => {
                    let filters = weights
                        .get(idx)
                        .and_then(Option::as_ref)
                        .ok_or_else(|| missing_weights(layer))?;
                    let plan = plans.get(idx).and_then(Option::as_ref).ok_or_else(|| {
                        Error::Infeasible {
                            layer: layer.name.clone(),
                            reason: "no dataflow plan".into(),
                        }
                    })?;
                    let (conv, stats) = execute_layer(
                        layer,
                        &act,
                        filters,
                        cfg,
                        plan,
                        &mut log,
                        idx,
                        text.as_mut(),
                    )?;
                    (pool_activate(&conv, layer.pool, layer.activation)?, stats)
                }
            };
        let (q, shift) = wide.requantize();
        stats.requant_shift = shift;
        layers.push(stats);
        act = q;
    }
    Ok(SimOutcome {
        output: act,
        transfers: log,
        layers,
        trace: text,
    })
}

/// Plans and simulates the network, then compares the result with the
/// direct loop-nest evaluation element by element.
pub fn simulate_and_check(
    net: &NetworkDescriptor,
    input: &QuantTensor,
    weights: &[Option<QuantTensor>],
    cfg: &HardwareConfig,
    trace: bool,
) -> Result<SimOutcome> {
    let plans = plan_network(net, cfg)?;
    let outcome = simulate_network(net, input, weights, cfg, &plans, trace)?;
    let expected = oracle_network(net, input, weights)?;
    let last = net
        .layers
        .last()
        .map(|l| l.name.clone())
        .unwrap_or_default();
    if let Some((index, (&s, &o))) = outcome
        .output
        .data()
        .iter()
        .zip(expected.data())
        .enumerate()
        .find(|(_, (s, o))| s != o)
    {
        return Err(Error::OracleMismatch {
            layer: last,
            index,
            simulated: s as i64,
            oracle: o as i64,
        });
    }
    if outcome.output.dims() != expected.dims() {
        return Err(Error::ShapeMismatch {
            expected: expected.dims().to_vec(),
            actual: outcome.output.dims().to_vec(),
        });
    }
    Ok(outcome)
}
