//! Tile geometry and the loop-nest schedule a plan executes.
//!
//! A layer is cut into filter groups (`Tj` filters), output blocks
//! (`Tm x Tn` pixels) and input-channel chunks (`Ti` channels). Channel
//! chunks are always innermost, so an output block completes on chip before
//! the next block or group starts. The two outer loops are ordered by
//! [`LoopOrder`].

use crate::model::LayerDescriptor;
use crate::planner::{LoopOrder, Tiling};

/// Half-open range `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

pub(crate) fn split(total: usize, size: usize) -> Vec<Span> {
    (0..total.div_ceil(size))
        .map(|i| Span {
            start: i * size,
            len: size.min(total - i * size),
        })
        .collect()
}

/// Rows (or columns) of the unpadded input read by an output span. Windows
/// of neighbouring outputs overlap when `stride <= kernel`; otherwise the rows
/// between them are never read and not counted.
pub(crate) fn input_reach(
    out: Span,
    stride: usize,
    kernel: usize,
    pad: usize,
    extent: usize,
) -> usize {
    let mut covered = 0;
    let mut count = 0;
    for m in out.start..out.end() {
        let lo = (m * stride).saturating_sub(pad).max(covered);
        let hi = (m * stride + kernel).saturating_sub(pad).min(extent);
        if hi > lo {
            count += hi - lo;
            covered = hi;
        }
    }
    count
}

/// One iteration of the tiled loop nest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub group: usize,
    pub block: usize,
    pub chunk: usize,
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub groups: Vec<Span>,
    pub chunks: Vec<Span>,
    pub row_blocks: Vec<Span>,
    pub col_blocks: Vec<Span>,
}

impl Geometry {
    pub fn new(layer: &LayerDescriptor, tiling: &Tiling) -> Self {
        Self {
            groups: split(layer.out_maps, tiling.filters),
            chunks: split(layer.in_maps, tiling.channels),
            row_blocks: split(layer.out_rows, tiling.block_rows),
            col_blocks: split(layer.out_cols, tiling.block_cols),
        }
    }

    pub fn block_count(&self) -> usize {
        self.row_blocks.len() * self.col_blocks.len()
    }

    /// Output rows and columns of block `b` (row-major block order).
    pub fn block(&self, b: usize) -> (Span, Span) {
        let n = self.col_blocks.len();
        (self.row_blocks[b / n], self.col_blocks[b % n])
    }

    /// Input rows and columns read by block `b`.
    pub fn block_input(&self, layer: &LayerDescriptor, b: usize) -> (usize, usize) {
        let (rows, cols) = self.block(b);
        (
            input_reach(
                rows,
                layer.stride,
                layer.kernel_rows,
                layer.pad,
                layer.input_rows(),
            ),
            input_reach(
                cols,
                layer.stride,
                layer.kernel_cols,
                layer.pad,
                layer.input_cols(),
            ),
        )
    }

    /// Input rows and columns read by the whole output map.
    pub fn layer_input(layer: &LayerDescriptor) -> (usize, usize) {
        let all = |len| Span { start: 0, len };
        (
            input_reach(
                all(layer.out_rows),
                layer.stride,
                layer.kernel_rows,
                layer.pad,
                layer.input_rows(),
            ),
            input_reach(
                all(layer.out_cols),
                layer.stride,
                layer.kernel_cols,
                layer.pad,
                layer.input_cols(),
            ),
        )
    }

    /// Iterations in execution order.
    pub fn steps(&self, order: LoopOrder) -> Vec<Step> {
        let (gn, bn, cn) = (self.groups.len(), self.block_count(), self.chunks.len());
        let mut steps = Vec::with_capacity(gn * bn * cn);
        match order {
            LoopOrder::FilterOuter => {
                for group in 0..gn {
                    for block in 0..bn {
                        for chunk in 0..cn {
                            steps.push(Step {
                                group,
                                block,
                                chunk,
                            });
                        }
                    }
                }
            }
            LoopOrder::BlockOuter => {
                for block in 0..bn {
                    for group in 0..gn {
                        for chunk in 0..cn {
                            steps.push(Step {
                                group,
                                block,
                                chunk,
                            });
                        }
                    }
                }
            }
        }
        steps
    }
}

/// Where the partial sums of local filter `f` of a group live: filters are
/// dealt to the arrays in `L`-wide subgroups, alternating between the two
/// arrays, and each further pair of subgroups takes the next block-sized
/// slot of the SPMs. Returns `(bank, slot)`.
pub fn spm_slot(local_filter: usize, sa_cols: usize) -> (usize, usize) {
    let subgroup = local_filter / sa_cols;
    let bank = (subgroup % 2) * sa_cols + local_filter % sa_cols;
    (bank, subgroup / 2)
}
