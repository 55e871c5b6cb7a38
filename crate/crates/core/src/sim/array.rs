//! Cycle-level models of the two systolic arrays.
//!
//! Both arrays share the same wavefront: element `r` of input vector `t`
//! enters row `r` at cycle `t + r` and moves one PE to the right per cycle,
//! while partial sums move one PE down per cycle. PE `(r, c)` therefore fires
//! for vector `t` at cycle `t + r + c`, and the column-`c` result of vector `t`
//! is latched by the accumulation unit at cycle `t + K + c`.
//!
//! SA-CONV keeps a weight tile resident for the whole stream; the next tile
//! is shifted into the shadow registers beforehand. SA-FC has a dedicated
//! weight port per PE: stream element `t` carries its own `K x L` weight set,
//! and PE `(r, c)` reads `stream[t][r][c]` exactly at cycle `t + r + c`, i.e.
//! the weight sets are skewed along anti-diagonals to meet the activations.

use crate::error::{Error, Result};
use crate::model::HardwareConfig;
use crate::sim::trace::{ArrayKind, ArrayTrace, CycleRecord, PeFire};

/// A `rows x cols` block of weights, row-major. Column `c` holds weights of
/// one filter (or output neuron); row `r` one position of the lowered input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTile {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl WeightTile {
    pub fn new(rows: usize, cols: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch {
                expected: vec![rows, cols],
                actual: vec![data.len()],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: i8) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.data[r * self.cols + c]
    }

    fn check_fits(&self, cfg: &HardwareConfig) -> Result<()> {
        if self.rows > cfg.sa_rows || self.cols > cfg.sa_cols {
            return Err(Error::TileTooLarge {
                rows: self.rows,
                cols: self.cols,
                max_rows: cfg.sa_rows,
                max_cols: cfg.sa_cols,
            });
        }
        Ok(())
    }
}

/// Registers of one processing element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PeState {
    pub held_weight: i8,
    pub shadow_weight: i8,
    pub in_activation: i8,
    pub partial_in: i32,
    pub partial_out: i32,
    /// Stream index of the operand currently in the PE, if any.
    pub tag: Option<usize>,
}

impl PeState {
    /// One MAC: `partial_out = partial_in + weight * activation`.
    #[inline]
    fn fire(&mut self, weight: i8, activation: i8, partial_in: i32, tag: usize) {
        self.in_activation = activation;
        self.partial_in = partial_in;
        self.partial_out = partial_in + weight as i32 * activation as i32;
        self.tag = Some(tag);
    }
}

/// Result of streaming input vectors through one array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayRun {
    /// `outputs[t][c]`: dot product of vector `t` with weight column `c`.
    pub outputs: Vec<Vec<i32>>,
    /// Cycle at which `outputs[t][c]` reaches the accumulation unit.
    pub output_cycles: Vec<Vec<usize>>,
    /// Streaming cycles including pipeline fill and drain: `T + K + L - 1`.
    pub cycles: usize,
    /// Cycles spent shifting the tile into the shadow registers.
    pub preload_cycles: usize,
    pub trace: Option<ArrayTrace>,
}

enum WeightSource<'a> {
    Stationary,
    Streamed(&'a [WeightTile]),
}

struct Grid {
    rows: usize,
    cols: usize,
    pes: Vec<PeState>,
}

impl Grid {
    fn new(cfg: &HardwareConfig) -> Self {
        Self {
            rows: cfg.sa_rows,
            cols: cfg.sa_cols,
            pes: vec![PeState::default(); cfg.sa_rows * cfg.sa_cols],
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> &PeState {
        &self.pes[r * self.cols + c]
    }

    /// Shifts `tile` down the columns into the shadow registers, one row per
    /// cycle, then commits it. Returns the cycles spent.
    fn preload(&mut self, tile: &WeightTile) -> usize {
        let (rows, cols) = (self.rows, self.cols);
        for step in 0..rows {
            for r in (1..rows).rev() {
                for c in 0..cols {
                    self.pes[r * cols + c].shadow_weight =
                        self.pes[(r - 1) * cols + c].shadow_weight;
                }
            }
            // the deepest row's weight enters first
            let src = rows - 1 - step;
            for c in 0..cols {
                self.pes[c].shadow_weight = if src < tile.rows && c < tile.cols {
                    tile.get(src, c)
                } else {
                    0
                };
            }
        }
        for pe in &mut self.pes {
            pe.held_weight = pe.shadow_weight;
        }
        rows
    }
}

fn run_stream(
    kind: ArrayKind,
    inputs: &[Vec<i8>],
    tile_rows: usize,
    tile_cols: usize,
    weights: WeightSource<'_>,
    grid: &mut Grid,
    trace: bool,
) -> ArrayRun {
    let (k, l) = (grid.rows, grid.cols);
    let t_count = inputs.len();
    let mut outputs = vec![vec![0i32; tile_cols]; t_count];
    let mut output_cycles = vec![vec![0usize; tile_cols]; t_count];
    let mut trace_out = trace.then(|| ArrayTrace::new(kind));
    if t_count == 0 {
        return ArrayRun {
            outputs,
            output_cycles,
            cycles: 0,
            preload_cycles: 0,
            trace: trace_out,
        };
    }
    let cycles = t_count + k + l - 1;
    let mut next = grid.pes.clone();
    // the final cycle only latches the last result into the accumulator
    for cycle in 0..cycles - 1 {
        let mut fires = Vec::new();
        for r in 0..k {
            for c in 0..l {
                let (act, tag) = if c == 0 {
                    match cycle.checked_sub(r) {
                        Some(t) if t < t_count => (inputs[t].get(r).copied().unwrap_or(0), Some(t)),
                        _ => (0, None),
                    }
                } else {
                    let left = grid.at(r, c - 1);
                    (left.in_activation, left.tag)
                };
                let pe = &mut next[r * l + c];
                let Some(t) = tag else {
                    pe.tag = None;
                    continue;
                };
                let partial_in = if r == 0 {
                    0
                } else {
                    grid.at(r - 1, c).partial_out
                };
                let weight = match &weights {
                    WeightSource::Stationary => pe.held_weight,
                    WeightSource::Streamed(stream) => {
                        let w = &stream[t];
                        if r < w.rows && c < w.cols {
                            w.get(r, c)
                        } else {
                            0
                        }
                    }
                };
                pe.fire(weight, act, partial_in, t);
                if r < tile_rows && c < tile_cols && trace_out.is_some() {
                    fires.push(PeFire {
                        row: r,
                        col: c,
                        activation: act,
                        weight,
                        partial_in,
                        partial_out: pe.partial_out,
                    });
                }
                if r == k - 1 && c < tile_cols {
                    outputs[t][c] = pe.partial_out;
                    output_cycles[t][c] = cycle + 1;
                }
            }
        }
        std::mem::swap(&mut grid.pes, &mut next);
        next.copy_from_slice(&grid.pes);
        if let Some(tr) = trace_out.as_mut() {
            tr.cycles.push(CycleRecord { cycle, fires });
        }
    }
    for pe in &mut grid.pes {
        pe.tag = None;
    }
    ArrayRun {
        outputs,
        output_cycles,
        cycles,
        preload_cycles: 0,
        trace: trace_out,
    }
}

fn check_inputs(inputs: &[Vec<i8>], rows: usize) -> Result<()> {
    if let Some(v) = inputs.iter().find(|v| v.len() != rows) {
        return Err(Error::ShapeMismatch {
            expected: vec![rows],
            actual: vec![v.len()],
        });
    }
    Ok(())
}

/// Streams lowered input vectors through SA-CONV holding `weights`.
///
/// Each vector must have `weights.rows()` elements; the tile must fit the
/// `K x L` array. The tile is preloaded through the shadow registers first.
pub fn run_sa_conv(
    inputs: &[Vec<i8>],
    weights: &WeightTile,
    cfg: &HardwareConfig,
    trace: bool,
) -> Result<ArrayRun> {
    weights.check_fits(cfg)?;
    check_inputs(inputs, weights.rows)?;
    let mut grid = Grid::new(cfg);
    let preload = grid.preload(weights);
    let mut run = run_stream(
        ArrayKind::SaConv,
        inputs,
        weights.rows,
        weights.cols,
        WeightSource::Stationary,
        &mut grid,
        trace,
    );
    run.preload_cycles = preload;
    Ok(run)
}

/// Streams vectors through SA-FC, where vector `t` is multiplied by its own
/// weight set `weight_stream[t]` delivered through the per-PE ports.
pub fn run_sa_fc(
    inputs: &[Vec<i8>],
    weight_stream: &[WeightTile],
    cfg: &HardwareConfig,
    trace: bool,
) -> Result<ArrayRun> {
    if weight_stream.len() < inputs.len() {
        return Err(Error::StreamUnderrun {
            needed: inputs.len(),
            available: weight_stream.len(),
        });
    }
    let mut tile_cols = 0;
    for (v, w) in inputs.iter().zip(weight_stream) {
        w.check_fits(cfg)?;
        check_inputs(std::slice::from_ref(v), w.rows)?;
        tile_cols = tile_cols.max(w.cols);
    }
    let tile_rows = weight_stream.iter().map(|w| w.rows).max().unwrap_or(0);
    let mut grid = Grid::new(cfg);
    let mut run = run_stream(
        ArrayKind::SaFc,
        inputs,
        tile_rows,
        tile_cols,
        WeightSource::Streamed(weight_stream),
        &mut grid,
        trace,
    );
    // columns beyond a tile's own width carry no result for that vector
    for (t, w) in weight_stream.iter().take(inputs.len()).enumerate() {
        run.outputs[t].truncate(w.cols);
        run.output_cycles[t].truncate(w.cols);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, l: usize) -> HardwareConfig {
        HardwareConfig {
            sa_rows: k,
            sa_cols: l,
            ..HardwareConfig::default()
        }
    }

    #[test]
    fn identity_weights_delay_inputs() {
        let n = 4;
        let inputs: Vec<Vec<i8>> = (0..6)
            .map(|t| (0..n).map(|r| (t * 10 + r) as i8).collect())
            .collect();
        let run = run_sa_conv(&inputs, &WeightTile::identity(n), &cfg(n, n), false).unwrap();
        for (t, v) in inputs.iter().enumerate() {
            let expect: Vec<i32> = v.iter().map(|&x| x as i32).collect();
            assert_eq!(run.outputs[t], expect);
            for c in 0..n {
                assert_eq!(run.output_cycles[t][c], t + n + c);
            }
        }
        assert_eq!(run.cycles, 6 + n + n - 1);
        assert_eq!(run.preload_cycles, n);
    }

    #[test]
    fn ones_sum_to_k() {
        let run = run_sa_conv(
            &[vec![1; 8]],
            &WeightTile::filled(8, 8, 1),
            &cfg(8, 8),
            false,
        )
        .unwrap();
        assert_eq!(run.outputs, vec![vec![8; 8]]);
    }

    #[test]
    fn degenerate_array() {
        let inputs: Vec<Vec<i8>> = (0..5).map(|t| vec![t as i8]).collect();
        let run = run_sa_conv(&inputs, &WeightTile::filled(1, 1, 3), &cfg(1, 1), false).unwrap();
        assert_eq!(run.cycles, 5 + 1);
        let got: Vec<i32> = run.outputs.iter().map(|o| o[0]).collect();
        assert_eq!(got, vec![0, 3, 6, 9, 12]);
    }

    #[test]
    fn oversize_tile_is_rejected() {
        let err = run_sa_conv(
            &[vec![0; 9]],
            &WeightTile::filled(9, 2, 1),
            &cfg(8, 8),
            false,
        );
        assert!(matches!(err, Err(Error::TileTooLarge { .. })));
        let err = run_sa_conv(
            &[vec![0; 3]],
            &WeightTile::filled(4, 2, 1),
            &cfg(8, 8),
            false,
        );
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn fc_underrun_is_reported() {
        let inputs = vec![vec![1i8; 2]; 3];
        let stream = vec![WeightTile::filled(2, 2, 1); 2];
        let err = run_sa_fc(&inputs, &stream, &cfg(2, 2), false);
        assert!(matches!(
            err,
            Err(Error::StreamUnderrun {
                needed: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn fc_switches_weights_every_cycle() {
        let inputs = vec![vec![1i8, 2], vec![3, 4]];
        let a = WeightTile::new(2, 2, vec![1, 0, 0, 1]).unwrap();
        let b = WeightTile::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let run = run_sa_fc(&inputs, &[a, b], &cfg(2, 2), false).unwrap();
        assert_eq!(run.outputs, vec![vec![1, 2], vec![4, 3]]);
        assert_eq!(run.cycles, 2 + 2 + 2 - 1);
    }

    #[test]
    fn shadow_preload_commits_whole_tile() {
        let c = cfg(3, 2);
        let tile = WeightTile::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let mut grid = Grid::new(&c);
        assert_eq!(grid.preload(&tile), 3);
        for r in 0..3 {
            for col in 0..2 {
                assert_eq!(grid.at(r, col).held_weight, tile.get(r, col));
            }
        }
    }
}
