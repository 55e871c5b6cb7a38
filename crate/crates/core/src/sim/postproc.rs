//! Pooling & activation unit.

use crate::error::{Error, Result};
use crate::model::{Activation, PoolSpec};
use crate::tensor::AccTensor;

fn pooled_extent(pool: PoolSpec, rows: usize, cols: usize) -> Result<(usize, usize)> {
    match (pool.output_extent(rows), pool.output_extent(cols)) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::BadPooling {
            window: pool.window,
            stride: pool.stride,
            rows,
            cols,
        }),
    }
}

fn max_pool(map: &AccTensor, pool: PoolSpec) -> Result<AccTensor> {
    let dims = map.dims();
    if dims.len() != 3 {
        return Err(Error::ShapeMismatch {
            expected: vec![0, 0, 0],
            actual: dims.to_vec(),
        });
    }
    let (ch, rows, cols) = (dims[0], dims[1], dims[2]);
    let (out_r, out_c) = pooled_extent(pool, rows, cols)?;
    let mut out = AccTensor::zeros(&[ch, out_r, out_c]);
    let data = out.data_mut();
    for c in 0..ch {
        for y in 0..out_r {
            for x in 0..out_c {
                let mut best = i32::MIN;
                for dy in 0..pool.window {
                    for dx in 0..pool.window {
                        best = best.max(map.at3(c, y * pool.stride + dy, x * pool.stride + dx));
                    }
                }
                data[(c * out_r + y) * out_c + x] = best;
            }
        }
    }
    Ok(out)
}

fn activate(map: &mut AccTensor, act: Activation) {
    for v in map.data_mut() {
        *v = act.apply(*v);
    }
}

/// Max-pools `map` (`[C, H, W]`) and then applies `act`.
///
/// Pooling before activation gives the same result as the usual order for any
/// non-decreasing activation, with fewer activation evaluations.
pub fn pool_activate(
    map: &AccTensor,
    pool: Option<PoolSpec>,
    act: Activation,
) -> Result<AccTensor> {
    let mut out = match pool {
        Some(p) => max_pool(map, p)?,
        None => map.clone(),
    };
    activate(&mut out, act);
    Ok(out)
}

/// Reference order: activation first, then pooling.
pub fn activate_then_pool(
    map: &AccTensor,
    pool: Option<PoolSpec>,
    act: Activation,
) -> Result<AccTensor> {
    let mut activated = map.clone();
    activate(&mut activated, act);
    match pool {
        Some(p) => max_pool(&activated, p),
        None => Ok(activated),
    }
}
