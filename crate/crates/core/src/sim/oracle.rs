//! Direct nested-loop reference evaluation.

use crate::error::{Error, Result};
use crate::model::{LayerDescriptor, LayerKind, NetworkDescriptor};
use crate::sim::postproc::activate_then_pool;
use crate::tensor::{AccTensor, QuantTensor};

fn shape_err(expected: &[usize], actual: &[usize]) -> Error {
    Error::ShapeMismatch {
        expected: expected.to_vec(),
        actual: actual.to_vec(),
    }
}

/// Normalizes a filter bank to `[J, I, P, Q]`, accepting `[J, I]` for FC.
pub(crate) fn filter_bank(filters: &QuantTensor, layer: &LayerDescriptor) -> Result<QuantTensor> {
    let want = [
        layer.out_maps,
        layer.in_maps,
        layer.kernel_rows,
        layer.kernel_cols,
    ];
    let volume: usize = want.iter().product();
    let ok = filters.dims() == want
        || (layer.kind == LayerKind::FullyConnected && filters.dims() == [want[0], want[1]]);
    if !ok || filters.len() != volume {
        return Err(shape_err(&want, filters.dims()));
    }
    filters.clone().reshape(&want)
}

/// Normalizes an input volume to `[I, H, W]`; FC layers flatten whatever they receive.
pub(crate) fn input_volume(input: &QuantTensor, layer: &LayerDescriptor) -> Result<QuantTensor> {
    let want = layer.input_dims();
    match layer.kind {
        LayerKind::FullyConnected if input.len() == layer.in_maps => input.clone().reshape(&want),
        _ if input.dims() == want => Ok(input.clone()),
        _ => Err(shape_err(&want, input.dims())),
    }
}

/// Six-deep loop nest over `j, m, n, i, p, q` with zero padding.
/// Returns the `[J, M, N]` wide result without activation.
pub fn oracle_conv(
    input: &QuantTensor,
    filters: &QuantTensor,
    layer: &LayerDescriptor,
) -> Result<AccTensor> {
    if !layer.is_compute() {
        return Err(Error::NotApplicable {
            op: "oracle_conv",
            kind: layer.kind.as_str(),
        });
    }
    let input = input_volume(input, layer)?;
    let filters = filter_bank(filters, layer)?;
    let [_, h, w] = layer.input_dims();
    let mut out = AccTensor::zeros(&layer.output_dims());
    let (m_out, n_out) = (layer.out_rows, layer.out_cols);
    let data = out.data_mut();
    for j in 0..layer.out_maps {
        for m in 0..m_out {
            for n in 0..n_out {
                let mut acc = 0i32;
                for i in 0..layer.in_maps {
                    for p in 0..layer.kernel_rows {
                        for q in 0..layer.kernel_cols {
                            let y = (m * layer.stride + p) as isize - layer.pad as isize;
                            let x = (n * layer.stride + q) as isize - layer.pad as isize;
                            if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
                                continue;
                            }
                            acc += input.at3(i, y as usize, x as usize) as i32
                                * filters.at4(j, i, p, q) as i32;
                        }
                    }
                }
                data[(j * m_out + m) * n_out + n] = acc;
            }
        }
    }
    Ok(out)
}

/// Layer-by-layer reference: convolution, activation, pooling, then
/// requantization to 8 bits. `weights[l]` is `None` exactly for pooling layers.
pub fn oracle_network(
    net: &NetworkDescriptor,
    input: &QuantTensor,
    weights: &[Option<QuantTensor>],
) -> Result<QuantTensor> {
    net.validate()?;
    let mut act = input.clone();
    for (layer, w) in net.layers.iter().zip(weights) {
        let wide = match (layer.kind, w) {
            (LayerKind::MaxPool, _) => {
                let x = input_volume(&act, layer)?.widen();
                let pool = Some(crate::model::PoolSpec::new(layer.kernel_rows, layer.stride));
                activate_then_pool(&x, pool, layer.activation)?
            }
            (_, Some(filters)) => {
                let conv = oracle_conv(&act, filters, layer)?;
                activate_then_pool(&conv, layer.pool, layer.activation)?
            }
            (_, None) => {
                return Err(Error::InvalidLayer {
                    layer: layer.name.clone(),
                    reason: "missing weights".into(),
                })
            }
        };
        act = wide.requantize().0;
    }
    Ok(act)
}
