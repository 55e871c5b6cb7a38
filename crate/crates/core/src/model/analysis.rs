//! Complexity and data-reuse statistics computed in closed form.

use crate::error::{Error, Result};
use crate::model::{LayerDescriptor, LayerKind, NetworkDescriptor};

fn require_compute(layer: &LayerDescriptor, op: &'static str) -> Result<()> {
    match layer.kind {
        LayerKind::Conv | LayerKind::FullyConnected => Ok(()),
        LayerKind::MaxPool => Err(Error::NotApplicable {
            op,
            kind: LayerKind::MaxPool.as_str(),
        }),
    }
}

/// `J*M*N*I*P*Q`: the trip count of the six-deep CONV loop nest.
pub fn mac_count(layer: &LayerDescriptor) -> Result<u64> {
    require_compute(layer, "mac_count")?;
    Ok([
        layer.out_maps,
        layer.out_rows,
        layer.out_cols,
        layer.in_maps,
        layer.kernel_rows,
        layer.kernel_cols,
    ]
    .iter()
    .map(|&v| v as u64)
    .product())
}

/// `J*I*P*Q`. Biases are not modelled.
pub fn weight_count(layer: &LayerDescriptor) -> Result<u64> {
    require_compute(layer, "weight_count")?;
    Ok((layer.out_maps * layer.in_maps * layer.kernel_rows * layer.kernel_cols) as u64)
}

/// Number of MACs each datum participates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReuseProfile {
    /// Uses of an interior input activation: filters times per-filter uses.
    /// Activations near the border (or skipped by a large stride) see fewer.
    pub input_act_reuse: u64,
    /// Partial sums accumulated into one output activation: `I*P*Q`.
    pub output_act_reuse: u64,
    /// Uses of one weight: the size of an output map, `M*N`.
    pub weight_reuse: u64,
}

pub fn reuse_profile(layer: &LayerDescriptor) -> Result<ReuseProfile> {
    require_compute(layer, "reuse_profile")?;
    let per_filter =
        layer.kernel_rows.div_ceil(layer.stride) * layer.kernel_cols.div_ceil(layer.stride);
    Ok(ReuseProfile {
        input_act_reuse: (layer.out_maps * per_filter) as u64,
        output_act_reuse: layer.lowered_len() as u64,
        weight_reuse: (layer.out_rows * layer.out_cols) as u64,
    })
}

/// Per-network totals split by layer kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkTotals {
    pub conv_macs: u64,
    pub fc_macs: u64,
    pub conv_weights: u64,
    pub fc_weights: u64,
}

pub fn network_totals(net: &NetworkDescriptor) -> NetworkTotals {
    let mut totals = NetworkTotals::default();
    for layer in net.compute_layers() {
        // compute_layers() filters out pooling, so these cannot fail
        let macs = mac_count(layer).unwrap_or(0);
        let weights = weight_count(layer).unwrap_or(0);
        match layer.kind {
            LayerKind::Conv => {
                totals.conv_macs += macs;
                totals.conv_weights += weights;
            }
            LayerKind::FullyConnected => {
                totals.fc_macs += macs;
                totals.fc_weights += weights;
            }
            LayerKind::MaxPool => {}
        }
    }
    totals
}
