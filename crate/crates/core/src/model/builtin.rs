//! Bundled network definitions.
//!
//! AlexNet is the single-tower variant (no grouped convolutions), with a
//! 227x227 input. VGG-16 is configuration D with a 224x224 input.

use crate::error::{Error, Result};
use crate::model::{Activation, LayerDescriptor as L, NetworkDescriptor};

pub const BUILTIN_NAMES: [&str; 3] = ["alexnet", "vgg16", "alexnet-mini"];

pub fn alexnet() -> NetworkDescriptor {
    let relu = Activation::Relu;
    NetworkDescriptor::new(
        "alexnet",
        vec![
            L::conv("conv1", 3, 96, 55, 55, 11, 11, 4, 0)
                .with_activation(relu)
                .with_pool(3, 2),
            L::conv("conv2", 96, 256, 27, 27, 5, 5, 1, 2)
                .with_activation(relu)
                .with_pool(3, 2),
            L::conv("conv3", 256, 384, 13, 13, 3, 3, 1, 1).with_activation(relu),
            L::conv("conv4", 384, 384, 13, 13, 3, 3, 1, 1).with_activation(relu),
            L::conv("conv5", 384, 256, 13, 13, 3, 3, 1, 1)
                .with_activation(relu)
                .with_pool(3, 2),
            L::fc("fc6", 256 * 6 * 6, 4096).with_activation(relu),
            L::fc("fc7", 4096, 4096).with_activation(relu),
            L::fc("fc8", 4096, 1000),
        ],
    )
}

pub fn vgg16() -> NetworkDescriptor {
    let relu = Activation::Relu;
    // (in, out, spatial, pool after)
    let convs: [(usize, usize, usize, bool); 13] = [
        (3, 64, 224, false),
        (64, 64, 224, true),
        (64, 128, 112, false),
        (128, 128, 112, true),
        (128, 256, 56, false),
        (256, 256, 56, false),
        (256, 256, 56, true),
        (256, 512, 28, false),
        (512, 512, 28, false),
        (512, 512, 28, true),
        (512, 512, 14, false),
        (512, 512, 14, false),
        (512, 512, 14, true),
    ];
    let mut layers: Vec<L> = convs
        .iter()
        .enumerate()
        .map(|(idx, &(i, j, hw, pool))| {
            let layer =
                L::conv(format!("conv{}", idx + 1), i, j, hw, hw, 3, 3, 1, 1).with_activation(relu);
            if pool {
                layer.with_pool(2, 2)
            } else {
                layer
            }
        })
        .collect();
    layers.push(L::fc("fc14", 512 * 7 * 7, 4096).with_activation(relu));
    layers.push(L::fc("fc15", 4096, 4096).with_activation(relu));
    layers.push(L::fc("fc16", 4096, 1000));
    NetworkDescriptor::new("vgg16", layers)
}

/// AlexNet-shaped network small enough for cycle-level functional runs:
/// same layer sequence, kernels, strides and pooling, with channels divided
/// by eight and a 67x67 input.
pub fn alexnet_mini() -> NetworkDescriptor {
    let relu = Activation::Relu;
    NetworkDescriptor::new(
        "alexnet-mini",
        vec![
            L::conv("conv1", 3, 12, 15, 15, 11, 11, 4, 0)
                .with_activation(relu)
                .with_pool(3, 2),
            L::conv("conv2", 12, 32, 7, 7, 5, 5, 1, 2)
                .with_activation(relu)
                .with_pool(3, 2),
            L::conv("conv3", 32, 48, 3, 3, 3, 3, 1, 1).with_activation(relu),
            L::conv("conv4", 48, 48, 3, 3, 3, 3, 1, 1).with_activation(relu),
            L::conv("conv5", 48, 32, 3, 3, 3, 3, 1, 1)
                .with_activation(relu)
                .with_pool(3, 2),
            L::fc("fc6", 32, 512).with_activation(relu),
            L::fc("fc7", 512, 512).with_activation(relu),
            L::fc("fc8", 512, 125),
        ],
    )
}

/// AlexNet and VGG-16.
pub fn builtin_networks() -> Vec<NetworkDescriptor> {
    vec![alexnet(), vgg16()]
}

pub fn builtin(name: &str) -> Result<NetworkDescriptor> {
    match name.to_ascii_lowercase().as_str() {
        "alexnet" => Ok(alexnet()),
        "vgg16" | "vgg-16" => Ok(vgg16()),
        "alexnet-mini" => Ok(alexnet_mini()),
        _ => Err(Error::UnknownNetwork(name.to_string())),
    }
}
