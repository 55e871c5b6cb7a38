//! Text formats for network and hardware descriptions (TOML).
//!
//! A network file has a top-level `name` and one `[[layer]]` table per layer:
//!
//! ```toml
//! name = "tiny"
//!
//! [[layer]]
//! name = "conv1"
//! kind = "conv"          # conv | fc | maxpool
//! I = 3
//! J = 8
//! M = 4
//! N = 4
//! P = 3
//! Q = 3
//! stride = 1
//! pad = 0
//! activation = "relu"    # none | relu | leaky_relu
//! leaky_shift = 3        # leaky slope 2^-shift, only for leaky_relu
//! pool_window = 2
//! pool_stride = 2
//! ```
//!
//! `M`, `N`, `P`, `Q`, `stride` default to 1 and `pad` to 0, so FC layers only
//! need `I` and `J`. The hardware file holds `key = value` pairs named after
//! the [`HardwareConfig`] fields.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Activation, HardwareConfig, LayerDescriptor, LayerKind, NetworkDescriptor, PoolSpec,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    name: String,
    #[serde(rename = "layer")]
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct LayerRecord {
    name: String,
    kind: String,
    I: usize,
    J: usize,
    #[serde(default = "one")]
    M: usize,
    #[serde(default = "one")]
    N: usize,
    #[serde(default = "one")]
    P: usize,
    #[serde(default = "one")]
    Q: usize,
    #[serde(default = "one")]
    stride: usize,
    #[serde(default)]
    pad: usize,
    #[serde(default = "none_str")]
    activation: String,
    #[serde(default)]
    leaky_shift: Option<u8>,
    #[serde(default)]
    pool_window: Option<usize>,
    #[serde(default)]
    pool_stride: Option<usize>,
}

fn one() -> usize {
    1
}

fn none_str() -> String {
    "none".into()
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

impl LayerRecord {
    fn into_layer(self, path: &Path) -> Result<LayerDescriptor> {
        let kind = match self.kind.as_str() {
            "conv" => LayerKind::Conv,
            "fc" => LayerKind::FullyConnected,
            "maxpool" => LayerKind::MaxPool,
            other => {
                return Err(parse_err(
                    path,
                    format!("layer `{}`: unknown kind `{other}`", self.name),
                ))
            }
        };
        let activation = match (self.activation.as_str(), self.leaky_shift) {
            ("none", None) => Activation::None,
            ("relu", None) => Activation::Relu,
            ("leaky_relu", shift) => Activation::LeakyRelu {
                slope_shift: shift.unwrap_or(Activation::DEFAULT_LEAKY_SHIFT),
            },
            (_, Some(_)) => {
                return Err(parse_err(
                    path,
                    format!(
                        "layer `{}`: leaky_shift given for a non-leaky activation",
                        self.name
                    ),
                ))
            }
            (other, None) => {
                return Err(parse_err(
                    path,
                    format!("layer `{}`: unknown activation `{other}`", self.name),
                ))
            }
        };
        let pool = match (self.pool_window, self.pool_stride) {
            (Some(window), Some(stride)) => Some(PoolSpec::new(window, stride)),
            (None, None) => None,
            _ => {
                return Err(parse_err(
                    path,
                    format!(
                        "layer `{}`: pool_window and pool_stride go together",
                        self.name
                    ),
                ))
            }
        };
        Ok(LayerDescriptor {
            name: self.name,
            kind,
            in_maps: self.I,
            out_maps: self.J,
            out_rows: self.M,
            out_cols: self.N,
            kernel_rows: self.P,
            kernel_cols: self.Q,
            stride: self.stride,
            pad: self.pad,
            activation,
            pool,
        })
    }
}

pub fn parse_network(text: &str, path: &Path) -> Result<NetworkDescriptor> {
    let file: NetworkFile = toml::from_str(text).map_err(|e| parse_err(path, e.to_string()))?;
    let layers = file
        .layers
        .into_iter()
        .map(|r| r.into_layer(path))
        .collect::<Result<Vec<_>>>()?;
    let net = NetworkDescriptor::new(file.name, layers);
    net.validate()?;
    Ok(net)
}

/// Reads a file, naming the path in the error.
pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkDescriptor> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_network(&text, path)
}

/// Renders a network in the file format. Defaulted keys are written out in
/// full for CONV layers and omitted for FC layers.
pub fn network_to_toml(net: &NetworkDescriptor) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = \"{}\"", net.name);
    for layer in &net.layers {
        out.push_str("\n[[layer]]\n");
        let _ = writeln!(out, "name = \"{}\"", layer.name);
        let _ = writeln!(out, "kind = \"{}\"", layer.kind);
        let _ = writeln!(out, "I = {}", layer.in_maps);
        let _ = writeln!(out, "J = {}", layer.out_maps);
        if layer.kind != LayerKind::FullyConnected {
            let _ = writeln!(out, "M = {}", layer.out_rows);
            let _ = writeln!(out, "N = {}", layer.out_cols);
            let _ = writeln!(out, "P = {}", layer.kernel_rows);
            let _ = writeln!(out, "Q = {}", layer.kernel_cols);
            let _ = writeln!(out, "stride = {}", layer.stride);
            let _ = writeln!(out, "pad = {}", layer.pad);
        }
        match layer.activation {
            Activation::None => {}
            Activation::Relu => out.push_str("activation = \"relu\"\n"),
            Activation::LeakyRelu { slope_shift } => {
                out.push_str("activation = \"leaky_relu\"\n");
                let _ = writeln!(out, "leaky_shift = {slope_shift}");
            }
        }
        if let Some(pool) = layer.pool {
            let _ = writeln!(out, "pool_window = {}", pool.window);
            let _ = writeln!(out, "pool_stride = {}", pool.stride);
        }
    }
    out
}

pub fn parse_hardware(text: &str, path: &Path) -> Result<HardwareConfig> {
    let cfg: HardwareConfig = toml::from_str(text).map_err(|e| parse_err(path, e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_hardware(path: impl AsRef<Path>) -> Result<HardwareConfig> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_hardware(&text, path)
}

pub fn hardware_to_toml(cfg: &HardwareConfig) -> String {
    toml::to_string(cfg).expect("hardware config always serializes")
}

pub const ALEXNET_TOML: &str = include_str!("../../data/alexnet.toml");
pub const VGG16_TOML: &str = include_str!("../../data/vgg16.toml");
pub const DEFAULT_HARDWARE_TOML: &str = include_str!("../../data/hardware.toml");
