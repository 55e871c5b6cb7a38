use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation `{op}` is not applicable to {kind} layers")]
    NotApplicable {
        op: &'static str,
        kind: &'static str,
    },

    #[error("invalid layer `{layer}`: {reason}")]
    InvalidLayer { layer: String, reason: String },

    #[error("network `{network}` is not shape-compatible between `{from}` and `{to}`: {reason}")]
    IncompatibleLayers {
        network: String,
        from: String,
        to: String,
        reason: String,
    },

    #[error("invalid hardware configuration: {0}")]
    InvalidHardware(String),

    #[error("invalid energy cost table: {0}")]
    InvalidCosts(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("tile of {rows}x{cols} exceeds the {max_rows}x{max_cols} array")]
    TileTooLarge {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("weight stream underrun: {needed} tiles scheduled, {available} delivered")]
    StreamUnderrun { needed: usize, available: usize },

    #[error(
        "accumulator address {address} out of range for SPM of {entries} entries (bank {bank})"
    )]
    SpmOverflow {
        bank: usize,
        address: usize,
        entries: usize,
    },

    #[error("bank {bank} out of range ({banks} banks)")]
    NoSuchBank { bank: usize, banks: usize },

    #[error(
        "pooling window {window}x{window} (stride {stride}) does not tile a {rows}x{cols} map"
    )]
    BadPooling {
        window: usize,
        stride: usize,
        rows: usize,
        cols: usize,
    },

    #[error("no tiling of layer `{layer}` satisfies the buffer constraints: {reason}")]
    Infeasible { layer: String, reason: String },

    #[error("unknown builtin network `{0}`")]
    UnknownNetwork(String),

    #[error("oracle mismatch in layer `{layer}` at flat index {index}: simulated {simulated}, oracle {oracle}")]
    OracleMismatch {
        layer: String,
        index: usize,
        simulated: i64,
        oracle: i64,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
