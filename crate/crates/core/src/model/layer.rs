use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Conv,
    FullyConnected,
    MaxPool,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::FullyConnected => "fc",
            LayerKind::MaxPool => "maxpool",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Activation applied by the pooling & activation unit.
///
/// The leaky slope is a power of two, `2^-slope_shift`, so the negative branch
/// is a single arithmetic right shift on the accumulator value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Activation {
    #[default]
    None,
    Relu,
    LeakyRelu {
        slope_shift: u8,
    },
}

impl Activation {
    pub const DEFAULT_LEAKY_SHIFT: u8 = 3;

    pub fn leaky() -> Self {
        Activation::LeakyRelu {
            slope_shift: Self::DEFAULT_LEAKY_SHIFT,
        }
    }

    #[inline]
    pub fn apply(self, x: i32) -> i32 {
        match self {
            Activation::None => x,
            Activation::Relu => x.max(0),
            Activation::LeakyRelu { slope_shift } => {
                if x >= 0 {
                    x
                } else {
                    x >> slope_shift
                }
            }
        }
    }
}

/// Max-pooling stage fused after a CONV layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PoolSpec {
    pub window: usize,
    pub stride: usize,
}

impl PoolSpec {
    pub fn new(window: usize, stride: usize) -> Self {
        Self { window, stride }
    }

    /// Output extent of pooling an `extent`-long axis, or `None` when the
    /// window does not tile the axis exactly.
    pub fn output_extent(&self, extent: usize) -> Option<usize> {
        if self.window == 0 || self.stride == 0 || self.window > extent {
            return None;
        }
        let span = extent - self.window;
        span.is_multiple_of(self.stride)
            .then(|| span / self.stride + 1)
    }
}

/// Shape and kind of one network layer.
///
/// Index conventions follow the CONV loop nest: `I` input maps, `J` output
/// maps, an `M x N` output map and a `P x Q` kernel. A fully-connected layer
/// is the CONV case with `M = N = P = Q = 1`; a max-pool layer uses `P x Q` as
/// its window and has `J = I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub name: String,
    pub kind: LayerKind,
    pub in_maps: usize,
    pub out_maps: usize,
    pub out_rows: usize,
    pub out_cols: usize,
    pub kernel_rows: usize,
    pub kernel_cols: usize,
    pub stride: usize,
    /// Zero padding on each spatial border of the input.
    pub pad: usize,
    pub activation: Activation,
    pub pool: Option<PoolSpec>,
}

impl LayerDescriptor {
    #[allow(clippy::too_many_arguments)]
    pub fn conv(
        name: impl Into<String>,
        in_maps: usize,
        out_maps: usize,
        out_rows: usize,
        out_cols: usize,
        kernel_rows: usize,
        kernel_cols: usize,
        stride: usize,
        pad: usize,
    ) -> Self {
        Self {
            name: name.into(),
            kind: LayerKind::Conv,
            in_maps,
            out_maps,
            out_rows,
            out_cols,
            kernel_rows,
            kernel_cols,
            stride,
            pad,
            activation: Activation::None,
            pool: None,
        }
    }

    pub fn fc(name: impl Into<String>, inputs: usize, outputs: usize) -> Self {
        Self {
            kind: LayerKind::FullyConnected,
            ..Self::conv(name, inputs, outputs, 1, 1, 1, 1, 1, 0)
        }
    }

    pub fn max_pool(
        name: impl Into<String>,
        maps: usize,
        out_rows: usize,
        out_cols: usize,
        window: usize,
        stride: usize,
    ) -> Self {
        Self {
            kind: LayerKind::MaxPool,
            ..Self::conv(
                name, maps, maps, out_rows, out_cols, window, window, stride, 0,
            )
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_pool(mut self, window: usize, stride: usize) -> Self {
        self.pool = Some(PoolSpec::new(window, stride));
        self
    }

    pub fn is_compute(&self) -> bool {
        matches!(self.kind, LayerKind::Conv | LayerKind::FullyConnected)
    }

    /// Input rows without padding: `(M-1)*S + P - 2*pad`.
    pub fn input_rows(&self) -> usize {
        (self.out_rows - 1) * self.stride + self.kernel_rows - 2 * self.pad
    }

    pub fn input_cols(&self) -> usize {
        (self.out_cols - 1) * self.stride + self.kernel_cols - 2 * self.pad
    }

    /// Dimensions `[I, H, W]` of the input volume.
    pub fn input_dims(&self) -> [usize; 3] {
        [self.in_maps, self.input_rows(), self.input_cols()]
    }

    pub fn input_elements(&self) -> usize {
        self.input_dims().iter().product()
    }

    pub fn output_dims(&self) -> [usize; 3] {
        [self.out_maps, self.out_rows, self.out_cols]
    }

    pub fn output_elements(&self) -> usize {
        self.out_maps * self.out_rows * self.out_cols
    }

    /// Output dimensions after the fused pooling stage (if any).
    pub fn pooled_dims(&self) -> [usize; 3] {
        match self.pool {
            Some(pool) => [
                self.out_maps,
                pool.output_extent(self.out_rows).unwrap_or(0),
                pool.output_extent(self.out_cols).unwrap_or(0),
            ],
            None => self.output_dims(),
        }
    }

    /// Length of one lowered (im2col) input vector: `I*P*Q`.
    pub fn lowered_len(&self) -> usize {
        self.in_maps * self.kernel_rows * self.kernel_cols
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidLayer {
                layer: self.name.clone(),
                reason,
            })
        };
        let extents = [
            ("I", self.in_maps),
            ("J", self.out_maps),
            ("M", self.out_rows),
            ("N", self.out_cols),
            ("P", self.kernel_rows),
            ("Q", self.kernel_cols),
            ("stride", self.stride),
        ];
        if let Some((key, _)) = extents.iter().find(|(_, v)| *v == 0) {
            return bad(format!("{key} must be at least 1"));
        }
        if 2 * self.pad >= self.kernel_rows.max(self.kernel_cols) && self.pad > 0 {
            return bad(format!(
                "padding {} leaves kernel taps entirely outside the input",
                self.pad
            ));
        }
        if (self.out_rows - 1) * self.stride + self.kernel_rows <= 2 * self.pad
            || (self.out_cols - 1) * self.stride + self.kernel_cols <= 2 * self.pad
        {
            return bad("padding exceeds the padded input extent".into());
        }
        match self.kind {
            LayerKind::FullyConnected => {
                let spatial = [
                    self.out_rows,
                    self.out_cols,
                    self.kernel_rows,
                    self.kernel_cols,
                    self.stride,
                ];
                if spatial.iter().any(|&v| v != 1) || self.pad != 0 {
                    return bad("fully-connected layers require M=N=P=Q=stride=1, pad=0".into());
                }
                if self.pool.is_some() {
                    return bad("fully-connected layers cannot carry a pooling stage".into());
                }
            }
            LayerKind::MaxPool => {
                if self.out_maps != self.in_maps {
                    return bad("max-pool layers require J = I".into());
                }
                if self.pad != 0 || self.pool.is_some() {
                    return bad("max-pool layers take no padding or fused pooling".into());
                }
            }
            LayerKind::Conv => {}
        }
        if let Some(pool) = self.pool {
            if pool.output_extent(self.out_rows).is_none()
                || pool.output_extent(self.out_cols).is_none()
            {
                return Err(Error::BadPooling {
                    window: pool.window,
                    stride: pool.stride,
                    rows: self.out_rows,
                    cols: self.out_cols,
                });
            }
        }
        Ok(())
    }
}
