use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accelerator configuration. Every array (SA-CONV and SA-FC) is `K x L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareConfig {
    pub sa_rows: usize,
    pub sa_cols: usize,
    /// Entries in the SPM of each accumulation sub-unit.
    pub spm_entries: usize,
    pub weight_buffer_bytes: usize,
    pub data_buffer_bytes: usize,
    pub dram_bandwidth_bytes_per_s: f64,
    pub clock_hz: f64,
    #[serde(default = "one")]
    pub bytes_per_element: usize,
}

fn one() -> usize {
    1
}

impl Default for HardwareConfig {
    /// 8x8 arrays, 256-entry SPMs, 36 KB weight buffer, 256 KB data buffer,
    /// 12.8 GB/s DRAM at 280 MHz, 8-bit words.
    fn default() -> Self {
        Self {
            sa_rows: 8,
            sa_cols: 8,
            spm_entries: 256,
            weight_buffer_bytes: 36 * 1024,
            data_buffer_bytes: 256 * 1024,
            dram_bandwidth_bytes_per_s: 12.8e9,
            clock_hz: 280e6,
            bytes_per_element: 1,
        }
    }
}

impl HardwareConfig {
    /// Default configuration with a square `size x size` array.
    pub fn with_array(size: usize) -> Self {
        Self {
            sa_rows: size,
            sa_cols: size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("sa_rows", self.sa_rows),
            ("sa_cols", self.sa_cols),
            ("spm_entries", self.spm_entries),
            ("weight_buffer_bytes", self.weight_buffer_bytes),
            ("data_buffer_bytes", self.data_buffer_bytes),
            ("bytes_per_element", self.bytes_per_element),
        ];
        if let Some((key, _)) = ints.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidHardware(format!("{key} must be positive")));
        }
        for (key, v) in [
            (
                "dram_bandwidth_bytes_per_s",
                self.dram_bandwidth_bytes_per_s,
            ),
            ("clock_hz", self.clock_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidHardware(format!("{key} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dram_bytes_per_cycle(&self) -> f64 {
        self.dram_bandwidth_bytes_per_s / self.clock_hz
    }

    /// Accumulation sub-units: one per column of both arrays.
    pub fn accumulator_banks(&self) -> usize {
        2 * self.sa_cols
    }

    pub fn weight_buffer_elements(&self) -> usize {
        self.weight_buffer_bytes / self.bytes_per_element
    }

    pub fn data_buffer_elements(&self) -> usize {
        self.data_buffer_bytes / self.bytes_per_element
    }
}
