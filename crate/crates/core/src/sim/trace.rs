//! Per-cycle array traces and their text dump.
//!
//! Dump format, one line per cycle per array:
//!
//! ```text
//! cycle=<n> array=<sa-conv|sa-fc> fired=<count>[ (<row>,<col>):<act>*<weight>+<psum_in>=<psum_out>]...
//! ```
//!
//! PEs are listed in row-major order. Only PEs holding a valid operand of the
//! mapped tile are listed.

use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    SaConv,
    SaFc,
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArrayKind::SaConv => "sa-conv",
            ArrayKind::SaFc => "sa-fc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeFire {
    pub row: usize,
    pub col: usize,
    pub activation: i8,
    pub weight: i8,
    pub partial_in: i32,
    pub partial_out: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub fires: Vec<PeFire>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayTrace {
    pub array: ArrayKind,
    pub cycles: Vec<CycleRecord>,
}

impl ArrayTrace {
    pub fn new(array: ArrayKind) -> Self {
        Self {
            array,
            cycles: Vec::new(),
        }
    }

    /// Renders the trace, offsetting cycle numbers by `base_cycle`.
    pub fn dump(&self, base_cycle: usize) -> String {
        let mut out = String::new();
        for rec in &self.cycles {
            let _ = write!(
                out,
                "cycle={} array={} fired={}",
                base_cycle + rec.cycle,
                self.array,
                rec.fires.len()
            );
            for f in &rec.fires {
                let _ = write!(
                    out,
                    " ({},{}):{}*{}+{}={}",
                    f.row, f.col, f.activation, f.weight, f.partial_in, f.partial_out
                );
            }
            out.push('\n');
        }
        out
    }

    pub fn fired_count(&self) -> usize {
        self.cycles.iter().map(|c| c.fires.len()).sum()
    }
}
