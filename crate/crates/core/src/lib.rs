//! Model of a CNN accelerator built from two systolic arrays.
//!
//! SA-CONV keeps a weight tile stationary and streams lowered input vectors
//! through it. SA-FC feeds every PE its own weight each cycle, so a fully
//! connected layer never waits for a tile to load. Around the arrays sit an
//! accumulation unit with per-column scratch-pad banks and on-chip buffers for
//! activations and weights. The crate covers:
//!
//! * [`model`]: layer, network and hardware descriptions, the built-in
//!   AlexNet and VGG-16 tables, MAC and reuse counts, and the TOML formats.
//! * [`planner`]: picks one of four dataflow cases per layer and the tiling
//!   that minimises DRAM traffic.
//! * [`sim`]: cycle-level arrays executing a plan on 8-bit data, checked
//!   against direct loop-nest references.
//! * [`timing`]: closed-form cycle counts for the conventional and the dual
//!   array designs, plus array-size sweeps.
//! * [`metrics`]: energy from access counts, throughput and comparisons.
//! * [`cli`]: the `mpna` command-line tool.
//!
//! The `examples/` directory is the quickest way in:
//!
//! | example | shows |
//! |---|---|
//! | `analyze_networks` | MAC, weight and reuse statistics |
//! | `plan_dataflow` | dataflow case, tiling and traffic per layer |
//! | `functional_sim` | cycle-level run of a scaled AlexNet with an exactness check |
//! | `timing_sweep` | speedup against array size |
//! | `energy_report` | relative energy and coefficient sensitivity |
//! | `trace_dump` | per-cycle PE activity of both arrays |
//! | `custom_network` | a user-written network file on a smaller accelerator |

pub mod cli;
pub mod error;
pub mod metrics;
pub mod model;
pub mod planner;
pub mod report;
pub mod sim;
pub mod tensor;
pub mod timing;

pub use error::{Error, Result};
