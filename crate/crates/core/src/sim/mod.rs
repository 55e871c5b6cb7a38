//! Functional simulation: cycle-level arrays, accumulation, pooling and
//! activation, plus direct loop-nest oracles to check them against.

pub mod accum;
pub mod array;
pub mod network;
pub mod oracle;
pub mod postproc;
pub mod trace;

pub use accum::AccumulatorBank;
pub use array::{run_sa_conv, run_sa_fc, ArrayRun, PeState, WeightTile};
pub use network::{
    execute_layer, random_input, random_weights, simulate_and_check, simulate_network,
    DramTransfer, LayerStatsSim, SimOutcome, TransferKind, TransferLog,
};
pub use oracle::{oracle_conv, oracle_network};
pub use postproc::{activate_then_pool, pool_activate};
pub use trace::{ArrayKind, ArrayTrace, CycleRecord, PeFire};
