//! Layer, network and hardware descriptions plus analytic statistics.

mod analysis;
pub mod builtin;
pub mod format;
mod hardware;
mod layer;
mod network;

pub use analysis::{
    mac_count, network_totals, reuse_profile, weight_count, NetworkTotals, ReuseProfile,
};
pub use builtin::{builtin, builtin_networks};
pub use hardware::HardwareConfig;
pub use layer::{Activation, LayerDescriptor, LayerKind, PoolSpec};
pub use network::NetworkDescriptor;
