//! Energy, throughput and comparison figures built from plans and timings.
//!
//! Energy is relative: access counts per memory level times a per-access
//! cost, plus MACs times a per-MAC cost. The baseline design is a single
//! conventional systolic array with naive streaming, where every MAC fetches
//! its input and weight from DRAM and writes its partial sum back.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mac_count, HardwareConfig, LayerKind, NetworkDescriptor};
use crate::planner::{naive_traffic, plan_network, DataflowPlan, OnChipAccesses, Traffic};
use crate::timing::{time_conventional, time_mpna, Bound, LayerTiming};

/// Relative cost of one access at each level and of one MAC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCostTable {
    pub dram: f64,
    pub data_buffer: f64,
    pub weight_buffer: f64,
    pub spm: f64,
    pub mac: f64,
}

impl Default for EnergyCostTable {
    fn default() -> Self {
        Self {
            dram: 200.0,
            data_buffer: 6.0,
            weight_buffer: 6.0,
            spm: 2.0,
            mac: 1.0,
        }
    }
}

impl EnergyCostTable {
    pub const COEFFICIENTS: [&'static str; 5] =
        ["dram", "data_buffer", "weight_buffer", "spm", "mac"];

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.dram,
            self.data_buffer,
            self.weight_buffer,
            self.spm,
            self.mac,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCosts("costs must be finite".into()));
        }
        let buffer_max = self.data_buffer.max(self.weight_buffer);
        let buffer_min = self.data_buffer.min(self.weight_buffer);
        if !(self.dram > buffer_max && buffer_min > self.spm && self.spm > 0.0) {
            return Err(Error::InvalidCosts(format!(
                "need dram > buffers > spm > 0, got dram={} data_buffer={} weight_buffer={} spm={}",
                self.dram, self.data_buffer, self.weight_buffer, self.spm
            )));
        }
        if self.mac <= 0.0 {
            return Err(Error::InvalidCosts("mac cost must be positive".into()));
        }
        Ok(())
    }

    /// Copy with one named coefficient multiplied by `factor`.
    pub fn scaled(&self, coefficient: &str, factor: f64) -> Result<Self> {
        let mut t = *self;
        let slot = match coefficient {
            "dram" => &mut t.dram,
            "data_buffer" => &mut t.data_buffer,
            "weight_buffer" => &mut t.weight_buffer,
            "spm" => &mut t.spm,
            "mac" => &mut t.mac,
            other => {
                return Err(Error::InvalidCosts(format!(
                    "unknown coefficient `{other}`"
                )))
            }
        };
        *slot *= factor;
        Ok(t)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::model::format::read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("cost table serializes")
    }
}

/// `sum(level accesses * level cost) + MACs * MAC cost`.
pub fn energy(traffic: &Traffic, macs: u64, costs: &EnergyCostTable) -> f64 {
    let o = &traffic.onchip;
    traffic.dram_total() as f64 * costs.dram
        + o.data_buffer as f64 * costs.data_buffer
        + o.weight_buffer as f64 * costs.weight_buffer
        + o.spm as f64 * costs.spm
        + macs as f64 * costs.mac
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub name: String,
    pub kind: LayerKind,
    pub case: Option<u8>,
    pub bound: Option<Bound>,
    pub cycles: u64,
    pub macs: u64,
    pub traffic: Traffic,
    pub energy: f64,
    pub utilization: f64,
}

/// Cycles, traffic and energy per compute layer and in total.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub design: String,
    pub network: String,
    pub clock_hz: f64,
    pub bytes_per_element: usize,
    pub layers: Vec<LayerReport>,
}

impl SimReport {
    pub fn cycles(&self) -> u64 {
        self.layers.iter().map(|l| l.cycles).sum()
    }

    pub fn macs(&self) -> u64 {
        self.layers.iter().map(|l| l.macs).sum()
    }

    pub fn traffic(&self) -> Traffic {
        self.layers
            .iter()
            .fold(Traffic::default(), |acc, l| acc + l.traffic)
    }

    pub fn energy(&self) -> f64 {
        self.layers.iter().map(|l| l.energy).sum()
    }

    pub fn seconds(&self) -> f64 {
        seconds(self.cycles(), self.clock_hz)
    }

    pub fn gops(&self) -> f64 {
        gops(self.macs(), self.seconds())
    }

    pub fn dram_bytes(&self) -> u64 {
        self.traffic().dram_total() * self.bytes_per_element as u64
    }

    /// Total MACs over the MAC slots the cycles could have used.
    pub fn utilization(&self, cfg: &HardwareConfig) -> f64 {
        let slots = self.cycles() as f64 * (cfg.sa_rows * cfg.sa_cols) as f64;
        if slots == 0.0 {
            0.0
        } else {
            self.macs() as f64 / slots
        }
    }

    /// Keeps only the layers of one kind.
    pub fn filtered(&self, kind: LayerKind) -> SimReport {
        SimReport {
            layers: self
                .layers
                .iter()
                .filter(|l| l.kind == kind)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

pub fn seconds(cycles: u64, clock_hz: f64) -> f64 {
    cycles as f64 / clock_hz
}

/// Giga-operations per second counting a MAC as two operations.
pub fn gops(macs: u64, seconds: f64) -> f64 {
    if seconds == 0.0 {
        0.0
    } else {
        2.0 * macs as f64 / seconds / 1e9
    }
}

fn layer_report(
    layer: &crate::model::LayerDescriptor,
    plan: &DataflowPlan,
    traffic: Traffic,
    timing: LayerTiming,
    costs: &EnergyCostTable,
) -> Result<LayerReport> {
    let macs = mac_count(layer)?;
    Ok(LayerReport {
        name: layer.name.clone(),
        kind: layer.kind,
        case: Some(plan.case.id()),
        bound: Some(timing.bound),
        cycles: timing.total_cycles,
        macs,
        traffic,
        energy: energy(&traffic, macs, costs),
        utilization: timing.utilization,
    })
}

/// MPNA: planned dataflow, CONV on both arrays and FC on SA-FC.
pub fn mpna_report(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    costs: &EnergyCostTable,
) -> Result<SimReport> {
    costs.validate()?;
    let plans = plan_network(net, cfg)?;
    let mut layers = Vec::new();
    for (layer, plan) in net.layers.iter().zip(&plans) {
        if let Some(plan) = plan {
            let timing = time_mpna(layer, cfg, plan);
            layers.push(layer_report(layer, plan, plan.traffic, timing, costs)?);
        }
    }
    Ok(SimReport {
        design: "mpna".into(),
        network: net.name.clone(),
        clock_hz: cfg.clock_hz,
        bytes_per_element: cfg.bytes_per_element,
        layers,
    })
}

/// Conventional single SA-CONV running the same tile schedule, with its
/// DRAM traffic from naive streaming.
pub fn baseline_report(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    costs: &EnergyCostTable,
) -> Result<SimReport> {
    costs.validate()?;
    let plans = plan_network(net, cfg)?;
    let mut layers = Vec::new();
    for (layer, plan) in net.layers.iter().zip(&plans) {
        if let Some(plan) = plan {
            let naive = DataflowPlan {
                traffic: naive_traffic(layer)?,
                ..plan.clone()
            };
            let timing = time_conventional(layer, cfg, &naive);
            layers.push(layer_report(layer, &naive, naive.traffic, timing, costs)?);
        }
    }
    Ok(SimReport {
        design: "baseline".into(),
        network: net.name.clone(),
        clock_hz: cfg.clock_hz,
        bytes_per_element: cfg.bytes_per_element,
        layers,
    })
}

/// Conventional single SA-CONV with the planned dataflow.
pub fn conventional_report(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    costs: &EnergyCostTable,
) -> Result<SimReport> {
    costs.validate()?;
    let plans = plan_network(net, cfg)?;
    let mut layers = Vec::new();
    for (layer, plan) in net.layers.iter().zip(&plans) {
        if let Some(plan) = plan {
            let timing = time_conventional(layer, cfg, plan);
            layers.push(layer_report(layer, plan, plan.traffic, timing, costs)?);
        }
    }
    Ok(SimReport {
        design: "conventional".into(),
        network: net.name.clone(),
        clock_hz: cfg.clock_hz,
        bytes_per_element: cfg.bytes_per_element,
        layers,
    })
}

/// Ratios `a / b` of the headline totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub cycles: f64,
    pub dram: f64,
    pub onchip: f64,
    pub energy: f64,
}

impl Comparison {
    /// `b`'s cycles over `a`'s: how much faster `a` is.
    pub fn speedup(&self) -> f64 {
        1.0 / self.cycles
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

pub fn compare(a: &SimReport, b: &SimReport) -> Comparison {
    let (ta, tb) = (a.traffic(), b.traffic());
    let onchip = |o: OnChipAccesses| o.total() as f64;
    Comparison {
        cycles: ratio(a.cycles() as f64, b.cycles() as f64),
        dram: ratio(ta.dram_total() as f64, tb.dram_total() as f64),
        onchip: ratio(onchip(ta.onchip), onchip(tb.onchip)),
        energy: ratio(a.energy(), b.energy()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub coefficient: &'static str,
    pub factor: f64,
    pub mpna_energy: f64,
    pub baseline_energy: f64,
}

impl SensitivityRow {
    pub fn ratio(&self) -> f64 {
        self.mpna_energy / self.baseline_energy
    }

    pub fn savings(&self) -> f64 {
        1.0 - self.ratio()
    }
}

/// Re-prices both designs with each coefficient halved and doubled in turn.
/// The first row is the unscaled table.
pub fn energy_sensitivity(
    net: &NetworkDescriptor,
    cfg: &HardwareConfig,
    costs: &EnergyCostTable,
) -> Result<Vec<SensitivityRow>> {
    let mpna = mpna_report(net, cfg, costs)?;
    let base = baseline_report(net, cfg, costs)?;
    let price = |report: &SimReport, table: &EnergyCostTable| -> f64 {
        report
            .layers
            .iter()
            .map(|l| energy(&l.traffic, l.macs, table))
            .sum()
    };
    let mut rows = vec![SensitivityRow {
        coefficient: "none",
        factor: 1.0,
        mpna_energy: price(&mpna, costs),
        baseline_energy: price(&base, costs),
    }];
    for coefficient in EnergyCostTable::COEFFICIENTS {
        for factor in [0.5, 2.0] {
            let table = costs.scaled(coefficient, factor)?;
            rows.push(SensitivityRow {
                coefficient,
                factor,
                mpna_energy: price(&mpna, &table),
                baseline_energy: price(&base, &table),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;

    #[test]
    fn no_work_costs_nothing() {
        assert_eq!(
            energy(&Traffic::default(), 0, &EnergyCostTable::default()),
            0.0
        );
    }

    #[test]
    fn energy_is_linear() {
        let t = Traffic {
            dram_in_act: 3,
            dram_out_act: 1,
            dram_weights: 2,
            onchip: OnChipAccesses {
                data_buffer: 5,
                weight_buffer: 7,
                spm: 11,
            },
        };
        let c = EnergyCostTable::default();
        let e = energy(&t, 13, &c);
        assert_eq!(e, 6.0 * 200.0 + 12.0 * 6.0 + 11.0 * 2.0 + 13.0);
        assert_eq!(energy(&t.scaled(2), 26, &c), 2.0 * e);
    }

    #[test]
    fn cost_table_ordering_is_enforced() {
        assert!(EnergyCostTable::default().validate().is_ok());
        let bad = EnergyCostTable {
            spm: 10.0,
            ..EnergyCostTable::default()
        };
        assert!(bad.validate().is_err());
        let bad = EnergyCostTable {
            mac: 0.0,
            ..EnergyCostTable::default()
        };
        assert!(bad.validate().is_err());
        assert!(EnergyCostTable::default().scaled("leakage", 2.0).is_err());
    }

    #[test]
    fn cost_table_round_trips() {
        let c = EnergyCostTable::default();
        assert_eq!(
            EnergyCostTable::parse(&c.to_toml(), Path::new("x")).unwrap(),
            c
        );
        assert!(EnergyCostTable::parse("dram = 1.0", Path::new("x")).is_err());
    }

    #[test]
    fn self_comparison_is_identity() {
        let cfg = HardwareConfig::default();
        let r = mpna_report(&builtin::alexnet_mini(), &cfg, &EnergyCostTable::default()).unwrap();
        let c = compare(&r, &r);
        assert_eq!((c.cycles, c.dram, c.onchip, c.energy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn gops_times_seconds_is_twice_macs() {
        let cfg = HardwareConfig::default();
        let r = mpna_report(&builtin::alexnet(), &cfg, &EnergyCostTable::default()).unwrap();
        let lhs = r.gops() * 1e9 * r.seconds();
        let rhs = 2.0 * r.macs() as f64;
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}
