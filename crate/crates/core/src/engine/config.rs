use crate::fpcore::{ExceptionFlags, RoundingMode};
use crate::issueq::Resource;
use crate::regfile::{PortConfig, RegfileModel};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

/// Largest broadcast lead the wakeup timing supports: a woken consumer
/// issues two cycles after the broadcast and reads one cycle later, so
/// with a larger lead it would read before the producer completes.
pub const MAX_BROADCAST_LEAD: u64 = 3;

/// Stages of the unified FMAC pipeline.
pub const FMAC_STAGES: u32 = 13;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Dedicated add, multiply, divide, FMAC, ALU and branch units.
    #[default]
    V1,
    /// Two unified FMACs; division is left to software.
    V2,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "v1" => Ok(Variant::V1),
            "v2" => Ok(Variant::V2),
            _ => Err(format!("unknown engine variant `{s}` (expected v1 or v2)")),
        }
    }
}

impl Variant {
    pub fn ports(self) -> PortConfig {
        match self {
            Variant::V1 => PortConfig::V1,
            Variant::V2 => PortConfig::V2,
        }
    }
}

/// Issue-to-completion latency of each V1 unit, in cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Latencies {
    pub add: u64,
    pub mul: u64,
    pub fmac: u64,
    pub div: u64,
    pub alu: u64,
    pub branch: u64,
}

impl Default for Latencies {
    fn default() -> Self {
        Latencies { add: 8, mul: 7, fmac: 13, div: 14, alu: 1, branch: 1 }
    }
}

/// Stage at which each operation class enters a unified FMAC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StageEntry {
    /// Fused ops and multiplies.
    pub mul: u32,
    pub add: u32,
    /// Compares, moves and branches.
    pub alu: u32,
}

impl Default for StageEntry {
    fn default() -> Self {
        StageEntry { mul: 1, add: 6, alu: 12 }
    }
}

impl StageEntry {
    pub fn for_resource(&self, r: Resource) -> u32 {
        match r {
            Resource::Mul | Resource::Mula => self.mul,
            Resource::Add => self.add,
            _ => self.alu,
        }
    }

    /// Latency of an operation entering at `stage`: it leaves after the last
    /// stage, and issue adds one cycle.
    pub fn latency(stage: u32) -> u64 {
        (FMAC_STAGES + 1 - stage) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("broadcast lead {0} exceeds {MAX_BROADCAST_LEAD}: consumers would read before their producer completes")]
    LeadTooLarge(u64),
    #[error("load broadcast lead {0} exceeds {MAX_BROADCAST_LEAD}")]
    LoadLeadTooLarge(u64),
    #[error("{unit} latency {latency} must exceed the broadcast lead {lead}")]
    LatencyNotAboveLead { unit: &'static str, latency: u64, lead: u64 },
    #[error("{unit} latency must be at least 1")]
    ZeroLatency { unit: &'static str },
    #[error("FMAC entry stage {stage} for {class} is outside 1..={FMAC_STAGES}")]
    BadStage { class: &'static str, stage: u32 },
    #[error("cycle budget must be positive")]
    ZeroBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub variant: Variant,
    pub latencies: Latencies,
    pub stage_entry: StageEntry,
    pub broadcast_lead: u64,
    pub load_broadcast_lead: u64,
    pub bmt_enabled: bool,
    pub regfile: RegfileModel,
    pub rounding: RoundingMode,
    pub flush: bool,
    pub trap_enables: ExceptionFlags,
    pub max_cycles: u64,
    /// Seed for anything randomized around a run (program generation in
    /// batch tooling). The engine itself is deterministic.
    pub seed: u64,
    /// Keep every per-cycle record in the run report.
    pub record_cycles: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            variant: Variant::V1,
            latencies: Latencies::default(),
            stage_entry: StageEntry::default(),
            broadcast_lead: 3,
            load_broadcast_lead: 3,
            bmt_enabled: true,
            regfile: RegfileModel::Reference,
            rounding: RoundingMode::NearestEven,
            flush: false,
            trap_enables: ExceptionFlags::NONE,
            max_cycles: 1_000_000,
            seed: 0,
            record_cycles: false,
        }
    }
}

impl EngineConfig {
    pub fn v1() -> Self {
        Self::default()
    }

    pub fn v2() -> Self {
        EngineConfig { variant: Variant::V2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let lead = self.broadcast_lead;
        if lead > MAX_BROADCAST_LEAD {
            return Err(ConfigError::LeadTooLarge(lead));
        }
        if self.load_broadcast_lead > MAX_BROADCAST_LEAD {
            return Err(ConfigError::LoadLeadTooLarge(self.load_broadcast_lead));
        }
        if self.max_cycles == 0 {
            return Err(ConfigError::ZeroBudget);
        }
        let l = &self.latencies;
        for (unit, latency) in [("alu", l.alu), ("branch", l.branch)] {
            if latency == 0 {
                return Err(ConfigError::ZeroLatency { unit });
            }
        }
        let arithmetic: Vec<(&'static str, u64)> = match self.variant {
            Variant::V1 => vec![("add", l.add), ("mul", l.mul), ("fmac", l.fmac), ("div", l.div)],
            Variant::V2 => {
                let e = &self.stage_entry;
                for (class, stage) in [("mul", e.mul), ("add", e.add), ("alu", e.alu)] {
                    if !(1..=FMAC_STAGES).contains(&stage) {
                        return Err(ConfigError::BadStage { class, stage });
                    }
                }
                vec![("fmac", StageEntry::latency(e.mul)), ("add", StageEntry::latency(e.add))]
            }
        };
        for (unit, latency) in arithmetic {
            if latency == 0 {
                return Err(ConfigError::ZeroLatency { unit });
            }
            if latency <= lead {
                return Err(ConfigError::LatencyNotAboveLead { unit, latency, lead });
            }
        }
        Ok(())
    }
}
