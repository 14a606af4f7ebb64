//! Functional units: routing, occupancy and in-flight operations.

use super::config::{EngineConfig, StageEntry, Variant, FMAC_STAGES};
use crate::fpcore::{ExceptionFlags, FpBits};
use crate::isa::Opcode;
use crate::issueq::{FuAvailability, IqEntry, Resource};

pub const V1_UNITS: [&str; 6] = ["add", "mul", "div", "alu", "fmac", "branch"];
pub const V2_UNITS: [&str; 2] = ["fmac0", "fmac1"];

const V1_ADD: usize = 0;
const V1_MUL: usize = 1;
const V1_DIV: usize = 2;
const V1_ALU: usize = 3;
const V1_FMAC: usize = 4;
const V1_BRANCH: usize = 5;

pub fn resource_of(op: Opcode) -> Resource {
    use crate::isa::OpClass::*;
    match op.class() {
        AddSub => Resource::Add,
        Multiply => Resource::Mul,
        Divide => Resource::Div,
        Fused => Resource::Mula,
        Alu => Resource::Alu,
        Branch => Resource::Branch,
        Load | Store => panic!("{} does not use a functional unit", op.name()),
    }
}

/// An issued operation, from issue until it leaves its unit.
#[derive(Clone, Debug)]
pub struct FuOp {
    pub age: u64,
    pub inst: usize,
    pub op: Opcode,
    pub unit: usize,
    /// FMAC entry stage (V2); zero on V1.
    pub stage: u32,
    pub issue_slot: usize,
    pub issue: u64,
    pub enter: u64,
    pub complete: u64,
    pub broadcast: u64,
    pub dest: Option<u8>,
    pub srcs: Vec<u8>,
    pub entered: bool,
    pub result: Option<(FpBits, ExceptionFlags)>,
    /// Operand values as read on FU entry.
    pub operands: Vec<FpBits>,
}

#[derive(Clone, Debug)]
pub struct FuPool {
    variant: Variant,
    latencies: super::config::Latencies,
    stages: StageEntry,
    lead: u64,
    pub ops: Vec<FuOp>,
}

impl FuPool {
    pub fn new(config: &EngineConfig) -> FuPool {
        FuPool {
            variant: config.variant,
            latencies: config.latencies,
            stages: config.stage_entry,
            lead: config.broadcast_lead,
            ops: Vec::new(),
        }
    }

    pub fn unit_names(&self) -> &'static [&'static str] {
        match self.variant {
            Variant::V1 => &V1_UNITS,
            Variant::V2 => &V2_UNITS,
        }
    }

    /// Units that can execute `r`, in preference order.
    pub fn candidates(&self, r: Resource) -> &'static [usize] {
        match (self.variant, r) {
            (Variant::V2, _) => &[0, 1],
            (_, Resource::Add) => &[V1_ADD],
            (_, Resource::Mul) => &[V1_MUL],
            (_, Resource::Div) => &[V1_DIV],
            (_, Resource::Mula) => &[V1_FMAC],
            (_, Resource::Branch) => &[V1_BRANCH],
            _ => &[V1_ALU],
        }
    }

    pub fn latency(&self, r: Resource) -> u64 {
        match self.variant {
            Variant::V2 => StageEntry::latency(self.stages.for_resource(r)),
            Variant::V1 => match r {
                Resource::Add => self.latencies.add,
                Resource::Mul => self.latencies.mul,
                Resource::Div => self.latencies.div,
                Resource::Mula => self.latencies.fmac,
                Resource::Branch => self.latencies.branch,
                _ => self.latencies.alu,
            },
        }
    }

    /// Write port used by a unit's completions, if it writes at all.
    pub fn write_port(&self, unit: usize) -> Option<usize> {
        match self.variant {
            Variant::V1 => (unit != V1_BRANCH).then_some(unit),
            Variant::V2 => Some(unit),
        }
    }

    pub fn load_write_port(&self) -> usize {
        match self.variant {
            Variant::V1 => 5,
            Variant::V2 => 2,
        }
    }

    /// Whether `unit` can accept an op of resource `r` entering at `enter`,
    /// ignoring claims made in the current cycle.
    fn accepts(&self, unit: usize, r: Resource, enter: u64) -> bool {
        match self.variant {
            Variant::V1 if unit == V1_DIV => self.ops.iter().filter(|o| o.unit == V1_DIV).all(|o| o.complete <= enter),
            Variant::V1 => true,
            Variant::V2 => {
                let stage = self.stages.for_resource(r);
                self.ops.iter().filter(|o| o.unit == unit && o.enter <= enter).all(|o| {
                    let at = o.stage as u64 + (enter - o.enter);
                    at > FMAC_STAGES as u64 || at != stage as u64
                })
            }
        }
    }

    /// Creates the in-flight record for an op issued at `cycle`.
    #[allow(clippy::too_many_arguments)]
    pub fn issue(
        &mut self,
        age: u64,
        inst: usize,
        op: Opcode,
        unit: usize,
        issue_slot: usize,
        cycle: u64,
        dest: Option<u8>,
        srcs: Vec<u8>,
    ) -> &FuOp {
        let r = resource_of(op);
        let latency = self.latency(r);
        let complete = cycle + latency;
        let stage = match self.variant {
            Variant::V1 => 0,
            Variant::V2 => self.stages.for_resource(r),
        };
        self.ops.push(FuOp {
            age,
            inst,
            op,
            unit,
            stage,
            issue_slot,
            issue: cycle,
            enter: cycle + 1,
            complete,
            broadcast: complete.saturating_sub(self.lead).max(cycle + 1),
            dest,
            srcs,
            entered: false,
            result: None,
            operands: Vec::new(),
        });
        self.ops.last().unwrap()
    }

    /// Units holding at least one op that has entered and not yet left.
    pub fn busy_units(&self, cycle: u64) -> Vec<usize> {
        let mut units: Vec<usize> =
            self.ops.iter().filter(|o| o.enter <= cycle && cycle <= o.complete).map(|o| o.unit).collect();
        units.sort_unstable();
        units.dedup();
        units
    }

    pub fn squash_younger(&mut self, age: u64) {
        self.ops.retain(|o| o.age <= age);
    }
}

/// Per-cycle view used by the arbiter: ops it picks enter at `cycle + 1`,
/// and each unit accepts at most one new op per cycle.
pub struct IssueView<'a> {
    pool: &'a FuPool,
    enter: u64,
    claimed: Vec<bool>,
    /// (age, unit) of every successful claim, in claim order.
    pub claims: Vec<(u64, usize)>,
}

impl<'a> IssueView<'a> {
    pub fn new(pool: &'a FuPool, cycle: u64) -> Self {
        IssueView { pool, enter: cycle + 1, claimed: vec![false; pool.unit_names().len()], claims: Vec::new() }
    }

    fn free_unit(&self, e: &IqEntry) -> Option<usize> {
        let r = e.payload.resource;
        self.pool.candidates(r).iter().copied().find(|&u| !self.claimed[u] && self.pool.accepts(u, r, self.enter))
    }

    pub fn unit_for(&self, age: u64) -> usize {
        self.claims.iter().find(|(a, _)| *a == age).expect("selected entry without a claim").1
    }
}

impl FuAvailability for IssueView<'_> {
    fn is_free(&self, e: &IqEntry) -> bool {
        self.free_unit(e).is_some()
    }

    fn try_claim(&mut self, e: &IqEntry) -> bool {
        match self.free_unit(e) {
            Some(u) => {
                self.claimed[u] = true;
                self.claims.push((e.age, u));
                true
            }
            None => false,
        }
    }
}
