//! Per-cycle event records, serializable as JSON lines.

use crate::fpcore::FpBits;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchEvent {
    pub inst: usize,
    pub dir_rob: u8,
    /// (block, slot) for queued instructions.
    pub queue_slot: Option<(usize, usize)>,
    pub wrong_path: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastEvent {
    pub tag: u8,
    pub enabled_blocks: u8,
    pub comparisons: u64,
    pub woken: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueEvent {
    pub inst: usize,
    pub dir_rob: u8,
    pub block: usize,
    pub slot: usize,
    pub issue_slot: usize,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionEvent {
    pub inst: usize,
    pub dir_rob: u8,
    pub tag: Option<u8>,
    pub value: Option<FpBits>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitEvent {
    pub inst: usize,
    pub dir_rob: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollbackEvent {
    pub branch: usize,
    pub restored_from: u64,
    pub squashed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub completions: Vec<CompletionEvent>,
    pub broadcasts: Vec<BroadcastEvent>,
    pub issues: Vec<IssueEvent>,
    /// Operand reads satisfied from the bypass bus.
    pub bypassed: u64,
    pub dispatches: Vec<DispatchEvent>,
    pub commits: Vec<CommitEvent>,
    pub rollback: Option<RollbackEvent>,
    pub comparisons: u64,
}

impl CycleRecord {
    pub fn new(cycle: u64) -> Self {
        CycleRecord { cycle, ..Default::default() }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("cycle record serializes")
    }

    /// Whether anything happened this cycle.
    pub fn is_active(&self) -> bool {
        !(self.completions.is_empty()
            && self.broadcasts.is_empty()
            && self.issues.is_empty()
            && self.dispatches.is_empty()
            && self.commits.is_empty()
            && self.rollback.is_none())
    }
}
