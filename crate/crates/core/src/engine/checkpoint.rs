//! Per-cycle checkpoints of the speculative scheduling state, plus a journal
//! of later changes so a rollback can re-apply the ones made by older
//! instructions.

use crate::issueq::QueueImage;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const CHECKPOINT_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub cycle: u64,
    pub ready: u128,
    pub queue: QueueImage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JournalKind {
    Release { block: usize, slot: usize },
    BmtClear { reg: u8 },
    ReadySet { reg: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalEvent {
    pub cycle: u64,
    /// Age of the instruction that caused the change.
    pub age: u64,
    pub kind: JournalKind,
}

#[derive(Clone, Debug, Default)]
pub struct CheckpointRing {
    ring: VecDeque<Checkpoint>,
    journal: Vec<JournalEvent>,
}

impl CheckpointRing {
    pub fn push(&mut self, cp: Checkpoint) {
        if self.ring.len() == CHECKPOINT_DEPTH {
            self.ring.pop_front();
        }
        self.ring.push_back(cp);
        let oldest = self.ring.front().unwrap().cycle;
        self.journal.retain(|e| e.cycle > oldest);
    }

    pub fn record(&mut self, cycle: u64, age: u64, kind: JournalKind) {
        self.journal.push(JournalEvent { cycle, age, kind });
    }

    pub fn find(&self, cycle: u64) -> Option<&Checkpoint> {
        self.ring.iter().find(|c| c.cycle == cycle)
    }

    /// Events after `cycle` caused by instructions no younger than `age`.
    pub fn replay(&self, cycle: u64, age: u64) -> impl Iterator<Item = &JournalEvent> {
        self.journal.iter().filter(move |e| e.cycle > cycle && e.age <= age)
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }
}
