//! 32-entry issue queue in four blocks of eight, with per-block free FIFOs,
//! a Block Mapping Table gating wakeup comparisons, and a two-stage
//! oldest-first arbiter.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BLOCKS: usize = 4;
pub const BLOCK_SLOTS: usize = 8;
pub const PHYS_REGS: usize = 128;
pub const ISSUE_WIDTH: usize = 2;

/// Functional-unit request, one-hot in the payload's resource field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resource {
    Add = 0,
    Mul = 1,
    Div = 2,
    Sqrt = 3,
    Alu = 4,
    Mula = 5,
    MovToFrom = 6,
    Branch = 7,
}

impl Resource {
    pub const ALL: [Resource; 8] = [
        Resource::Add,
        Resource::Mul,
        Resource::Div,
        Resource::Sqrt,
        Resource::Alu,
        Resource::Mula,
        Resource::MovToFrom,
        Resource::Branch,
    ];

    pub fn one_hot(self) -> u8 {
        1 << self as u8
    }

    pub fn from_one_hot(v: u8) -> Option<Resource> {
        (v.count_ones() == 1).then(|| Self::ALL[v.trailing_zeros() as usize])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error("payload word {0:#x} is wider than 54 bits")]
    TooWide(u64),
    #[error("resource field {0:#010b} is not one-hot")]
    ResourceNotOneHot(u8),
}

/// Queue payload: format [53:49], sources [48:42] [41:35] [34:28],
/// destination [27:21], resource [20:13], function [12:7], ROB index [6:0].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Payload {
    pub format: u8,
    pub srcs: [u8; 3],
    pub dest: u8,
    pub resource: Resource,
    pub function: u8,
    pub dir_rob: u8,
}

impl Payload {
    pub const WIDTH: u32 = 54;

    pub fn pack(&self) -> u64 {
        debug_assert!(self.format < 32 && self.function < 64 && self.dir_rob < 128 && self.dest < 128);
        (self.format as u64) << 49
            | (self.srcs[0] as u64) << 42
            | (self.srcs[1] as u64) << 35
            | (self.srcs[2] as u64) << 28
            | (self.dest as u64) << 21
            | (self.resource.one_hot() as u64) << 13
            | (self.function as u64) << 7
            | self.dir_rob as u64
    }

    pub fn unpack(word: u64) -> Result<Payload, PayloadError> {
        if word >> Self::WIDTH != 0 {
            return Err(PayloadError::TooWide(word));
        }
        let field = |lo: u32, bits: u32| ((word >> lo) & ((1 << bits) - 1)) as u8;
        let rv = field(13, 8);
        Ok(Payload {
            format: field(49, 5),
            srcs: [field(42, 7), field(35, 7), field(28, 7)],
            dest: field(21, 7),
            resource: Resource::from_one_hot(rv).ok_or(PayloadError::ResourceNotOneHot(rv))?,
            function: field(7, 6),
            dir_rob: field(0, 7),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IqEntry {
    pub valid: bool,
    pub payload: Payload,
    /// Sources actually used (the rest are tied ready).
    pub used: u8,
    pub ready: [bool; 3],
    /// First cycle the entry may be selected once all sources are ready.
    pub eligible_at: u64,
    pub age: u64,
}

impl IqEntry {
    const EMPTY: IqEntry = IqEntry {
        valid: false,
        payload: Payload { format: 0, srcs: [0; 3], dest: 0, resource: Resource::Add, function: 0, dir_rob: 0 },
        used: 0,
        ready: [true; 3],
        eligible_at: 0,
        age: 0,
    };

    pub fn all_ready(&self) -> bool {
        self.ready.iter().all(|&r| r)
    }

    pub fn is_eligible(&self, cycle: u64) -> bool {
        self.valid && self.all_ready() && cycle >= self.eligible_at
    }
}

/// Free-slot ring of one block: eight 3-bit slot indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeFifo {
    pub slots: [u8; BLOCK_SLOTS],
    pub rd: u8,
    pub wr: u8,
    pub count: u8,
}

impl Default for FreeFifo {
    fn default() -> Self {
        FreeFifo { slots: [0, 1, 2, 3, 4, 5, 6, 7], rd: 0, wr: 0, count: BLOCK_SLOTS as u8 }
    }
}

impl FreeFifo {
    pub fn pop(&mut self) -> Option<u8> {
        if self.count == 0 {
            return None;
        }
        let s = self.slots[self.rd as usize];
        self.rd = (self.rd + 1) % BLOCK_SLOTS as u8;
        self.count -= 1;
        Some(s)
    }

    pub fn push(&mut self, slot: u8) {
        assert!((self.count as usize) < BLOCK_SLOTS, "free list overflow");
        self.slots[self.wr as usize] = slot;
        self.wr = (self.wr + 1) % BLOCK_SLOTS as u8;
        self.count += 1;
    }

    pub fn free_slots(&self) -> Vec<u8> {
        (0..self.count).map(|i| self.slots[((self.rd + i) % BLOCK_SLOTS as u8) as usize]).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Block Mapping Table: one 4-bit row per physical register naming the
/// blocks that hold a waiting consumer of that register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bmt {
    rows: Vec<u8>,
}

impl Default for Bmt {
    fn default() -> Self {
        Bmt { rows: vec![0; PHYS_REGS] }
    }
}

impl Bmt {
    pub fn row(&self, reg: u8) -> u8 {
        self.rows[reg as usize]
    }

    pub fn mark(&mut self, reg: u8, block: usize) {
        self.rows[reg as usize] |= 1 << block;
    }

    pub fn clear(&mut self, reg: u8) {
        self.rows[reg as usize] = 0;
    }

    pub fn rows(&self) -> &[u8] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("issue queue full: {active} instruction(s) but only {available} non-full block(s)")]
pub struct QueueFull {
    pub active: usize,
    pub available: usize,
}

/// Assigns up to two incoming instructions to distinct non-full blocks in
/// cyclic order starting at `cursor`. Returns the blocks and the new cursor.
pub fn round_robin_assign(
    active: usize,
    cursor: usize,
    full: [bool; BLOCKS],
) -> Result<(Vec<usize>, usize), QueueFull> {
    assert!(active <= ISSUE_WIDTH);
    let mut picks = Vec::with_capacity(active);
    let mut next = cursor;
    for step in 0..BLOCKS {
        if picks.len() == active {
            break;
        }
        let b = (cursor + step) % BLOCKS;
        if !full[b] {
            picks.push(b);
            next = (b + 1) % BLOCKS;
        }
    }
    if picks.len() < active {
        return Err(QueueFull { active, available: picks.len() });
    }
    Ok((picks, next))
}

/// How a source is seen at dispatch: ready from the given cycle, or waiting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceState {
    ReadyAt(u64),
    Waiting,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WakeupOutcome {
    pub enabled_blocks: u8,
    pub comparisons: u64,
    /// (block, slot) of entries that had a source woken.
    pub woken: Vec<(usize, usize)>,
}

/// Functional-unit availability as seen by the arbiter.
pub trait FuAvailability {
    fn is_free(&self, entry: &IqEntry) -> bool;
    fn try_claim(&mut self, entry: &IqEntry) -> bool;
}

/// Issue-slot constraint applied by the arbiter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortRule {
    /// Three-source entries only on slot 0 (slot 0 has three read ports).
    FusedOnSlotZero,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub block: usize,
    pub slot: usize,
    pub issue_slot: usize,
}

/// Queue state captured by a checkpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueueImage {
    pub fifos: [FreeFifo; BLOCKS],
    pub valid: u32,
    pub bmt: Bmt,
    pub cursor: u8,
}

#[derive(Clone, Debug)]
pub struct IssueQueue {
    entries: [[IqEntry; BLOCK_SLOTS]; BLOCKS],
    fifos: [FreeFifo; BLOCKS],
    cursor: usize,
    bmt: Bmt,
}

impl Default for IssueQueue {
    fn default() -> Self {
        IssueQueue {
            entries: [[IqEntry::EMPTY; BLOCK_SLOTS]; BLOCKS],
            fifos: [FreeFifo::default(); BLOCKS],
            cursor: 0,
            bmt: Bmt::default(),
        }
    }
}

impl IssueQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(&self, block: usize, slot: usize) -> &IqEntry {
        &self.entries[block][slot]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &IqEntry)> {
        self.entries.iter().enumerate().flat_map(|(b, blk)| blk.iter().enumerate().map(move |(s, e)| (b, s, e)))
    }

    pub fn fifo(&self, block: usize) -> &FreeFifo {
        &self.fifos[block]
    }

    pub fn bmt(&self) -> &Bmt {
        &self.bmt
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn full_blocks(&self) -> [bool; BLOCKS] {
        std::array::from_fn(|b| self.fifos[b].is_empty())
    }

    pub fn occupancy(&self) -> usize {
        self.entries().filter(|(_, _, e)| e.valid).count()
    }

    pub fn valid_mask(&self) -> u32 {
        self.entries().filter(|(_, _, e)| e.valid).fold(0, |m, (b, s, _)| m | 1 << (b * BLOCK_SLOTS + s))
    }

    /// Assigns blocks for `active` incoming instructions and advances the
    /// round-robin cursor.
    pub fn assign_blocks(&mut self, active: usize) -> Result<Vec<usize>, QueueFull> {
        let (blocks, cursor) = round_robin_assign(active, self.cursor, self.full_blocks())?;
        self.cursor = cursor;
        Ok(blocks)
    }

    /// Assigns one block, skipping those in `exclude` (already used this
    /// cycle), and advances the cursor. Two successive calls pick the same
    /// blocks as one two-instruction assignment.
    pub fn assign_one(&mut self, exclude: [bool; BLOCKS]) -> Option<usize> {
        let full = self.full_blocks();
        let blocked = std::array::from_fn(|b| full[b] || exclude[b]);
        let (blocks, cursor) = round_robin_assign(1, self.cursor, blocked).ok()?;
        self.cursor = cursor;
        Some(blocks[0])
    }

    /// Writes an instruction into `block`. `source` reports each used
    /// source's readiness; waiting sources mark the BMT. Returns the slot.
    pub fn dispatch(
        &mut self,
        payload: Payload,
        used: usize,
        block: usize,
        age: u64,
        cycle: u64,
        mut source: impl FnMut(u8) -> SourceState,
    ) -> usize {
        let slot = self.fifos[block].pop().expect("dispatch into a full block") as usize;
        let mut ready = [true; 3];
        let mut eligible_at = cycle + 1;
        for (i, r) in ready.iter_mut().enumerate().take(used) {
            let tag = payload.srcs[i];
            match source(tag) {
                SourceState::ReadyAt(c) => eligible_at = eligible_at.max(c),
                SourceState::Waiting => {
                    *r = false;
                    self.bmt.mark(tag, block);
                }
            }
        }
        self.entries[block][slot] = IqEntry { valid: true, payload, used: used as u8, ready, eligible_at, age };
        slot
    }

    /// Tag broadcast. With the BMT the row selects which blocks compare;
    /// without it every block does. The row is cleared either way.
    pub fn wakeup(&mut self, tag: u8, cycle: u64, bmt_enabled: bool, wake_delay: u64) -> WakeupOutcome {
        let row = self.bmt.row(tag);
        self.bmt.clear(tag);
        let enabled = if bmt_enabled { row } else { (1 << BLOCKS) - 1 };
        let mut out = WakeupOutcome { enabled_blocks: enabled, ..Default::default() };
        for b in (0..BLOCKS).filter(|b| enabled & 1 << b != 0) {
            for (s, e) in self.entries[b].iter_mut().enumerate() {
                if !e.valid {
                    continue;
                }
                out.comparisons += e.used as u64;
                let mut hit = false;
                for i in 0..e.used as usize {
                    if e.payload.srcs[i] == tag && !e.ready[i] {
                        e.ready[i] = true;
                        e.eligible_at = e.eligible_at.max(cycle + wake_delay);
                        hit = true;
                    }
                }
                if hit {
                    out.woken.push((b, s));
                }
            }
        }
        out
    }

    /// Two-stage arbiter: the oldest eligible entry of each block, then up
    /// to two of those in age order, each claiming its unit and a slot.
    pub fn select(&self, cycle: u64, fu: &mut impl FuAvailability, rule: PortRule) -> Vec<Selection> {
        let mut candidates: Vec<(u64, usize, usize)> = (0..BLOCKS)
            .filter_map(|b| {
                self.entries[b]
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.is_eligible(cycle) && fu.is_free(e))
                    .min_by_key(|(_, e)| e.age)
                    .map(|(s, e)| (e.age, b, s))
            })
            .collect();
        candidates.sort_unstable();

        let mut taken = [false; ISSUE_WIDTH];
        let mut picks = Vec::new();
        for (_, b, s) in candidates {
            if picks.len() == ISSUE_WIDTH {
                break;
            }
            let e = &self.entries[b][s];
            let issue_slot = match rule {
                PortRule::FusedOnSlotZero if e.used == 3 => (!taken[0]).then_some(0),
                PortRule::FusedOnSlotZero => {
                    if !taken[1] {
                        Some(1)
                    } else if !taken[0] {
                        Some(0)
                    } else {
                        None
                    }
                }
                PortRule::Any => taken.iter().position(|t| !t),
            };
            let Some(issue_slot) = issue_slot else { continue };
            if !fu.try_claim(e) {
                continue;
            }
            taken[issue_slot] = true;
            picks.push(Selection { block: b, slot: s, issue_slot });
        }
        picks.sort_by_key(|p| p.issue_slot);
        picks
    }

    /// Invalidates an issued entry and returns its slot to the free list.
    pub fn release(&mut self, block: usize, slot: usize) {
        let e = &mut self.entries[block][slot];
        assert!(e.valid, "release of an empty slot");
        e.valid = false;
        self.fifos[block].push(slot as u8);
    }

    pub fn image(&self) -> QueueImage {
        QueueImage { fifos: self.fifos, valid: self.valid_mask(), bmt: self.bmt.clone(), cursor: self.cursor as u8 }
    }

    /// Restores free lists, valid bits, BMT and cursor. Payload contents are
    /// left as they are.
    pub fn restore(&mut self, image: &QueueImage) {
        self.fifos = image.fifos;
        self.bmt = image.bmt.clone();
        self.cursor = image.cursor as usize;
        for b in 0..BLOCKS {
            for s in 0..BLOCK_SLOTS {
                self.entries[b][s].valid = image.valid & 1 << (b * BLOCK_SLOTS + s) != 0;
            }
        }
    }

    pub fn clear_bmt_row(&mut self, reg: u8) {
        self.bmt.clear(reg);
    }

    /// Free list plus valid slots cover each block's slots exactly once.
    pub fn conservation_holds(&self) -> bool {
        (0..BLOCKS).all(|b| {
            let mut seen = [0u8; BLOCK_SLOTS];
            for s in self.fifos[b].free_slots() {
                seen[s as usize] += 1;
            }
            for (s, e) in self.entries[b].iter().enumerate() {
                if e.valid {
                    seen[s] += 1;
                }
            }
            seen.iter().all(|&n| n == 1)
        })
    }

    /// Every waiting source has its BMT bit set.
    pub fn bmt_sound(&self) -> bool {
        self.entries().all(|(b, _, e)| {
            !e.valid || (0..e.used as usize).all(|i| e.ready[i] || self.bmt.row(e.payload.srcs[i]) & 1 << b != 0)
        })
    }
}
