//! Cycle-level engine. Each cycle runs, in order: unit completions, load
//! writes, tag broadcasts with wakeup, select and issue, operand read and
//! unit entry, dispatch, commit (with rollback at a mispredicted branch),
//! and a checkpoint of the scheduling state.

pub mod checkpoint;
pub mod config;
pub mod fu;
pub mod log;

pub use config::{ConfigError, EngineConfig, Latencies, StageEntry, Variant};

use crate::fpcore::{ExceptionFlags, FpBits};
use crate::isa::{Fcsr, Instruction, IsaError, OpClass, Opcode, Program, LOGICAL_REGS};
use crate::issueq::{IssueQueue, Payload, PortRule, QueueImage, SourceState, BLOCKS, PHYS_REGS};
use crate::regfile::{ReadyBitVector, Regfile, RegisterFile};
use crate::stats::{self, Capture, Counters, InstTiming, Outcome, RunContext, RunReport};
use checkpoint::{Checkpoint, CheckpointRing, JournalKind};
use fu::{resource_of, FuOp, FuPool, IssueView};
use log::{BroadcastEvent, CommitEvent, CompletionEvent, CycleRecord, DispatchEvent, IssueEvent, RollbackEvent};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

pub const ROB_CAPACITY: usize = 128;
pub const DISPATCH_WIDTH: usize = 2;
pub const COMMIT_WIDTH: usize = 2;
/// A consumer woken by a broadcast at cycle b may issue at b + 2.
pub const WAKE_DELAY: u64 = 2;
/// Idle cycles, with nothing in flight, after which the run is declared
/// deadlocked.
pub const DEADLOCK_WINDOW: u64 = 200;
const FIRST_SPARE: u8 = LOGICAL_REGS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid program: {0}")]
    Program(#[from] IsaError),
    #[error("deadlock at cycle {cycle}: {diagnosis}")]
    Deadlock { cycle: u64, diagnosis: String },
    #[error("cycle budget of {0} exhausted")]
    BudgetExceeded(u64),
    #[error("checkpoint for cycle {cycle} was evicted before its branch resolved")]
    CheckpointEvicted { cycle: u64 },
}

#[derive(Clone, Debug)]
struct RobEntry {
    age: u64,
    inst: usize,
    op: Opcode,
    dir_rob: u8,
    dispatch_cycle: u64,
    dest: Option<u8>,
    srcs: Vec<u8>,
    reads_done: bool,
    executed: bool,
    flags: ExceptionFlags,
    unimplemented: bool,
    wrong_path: bool,
    mispredict: bool,
}

#[derive(Clone, Debug)]
struct PendingLoad {
    age: u64,
    inst: usize,
    reg: u8,
    value: FpBits,
    complete: u64,
    broadcast: u64,
}

/// Scheduling state covered by checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulerState {
    pub ready: u128,
    pub queue: QueueImage,
}

pub struct Engine {
    config: EngineConfig,
    program: Program,
    cycle: u64,
    fcsr: Fcsr,
    regfile: Regfile,
    ready: ReadyBitVector,
    /// Cycle of the last broadcast for a tag whose value is not yet written.
    pending_broadcast: [Option<u64>; PHYS_REGS],
    queue: IssueQueue,
    pool: FuPool,
    loads: Vec<PendingLoad>,
    load_port_claims: BTreeSet<u64>,
    rob: VecDeque<RobEntry>,
    bus: Vec<(u8, FpBits)>,
    /// (age, tag) of producers that completed this cycle before their
    /// broadcast phase, as happens with a zero lead.
    late_broadcasts: Vec<(u64, u8)>,
    next_inst: usize,
    next_age: u64,
    /// Age of an unresolved mispredicted branch.
    mispredict_pending: Option<u64>,
    /// Wrong-path renaming of logical registers onto spare tags.
    spec_map: [Option<u8>; LOGICAL_REGS as usize],
    next_spare: u8,
    checkpoints: CheckpointRing,
    counters: Counters,
    timeline: Vec<InstTiming>,
    stores: Vec<Capture>,
    idle: u64,
    /// Units that held an op at some point this cycle.
    busy: Vec<bool>,
    halted: Option<Outcome>,
}

impl Engine {
    pub fn new(config: EngineConfig, program: &Program) -> Result<Engine, EngineError> {
        config.validate()?;
        program.validate()?;
        let pool = FuPool::new(&config);
        let timeline = program
            .instructions
            .iter()
            .enumerate()
            .map(|(i, inst)| InstTiming { inst: i, text: inst.to_string(), ..Default::default() })
            .collect();
        let units = pool.unit_names().len();
        let counters = Counters { fu_busy: vec![0; units], ..Default::default() };
        Ok(Engine {
            fcsr: Fcsr::new(config.rounding, config.flush, config.trap_enables),
            regfile: Regfile::new(config.regfile, config.variant.ports()),
            ready: ReadyBitVector::default(),
            pending_broadcast: [None; PHYS_REGS],
            queue: IssueQueue::new(),
            pool,
            loads: Vec::new(),
            load_port_claims: BTreeSet::new(),
            rob: VecDeque::with_capacity(ROB_CAPACITY),
            bus: Vec::new(),
            late_broadcasts: Vec::new(),
            next_inst: 0,
            next_age: 0,
            mispredict_pending: None,
            spec_map: [None; LOGICAL_REGS as usize],
            next_spare: FIRST_SPARE,
            checkpoints: CheckpointRing::default(),
            counters,
            timeline,
            stores: Vec::new(),
            idle: 0,
            busy: vec![false; units],
            halted: None,
            cycle: 0,
            program: program.clone(),
            config,
        })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn fcsr(&self) -> Fcsr {
        self.fcsr
    }

    pub fn queue(&self) -> &IssueQueue {
        &self.queue
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn stores(&self) -> &[Capture] {
        &self.stores
    }

    pub fn rob_len(&self) -> usize {
        self.rob.len()
    }

    /// Current value of a physical register.
    pub fn register(&self, reg: u8) -> FpBits {
        self.regfile.read(0, reg)
    }

    pub fn scheduler_state(&self) -> SchedulerState {
        SchedulerState { ready: self.ready.snapshot(), queue: self.queue.image() }
    }

    pub fn is_finished(&self) -> bool {
        self.halted.is_some() || (self.next_inst >= self.program.instructions.len() && self.rob.is_empty())
    }

    /// Advances one cycle.
    pub fn step(&mut self) -> Result<CycleRecord, EngineError> {
        let c = self.cycle;
        let mut rec = CycleRecord::new(c);
        let mut entered = false;
        if !self.is_finished() {
            self.bus.clear();
            self.late_broadcasts.clear();
            self.complete_ops(c, &mut rec);
            self.write_loads(c, &mut rec);
            self.broadcast(c, &mut rec);
            self.select_issue(c, &mut rec);
            entered = self.enter_units(c, &mut rec);
            self.dispatch(c, &mut rec);
            self.commit(c, &mut rec)?;
            self.sample(c);
        }
        self.checkpoints.push(Checkpoint { cycle: c, ready: self.ready.snapshot(), queue: self.queue.image() });
        self.cycle += 1;

        if rec.is_active() || entered || self.is_finished() {
            self.idle = 0;
        } else {
            self.idle += 1;
            if self.idle >= DEADLOCK_WINDOW && self.pool.ops.is_empty() && self.loads.is_empty() {
                return Err(EngineError::Deadlock { cycle: c, diagnosis: self.diagnose() });
            }
        }
        Ok(rec)
    }

    /// Steps until the program finishes or traps.
    pub fn run(&mut self) -> Result<RunReport, EngineError> {
        let mut log = Vec::new();
        while !self.is_finished() {
            if self.cycle >= self.config.max_cycles {
                return Err(EngineError::BudgetExceeded(self.config.max_cycles));
            }
            let rec = self.step()?;
            if self.config.record_cycles {
                log.push(rec);
            }
        }
        Ok(self.report(log))
    }

    pub fn report(&self, cycle_log: Vec<CycleRecord>) -> RunReport {
        let ctx = RunContext {
            variant: format!("{:?}", self.config.variant).to_lowercase(),
            bmt_enabled: self.config.bmt_enabled,
            regfile: self.config.regfile.name().to_string(),
            unit_names: self.pool.unit_names().iter().map(|s| s.to_string()).collect(),
        };
        stats::finalize(
            ctx,
            &self.counters,
            self.cycle,
            self.stores.clone(),
            self.fcsr.bits(),
            self.fcsr.flags,
            self.timeline.clone(),
            self.halted.clone().unwrap_or(Outcome::Completed),
            cycle_log,
        )
    }

    fn diagnose(&self) -> String {
        match self.rob.front() {
            None => format!("nothing in flight, next instruction {} cannot dispatch", self.next_inst),
            Some(head) => {
                let waiting: Vec<String> =
                    head.srcs.iter().filter(|&&t| !self.ready.get(t)).map(|t| format!("tag {t}")).collect();
                format!(
                    "oldest instruction {} `{}` is not executed; waiting on [{}]",
                    head.inst,
                    self.program.instructions[head.inst],
                    waiting.join(", ")
                )
            }
        }
    }

    fn rob_index(&self, age: u64) -> usize {
        let front = self.rob.front().expect("lookup in an empty ROB").age;
        (age - front) as usize
    }

    fn rob_entry(&mut self, age: u64) -> &mut RobEntry {
        let i = self.rob_index(age);
        let e = &mut self.rob[i];
        debug_assert_eq!(e.age, age);
        e
    }

    fn write_result(&mut self, c: u64, age: u64, port: usize, reg: u8, value: FpBits) {
        self.regfile.write(port, reg, value);
        self.ready.set(reg);
        self.pending_broadcast[reg as usize] = None;
        self.checkpoints.record(c, age, JournalKind::ReadySet { reg });
        self.bus.push((reg, value));
    }

    fn finish_op(&mut self, c: u64, op: FuOp, rec: &mut CycleRecord) {
        self.busy[op.unit] = true;
        let mut value = None;
        if let (Some(d), Some((v, _))) = (op.dest, op.result) {
            let port = self.pool.write_port(op.unit).expect("unit without a write port produced a value");
            self.write_result(c, op.age, port, d, v);
            value = Some(v);
        }
        let e = self.rob_entry(op.age);
        e.executed = true;
        e.flags = op.result.map_or(ExceptionFlags::NONE, |r| r.1);
        let dir_rob = e.dir_rob;
        self.timeline[op.inst].complete = Some(c);
        rec.completions.push(CompletionEvent { inst: op.inst, dir_rob, tag: op.dest, value });
    }

    fn complete_ops(&mut self, c: u64, rec: &mut CycleRecord) {
        let (done, rest): (Vec<FuOp>, Vec<FuOp>) =
            std::mem::take(&mut self.pool.ops).into_iter().partition(|o| o.entered && o.complete == c);
        self.pool.ops = rest;
        for op in done {
            if let (true, Some(d)) = (op.broadcast == c, op.dest) {
                self.late_broadcasts.push((op.age, d));
            }
            self.finish_op(c, op, rec);
        }
    }

    fn write_loads(&mut self, c: u64, rec: &mut CycleRecord) {
        let (done, rest): (Vec<PendingLoad>, Vec<PendingLoad>) =
            std::mem::take(&mut self.loads).into_iter().partition(|l| l.complete == c);
        self.loads = rest;
        let port = self.pool.load_write_port();
        for l in done {
            if l.broadcast == c {
                self.late_broadcasts.push((l.age, l.reg));
            }
            self.write_result(c, l.age, port, l.reg, l.value);
            let e = self.rob_entry(l.age);
            e.executed = true;
            let dir_rob = e.dir_rob;
            self.timeline[l.inst].complete = Some(c);
            rec.completions.push(CompletionEvent { inst: l.inst, dir_rob, tag: Some(l.reg), value: Some(l.value) });
        }
    }

    fn broadcast(&mut self, c: u64, rec: &mut CycleRecord) {
        let mut tags: Vec<(u64, u8)> = self
            .pool
            .ops
            .iter()
            .filter(|o| o.broadcast == c)
            .filter_map(|o| o.dest.map(|d| (o.age, d)))
            .chain(self.loads.iter().filter(|l| l.broadcast == c).map(|l| (l.age, l.reg)))
            .chain(self.late_broadcasts.iter().copied())
            .collect();
        tags.sort_unstable();
        for (age, tag) in tags {
            let out = self.queue.wakeup(tag, c, self.config.bmt_enabled, WAKE_DELAY);
            self.checkpoints.record(c, age, JournalKind::BmtClear { reg: tag });
            if !self.ready.get(tag) {
                self.pending_broadcast[tag as usize] = Some(c);
            }
            if self.config.bmt_enabled {
                self.counters.bmt_reads += 1;
            }
            self.counters.broadcasts += 1;
            self.counters.comparisons += out.comparisons;
            self.counters.blocks_enabled[out.enabled_blocks.count_ones() as usize] += 1;
            rec.comparisons += out.comparisons;
            rec.broadcasts.push(BroadcastEvent {
                tag,
                enabled_blocks: out.enabled_blocks,
                comparisons: out.comparisons,
                woken: out.woken,
            });
        }
    }

    fn select_issue(&mut self, c: u64, rec: &mut CycleRecord) {
        let rule = match self.config.variant {
            Variant::V1 => PortRule::FusedOnSlotZero,
            Variant::V2 => PortRule::Any,
        };
        let mut view = IssueView::new(&self.pool, c);
        let picks = self.queue.select(c, &mut view, rule);
        let units: Vec<usize> = picks.iter().map(|p| view.unit_for(self.queue.entry(p.block, p.slot).age)).collect();
        for (p, unit) in picks.into_iter().zip(units) {
            let age = self.queue.entry(p.block, p.slot).age;
            let e = self.rob_entry(age).clone();
            self.pool.issue(age, e.inst, e.op, unit, p.issue_slot, c, e.dest, e.srcs.clone());
            self.queue.release(p.block, p.slot);
            self.checkpoints.record(c, age, JournalKind::Release { block: p.block, slot: p.slot });
            self.counters.issued += 1;
            self.timeline[e.inst].issue = Some(c);
            rec.issues.push(IssueEvent {
                inst: e.inst,
                dir_rob: e.dir_rob,
                block: p.block,
                slot: p.slot,
                issue_slot: p.issue_slot,
                unit: self.pool.unit_names()[unit].to_string(),
            });
        }
    }

    /// Operand read for ops issued last cycle. Returns whether any entered.
    fn enter_units(&mut self, c: u64, rec: &mut CycleRecord) -> bool {
        let mode = self.fcsr.rounding;
        let flush = self.fcsr.flush;
        let mut any = false;
        let mut finished = Vec::new();
        for i in 0..self.pool.ops.len() {
            let op = &self.pool.ops[i];
            if op.entered || op.enter != c {
                continue;
            }
            any = true;
            let base = op.issue_slot * 3;
            let mut operands = Vec::with_capacity(op.srcs.len());
            for (k, &tag) in op.srcs.iter().enumerate() {
                match self.bus.iter().rev().find(|(t, _)| *t == tag) {
                    Some(&(_, v)) => {
                        rec.bypassed += 1;
                        operands.push(v);
                    }
                    None => operands.push(self.regfile.read(base + k, tag)),
                }
            }
            let result = (op.op.class() != OpClass::Branch).then(|| op.op.evaluate(&operands, mode, flush));
            let age = op.age;
            let op = &mut self.pool.ops[i];
            op.operands = operands;
            op.result = result;
            op.entered = true;
            if op.complete == c {
                finished.push(i);
            }
            self.rob_entry(age).reads_done = true;
        }
        self.counters.bypassed += rec.bypassed;
        for i in finished.into_iter().rev() {
            let op = self.pool.ops.remove(i);
            self.finish_op(c, op, rec);
        }
        // finish_op pushed in reverse; keep completions in unit order.
        rec.completions.sort_by_key(|e| e.inst);
        any
    }

    /// True when dispatching `inst` (correct path) would overwrite a
    /// register an older instruction still writes or has yet to read.
    fn has_hazard(&self, inst: &Instruction) -> bool {
        let Some(d) = inst.dest.map(|r| r.index()) else { return false };
        self.rob
            .iter()
            .filter(|e| !e.wrong_path)
            .any(|e| (e.dest == Some(d) && !e.executed && !e.unimplemented) || (!e.reads_done && e.srcs.contains(&d)))
    }

    fn source_state(ready: &ReadyBitVector, pending: &[Option<u64>; PHYS_REGS], c: u64, tag: u8) -> SourceState {
        if ready.get(tag) {
            SourceState::ReadyAt(c + 1)
        } else if let Some(b) = pending[tag as usize] {
            SourceState::ReadyAt((c + 1).max(b + WAKE_DELAY))
        } else {
            SourceState::Waiting
        }
    }

    fn dispatch(&mut self, c: u64, rec: &mut CycleRecord) {
        let mut used = [false; BLOCKS];
        let mut n = 0;
        while n < DISPATCH_WIDTH && self.next_inst < self.program.instructions.len() {
            let idx = self.next_inst;
            let inst = self.program.instructions[idx].clone();
            if inst.wrong_path != self.mispredict_pending.is_some() {
                break;
            }
            if self.rob.len() == ROB_CAPACITY {
                break;
            }
            if !inst.wrong_path && self.has_hazard(&inst) {
                break;
            }
            let class = inst.op.class();
            let unimplemented = self.config.variant == Variant::V2 && class == OpClass::Divide;
            let queued = inst.op.uses_queue() && !unimplemented;
            if inst.wrong_path && inst.dest.is_some() && self.next_spare as usize >= PHYS_REGS {
                break;
            }
            let block = if queued {
                match self.queue.assign_one(used) {
                    Some(b) => Some(b),
                    None => break,
                }
            } else {
                None
            };

            let age = self.next_age;
            self.next_age += 1;
            let dir_rob = (age % ROB_CAPACITY as u64) as u8;
            let srcs: Vec<u8> = inst
                .srcs
                .iter()
                .map(|r| {
                    let l = r.index();
                    if inst.wrong_path {
                        self.spec_map[l as usize].unwrap_or(l)
                    } else {
                        l
                    }
                })
                .collect();
            let dest = inst.dest.map(|r| {
                if inst.wrong_path {
                    let spare = self.next_spare;
                    self.next_spare += 1;
                    self.spec_map[r.index() as usize] = Some(spare);
                    spare
                } else {
                    r.index()
                }
            });

            let mut queue_slot = None;
            if let Some(b) = block {
                used[b] = true;
                let mut tags = [0u8; 3];
                tags[..srcs.len()].copy_from_slice(&srcs);
                let payload = Payload {
                    format: inst.op.format_code(),
                    srcs: tags,
                    dest: dest.unwrap_or(0),
                    resource: resource_of(inst.op),
                    function: inst.op.function_code(),
                    dir_rob,
                };
                let ready = self.ready;
                let pending = &self.pending_broadcast;
                let slot =
                    self.queue.dispatch(payload, srcs.len(), b, age, c, |t| Self::source_state(&ready, pending, c, t));
                queue_slot = Some((b, slot));
            }

            let mut entry = RobEntry {
                age,
                inst: idx,
                op: inst.op,
                dir_rob,
                dispatch_cycle: c,
                dest,
                srcs,
                reads_done: false,
                executed: false,
                flags: ExceptionFlags::NONE,
                unimplemented,
                wrong_path: inst.wrong_path,
                mispredict: inst.mispredict,
            };
            match class {
                OpClass::Load => {
                    let spec = inst.load.expect("load without schedule");
                    let reg = dest.unwrap();
                    let lead = self.config.load_broadcast_lead;
                    let mut complete = spec.cycle.max(c + 1 + lead);
                    while self.load_port_claims.contains(&complete) {
                        complete += 1;
                    }
                    self.load_port_claims.insert(complete);
                    self.loads.push(PendingLoad {
                        age,
                        inst: idx,
                        reg,
                        value: spec.value,
                        complete,
                        broadcast: complete - lead,
                    });
                    entry.reads_done = true;
                    self.counters.issued += 1;
                }
                OpClass::Store => self.counters.issued += 1,
                _ if unimplemented => {
                    entry.reads_done = true;
                    entry.executed = true;
                }
                _ => {}
            }
            if let Some(d) = dest {
                if !unimplemented {
                    self.ready.clear(d);
                    self.pending_broadcast[d as usize] = None;
                }
            }
            self.rob.push_back(entry);
            self.counters.dispatched += 1;
            self.timeline[idx].dispatch = Some(c);
            rec.dispatches.push(DispatchEvent { inst: idx, dir_rob, queue_slot, wrong_path: inst.wrong_path });
            self.next_inst += 1;
            n += 1;
            if inst.mispredict {
                self.mispredict_pending = Some(age);
                break;
            }
        }
    }

    fn commit(&mut self, c: u64, rec: &mut CycleRecord) -> Result<(), EngineError> {
        let mut store_port_used = false;
        for _ in 0..COMMIT_WIDTH {
            let Some(head) = self.rob.front() else { break };
            debug_assert!(!head.wrong_path, "wrong-path instruction reached commit");
            let class = head.op.class();
            if class == OpClass::Store {
                let src = head.srcs[0];
                if store_port_used || !self.ready.get(src) {
                    break;
                }
                let store_port = self.regfile.ports().reads - 1;
                let value = self.regfile.read(store_port, src);
                let reg = self.program.instructions[head.inst].srcs[0];
                self.stores.push(Capture { reg, value });
                self.timeline[head.inst].complete = Some(c);
                store_port_used = true;
            } else if !head.executed {
                break;
            }
            if head.unimplemented {
                self.fcsr.raise_unimplemented();
                self.halted = Some(Outcome::Trapped { inst: head.inst, cycle: c, cause: "unimplemented".into() });
                return Ok(());
            }
            if matches!(class, OpClass::AddSub | OpClass::Multiply | OpClass::Divide | OpClass::Fused | OpClass::Alu)
                && self.fcsr.accrue(head.flags)
            {
                let enabled = ExceptionFlags::from_bits(head.flags.bits() & self.fcsr.enables.bits());
                self.halted = Some(Outcome::Trapped { inst: head.inst, cycle: c, cause: enabled.to_string() });
                return Ok(());
            }
            let head = self.rob.pop_front().unwrap();
            self.counters.committed += 1;
            self.timeline[head.inst].commit = Some(c);
            rec.commits.push(CommitEvent { inst: head.inst, dir_rob: head.dir_rob });
            if head.mispredict {
                self.rollback(&head, rec)?;
                break;
            }
        }
        Ok(())
    }

    /// Restores the scheduling state checkpointed when `branch` dispatched,
    /// re-applies later changes made by older instructions, and squashes
    /// everything younger.
    fn rollback(&mut self, branch: &RobEntry, rec: &mut CycleRecord) -> Result<(), EngineError> {
        let b = branch.dispatch_cycle;
        let cp = self.checkpoints.find(b).ok_or(EngineError::CheckpointEvicted { cycle: b })?.clone();
        self.ready.restore(cp.ready);
        self.queue.restore(&cp.queue);
        let events: Vec<JournalKind> = self.checkpoints.replay(b, branch.age).map(|e| e.kind).collect();
        for kind in events {
            match kind {
                JournalKind::Release { block, slot } => self.queue.release(block, slot),
                JournalKind::BmtClear { reg } => self.queue.clear_bmt_row(reg),
                JournalKind::ReadySet { reg } => self.ready.set(reg),
            }
        }
        for spare in FIRST_SPARE..PHYS_REGS as u8 {
            self.ready.set(spare);
            self.pending_broadcast[spare as usize] = None;
        }

        let age = branch.age;
        let squashed: Vec<usize> = self.rob.iter().filter(|e| e.age > age).map(|e| e.inst).collect();
        self.rob.retain(|e| e.age <= age);
        self.pool.squash_younger(age);
        self.loads.retain(|l| l.age <= age);
        for &i in &squashed {
            self.timeline[i].squashed = true;
        }
        self.spec_map = [None; LOGICAL_REGS as usize];
        self.next_spare = FIRST_SPARE;
        self.mispredict_pending = None;
        self.next_age = age + 1;
        while self.next_inst < self.program.instructions.len() && self.program.instructions[self.next_inst].wrong_path {
            self.timeline[self.next_inst].squashed = true;
            self.next_inst += 1;
        }
        self.counters.rollbacks += 1;
        self.counters.squashed += squashed.len() as u64;
        rec.rollback = Some(RollbackEvent { branch: branch.inst, restored_from: b, squashed: squashed.len() });
        Ok(())
    }

    fn sample(&mut self, c: u64) {
        self.counters.queue_occupancy += self.queue.occupancy() as u64;
        self.counters.rob_occupancy += self.rob.len() as u64;
        for u in self.pool.busy_units(c) {
            self.busy[u] = true;
        }
        for (u, b) in self.busy.iter_mut().enumerate() {
            self.counters.fu_busy[u] += *b as u64;
            *b = false;
        }
    }
}

/// Convenience: builds an engine and runs it to completion.
pub fn run_program(config: EngineConfig, program: &Program) -> Result<RunReport, EngineError> {
    Engine::new(config, program)?.run()
}
