//! Random trace generation and an in-order reference evaluator.

use super::{oracle_mode, oracle_result, random_operand};
use fpengine::engine::log::CycleRecord;
use fpengine::engine::{Engine, EngineConfig, EngineError};
use fpengine::fpcore::{CondCode, ExceptionFlags, FpBits, RoundingMode};
use fpengine::isa::{Instruction, OpClass, Opcode, Program, Reg};
use fpengine::stats::RunReport;
use fpengine_ref as oracle;
use rand::seq::SliceRandom;
use rand::Rng;

const QUEUE_OPS: [Opcode; 14] = [
    Opcode::Add,
    Opcode::Sub,
    Opcode::Mul,
    Opcode::Maddf,
    Opcode::Msubf,
    Opcode::Cmp(CondCode::Lt),
    Opcode::Cmp(CondCode::Sule),
    Opcode::Class,
    Opcode::Min,
    Opcode::Maxa,
    Opcode::Abs,
    Opcode::Neg,
    Opcode::Mov,
    Opcode::Max,
];

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub max_len: usize,
    pub divide: bool,
    pub branches: bool,
    pub max_load_cycle: u64,
}

impl GenOptions {
    pub fn v1() -> Self {
        GenOptions { max_len: 64, divide: true, branches: true, max_load_cycle: 40 }
    }

    /// V2 traps on division, so generated V2 programs leave it out.
    pub fn v2() -> Self {
        GenOptions { divide: false, ..Self::v1() }
    }
}

fn reg(n: u8) -> Reg {
    Reg::new(n).unwrap()
}

fn value<R: Rng>(rng: &mut R) -> FpBits {
    // Mostly moderate magnitudes so chains stay finite, with some spread.
    let anchor = if rng.gen_ratio(1, 8) { rng.gen_range(1..0x7FE) } else { rng.gen_range(0x3C0..0x440) };
    random_operand(rng, anchor)
}

fn compute<R: Rng>(rng: &mut R, regs: u8, divide: bool) -> Instruction {
    let op = if divide && rng.gen_ratio(1, 10) {
        *[Opcode::Div, Opcode::Recip].choose(rng).unwrap()
    } else {
        *QUEUE_OPS.choose(rng).unwrap()
    };
    let srcs: Vec<Reg> = (0..op.source_count()).map(|_| reg(rng.gen_range(0..regs))).collect();
    Instruction::compute(op, reg(rng.gen_range(0..regs)), &srcs)
}

fn body<R: Rng>(rng: &mut R, len: usize, regs: u8, opts: GenOptions, out: &mut Vec<Instruction>) {
    for _ in 0..len {
        let roll = rng.gen_range(0..100);
        let inst = if roll < 20 {
            Instruction::load(reg(rng.gen_range(0..regs)), rng.gen_range(0..=opts.max_load_cycle), value(rng))
        } else if roll < 30 {
            Instruction::store(reg(rng.gen_range(0..regs)))
        } else if roll < 35 && opts.branches {
            let op = *[Opcode::Bc1eqz, Opcode::Bc1nez].choose(rng).unwrap();
            Instruction::branch(op, reg(rng.gen_range(0..regs)), false)
        } else {
            compute(rng, regs, opts.divide)
        };
        out.push(inst);
    }
}

/// A program of at most `opts.max_len` instructions over a small register
/// window, so dependences are dense.
pub fn random_program<R: Rng>(rng: &mut R, opts: GenOptions) -> Program {
    let regs = rng.gen_range(4..=12u8);
    let mut insts = Vec::new();
    let seed_loads = rng.gen_range(1..=regs.min(6)) as usize;
    for r in 0..seed_loads {
        insts.push(Instruction::load(reg(r as u8), rng.gen_range(0..=opts.max_load_cycle), value(rng)));
    }
    let stores = rng.gen_range(1..=3);
    let len = rng.gen_range(1..=opts.max_len.saturating_sub(seed_loads + stores).max(1));
    body(rng, len, regs, opts, &mut insts);
    for _ in 0..stores {
        insts.push(Instruction::store(reg(rng.gen_range(0..regs))));
    }
    insts.truncate(opts.max_len);
    Program { instructions: insts, expected: vec![] }
}

/// The same program with and without a wrong path after a mispredicted
/// branch. The prefix is short so the branch resolves while its checkpoint
/// is still held.
pub struct MispredictPair {
    pub with_wrong_path: Program,
    pub without: Program,
    pub branch: usize,
    pub wrong_path_len: usize,
}

pub fn random_mispredict_pair<R: Rng>(rng: &mut R) -> MispredictPair {
    let regs = rng.gen_range(4..=10u8);
    let mut prefix = Vec::new();
    for r in 0..rng.gen_range(1..=3u8) {
        prefix.push(Instruction::load(reg(r), rng.gen_range(0..=12), value(rng)));
    }
    for _ in 0..rng.gen_range(0..=3) {
        prefix.push(compute(rng, regs, false));
    }
    let branch_op = *[Opcode::Bc1eqz, Opcode::Bc1nez].choose(rng).unwrap();
    prefix.push(Instruction::branch(branch_op, reg(rng.gen_range(0..regs)), true));
    let branch = prefix.len() - 1;

    let wrong_path_len = rng.gen_range(1..=12);
    let wrong: Vec<Instruction> = (0..wrong_path_len).map(|_| compute(rng, regs, true).on_wrong_path()).collect();

    let mut suffix = Vec::new();
    let suffix_len = rng.gen_range(4..=30);
    body(
        rng,
        suffix_len,
        regs,
        GenOptions { branches: true, divide: true, max_len: 64, max_load_cycle: 60 },
        &mut suffix,
    );
    for _ in 0..rng.gen_range(1..=3) {
        suffix.push(Instruction::store(reg(rng.gen_range(0..regs))));
    }

    let mut with = prefix.clone();
    with.extend(wrong);
    with.extend(suffix.iter().cloned());
    let mut without = prefix;
    without.extend(suffix);
    MispredictPair {
        with_wrong_path: Program { instructions: with, expected: vec![] },
        without: Program { instructions: without, expected: vec![] },
        branch,
        wrong_path_len,
    }
}

fn is_snan(x: u64) -> bool {
    x & 0x7FF0_0000_0000_0000 == 0x7FF0_0000_0000_0000 && x & ((1 << 52) - 1) != 0 && x & (1 << 51) == 0
}

fn is_nan(x: u64) -> bool {
    f64::from_bits(x).is_nan()
}

fn compare(code: u8, a: u64, b: u64) -> (u64, bool) {
    let (x, y) = (f64::from_bits(a), f64::from_bits(b));
    let holds = match x.partial_cmp(&y) {
        None => code & 1 != 0,
        Some(std::cmp::Ordering::Equal) => code & 2 != 0,
        Some(std::cmp::Ordering::Less) => code & 4 != 0,
        Some(std::cmp::Ordering::Greater) => false,
    };
    let invalid = is_snan(a) || is_snan(b) || (code & 8 != 0 && (is_nan(a) || is_nan(b)));
    (if holds { u64::MAX } else { 0 }, invalid)
}

fn class(a: u64) -> u64 {
    use std::num::FpCategory::*;
    let x = f64::from_bits(a);
    let neg = a >> 63 == 1;
    let bit = match x.classify() {
        Nan if is_snan(a) => 0,
        Nan => 1,
        Infinite => {
            if neg {
                2
            } else {
                6
            }
        }
        Normal => {
            if neg {
                3
            } else {
                7
            }
        }
        Subnormal => {
            if neg {
                4
            } else {
                8
            }
        }
        Zero => {
            if neg {
                5
            } else {
                9
            }
        }
    };
    1 << bit
}

fn minmax(op: Opcode, a: u64, b: u64) -> (u64, bool) {
    if is_snan(a) || is_snan(b) {
        return (oracle::DEFAULT_NAN, true);
    }
    match (is_nan(a), is_nan(b)) {
        (true, false) => return (b, false),
        (false, true) | (true, true) => return (a, false),
        _ => {}
    }
    let (x, y) = (f64::from_bits(a), f64::from_bits(b));
    let pick_a = match op {
        Opcode::Min if x == y => a >> 63 == 1,
        Opcode::Max if x == y => a >> 63 == 0,
        Opcode::Min => x < y,
        Opcode::Max => x > y,
        Opcode::Mina => x.abs() < y.abs(),
        Opcode::Maxa => x.abs() > y.abs(),
        _ => unreachable!(),
    };
    (if pick_a { a } else { b }, false)
}

fn flags_of(invalid: bool) -> ExceptionFlags {
    if invalid {
        ExceptionFlags::INVALID
    } else {
        ExceptionFlags::NONE
    }
}

/// Reference semantics of one compute operation. Arithmetic comes from the
/// arbitrary-precision model; the non-rounding operations are written out
/// against host floats. Division is not correctly rounded by design, so its
/// value is taken from the datapath, whose accuracy is checked on its own.
pub fn reference_op(op: Opcode, v: &[u64], mode: RoundingMode, flush: bool) -> (u64, ExceptionFlags) {
    let m = oracle_mode(mode);
    let arith = |o: oracle::Outcome| {
        let (bits, flags) = oracle_result(o);
        (bits.0, flags)
    };
    match op {
        Opcode::Add => arith(oracle::add(v[0], v[1], m, flush)),
        Opcode::Sub => arith(oracle::sub(v[0], v[1], m, flush)),
        Opcode::Mul => arith(oracle::mul(v[0], v[1], m, flush)),
        Opcode::Maddf => arith(oracle::fma(v[0], v[1], v[2], false, m, flush)),
        Opcode::Msubf => arith(oracle::fma(v[0], v[1], v[2], true, m, flush)),
        Opcode::Div => {
            let (r, f) = fpengine::fpcore::div(FpBits(v[0]), FpBits(v[1]), mode, flush);
            (r.0, f)
        }
        Opcode::Recip => {
            let (r, f) = fpengine::fpcore::recip(FpBits(v[0]), mode, flush);
            (r.0, f)
        }
        Opcode::Cmp(c) => {
            let (r, inv) = compare(c.code(), v[0], v[1]);
            (r, flags_of(inv))
        }
        Opcode::Class => (class(v[0]), ExceptionFlags::NONE),
        Opcode::Min | Opcode::Max | Opcode::Mina | Opcode::Maxa => {
            let (r, inv) = minmax(op, v[0], v[1]);
            (r, flags_of(inv))
        }
        Opcode::Abs => (v[0] & !(1 << 63), ExceptionFlags::NONE),
        Opcode::Neg => (v[0] ^ 1 << 63, ExceptionFlags::NONE),
        Opcode::Mov => (v[0], ExceptionFlags::NONE),
        _ => unreachable!("{} is not a compute op", op.name()),
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct ReferenceRun {
    pub stores: Vec<(Reg, FpBits)>,
    pub flags: ExceptionFlags,
}

/// Executes the correct path one instruction at a time.
pub fn evaluate_in_order(program: &Program, mode: RoundingMode, flush: bool) -> ReferenceRun {
    let mut regs = [0u64; 32];
    let mut stores = Vec::new();
    let mut flags = ExceptionFlags::NONE;
    for inst in program.instructions.iter().filter(|i| !i.wrong_path) {
        match inst.op.class() {
            OpClass::Load => regs[inst.dest.unwrap().index() as usize] = inst.load.unwrap().value.0,
            OpClass::Store => {
                let r = inst.srcs[0];
                stores.push((r, FpBits(regs[r.index() as usize])));
            }
            OpClass::Branch => {}
            _ => {
                let v: Vec<u64> = inst.srcs.iter().map(|r| regs[r.index() as usize]).collect();
                let (r, f) = reference_op(inst.op, &v, mode, flush);
                regs[inst.dest.unwrap().index() as usize] = r;
                flags |= f;
            }
        }
    }
    ReferenceRun { stores, flags }
}

pub fn engine_stores(report: &RunReport) -> Vec<(Reg, FpBits)> {
    report.stores.iter().map(|c| (c.reg, c.value)).collect()
}

/// Runs to completion, checking the queue's structural invariants every
/// cycle. Returns the report with every cycle record.
pub fn run_checked(config: EngineConfig, program: &Program) -> Result<(RunReport, Vec<CycleRecord>), EngineError> {
    let mut engine = Engine::new(EngineConfig { record_cycles: false, ..config }, program)?;
    let mut log = Vec::new();
    while !engine.is_finished() {
        log.push(engine.step()?);
        assert!(engine.queue().conservation_holds(), "free list and valid slots disagree at cycle {}", engine.cycle());
        assert!(engine.queue().bmt_sound(), "waiting source without a BMT bit at cycle {}", engine.cycle());
        assert!(engine.cycle() < 100_000, "runaway simulation");
    }
    let report = engine.report(Vec::new());
    Ok((report, log))
}

/// Every configuration the engine supports for a program without division:
/// both variants, all register file models, BMT on and off.
pub fn all_configs() -> Vec<EngineConfig> {
    use fpengine::regfile::RegfileModel;
    let mut out = Vec::new();
    for base in [EngineConfig::v1(), EngineConfig::v2()] {
        for model in RegfileModel::ALL {
            for bmt in [true, false] {
                out.push(EngineConfig { regfile: model, bmt_enabled: bmt, ..base.clone() });
            }
        }
    }
    out
}
