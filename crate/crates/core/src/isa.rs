//! Instruction subset, trace text format and FCSR state.

use crate::fpcore::{
    add_sub, class_mask, compare, div, fmac, minmax, move_family, mul, recip, AddOp, CondCode, ExceptionFlags, FmacOp,
    FpBits, MinMaxKind, MoveKind, RoundingMode,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const LOGICAL_REGS: u8 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unimplemented instruction `{mnemonic}`")]
    Unimplemented { line: usize, mnemonic: String },
}

/// Logical FP register `$f0`..`$f31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reg(u8);

impl Reg {
    pub fn new(n: u8) -> Option<Reg> {
        (n < LOGICAL_REGS).then_some(Reg(n))
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "$f{}", self.0)
    }
}

impl std::str::FromStr for Reg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix("$f")
            .or_else(|| s.strip_prefix("$F"))
            .ok_or_else(|| format!("expected a register like $f4, found `{s}`"))?;
        let n: u8 = digits.parse().map_err(|_| format!("bad register `{s}`"))?;
        Reg::new(n).ok_or_else(|| format!("register `{s}` out of range ($f0-$f31)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    Div,
    Recip,
    Maddf,
    Msubf,
    Cmp(CondCode),
    Class,
    Min,
    Max,
    Mina,
    Maxa,
    Abs,
    Neg,
    Mov,
    Bc1eqz,
    Bc1nez,
    Ldc1,
    Sdc1,
}

/// Operation class, which decides the functional unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpClass {
    AddSub,
    Multiply,
    Divide,
    Fused,
    Alu,
    Branch,
    Load,
    Store,
}

impl Opcode {
    const SIMPLE: [(Opcode, &'static str); 19] = [
        (Opcode::Add, "ADD"),
        (Opcode::Sub, "SUB"),
        (Opcode::Mul, "MUL"),
        (Opcode::Div, "DIV"),
        (Opcode::Recip, "RECIP"),
        (Opcode::Maddf, "MADDF"),
        (Opcode::Msubf, "MSUBF"),
        (Opcode::Class, "CLASS"),
        (Opcode::Min, "MIN"),
        (Opcode::Max, "MAX"),
        (Opcode::Mina, "MINA"),
        (Opcode::Maxa, "MAXA"),
        (Opcode::Abs, "ABS"),
        (Opcode::Neg, "NEG"),
        (Opcode::Mov, "MOV"),
        (Opcode::Bc1eqz, "BC1EQZ"),
        (Opcode::Bc1nez, "BC1NEZ"),
        (Opcode::Ldc1, "LDC1"),
        (Opcode::Sdc1, "SDC1"),
    ];

    /// Mnemonics of the wider FPU that this engine does not execute.
    const UNIMPLEMENTED: [&'static str; 16] = [
        "SQRT", "RSQRT", "CVT", "RINT", "CEIL", "FLOOR", "ROUND", "TRUNC", "MFC1", "MTC1", "CFC1", "CTC1", "SEL",
        "SELEQZ", "SELNEZ", "MADD",
    ];

    pub fn name(self) -> String {
        match self {
            Opcode::Cmp(c) => format!("CMP.{}", c.name()),
            op => Self::SIMPLE.iter().find(|(o, _)| *o == op).unwrap().1.to_string(),
        }
    }

    pub fn class(self) -> OpClass {
        use Opcode::*;
        match self {
            Add | Sub => OpClass::AddSub,
            Mul => OpClass::Multiply,
            Div | Recip => OpClass::Divide,
            Maddf | Msubf => OpClass::Fused,
            Cmp(_) | Class | Min | Max | Mina | Maxa | Abs | Neg | Mov => OpClass::Alu,
            Bc1eqz | Bc1nez => OpClass::Branch,
            Ldc1 => OpClass::Load,
            Sdc1 => OpClass::Store,
        }
    }

    /// Register sources read by the operation.
    pub fn source_count(self) -> usize {
        use Opcode::*;
        match self {
            Maddf | Msubf => 3,
            Add | Sub | Mul | Div | Cmp(_) | Min | Max | Mina | Maxa => 2,
            Recip | Class | Abs | Neg | Mov | Bc1eqz | Bc1nez | Sdc1 => 1,
            Ldc1 => 0,
        }
    }

    pub fn has_dest(self) -> bool {
        !matches!(self, Opcode::Bc1eqz | Opcode::Bc1nez | Opcode::Sdc1)
    }

    /// Issues through the queue (everything but loads and stores).
    pub fn uses_queue(self) -> bool {
        !matches!(self.class(), OpClass::Load | OpClass::Store)
    }

    /// 6-bit function code carried in the queue payload.
    pub fn function_code(self) -> u8 {
        use Opcode::*;
        match self {
            Add => 0x00,
            Sub => 0x01,
            Mul => 0x02,
            Div => 0x03,
            Abs => 0x05,
            Mov => 0x06,
            Neg => 0x07,
            Recip => 0x15,
            Maddf => 0x18,
            Msubf => 0x19,
            Class => 0x1B,
            Min => 0x1C,
            Mina => 0x1D,
            Max => 0x1E,
            Maxa => 0x1F,
            Cmp(c) => c.code(),
            Bc1eqz => 0x29,
            Bc1nez => 0x2D,
            Ldc1 => 0x35,
            Sdc1 => 0x3D,
        }
    }

    /// 5-bit format code carried in the queue payload.
    pub fn format_code(self) -> u8 {
        match self {
            Opcode::Cmp(_) => 0x15,
            _ => 0x11,
        }
    }

    fn parse(word: &str, line: usize) -> Result<Opcode, IsaError> {
        let upper = word.to_ascii_uppercase();
        let mut parts: Vec<&str> = upper.split('.').collect();
        if parts.len() > 1 && parts.last() == Some(&"D") {
            parts.pop();
        } else if parts.len() > 1 && matches!(parts.last(), Some(&"S") | Some(&"PS") | Some(&"W") | Some(&"L")) {
            return Err(IsaError::Syntax { line, message: format!("only the D format is supported, found `{word}`") });
        }
        let base = parts[0];
        if base == "CMP" {
            let cond = parts
                .get(1)
                .ok_or_else(|| IsaError::Syntax { line, message: "CMP needs a condition, e.g. CMP.LT.D".into() })?;
            if parts.len() != 2 {
                return Err(IsaError::Syntax { line, message: format!("malformed `{word}`") });
            }
            let c = CondCode::from_name(cond)
                .ok_or_else(|| IsaError::Syntax { line, message: format!("unknown compare condition `{cond}`") })?;
            return Ok(Opcode::Cmp(c));
        }
        if parts.len() != 1 {
            return Err(IsaError::Syntax { line, message: format!("malformed mnemonic `{word}`") });
        }
        if let Some((op, _)) = Self::SIMPLE.iter().find(|(_, n)| *n == base) {
            return Ok(*op);
        }
        if Self::UNIMPLEMENTED.contains(&base) {
            return Err(IsaError::Unimplemented { line, mnemonic: word.to_string() });
        }
        Err(IsaError::Syntax { line, message: format!("unknown mnemonic `{word}`") })
    }

    /// Functional result of a compute operation. Panics for loads, stores
    /// and branches, which produce no value.
    pub fn evaluate(self, ops: &[FpBits], mode: RoundingMode, flush: bool) -> (FpBits, ExceptionFlags) {
        use Opcode::*;
        let none = ExceptionFlags::NONE;
        match self {
            Add => add_sub(ops[0], ops[1], AddOp::Add, mode, flush),
            Sub => add_sub(ops[0], ops[1], AddOp::Sub, mode, flush),
            Mul => mul(ops[0], ops[1], mode, flush),
            Div => div(ops[0], ops[1], mode, flush),
            Recip => recip(ops[0], mode, flush),
            Maddf => fmac(ops[0], ops[1], ops[2], FmacOp::Madd, mode, flush),
            Msubf => fmac(ops[0], ops[1], ops[2], FmacOp::Msub, mode, flush),
            Cmp(c) => compare(c, ops[0], ops[1]),
            Class => (FpBits(class_mask(ops[0])), none),
            Min => minmax(MinMaxKind::Min, ops[0], ops[1]),
            Max => minmax(MinMaxKind::Max, ops[0], ops[1]),
            Mina => minmax(MinMaxKind::MinA, ops[0], ops[1]),
            Maxa => minmax(MinMaxKind::MaxA, ops[0], ops[1]),
            Abs => (move_family(MoveKind::Abs, ops[0]), none),
            Neg => (move_family(MoveKind::Neg, ops[0]), none),
            Mov => (move_family(MoveKind::Mov, ops[0]), none),
            Bc1eqz | Bc1nez | Ldc1 | Sdc1 => panic!("{} produces no value", self.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoadSpec {
    /// Cycle the value becomes available from memory.
    pub cycle: u64,
    pub value: FpBits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub op: Opcode,
    pub dest: Option<Reg>,
    pub srcs: Vec<Reg>,
    pub load: Option<LoadSpec>,
    /// Branch marked as mispredicted; the instructions tagged `wrong_path`
    /// that follow it are fetched down the wrong path and later squashed.
    pub mispredict: bool,
    pub wrong_path: bool,
}

impl Instruction {
    pub fn compute(op: Opcode, dest: Reg, srcs: &[Reg]) -> Instruction {
        debug_assert_eq!(srcs.len(), op.source_count());
        Instruction { op, dest: Some(dest), srcs: srcs.to_vec(), load: None, mispredict: false, wrong_path: false }
    }

    pub fn load(dest: Reg, cycle: u64, value: FpBits) -> Instruction {
        Instruction {
            op: Opcode::Ldc1,
            dest: Some(dest),
            srcs: Vec::new(),
            load: Some(LoadSpec { cycle, value }),
            mispredict: false,
            wrong_path: false,
        }
    }

    pub fn store(src: Reg) -> Instruction {
        Instruction { op: Opcode::Sdc1, dest: None, srcs: vec![src], load: None, mispredict: false, wrong_path: false }
    }

    pub fn branch(op: Opcode, src: Reg, mispredict: bool) -> Instruction {
        debug_assert_eq!(op.class(), OpClass::Branch);
        Instruction { op, dest: None, srcs: vec![src], load: None, mispredict, wrong_path: false }
    }

    pub fn on_wrong_path(mut self) -> Instruction {
        self.wrong_path = true;
        self
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Opcode::Ldc1 => {
                let l = self.load.expect("load without schedule");
                write!(f, "LDC1 {} @cycle={} value={}", self.dest.unwrap(), l.cycle, l.value)?;
            }
            Opcode::Sdc1 => write!(f, "SDC1 {}", self.srcs[0])?,
            Opcode::Bc1eqz | Opcode::Bc1nez => {
                write!(f, "{} {}", self.op.name(), self.srcs[0])?;
                if self.mispredict {
                    f.write_str(" !mispredict")?;
                }
            }
            op => {
                write!(f, "{}.D {}", op.name(), self.dest.unwrap())?;
                for s in &self.srcs {
                    write!(f, ", {s}")?;
                }
            }
        }
        if self.wrong_path {
            f.write_str(" !wrongpath")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expect {
    pub reg: Reg,
    pub value: FpBits,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    /// `EXPECT` footer: values the stores should capture, in order.
    pub expected: Vec<Expect>,
}

impl Program {
    /// (cycle, value, register) for every load, in program order.
    pub fn load_schedule(&self) -> Vec<(u64, FpBits, Reg)> {
        self.instructions.iter().filter_map(|i| i.load.map(|l| (l.cycle, l.value, i.dest.unwrap()))).collect()
    }

    /// Registers captured by stores, in program order.
    pub fn captures(&self) -> Vec<Reg> {
        self.instructions.iter().filter(|i| i.op == Opcode::Sdc1).map(|i| i.srcs[0]).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for inst in &self.instructions {
            out.push_str(&inst.to_string());
            out.push('\n');
        }
        for e in &self.expected {
            out.push_str(&format!("EXPECT {} {}\n", e.reg, e.value));
        }
        out
    }

    /// Checks the structural rules the parser enforces, for programs built
    /// in code.
    pub fn validate(&self) -> Result<(), IsaError> {
        parse_program(&self.render()).map(|_| ())
    }
}

fn parse_hex(s: &str, line: usize) -> Result<FpBits, IsaError> {
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| IsaError::Syntax { line, message: format!("expected 0x-prefixed hex, found `{s}`") })?;
    if digits.is_empty() || digits.len() > 16 {
        return Err(IsaError::Syntax { line, message: format!("`{s}` is not a 64-bit hex value") });
    }
    u64::from_str_radix(digits, 16)
        .map(FpBits)
        .map_err(|_| IsaError::Syntax { line, message: format!("bad hex value `{s}`") })
}

fn parse_reg(s: &str, line: usize) -> Result<Reg, IsaError> {
    s.parse().map_err(|message| IsaError::Syntax { line, message })
}

pub fn parse_program(text: &str) -> Result<Program, IsaError> {
    let mut program = Program::default();
    // True while instructions may still be tagged as wrong-path: right
    // after a mispredicted branch or another wrong-path instruction.
    let mut wrong_path_open = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split('#').next().unwrap().trim();
        if code.is_empty() {
            continue;
        }
        let syntax = |message: String| IsaError::Syntax { line, message };
        let (word, rest) = code.split_once(char::is_whitespace).unwrap_or((code, ""));

        if word.eq_ignore_ascii_case("EXPECT") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(syntax("EXPECT takes a register and a hex value".into()));
            }
            program.expected.push(Expect { reg: parse_reg(fields[0], line)?, value: parse_hex(fields[1], line)? });
            continue;
        }
        if !program.expected.is_empty() {
            return Err(syntax("instructions may not follow the EXPECT footer".into()));
        }

        let op = Opcode::parse(word, line)?;
        let mut operands = Vec::new();
        let mut annotations = Vec::new();
        for tok in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            if tok.starts_with('!') || tok.starts_with('@') || tok.contains('=') {
                annotations.push(tok);
            } else {
                operands.push(parse_reg(tok, line)?);
            }
        }

        let mut mispredict = false;
        let mut wrong_path = false;
        let mut cycle = None;
        let mut value = None;
        for a in annotations {
            let lower = a.to_ascii_lowercase();
            match lower.as_str() {
                "!mispredict" if op.class() == OpClass::Branch => mispredict = true,
                "!wrongpath" => wrong_path = true,
                _ if op == Opcode::Ldc1 && lower.starts_with("@cycle=") => {
                    cycle = Some(
                        lower["@cycle=".len()..].parse::<u64>().map_err(|_| syntax(format!("bad load cycle `{a}`")))?,
                    );
                }
                _ if op == Opcode::Ldc1 && lower.starts_with("value=") => {
                    value = Some(parse_hex(&a["value=".len()..], line)?);
                }
                _ => return Err(syntax(format!("unexpected annotation `{a}` for {}", op.name()))),
            }
        }

        let expected_regs = op.source_count() + op.has_dest() as usize;
        if operands.len() != expected_regs {
            return Err(syntax(format!(
                "{} takes {expected_regs} register operand(s), found {}",
                op.name(),
                operands.len()
            )));
        }
        let inst = match op {
            Opcode::Ldc1 => {
                let cycle = cycle.ok_or_else(|| syntax("LDC1 needs @cycle=N".into()))?;
                let value = value.ok_or_else(|| syntax("LDC1 needs value=0x...".into()))?;
                Instruction::load(operands[0], cycle, value)
            }
            Opcode::Sdc1 => Instruction::store(operands[0]),
            Opcode::Bc1eqz | Opcode::Bc1nez => Instruction::branch(op, operands[0], mispredict),
            _ => Instruction::compute(op, operands[0], &operands[1..]),
        };
        let inst = if wrong_path { inst.on_wrong_path() } else { inst };

        if wrong_path {
            if !wrong_path_open {
                return Err(syntax("!wrongpath must follow a mispredicted branch".into()));
            }
            if !matches!(
                op.class(),
                OpClass::AddSub | OpClass::Multiply | OpClass::Divide | OpClass::Fused | OpClass::Alu
            ) {
                return Err(syntax(format!("{} is not allowed on the wrong path", op.name())));
            }
        } else {
            wrong_path_open = false;
        }
        if inst.mispredict {
            wrong_path_open = true;
        }
        program.instructions.push(inst);
    }
    Ok(program)
}

/// Floating-point control and status register.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fcsr {
    pub rounding: RoundingMode,
    pub flags: ExceptionFlags,
    pub enables: ExceptionFlags,
    pub cause: ExceptionFlags,
    /// Cause bit E: unimplemented operation. Always traps.
    pub cause_unimplemented: bool,
    pub flush: bool,
}

impl Fcsr {
    pub const NAN2008: bool = true;
    pub const ABS2008: bool = true;

    pub fn new(rounding: RoundingMode, flush: bool, enables: ExceptionFlags) -> Fcsr {
        Fcsr { rounding, flush, enables, ..Fcsr::default() }
    }

    /// Records an operation's exceptions. Returns true when an enabled
    /// exception was raised.
    pub fn accrue(&mut self, flags: ExceptionFlags) -> bool {
        let (next, trap) = fcsr_accrue(*self, flags);
        *self = next;
        trap
    }

    /// Records an unimplemented operation; always traps.
    pub fn raise_unimplemented(&mut self) -> bool {
        self.cause = ExceptionFlags::NONE;
        self.cause_unimplemented = true;
        true
    }

    /// Architectural bit image: RM [1:0], Flags [6:2], Enables [11:7],
    /// Cause [17:12], NAN2008 [18], ABS2008 [19], FS [24].
    pub fn bits(&self) -> u32 {
        (self.rounding as u32)
            | (self.flags.bits() as u32) << 2
            | (self.enables.bits() as u32) << 7
            | (self.cause.bits() as u32) << 12
            | (self.cause_unimplemented as u32) << 17
            | (Self::NAN2008 as u32) << 18
            | (Self::ABS2008 as u32) << 19
            | (self.flush as u32) << 24
    }
}

/// Cause takes the new flags, Flags accumulates them; the second value is
/// the trap indicator.
pub fn fcsr_accrue(fcsr: Fcsr, flags: ExceptionFlags) -> (Fcsr, bool) {
    let next = Fcsr { cause: flags, cause_unimplemented: false, flags: fcsr.flags | flags, ..fcsr };
    let trap = next.enables.bits() & flags.bits() != 0;
    (next, trap)
}
