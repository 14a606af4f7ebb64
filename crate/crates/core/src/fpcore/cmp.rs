//! Non-rounding operations: compare, classify, min/max and sign moves.

use super::{decode, ExceptionFlags, FpBits, FpClass, FpResult, SIGN_BIT};
use std::cmp::Ordering;

/// CMP.cond.D condition codes. Bit 0 of the code accepts unordered, bit 1
/// accepts equal, bit 2 accepts less-than, bit 3 selects the signaling form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CondCode {
    Af = 0,
    Un,
    Eq,
    Ueq,
    Lt,
    Ult,
    Le,
    Ule,
    Saf,
    Sun,
    Seq,
    Sueq,
    Slt,
    Sult,
    Sle,
    Sule,
}

impl CondCode {
    pub const ALL: [CondCode; 16] = [
        CondCode::Af,
        CondCode::Un,
        CondCode::Eq,
        CondCode::Ueq,
        CondCode::Lt,
        CondCode::Ult,
        CondCode::Le,
        CondCode::Ule,
        CondCode::Saf,
        CondCode::Sun,
        CondCode::Seq,
        CondCode::Sueq,
        CondCode::Slt,
        CondCode::Sult,
        CondCode::Sle,
        CondCode::Sule,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "AF", "UN", "EQ", "UEQ", "LT", "ULT", "LE", "ULE", "SAF", "SUN", "SEQ", "SUEQ", "SLT", "SULT", "SLE",
            "SULE",
        ];
        NAMES[self as usize]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(name))
    }

    pub fn signaling(self) -> bool {
        self.code() & 8 != 0
    }
}

/// `None` when unordered.
fn order(a: FpBits, b: FpBits) -> Option<Ordering> {
    if a.is_nan() || b.is_nan() {
        return None;
    }
    if a.is_zero() && b.is_zero() {
        return Some(Ordering::Equal);
    }
    let key = |x: FpBits| {
        if x.sign() {
            -((x.0 & !SIGN_BIT) as i128)
        } else {
            x.0 as i128
        }
    };
    Some(key(a).cmp(&key(b)))
}

pub fn compare(cond: CondCode, a: FpBits, b: FpBits) -> FpResult {
    let code = cond.code();
    let holds = match order(a, b) {
        None => code & 1 != 0,
        Some(Ordering::Equal) => code & 2 != 0,
        Some(Ordering::Less) => code & 4 != 0,
        Some(Ordering::Greater) => false,
    };
    let any_nan = a.is_nan() || b.is_nan();
    let invalid = a.is_snan() || b.is_snan() || (cond.signaling() && any_nan);
    let flags = if invalid { ExceptionFlags::INVALID } else { ExceptionFlags::NONE };
    (if holds { FpBits::ALL_ONES } else { FpBits::ZERO }, flags)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassBit {
    SignalingNan = 0,
    QuietNan,
    NegInfinity,
    NegNormal,
    NegSubnormal,
    NegZero,
    PosInfinity,
    PosNormal,
    PosSubnormal,
    PosZero,
}

impl ClassBit {
    pub fn mask(self) -> u64 {
        1 << self as u32
    }
}

impl From<FpClass> for ClassBit {
    fn from(c: FpClass) -> Self {
        match c {
            FpClass::SignalingNan => ClassBit::SignalingNan,
            FpClass::QuietNan => ClassBit::QuietNan,
            FpClass::NegInfinity => ClassBit::NegInfinity,
            FpClass::NegNormal => ClassBit::NegNormal,
            FpClass::NegSubnormal => ClassBit::NegSubnormal,
            FpClass::NegZero => ClassBit::NegZero,
            FpClass::PosInfinity => ClassBit::PosInfinity,
            FpClass::PosNormal => ClassBit::PosNormal,
            FpClass::PosSubnormal => ClassBit::PosSubnormal,
            FpClass::PosZero => ClassBit::PosZero,
        }
    }
}

/// One-hot class of `a` in the low 10 bits.
pub fn class_mask(a: FpBits) -> u64 {
    ClassBit::from(decode(a).class).mask()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MinMaxKind {
    Min,
    Max,
    MinA,
    MaxA,
}

pub fn minmax(kind: MinMaxKind, a: FpBits, b: FpBits) -> FpResult {
    if a.is_snan() || b.is_snan() {
        return (FpBits::DEFAULT_NAN, ExceptionFlags::INVALID);
    }
    match (a.is_nan(), b.is_nan()) {
        (true, _) if !b.is_nan() => return (b, ExceptionFlags::NONE),
        (true, true) => return (a, ExceptionFlags::NONE),
        (false, true) => return (a, ExceptionFlags::NONE),
        _ => {}
    }
    let pick_a = match kind {
        // Signed order with -0 below +0.
        MinMaxKind::Min | MinMaxKind::Max => {
            let ord = match order(a, b) {
                Some(Ordering::Equal) => b.sign().cmp(&a.sign()),
                o => o.unwrap(),
            };
            match kind {
                MinMaxKind::Min => ord == Ordering::Less,
                _ => ord == Ordering::Greater,
            }
        }
        MinMaxKind::MinA => a.0 & !SIGN_BIT < b.0 & !SIGN_BIT,
        MinMaxKind::MaxA => a.0 & !SIGN_BIT > b.0 & !SIGN_BIT,
    };
    (if pick_a { a } else { b }, ExceptionFlags::NONE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Abs,
    Neg,
    Mov,
}

pub fn move_family(kind: MoveKind, a: FpBits) -> FpBits {
    match kind {
        MoveKind::Abs => a.with_sign(false),
        MoveKind::Neg => a.negated(),
        MoveKind::Mov => a,
    }
}
