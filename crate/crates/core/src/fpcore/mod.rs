//! Bit-exact binary64 arithmetic modeled on the engine's functional units.
//!
//! Every operation is a pure function from bit patterns (plus rounding mode
//! and flush-to-zero control) to a result pattern and the five IEEE exception
//! flags. Non-arithmetic operations (moves, compares) never round.

mod addsub;
mod bits;
mod cmp;
mod fmac;
mod mul;
mod recip;
mod round;

pub use addsub::{add_sub, sign_plan, AddOp, SignPlan};
pub use bits::{kogge_stone_add, lzc55, WideMantissa};
pub use cmp::{class_mask, compare, minmax, move_family, ClassBit, CondCode, MinMaxKind, MoveKind};
pub use fmac::{fmac, FmacOp};
pub use mul::{block_multiply, mul};
pub use recip::{div, operand_modifier, recip, recip_unrounded, rom_generate, RecipConstants, RECIP_FRAC_BITS};
pub use round::{round53, GrsState, Rounded};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{BitOr, BitOrAssign};

/// Format parameters of binary64.
pub struct FpFormatParams;

impl FpFormatParams {
    pub const PRECISION: u32 = 53;
    pub const EMAX: i32 = 1023;
    pub const EMIN: i32 = 1 - Self::EMAX;
    pub const BIAS: i32 = 1023;
    pub const EXPONENT_WIDTH: u32 = 11;
}

pub(crate) const SIGN_BIT: u64 = 1 << 63;
pub(crate) const EXP_MASK: u64 = 0x7FF0_0000_0000_0000;
pub(crate) const FRAC_MASK: u64 = (1 << 52) - 1;
pub(crate) const HIDDEN_BIT: u64 = 1 << 52;
pub(crate) const QUIET_BIT: u64 = 1 << 51;

/// A raw IEEE-754 double pattern.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FpBits(pub u64);

impl FpBits {
    pub const ZERO: FpBits = FpBits(0);
    pub const ONE: FpBits = FpBits(0x3FF0_0000_0000_0000);
    pub const INFINITY: FpBits = FpBits(EXP_MASK);
    pub const MAX_FINITE: FpBits = FpBits(0x7FEF_FFFF_FFFF_FFFF);
    /// Quiet NaN supplied whenever a new NaN is created.
    pub const DEFAULT_NAN: FpBits = FpBits(0x7FF8_0000_0000_0000);
    pub const ALL_ONES: FpBits = FpBits(u64::MAX);

    pub fn from_f64(x: f64) -> Self {
        FpBits(x.to_bits())
    }

    pub fn to_f64(self) -> f64 {
        f64::from_bits(self.0)
    }

    pub fn from_parts(sign: bool, biased_exponent: u32, fraction: u64) -> Self {
        debug_assert!(biased_exponent < 0x800 && fraction <= FRAC_MASK);
        FpBits(((sign as u64) << 63) | ((biased_exponent as u64) << 52) | fraction)
    }

    pub fn sign(self) -> bool {
        self.0 & SIGN_BIT != 0
    }

    pub fn biased_exponent(self) -> u32 {
        ((self.0 & EXP_MASK) >> 52) as u32
    }

    pub fn fraction(self) -> u64 {
        self.0 & FRAC_MASK
    }

    pub fn is_nan(self) -> bool {
        self.biased_exponent() == 0x7FF && self.fraction() != 0
    }

    pub fn is_snan(self) -> bool {
        self.is_nan() && self.0 & QUIET_BIT == 0
    }

    pub fn is_qnan(self) -> bool {
        self.is_nan() && self.0 & QUIET_BIT != 0
    }

    pub fn is_infinite(self) -> bool {
        self.0 & !SIGN_BIT == EXP_MASK
    }

    pub fn is_zero(self) -> bool {
        self.0 & !SIGN_BIT == 0
    }

    pub fn is_subnormal(self) -> bool {
        self.biased_exponent() == 0 && self.fraction() != 0
    }

    pub fn quieted(self) -> Self {
        FpBits(self.0 | QUIET_BIT)
    }

    pub fn with_sign(self, sign: bool) -> Self {
        FpBits((self.0 & !SIGN_BIT) | ((sign as u64) << 63))
    }

    pub fn negated(self) -> Self {
        FpBits(self.0 ^ SIGN_BIT)
    }

    pub fn signed_zero(sign: bool) -> Self {
        FpBits::ZERO.with_sign(sign)
    }

    pub fn signed_infinity(sign: bool) -> Self {
        FpBits::INFINITY.with_sign(sign)
    }

    /// Significand and unbiased exponent of a finite nonzero value,
    /// normalized so bit 52 is set. Subnormals come back with an exponent
    /// below `EMIN`.
    pub(crate) fn normalized(self) -> (u64, i32) {
        debug_assert!(!self.is_zero() && !self.is_nan() && !self.is_infinite());
        let e = self.biased_exponent() as i32;
        if e == 0 {
            let f = self.fraction();
            let shift = f.leading_zeros() - 11;
            (f << shift, FpFormatParams::EMIN - shift as i32)
        } else {
            (self.fraction() | HIDDEN_BIT, e - FpFormatParams::BIAS)
        }
    }
}

impl fmt::Debug for FpBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpBits({:#018X})", self.0)
    }
}

impl fmt::Display for FpBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:016X}", self.0)
    }
}

/// Operand classification with the 2008 NaN polarity (quiet bit set = QNaN).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FpClass {
    SignalingNan,
    QuietNan,
    PosInfinity,
    NegInfinity,
    PosNormal,
    NegNormal,
    PosSubnormal,
    NegSubnormal,
    PosZero,
    NegZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub sign: bool,
    pub biased_exponent: u32,
    pub fraction: u64,
    pub class: FpClass,
}

pub fn decode(x: FpBits) -> Decoded {
    let sign = x.sign();
    let e = x.biased_exponent();
    let f = x.fraction();
    let class = match (e, f == 0, sign) {
        (0x7FF, false, _) if f & QUIET_BIT != 0 => FpClass::QuietNan,
        (0x7FF, false, _) => FpClass::SignalingNan,
        (0x7FF, true, false) => FpClass::PosInfinity,
        (0x7FF, true, true) => FpClass::NegInfinity,
        (0, true, false) => FpClass::PosZero,
        (0, true, true) => FpClass::NegZero,
        (0, false, false) => FpClass::PosSubnormal,
        (0, false, true) => FpClass::NegSubnormal,
        (_, _, false) => FpClass::PosNormal,
        (_, _, true) => FpClass::NegNormal,
    };
    Decoded { sign, biased_exponent: e, fraction: f, class }
}

/// FCSR rounding-mode field encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum RoundingMode {
    #[default]
    NearestEven = 0,
    TowardZero = 1,
    TowardPositive = 2,
    TowardNegative = 3,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] = [
        RoundingMode::NearestEven,
        RoundingMode::TowardZero,
        RoundingMode::TowardPositive,
        RoundingMode::TowardNegative,
    ];

    pub fn from_field(rm: u8) -> Option<Self> {
        Self::ALL.get(rm as usize).copied()
    }

    pub fn short_name(self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "RN",
            RoundingMode::TowardZero => "RZ",
            RoundingMode::TowardPositive => "RP",
            RoundingMode::TowardNegative => "RM",
        }
    }
}

impl std::str::FromStr for RoundingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RN" | "0" => Ok(RoundingMode::NearestEven),
            "RZ" | "1" => Ok(RoundingMode::TowardZero),
            "RP" | "2" => Ok(RoundingMode::TowardPositive),
            "RM" | "3" => Ok(RoundingMode::TowardNegative),
            _ => Err(format!("unknown rounding mode `{s}` (expected RN, RZ, RP or RM)")),
        }
    }
}

/// The five IEEE exception conditions, in FCSR flag-field order
/// (bit 0 = inexact ... bit 4 = invalid).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExceptionFlags {
    pub invalid: bool,
    pub div_by_zero: bool,
    pub overflow: bool,
    pub underflow: bool,
    pub inexact: bool,
}

impl ExceptionFlags {
    pub const NONE: ExceptionFlags =
        ExceptionFlags { invalid: false, div_by_zero: false, overflow: false, underflow: false, inexact: false };
    pub const INVALID: ExceptionFlags = ExceptionFlags { invalid: true, ..Self::NONE };
    pub const DIV_BY_ZERO: ExceptionFlags = ExceptionFlags { div_by_zero: true, ..Self::NONE };
    pub const INEXACT: ExceptionFlags = ExceptionFlags { inexact: true, ..Self::NONE };
    pub const OVERFLOW: ExceptionFlags = ExceptionFlags { overflow: true, ..Self::NONE };
    pub const UNDERFLOW: ExceptionFlags = ExceptionFlags { underflow: true, ..Self::NONE };

    pub fn bits(self) -> u8 {
        (self.inexact as u8)
            | (self.underflow as u8) << 1
            | (self.overflow as u8) << 2
            | (self.div_by_zero as u8) << 3
            | (self.invalid as u8) << 4
    }

    pub fn from_bits(b: u8) -> Self {
        ExceptionFlags {
            inexact: b & 1 != 0,
            underflow: b & 2 != 0,
            overflow: b & 4 != 0,
            div_by_zero: b & 8 != 0,
            invalid: b & 16 != 0,
        }
    }

    pub fn any(self) -> bool {
        self.bits() != 0
    }
}

impl BitOr for ExceptionFlags {
    type Output = ExceptionFlags;

    fn bitor(self, rhs: Self) -> Self {
        ExceptionFlags::from_bits(self.bits() | rhs.bits())
    }
}

impl BitOrAssign for ExceptionFlags {
    fn bitor_assign(&mut self, rhs: Self) {
        *self = *self | rhs;
    }
}

impl fmt::Display for ExceptionFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (set, c) in [
            (self.invalid, 'V'),
            (self.div_by_zero, 'Z'),
            (self.overflow, 'O'),
            (self.underflow, 'U'),
            (self.inexact, 'I'),
        ] {
            if set {
                s.push(c);
            }
        }
        if s.is_empty() {
            s.push('-');
        }
        f.write_str(&s)
    }
}

/// A result pattern together with the exceptions it raised.
pub type FpResult = (FpBits, ExceptionFlags);

/// Returns the propagated NaN when any operand is a NaN: the first NaN by
/// operand position, quieted; invalid is raised if any operand signals.
pub(crate) fn propagate_nan(ops: &[FpBits]) -> Option<FpResult> {
    let first = ops.iter().copied().find(|x| x.is_nan())?;
    let flags = if ops.iter().any(|x| x.is_snan()) { ExceptionFlags::INVALID } else { ExceptionFlags::NONE };
    Some((first.quieted(), flags))
}

pub(crate) fn invalid_result() -> FpResult {
    (FpBits::DEFAULT_NAN, ExceptionFlags::INVALID)
}

/// An exact operand delivered as a result still obeys flush-to-zero.
pub(crate) fn deliver_exact(x: FpBits, flush: bool) -> FpResult {
    if flush && x.is_subnormal() {
        (FpBits::signed_zero(x.sign()), ExceptionFlags { underflow: true, inexact: true, ..ExceptionFlags::NONE })
    } else {
        (x, ExceptionFlags::NONE)
    }
}
