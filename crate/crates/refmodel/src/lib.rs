//! Arbitrary-precision reference for IEEE-754 binary64 arithmetic.
//!
//! Every operation computes the exact mathematical result with big integers
//! and then rounds it once. Nothing here shares code with the hardware-style
//! datapaths in `fpengine`; the two are compared bit-for-bit by the test
//! suites and by `fpengine selftest`.
//!
//! Conventions (shared with the engine by agreement, not by code):
//! - tininess is detected after rounding; underflow is raised only when the
//!   result is tiny and inexact;
//! - with flush enabled every tiny nonzero result becomes a same-signed zero
//!   and raises underflow and inexact;
//! - a NaN operand is propagated (first NaN by operand position, quieted);
//!   any signaling NaN operand raises invalid;
//! - newly created NaNs are `0x7FF8_0000_0000_0000`.

use num_bigint::{BigInt, BigUint, Sign};
use std::cmp::Ordering;

pub const DEFAULT_NAN: u64 = 0x7FF8_0000_0000_0000;
const SIGN: u64 = 1 << 63;
const EXP_MASK: u64 = 0x7FF0_0000_0000_0000;
const FRAC_MASK: u64 = (1 << 52) - 1;
const QUIET_BIT: u64 = 1 << 51;
const MAX_FINITE: u64 = 0x7FEF_FFFF_FFFF_FFFF;
const INF: u64 = EXP_MASK;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    NearestEven,
    TowardZero,
    TowardPositive,
    TowardNegative,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::NearestEven, Mode::TowardZero, Mode::TowardPositive, Mode::TowardNegative];
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub invalid: bool,
    pub div_by_zero: bool,
    pub overflow: bool,
    pub underflow: bool,
    pub inexact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub bits: u64,
    pub flags: Flags,
}

impl Outcome {
    fn exact(bits: u64) -> Self {
        Outcome { bits, flags: Flags::default() }
    }

    fn invalid() -> Self {
        Outcome { bits: DEFAULT_NAN, flags: Flags { invalid: true, ..Flags::default() } }
    }
}

fn is_nan(x: u64) -> bool {
    x & EXP_MASK == EXP_MASK && x & FRAC_MASK != 0
}

fn is_snan(x: u64) -> bool {
    is_nan(x) && x & QUIET_BIT == 0
}

fn is_inf(x: u64) -> bool {
    x & !SIGN == INF
}

fn is_zero(x: u64) -> bool {
    x & !SIGN == 0
}

fn sign_of(x: u64) -> bool {
    x & SIGN != 0
}

fn signed_zero(neg: bool) -> u64 {
    if neg {
        SIGN
    } else {
        0
    }
}

fn signed_inf(neg: bool) -> u64 {
    signed_zero(neg) | INF
}

fn nan_operand(ops: &[u64]) -> Option<Outcome> {
    let first = ops.iter().copied().find(|&x| is_nan(x))?;
    Some(Outcome {
        bits: first | QUIET_BIT,
        flags: Flags { invalid: ops.iter().any(|&x| is_snan(x)), ..Flags::default() },
    })
}

/// Finite value `mag * 2^exp` (mag may be zero).
fn finite_parts(x: u64) -> (BigUint, i64) {
    let e = ((x & EXP_MASK) >> 52) as i64;
    let f = x & FRAC_MASK;
    if e == 0 {
        (BigUint::from(f), -1074)
    } else {
        (BigUint::from(f | (1 << 52)), e - 1075)
    }
}

fn finite_signed(x: u64) -> (BigInt, i64) {
    let (m, e) = finite_parts(x);
    let s = if sign_of(x) { Sign::Minus } else { Sign::Plus };
    (BigInt::from_biguint(s, m), e)
}

fn round_up(mode: Mode, neg: bool, lsb_odd: bool, cmp_half: Ordering, has_rem: bool) -> bool {
    if !has_rem {
        return false;
    }
    match mode {
        Mode::NearestEven => match cmp_half {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => lsb_odd,
        },
        Mode::TowardZero => false,
        Mode::TowardPositive => !neg,
        Mode::TowardNegative => neg,
    }
}

/// Rounds `mag * 2^exp` to an integer multiple of `2^quantum`.
/// Returns (multiple, inexact).
fn round_to_quantum(mag: &BigUint, exp: i64, quantum: i64, mode: Mode, neg: bool) -> (BigUint, bool) {
    if exp >= quantum {
        return (mag << ((exp - quantum) as usize), false);
    }
    let shift = (quantum - exp) as usize;
    let q = mag >> shift;
    let rem = mag - (&q << shift);
    let has_rem = rem != BigUint::ZERO;
    let half = BigUint::from(1u8) << (shift - 1);
    let lsb_odd = q.bit(0);
    let up = round_up(mode, neg, lsb_odd, rem.cmp(&half), has_rem);
    (if up { q + 1u8 } else { q }, has_rem)
}

/// Rounds a nonzero exact value to binary64.
fn round_finite(neg: bool, mag: &BigUint, exp: i64, mode: Mode, flush: bool) -> Outcome {
    debug_assert!(*mag != BigUint::ZERO);
    let lead = exp + mag.bits() as i64 - 1;

    // Unbounded-exponent rounding decides tininess.
    let (m_unb, _) = round_to_quantum(mag, exp, lead - 52, mode, neg);
    let lead_unb = if m_unb.bits() > 53 { lead + 1 } else { lead };
    let tiny = lead_unb < -1022;

    let quantum = if lead >= -1022 { lead - 52 } else { -1074 };
    let (mut m, inexact) = round_to_quantum(mag, exp, quantum, mode, neg);
    let mut q = quantum;
    if m.bits() > 53 {
        m >>= 1usize;
        q += 1;
    }

    let mut flags = Flags { inexact, ..Flags::default() };
    if flush && tiny {
        flags.underflow = true;
        flags.inexact = true;
        return Outcome { bits: signed_zero(neg), flags };
    }
    if tiny && inexact {
        flags.underflow = true;
    }

    let m64: u64 = m.iter_u64_digits().next().unwrap_or(0);
    let bits = if m64 >= 1 << 52 {
        let e = q + 52;
        if e > 1023 {
            return overflow(neg, mode);
        }
        (((e + 1023) as u64) << 52) | (m64 & FRAC_MASK)
    } else {
        debug_assert_eq!(q, -1074);
        m64
    };
    Outcome { bits: bits | signed_zero(neg), flags }
}

fn overflow(neg: bool, mode: Mode) -> Outcome {
    let to_inf = match mode {
        Mode::NearestEven => true,
        Mode::TowardZero => false,
        Mode::TowardPositive => !neg,
        Mode::TowardNegative => neg,
    };
    let mag = if to_inf { INF } else { MAX_FINITE };
    Outcome { bits: mag | signed_zero(neg), flags: Flags { overflow: true, inexact: true, ..Flags::default() } }
}

/// Rounds an exact signed value; an exact zero takes `zero_sign`.
fn round_signed(v: &BigInt, exp: i64, mode: Mode, flush: bool, zero_sign: bool) -> Outcome {
    if v.sign() == Sign::NoSign {
        return Outcome::exact(signed_zero(zero_sign));
    }
    round_finite(v.sign() == Sign::Minus, v.magnitude(), exp, mode, flush)
}

/// Passes an exact operand through the flush rule.
fn deliver_exact(x: u64, flush: bool) -> Outcome {
    let subnormal = x & EXP_MASK == 0 && x & FRAC_MASK != 0;
    if flush && subnormal {
        Outcome { bits: x & SIGN, flags: Flags { underflow: true, inexact: true, ..Flags::default() } }
    } else {
        Outcome::exact(x)
    }
}

fn exact_sum(a: (BigInt, i64), b: (BigInt, i64)) -> (BigInt, i64) {
    let e = a.1.min(b.1);
    let va = a.0 << ((a.1 - e) as usize);
    let vb = b.0 << ((b.1 - e) as usize);
    (va + vb, e)
}

pub fn add(a: u64, b: u64, mode: Mode, flush: bool) -> Outcome {
    if let Some(n) = nan_operand(&[a, b]) {
        return n;
    }
    match (is_inf(a), is_inf(b)) {
        (true, true) if sign_of(a) != sign_of(b) => return Outcome::invalid(),
        (true, _) => return Outcome::exact(a),
        (_, true) => return Outcome::exact(b),
        _ => {}
    }
    if is_zero(a) && is_zero(b) {
        let neg = if sign_of(a) == sign_of(b) { sign_of(a) } else { mode == Mode::TowardNegative };
        return Outcome::exact(signed_zero(neg));
    }
    let (v, e) = exact_sum(finite_signed(a), finite_signed(b));
    round_signed(&v, e, mode, flush, mode == Mode::TowardNegative)
}

pub fn sub(a: u64, b: u64, mode: Mode, flush: bool) -> Outcome {
    if let Some(n) = nan_operand(&[a, b]) {
        return n;
    }
    add(a, b ^ SIGN, mode, flush)
}

pub fn mul(a: u64, b: u64, mode: Mode, flush: bool) -> Outcome {
    if let Some(n) = nan_operand(&[a, b]) {
        return n;
    }
    let neg = sign_of(a) != sign_of(b);
    if (is_inf(a) && is_zero(b)) || (is_zero(a) && is_inf(b)) {
        return Outcome::invalid();
    }
    if is_inf(a) || is_inf(b) {
        return Outcome::exact(signed_inf(neg));
    }
    if is_zero(a) || is_zero(b) {
        return Outcome::exact(signed_zero(neg));
    }
    let (ma, ea) = finite_parts(a);
    let (mb, eb) = finite_parts(b);
    round_finite(neg, &(ma * mb), ea + eb, mode, flush)
}

/// `a * b + c`, or `a * b - c` when `negate_addend` is set, with one rounding.
pub fn fma(a: u64, b: u64, c: u64, negate_addend: bool, mode: Mode, flush: bool) -> Outcome {
    if let Some(n) = nan_operand(&[a, b, c]) {
        return n;
    }
    let c = if negate_addend { c ^ SIGN } else { c };
    let prod_neg = sign_of(a) != sign_of(b);
    if (is_inf(a) && is_zero(b)) || (is_zero(a) && is_inf(b)) {
        return Outcome::invalid();
    }
    if is_inf(a) || is_inf(b) {
        if is_inf(c) && sign_of(c) != prod_neg {
            return Outcome::invalid();
        }
        return Outcome::exact(signed_inf(prod_neg));
    }
    if is_inf(c) {
        return Outcome::exact(c);
    }
    let prod_zero = is_zero(a) || is_zero(b);
    if prod_zero && is_zero(c) {
        let neg = if prod_neg == sign_of(c) { prod_neg } else { mode == Mode::TowardNegative };
        return Outcome::exact(signed_zero(neg));
    }
    if prod_zero {
        return deliver_exact(c, flush);
    }
    let (ma, ea) = finite_signed(a);
    let (mb, eb) = finite_signed(b);
    let prod = (ma * mb, ea + eb);
    let (v, e) = exact_sum(prod, finite_signed(c));
    round_signed(&v, e, mode, flush, mode == Mode::TowardNegative)
}

/// Correctly rounded `a / b`.
pub fn div(a: u64, b: u64, mode: Mode, flush: bool) -> Outcome {
    if let Some(n) = nan_operand(&[a, b]) {
        return n;
    }
    let neg = sign_of(a) != sign_of(b);
    if (is_zero(a) && is_zero(b)) || (is_inf(a) && is_inf(b)) {
        return Outcome::invalid();
    }
    if is_inf(a) {
        return Outcome::exact(signed_inf(neg));
    }
    if is_inf(b) || is_zero(a) {
        return Outcome::exact(signed_zero(neg));
    }
    if is_zero(b) {
        return Outcome { bits: signed_inf(neg), flags: Flags { div_by_zero: true, ..Flags::default() } };
    }
    let (ma, ea) = finite_parts(a);
    let (mb, eb) = finite_parts(b);
    let k = 64 + mb.bits() as usize;
    let num = ma << k;
    let q = &num / &mb;
    let sticky = &q * &mb != num;
    // Append the sticky bit below a quotient of at least 64 bits.
    let mag = (q << 1usize) + if sticky { 1u8 } else { 0u8 };
    round_finite(neg, &mag, ea - eb - k as i64 - 1, mode, flush)
}

/// Correctly rounded `1 / a`.
pub fn recip(a: u64, mode: Mode, flush: bool) -> Outcome {
    div(0x3FF0_0000_0000_0000, a, mode, flush)
}

/// Distance between two finite patterns in units in the last place,
/// counted along the ordered sequence of representable values.
pub fn ulp_distance(a: u64, b: u64) -> u64 {
    fn ordered(x: u64) -> i128 {
        if x & SIGN != 0 {
            -((x & !SIGN) as i128)
        } else {
            x as i128
        }
    }
    (ordered(a) - ordered(b)).unsigned_abs() as u64
}
