//! Table-seeded Newton-Raphson reciprocal, and division through it.
//!
//! The seed comes from a 128-entry ROM of `(X_hi + 2^-8)^-2` multiplied by
//! the operand with bits x8..x14 inverted, which is a first-order expansion
//! of `1/X` around the midpoint of the table interval. Two iterations of
//! `x <- x(2 - X x)` in a 2.60 fixed-point accumulator bring the relative
//! error below 2^-52. The rounding step then settles the final bit exactly
//! from the sign of the remainder `1 - X q`.

use super::mul::{block_multiply, round_product};
use super::round::{round_pack, GrsState};
use super::{invalid_result, propagate_nan, ExceptionFlags, FpBits, FpResult, RoundingMode, HIDDEN_BIT};
use std::sync::OnceLock;

pub struct RecipConstants;

impl RecipConstants {
    /// Table index width.
    pub const INDEX_BITS: u32 = 7;
    pub const ENTRIES: usize = 1 << Self::INDEX_BITS;
    /// Significant bits kept from the seed product.
    pub const SEED_BITS: u32 = 16;
    /// Zero bits appended to the seed before the first iteration.
    pub const SEED_PAD_BITS: u32 = 13;
    pub const ITERATIONS: usize = 2;
}

/// Fraction bits of the iteration accumulator.
pub const RECIP_FRAC_BITS: u32 = 60;

/// `rom[a] = floor(2^16 / (1 + a*2^-7 + 2^-8)^2)`, computed exactly as
/// `floor(2^32 / (2a + 257)^2)`.
pub fn rom_generate() -> [u16; RecipConstants::ENTRIES] {
    let mut rom = [0u16; RecipConstants::ENTRIES];
    for (a, slot) in rom.iter_mut().enumerate() {
        let d = 2 * a as u64 + 257;
        *slot = ((1u64 << 32) / (d * d)) as u16;
    }
    rom
}

fn rom() -> &'static [u16; RecipConstants::ENTRIES] {
    static ROM: OnceLock<[u16; RecipConstants::ENTRIES]> = OnceLock::new();
    ROM.get_or_init(rom_generate)
}

/// Inverts bits x8..x14 of the 15-bit window `1.x1..x14`.
pub fn operand_modifier(top15: u16) -> u16 {
    debug_assert!(top15 < 1 << 15);
    (top15 & !0x7F) | (!top15 & 0x7F)
}

/// Unrounded reciprocal of a significand `m` (bit 52 set) as a 2.60
/// fixed-point value approximating `2^52 / m`.
pub fn recip_unrounded(m: u64) -> u64 {
    debug_assert!(m >> 52 == 1);
    let top15 = (m >> 38) as u16;
    let index = (top15 >> 7 & 0x7F) as usize;
    // 0.16 ROM value times the 1.14 modified operand: 30 fraction bits.
    let seed_product = rom()[index] as u64 * operand_modifier(top15) as u64;
    let seed = seed_product >> (30 - RecipConstants::SEED_BITS);
    let mut x = (seed as u128) << (RECIP_FRAC_BITS - RecipConstants::SEED_BITS);

    let operand = (m as u128) << (RECIP_FRAC_BITS - 52);
    let two = 2u128 << RECIP_FRAC_BITS;
    for _ in 0..RecipConstants::ITERATIONS {
        let error_term = (operand * x) >> RECIP_FRAC_BITS;
        x = (x * (two - error_term)) >> RECIP_FRAC_BITS;
    }
    x as u64
}

/// Quotient `2^107 / m` (55 bits: 53-bit significand of `2/m` plus guard
/// and round) with a sticky remainder flag. Requires `m > 2^52`.
fn reciprocal_bits(m: u64) -> (u64, GrsState) {
    let x = recip_unrounded(m) as u128;
    let m = m as u128;
    let num = 1u128 << 107;
    let mut q = x >> (RECIP_FRAC_BITS - 55);
    while q * m > num {
        q -= 1;
    }
    while (q + 1) * m <= num {
        q += 1;
    }
    let sticky = q * m != num;
    debug_assert!(q >> 54 == 1);
    let q = q as u64;
    (q >> 2, GrsState::new(q & 2 != 0, q & 1 != 0, sticky))
}

/// Reciprocal of a finite nonzero operand as (significand, exponent, grs),
/// before final rounding.
fn reciprocal_parts(a: FpBits) -> (u64, i32, GrsState) {
    let (m, e) = a.normalized();
    if m == HIDDEN_BIT {
        (HIDDEN_BIT, -e, GrsState::default())
    } else {
        let (sig, grs) = reciprocal_bits(m);
        (sig, -e - 1, grs)
    }
}

pub fn recip(a: FpBits, mode: RoundingMode, flush: bool) -> FpResult {
    if let Some(nan) = propagate_nan(&[a]) {
        return nan;
    }
    if a.is_zero() {
        return (FpBits::signed_infinity(a.sign()), ExceptionFlags::DIV_BY_ZERO);
    }
    if a.is_infinite() {
        return (FpBits::signed_zero(a.sign()), ExceptionFlags::NONE);
    }
    let (sig, exp, grs) = reciprocal_parts(a);
    round_pack(a.sign(), exp, sig, grs, mode, flush)
}

/// `a / b` computed as `a * recip(b)`: the reciprocal is rounded to 53 bits
/// (nearest-even, exponent kept unbounded) and multiplied through the
/// regular multiplier, so the quotient is rounded twice.
pub fn div(a: FpBits, b: FpBits, mode: RoundingMode, flush: bool) -> FpResult {
    if let Some(nan) = propagate_nan(&[a, b]) {
        return nan;
    }
    let sign = a.sign() ^ b.sign();
    if (a.is_zero() && b.is_zero()) || (a.is_infinite() && b.is_infinite()) {
        return invalid_result();
    }
    if a.is_infinite() {
        return (FpBits::signed_infinity(sign), ExceptionFlags::NONE);
    }
    if b.is_infinite() || a.is_zero() {
        return (FpBits::signed_zero(sign), ExceptionFlags::NONE);
    }
    if b.is_zero() {
        return (FpBits::signed_infinity(sign), ExceptionFlags::DIV_BY_ZERO);
    }

    let (rsig, rexp, rgrs) = reciprocal_parts(b);
    let rounded = super::round53(rsig, rgrs, RoundingMode::NearestEven, false);
    let (rsig, rexp) = if rounded.carry { (HIDDEN_BIT, rexp + 1) } else { (rounded.sig, rexp) };

    let (ma, ea) = a.normalized();
    let (bits, mut flags) = round_product(sign, ea + rexp, block_multiply(ma, rsig), mode, flush);
    if rounded.inexact && !flags.overflow && !(flush && bits.is_zero()) {
        flags.inexact = true;
    }
    (bits, flags)
}
