//! Helpers shared by the integration suites: oracle adapters and operand
//! generators.
#![allow(dead_code)]

use fpengine::fpcore::{ExceptionFlags, FpBits, RoundingMode};
use fpengine_ref as oracle;
use rand::Rng;

pub mod checks;
pub mod programs;

pub fn oracle_mode(mode: RoundingMode) -> oracle::Mode {
    match mode {
        RoundingMode::NearestEven => oracle::Mode::NearestEven,
        RoundingMode::TowardZero => oracle::Mode::TowardZero,
        RoundingMode::TowardPositive => oracle::Mode::TowardPositive,
        RoundingMode::TowardNegative => oracle::Mode::TowardNegative,
    }
}

pub fn oracle_result(o: oracle::Outcome) -> (FpBits, ExceptionFlags) {
    let f = o.flags;
    (
        FpBits(o.bits),
        ExceptionFlags {
            invalid: f.invalid,
            div_by_zero: f.div_by_zero,
            overflow: f.overflow,
            underflow: f.underflow,
            inexact: f.inexact,
        },
    )
}

/// Class representatives of both signs: zero, smallest and largest
/// subnormal, smallest and largest normal, one, infinity, QNaN, SNaN.
pub fn edge_values() -> Vec<FpBits> {
    let positive = [
        0,
        1,
        0x000F_FFFF_FFFF_FFFF,
        0x0010_0000_0000_0000,
        0x7FEF_FFFF_FFFF_FFFF,
        0x3FF0_0000_0000_0000,
        0x3FF0_0000_0000_0001,
        0x7FF0_0000_0000_0000,
        0x7FF8_0000_0000_0000,
        0x7FF0_0000_0000_0001,
    ];
    positive.iter().flat_map(|&p| [FpBits(p), FpBits(p | 1 << 63)]).collect()
}

/// Random operand. Most draws are finite with exponents clustered so sums
/// cancel and products land near the range limits; the rest are raw bits.
pub fn random_operand<R: Rng>(rng: &mut R, anchor: u32) -> FpBits {
    let sign = (rng.gen::<bool>() as u64) << 63;
    let frac = match rng.gen_range(0..4) {
        0 => rng.gen::<u64>() & ((1 << 52) - 1),
        1 => (1u64 << 52) - 1 - (rng.gen::<u64>() & 0xFF),
        2 => rng.gen::<u64>() & 0xFF,
        _ => rng.gen::<u64>() & ((1 << 52) - 1) & !((1 << rng.gen_range(0..52)) - 1),
    };
    let exp: u64 = match rng.gen_range(0..10) {
        0 => return FpBits(rng.gen()),
        1 => rng.gen_range(0..4),
        2 => rng.gen_range(0x7FB..0x7FF),
        _ => (anchor as i64 + rng.gen_range(-60i64..=60)).clamp(0, 0x7FE) as u64,
    };
    FpBits(sign | exp << 52 | frac)
}

pub fn random_anchor<R: Rng>(rng: &mut R) -> u32 {
    match rng.gen_range(0..8) {
        0 => rng.gen_range(1..120),
        1 => rng.gen_range(0x780..0x7FE),
        _ => rng.gen_range(1..0x7FE),
    }
}

pub fn random_any<R: Rng>(rng: &mut R) -> FpBits {
    let anchor = random_anchor(rng);
    random_operand(rng, anchor)
}
