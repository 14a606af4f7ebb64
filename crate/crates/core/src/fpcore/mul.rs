use super::round::{round_pack, GrsState};
use super::{invalid_result, propagate_nan, ExceptionFlags, FpBits, FpResult, RoundingMode};

const BLOCK_BITS: u32 = 18;
const BLOCK_MASK: u64 = (1 << BLOCK_BITS) - 1;

/// 53x53-bit significand product assembled from 18x18-bit partial products,
/// three blocks per operand.
pub fn block_multiply(x: u64, y: u64) -> u128 {
    debug_assert!(x < 1 << 54 && y < 1 << 54);
    let xs = [x & BLOCK_MASK, x >> 18 & BLOCK_MASK, x >> 36 & BLOCK_MASK];
    let ys = [y & BLOCK_MASK, y >> 18 & BLOCK_MASK, y >> 36 & BLOCK_MASK];
    let mut acc: u128 = 0;
    for (i, &xi) in xs.iter().enumerate() {
        for (j, &yj) in ys.iter().enumerate() {
            let partial = (xi * yj) as u128;
            acc += partial << (BLOCK_BITS as usize * (i + j));
        }
    }
    acc
}

/// Rounds a full-width product `prod * 2^(exp - 104)` where `prod` is the
/// product of two significands with bit 52 set.
pub(crate) fn round_product(sign: bool, exp: i32, prod: u128, mode: RoundingMode, flush: bool) -> FpResult {
    debug_assert!(prod >> 104 != 0 && prod >> 106 == 0);
    let (shift, exp) = if prod >> 105 != 0 { (53, exp + 1) } else { (52, exp) };
    let sig = (prod >> shift) as u64;
    let guard = prod >> (shift - 1) & 1 != 0;
    let round = prod >> (shift - 2) & 1 != 0;
    let sticky = prod & ((1u128 << (shift - 2)) - 1) != 0;
    round_pack(sign, exp, sig, GrsState::new(guard, round, sticky), mode, flush)
}

pub fn mul(a: FpBits, b: FpBits, mode: RoundingMode, flush: bool) -> FpResult {
    if let Some(nan) = propagate_nan(&[a, b]) {
        return nan;
    }
    let sign = a.sign() ^ b.sign();
    if (a.is_infinite() && b.is_zero()) || (a.is_zero() && b.is_infinite()) {
        return invalid_result();
    }
    if a.is_infinite() || b.is_infinite() {
        return (FpBits::signed_infinity(sign), ExceptionFlags::NONE);
    }
    if a.is_zero() || b.is_zero() {
        return (FpBits::signed_zero(sign), ExceptionFlags::NONE);
    }
    // Two subnormals: the product lies far below the smallest subnormal, so
    // only the sticky bit survives.
    if a.is_subnormal() && b.is_subnormal() {
        return round_pack(sign, -2 * 1074, super::HIDDEN_BIT, GrsState::new(false, false, true), mode, flush);
    }
    let (ma, ea) = a.normalized();
    let (mb, eb) = b.normalized();
    round_product(sign, ea + eb, block_multiply(ma, mb), mode, flush)
}
