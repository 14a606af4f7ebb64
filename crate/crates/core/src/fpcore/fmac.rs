//! Fused multiply-add with a single rounding.
//!
//! The full 106-bit product and the addend are placed in a 128-bit window
//! with their leading bits at position 125. The smaller term is shifted
//! right with a sticky bit; an effective subtraction uses the same borrow
//! trick as the adder, so once a sticky bit exists at most one leading bit
//! can cancel and the 72 bits below the significand are never short.

use super::mul::block_multiply;
use super::round::{round_pack, GrsState};
use super::{deliver_exact, invalid_result, propagate_nan, ExceptionFlags, FpBits, FpResult, RoundingMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FmacOp {
    /// `a * b + c`
    Madd,
    /// `a * b - c`
    Msub,
}

const TOP: u32 = 125;
const LOW_MASK: u128 = (1 << 71) - 1;

fn shift_right_sticky(x: u128, n: u32) -> (u128, bool) {
    if n >= 128 {
        (0, x != 0)
    } else {
        (x >> n, x & ((1u128 << n) - 1) != 0)
    }
}

pub fn fmac(a: FpBits, b: FpBits, c: FpBits, op: FmacOp, mode: RoundingMode, flush: bool) -> FpResult {
    if let Some(nan) = propagate_nan(&[a, b, c]) {
        return nan;
    }
    let c = if op == FmacOp::Msub { c.negated() } else { c };
    let prod_sign = a.sign() ^ b.sign();

    if (a.is_infinite() && b.is_zero()) || (a.is_zero() && b.is_infinite()) {
        return invalid_result();
    }
    if a.is_infinite() || b.is_infinite() {
        if c.is_infinite() && c.sign() != prod_sign {
            return invalid_result();
        }
        return (FpBits::signed_infinity(prod_sign), ExceptionFlags::NONE);
    }
    if c.is_infinite() {
        return (c, ExceptionFlags::NONE);
    }
    let prod_zero = a.is_zero() || b.is_zero();
    if prod_zero && c.is_zero() {
        let sign = if prod_sign == c.sign() { prod_sign } else { mode == RoundingMode::TowardNegative };
        return (FpBits::signed_zero(sign), ExceptionFlags::NONE);
    }
    if prod_zero {
        return deliver_exact(c, flush);
    }

    let (ma, ea) = a.normalized();
    let (mb, eb) = b.normalized();
    let prod = block_multiply(ma, mb);
    let prod_msb = 127 - prod.leading_zeros();
    // Exponent of bit TOP for each term.
    let p_exp = ea + eb - 104 + prod_msb as i32;
    let p_win = prod << (TOP - prod_msb);

    if c.is_zero() {
        return pack_window(prod_sign, p_exp, p_win, false, mode, flush);
    }
    let (mc, ec) = c.normalized();
    let c_win = (mc as u128) << (TOP - 52);

    let prod_larger = (p_exp, p_win) >= (ec, c_win);
    let (big, big_exp, big_sign, small, small_exp) =
        if prod_larger { (p_win, p_exp, prod_sign, c_win, ec) } else { (c_win, ec, c.sign(), p_win, p_exp) };
    let gap = (big_exp - small_exp) as u32;
    let (aligned, sticky) = shift_right_sticky(small, gap);

    let sum = if prod_sign == c.sign() { big + aligned } else { big - aligned - sticky as u128 };
    if sum == 0 && !sticky {
        return (FpBits::signed_zero(mode == RoundingMode::TowardNegative), ExceptionFlags::NONE);
    }

    let msb = 127 - sum.leading_zeros();
    let (win, sticky) = if msb > TOP {
        (sum >> 1, sticky || sum & 1 != 0)
    } else {
        debug_assert!(!sticky || TOP - msb <= 1);
        (sum << (TOP - msb), sticky)
    };
    let exp = big_exp + msb as i32 - TOP as i32;
    pack_window(big_sign, exp, win, sticky, mode, flush)
}

/// Rounds a window with its leading bit at `TOP` and value
/// `win * 2^(exp - TOP)`.
fn pack_window(sign: bool, exp: i32, win: u128, sticky: bool, mode: RoundingMode, flush: bool) -> FpResult {
    debug_assert!(win >> TOP == 1);
    let sig = (win >> 73) as u64;
    let grs = GrsState::new(win >> 72 & 1 != 0, win >> 71 & 1 != 0, sticky || win & LOW_MASK != 0);
    round_pack(sign, exp, sig, grs, mode, flush)
}
