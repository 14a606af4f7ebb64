//! Adder and leading-zero counter used by the add/subtract datapath.

use super::FpBits;

pub(crate) const MASK55: u64 = (1 << 55) - 1;

/// 55-bit mantissa: `[54]` hidden bit, `[53:2]` fraction, `[1:0]` guard zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WideMantissa(pub u64);

impl WideMantissa {
    pub fn from_operand(x: FpBits) -> Self {
        let hidden = (x.biased_exponent() != 0) as u64;
        WideMantissa((hidden << 54) | (x.fraction() << 2))
    }

    pub fn normalized(self) -> bool {
        self.0 >> 54 & 1 == 1
    }
}

/// Parallel-prefix (Kogge-Stone) addition of two 55-bit vectors.
/// Bit 55 of the result is the carry out.
pub fn kogge_stone_add(x: u64, y: u64, carry_in: bool) -> u64 {
    debug_assert!(x <= MASK55 && y <= MASK55);
    let generate = x & y;
    let propagate = x ^ y;
    // Position 0 of the prefix network is the carry-in.
    let mut g = (generate << 1) | carry_in as u64;
    let mut p = propagate << 1;
    let mut span = 1;
    while span < 56 {
        g |= p & (g << span);
        p &= p << span;
        span <<= 1;
    }
    let carries = g & ((1 << 56) - 1);
    let sum = propagate ^ (carries & MASK55);
    sum | (carries >> 55 & 1) << 55
}

/// Leading zeros of a 55-bit vector (55 for zero), via a halving tree.
pub fn lzc55(v: u64) -> u32 {
    debug_assert!(v <= MASK55);
    let mut x = v << 9;
    if x == 0 {
        return 55;
    }
    let mut n = 0;
    for width in [32u32, 16, 8, 4, 2, 1] {
        if x >> (64 - width) == 0 {
            n += width;
            x <<= width;
        }
    }
    n
}
