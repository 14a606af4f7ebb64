use super::{ExceptionFlags, FpBits, FpFormatParams, FpResult, RoundingMode, FRAC_MASK, HIDDEN_BIT};

const SIG_MASK: u64 = (1 << 53) - 1;

/// Guard, round and sticky bits below a 53-bit working significand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GrsState {
    pub guard: bool,
    pub round: bool,
    pub sticky: bool,
}

impl GrsState {
    pub fn new(guard: bool, round: bool, sticky: bool) -> Self {
        GrsState { guard, round, sticky }
    }

    pub fn any(self) -> bool {
        self.guard | self.round | self.sticky
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rounded {
    /// Rounded significand; zero when `carry` is set.
    pub sig: u64,
    /// The increment overflowed 53 bits.
    pub carry: bool,
    pub inexact: bool,
}

pub fn round53(sig: u64, grs: GrsState, mode: RoundingMode, sign: bool) -> Rounded {
    debug_assert!(sig <= SIG_MASK);
    let inexact = grs.any();
    let increment = match mode {
        RoundingMode::NearestEven => grs.guard && (grs.round || grs.sticky || sig & 1 == 1),
        RoundingMode::TowardZero => false,
        RoundingMode::TowardPositive => inexact && !sign,
        RoundingMode::TowardNegative => inexact && sign,
    };
    let sum = sig + increment as u64;
    Rounded { sig: sum & SIG_MASK, carry: sum > SIG_MASK, inexact }
}

/// Shifts `sig.G R` right by `n`, OR-ing everything pushed past R into sticky.
pub(crate) fn shift_right_jam(sig: u64, grs: GrsState, n: u32) -> (u64, GrsState) {
    let ext = (sig << 2) | ((grs.guard as u64) << 1) | grs.round as u64;
    let (shifted, lost) = if n >= 64 { (0, ext != 0) } else { (ext >> n, ext & ((1u64 << n) - 1) != 0) };
    (shifted >> 2, GrsState { guard: shifted & 2 != 0, round: shifted & 1 != 0, sticky: grs.sticky || lost })
}

pub(crate) fn overflow_result(sign: bool, mode: RoundingMode) -> FpResult {
    let to_infinity = match mode {
        RoundingMode::NearestEven => true,
        RoundingMode::TowardZero => false,
        RoundingMode::TowardPositive => !sign,
        RoundingMode::TowardNegative => sign,
    };
    let mag = if to_infinity { FpBits::INFINITY } else { FpBits::MAX_FINITE };
    (mag.with_sign(sign), ExceptionFlags { overflow: true, inexact: true, ..ExceptionFlags::NONE })
}

/// Rounds and packs `sig * 2^(exp - 52)` where `sig` has bit 52 set and `exp`
/// is an unbounded exponent.
///
/// Tininess is judged after rounding with an unbounded exponent; values below
/// the normal range are then denormalized and rounded a second time at the
/// subnormal quantum, which is the result actually delivered.
pub(crate) fn round_pack(sign: bool, exp: i32, sig: u64, grs: GrsState, mode: RoundingMode, flush: bool) -> FpResult {
    debug_assert!(sig & HIDDEN_BIT != 0 && sig <= SIG_MASK, "unnormalized {sig:#x}");
    let r = round53(sig, grs, mode, sign);
    let (rsig, rexp) = if r.carry { (HIDDEN_BIT, exp + 1) } else { (r.sig, exp) };

    if exp >= FpFormatParams::EMIN {
        if rexp > FpFormatParams::EMAX {
            return overflow_result(sign, mode);
        }
        let biased = (rexp + FpFormatParams::BIAS) as u32;
        let flags = ExceptionFlags { inexact: r.inexact, ..ExceptionFlags::NONE };
        return (FpBits::from_parts(sign, biased, rsig & FRAC_MASK), flags);
    }

    let tiny = rexp < FpFormatParams::EMIN;
    let shift = (FpFormatParams::EMIN - exp) as u32;
    let (dsig, dgrs) = shift_right_jam(sig, grs, shift);
    let d = round53(dsig, dgrs, mode, sign);
    debug_assert!(!d.carry);

    if flush && tiny {
        return (FpBits::signed_zero(sign), ExceptionFlags { underflow: true, inexact: true, ..ExceptionFlags::NONE });
    }
    let flags = ExceptionFlags { inexact: d.inexact, underflow: tiny && d.inexact, ..ExceptionFlags::NONE };
    // A carry into bit 52 lands in the exponent field as the smallest normal.
    (FpBits(((sign as u64) << 63) | d.sig), flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RoundingMode::*;

    #[test]
    fn tie_goes_to_even() {
        let g = GrsState::new(true, false, false);
        let r = round53(HIDDEN_BIT | 0b10, g, NearestEven, false);
        assert_eq!(r.sig, HIDDEN_BIT | 0b10);
        assert!(r.inexact);
        let r = round53(HIDDEN_BIT | 0b11, g, NearestEven, false);
        assert_eq!(r.sig, HIDDEN_BIT | 0b100);
    }

    #[test]
    fn above_half_increments() {
        let r = round53(HIDDEN_BIT | 0b10, GrsState::new(true, true, false), NearestEven, false);
        assert_eq!(r.sig, HIDDEN_BIT | 0b11);
        assert!(r.inexact);
    }

    #[test]
    fn toward_zero_truncates() {
        let r = round53(HIDDEN_BIT | 5, GrsState::new(true, false, false), TowardZero, false);
        assert_eq!(r.sig, HIDDEN_BIT | 5);
        assert!(r.inexact);
    }

    #[test]
    fn directed_modes_follow_sign() {
        let g = GrsState::new(false, false, true);
        assert_eq!(round53(HIDDEN_BIT, g, TowardPositive, false).sig, HIDDEN_BIT + 1);
        assert_eq!(round53(HIDDEN_BIT, g, TowardPositive, true).sig, HIDDEN_BIT);
        assert_eq!(round53(HIDDEN_BIT, g, TowardNegative, true).sig, HIDDEN_BIT + 1);
        assert_eq!(round53(HIDDEN_BIT, g, TowardNegative, false).sig, HIDDEN_BIT);
    }

    #[test]
    fn carry_out_of_53_bits() {
        let r = round53(SIG_MASK, GrsState::new(true, true, true), NearestEven, false);
        assert!(r.carry);
        assert_eq!(r.sig, 0);
    }

    #[test]
    fn exact_is_untouched_in_every_mode() {
        for mode in RoundingMode::ALL {
            let r = round53(HIDDEN_BIT | 7, GrsState::default(), mode, true);
            assert_eq!(r, Rounded { sig: HIDDEN_BIT | 7, carry: false, inexact: false });
        }
    }

    #[test]
    fn jam_collects_sticky() {
        let (s, g) = shift_right_jam(0b1011, GrsState::default(), 3);
        assert_eq!(s, 0b1);
        assert_eq!(g, GrsState::new(false, true, true));
        let (s, g) = shift_right_jam(HIDDEN_BIT, GrsState::default(), 200);
        assert_eq!(s, 0);
        assert!(g.sticky && !g.guard && !g.round);
    }

    #[test]
    fn overflow_by_mode() {
        assert_eq!(overflow_result(false, NearestEven).0, FpBits::INFINITY);
        assert_eq!(overflow_result(true, TowardZero).0, FpBits::MAX_FINITE.negated());
        assert_eq!(overflow_result(true, TowardPositive).0, FpBits::MAX_FINITE.negated());
        assert_eq!(overflow_result(false, TowardNegative).0, FpBits::MAX_FINITE);
        assert_eq!(overflow_result(true, TowardNegative).0, FpBits::INFINITY.negated());
    }

    #[test]
    fn pack_subnormal_and_flush() {
        // 1.0 * 2^-1074 is the smallest subnormal and exact.
        let (r, f) = round_pack(false, -1074, HIDDEN_BIT, GrsState::default(), NearestEven, false);
        assert_eq!(r, FpBits(1));
        assert!(!f.any());
        let (r, f) = round_pack(true, -1074, HIDDEN_BIT, GrsState::default(), NearestEven, true);
        assert_eq!(r, FpBits::signed_zero(true));
        assert!(f.underflow && f.inexact);
    }
}
