use super::bits::{kogge_stone_add, lzc55, WideMantissa, MASK55};
use super::round::{round_pack, GrsState};
use super::{
    deliver_exact, invalid_result, propagate_nan, ExceptionFlags, FpBits, FpFormatParams, FpResult, RoundingMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AddOp {
    Add,
    Sub,
}

/// Operation and operand signs rewritten so the magnitude datapath never
/// produces a negative result. The result takes the sign of the operand with
/// the larger magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignPlan {
    pub effective: AddOp,
    pub sign1: bool,
    pub sign2: bool,
}

impl SignPlan {
    pub fn result_sign(self, first_is_larger: bool) -> bool {
        if first_is_larger {
            self.sign1
        } else {
            self.sign2
        }
    }
}

pub fn sign_plan(op: AddOp, s1: bool, s2: bool) -> SignPlan {
    use AddOp::*;
    let (effective, sign1, sign2) = match (op, s1, s2) {
        (Add, false, false) => (Add, false, false),
        (Add, false, true) => (Sub, false, true),
        (Add, true, false) => (Sub, true, false),
        (Add, true, true) => (Add, true, true),
        (Sub, false, false) => (Sub, false, true),
        (Sub, false, true) => (Add, false, false),
        (Sub, true, false) => (Add, true, true),
        (Sub, true, true) => (Sub, true, false),
    };
    SignPlan { effective, sign1, sign2 }
}

/// Aligns a 55-bit mantissa right by `shift`, returning the shifted vector
/// and whether any set bit fell off the end.
fn align(m: u64, shift: u32) -> (u64, bool) {
    if shift >= 55 {
        (0, m != 0)
    } else {
        (m >> shift, m & ((1u64 << shift) - 1) != 0)
    }
}

pub fn add_sub(a: FpBits, b: FpBits, op: AddOp, mode: RoundingMode, flush: bool) -> FpResult {
    // Initial conditions: NaN, infinity and zero operands finish early.
    if let Some(nan) = propagate_nan(&[a, b]) {
        return nan;
    }
    let plan = sign_plan(op, a.sign(), b.sign());
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) if plan.effective == AddOp::Sub => return invalid_result(),
        (true, _) => return (FpBits::signed_infinity(plan.sign1), ExceptionFlags::NONE),
        (_, true) => return (FpBits::signed_infinity(plan.sign2), ExceptionFlags::NONE),
        _ => {}
    }
    match (a.is_zero(), b.is_zero()) {
        (true, true) => {
            let sign = match plan.effective {
                AddOp::Add => plan.sign1,
                AddOp::Sub => mode == RoundingMode::TowardNegative,
            };
            return (FpBits::signed_zero(sign), ExceptionFlags::NONE);
        }
        (true, false) => return deliver_exact(b.with_sign(plan.sign2), flush),
        (false, true) => return deliver_exact(a.with_sign(plan.sign1), flush),
        _ => {}
    }

    // Subnormals take effective exponent 1 so the difference is already
    // adjusted for their missing hidden bit.
    let ea = a.biased_exponent().max(1) as i32;
    let eb = b.biased_exponent().max(1) as i32;
    let ma = WideMantissa::from_operand(a).0;
    let mb = WideMantissa::from_operand(b).0;

    let first_larger = (ea, ma) >= (eb, mb);
    let (e_big, m_big, e_small, m_small) = if first_larger { (ea, ma, eb, mb) } else { (eb, mb, ea, ma) };
    let sign = plan.result_sign(first_larger);

    let (aligned, sticky) = align(m_small, (e_big - e_small) as u32);
    // With a sticky remainder the subtrahend is really `aligned + f`, 0<f<1;
    // dropping the +1 of the two's complement subtracts one more unit and
    // leaves the fraction `1 - f` behind the sticky bit.
    let sum = match plan.effective {
        AddOp::Add => kogge_stone_add(m_big, aligned, false),
        AddOp::Sub => kogge_stone_add(m_big, !aligned & MASK55, !sticky) & MASK55,
    };

    if sum == 0 && !sticky {
        return (FpBits::signed_zero(mode == RoundingMode::TowardNegative), ExceptionFlags::NONE);
    }

    let (norm, sticky, exp) = if sum >> 55 != 0 {
        (sum >> 1, sticky || sum & 1 != 0, e_big + 1)
    } else {
        let lz = lzc55(sum);
        (sum << lz, sticky, e_big - lz as i32)
    };
    debug_assert!(norm >> 54 == 1);

    let grs = GrsState::new(norm & 2 != 0, norm & 1 != 0, sticky);
    round_pack(sign, exp - FpFormatParams::BIAS, norm >> 2, grs, mode, flush)
}
