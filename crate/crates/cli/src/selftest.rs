//! Datapath self-check against the arbitrary-precision reference.

use fpengine::fpcore::*;
use fpengine_ref as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

fn oracle_mode(mode: RoundingMode) -> oracle::Mode {
    match mode {
        RoundingMode::NearestEven => oracle::Mode::NearestEven,
        RoundingMode::TowardZero => oracle::Mode::TowardZero,
        RoundingMode::TowardPositive => oracle::Mode::TowardPositive,
        RoundingMode::TowardNegative => oracle::Mode::TowardNegative,
    }
}

fn same(got: FpResult, want: oracle::Outcome) -> bool {
    let (bits, f) = got;
    let w = want.flags;
    bits.0 == want.bits
        && (f.invalid, f.div_by_zero, f.overflow, f.underflow, f.inexact)
            == (w.invalid, w.div_by_zero, w.overflow, w.underflow, w.inexact)
}

/// Operand with an exponent near `anchor` most of the time, so sums cancel
/// and products reach the range limits; otherwise raw bits.
fn operand(rng: &mut ChaCha8Rng, anchor: i64) -> FpBits {
    if rng.gen_ratio(1, 10) {
        return FpBits(rng.gen());
    }
    let sign = (rng.gen::<bool>() as u64) << 63;
    let exp = (anchor + rng.gen_range(-60i64..=60)).clamp(0, 0x7FE) as u64;
    let frac = match rng.gen_range(0..3) {
        0 => rng.gen::<u64>() >> 12,
        1 => ((1u64 << 52) - 1) ^ (rng.gen::<u64>() & 0xFF),
        _ => rng.gen::<u64>() & 0xFF,
    };
    FpBits(sign | exp << 52 | frac)
}

fn anchor(rng: &mut ChaCha8Rng) -> i64 {
    match rng.gen_range(0..8) {
        0 => rng.gen_range(1..120),
        1 => rng.gen_range(0x780..0x7FE),
        _ => rng.gen_range(1..0x7FE),
    }
}

#[derive(Default)]
struct Tally {
    samples: u64,
    mismatches: u64,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.samples += 1;
        self.mismatches += !ok as u64;
    }
}

pub struct SelfTestReport {
    pub text: String,
    pub failures: u64,
}

/// Runs `samples` random operand sets per rounding mode through every
/// operation.
pub fn run(samples: u64, seed: u64) -> SelfTestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["add", "sub", "mul", "madd", "msub", "recip"];
    let mut tallies: Vec<Tally> = names.iter().map(|_| Tally::default()).collect();
    let mut ulp_hist = [0u64; 4];
    let mut max_ulp = 0;
    for mode in RoundingMode::ALL {
        let m = oracle_mode(mode);
        for _ in 0..samples {
            let k = anchor(&mut rng);
            let (a, b) = (operand(&mut rng, k), operand(&mut rng, k));
            let c = operand(&mut rng, a.biased_exponent() as i64 + b.biased_exponent() as i64 - 1023);
            let flush = rng.gen_ratio(1, 8);
            let checks = [
                same(add_sub(a, b, AddOp::Add, mode, flush), oracle::add(a.0, b.0, m, flush)),
                same(add_sub(a, b, AddOp::Sub, mode, flush), oracle::sub(a.0, b.0, m, flush)),
                same(mul(a, b, mode, flush), oracle::mul(a.0, b.0, m, flush)),
                same(fmac(a, b, c, FmacOp::Madd, mode, flush), oracle::fma(a.0, b.0, c.0, false, m, flush)),
                same(fmac(a, b, c, FmacOp::Msub, mode, flush), oracle::fma(a.0, b.0, c.0, true, m, flush)),
                same(recip(a, mode, flush), oracle::recip(a.0, m, flush)),
            ];
            for (t, ok) in tallies.iter_mut().zip(checks) {
                t.record(ok);
            }
            let d = oracle::ulp_distance(div(a, b, mode, false).0 .0, oracle::div(a.0, b.0, m, false).bits);
            ulp_hist[d.min(3) as usize] += 1;
            max_ulp = max_ulp.max(d);
        }
    }

    let mut text = String::new();
    let mut failures = 0;
    for (name, t) in names.iter().zip(&tallies) {
        let _ = writeln!(text, "{name}: samples={} mismatches={}", t.samples, t.mismatches);
        failures += t.mismatches;
    }
    let over = ulp_hist[3];
    failures += over;
    let _ = writeln!(
        text,
        "div: samples={} ulp0={} ulp1={} ulp2={} over2={over} max_ulp={max_ulp}",
        ulp_hist.iter().sum::<u64>(),
        ulp_hist[0],
        ulp_hist[1],
        ulp_hist[2]
    );

    // Unrounded reciprocal: |x m - 2^112| <= 2^60 is a relative error of 2^-52.
    let mut worst = 0u128;
    for _ in 0..samples {
        let m = 1 << 52 | rng.gen::<u64>() >> 12;
        worst = worst.max((recip_unrounded(m) as u128 * m as u128).abs_diff(1 << 112));
    }
    let rel = (worst.max(1) as f64).log2() - 112.0;
    if worst > 1 << 60 {
        failures += 1;
    }
    let _ = writeln!(text, "recip_unrounded: samples={samples} max_relative_error=2^{rel:.2}");
    let _ = writeln!(text, "result: {}", if failures == 0 { "pass" } else { "fail" });
    SelfTestReport { text, failures }
}
