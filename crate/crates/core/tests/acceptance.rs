//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails.

mod common;

use common::checks::{
    check_bmt_pair, check_dataflow, check_determinism, check_regfile_script, check_rollback, RollbackResult,
};
use common::programs::{all_configs, random_mispredict_pair, random_program, run_checked, GenOptions};
use common::{edge_values, oracle_mode, oracle_result, random_anchor, random_any, random_operand};
use fpengine::engine::{run_program, EngineConfig};
use fpengine::fpcore::*;
use fpengine::isa::{parse_program, Program};
use fpengine::regfile::{PortConfig, Regfile, RegfileModel, RegisterFile};
use fpengine::stats::RunReport;
use fpengine_ref as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const GOLDEN: u64 = 0x429C_D394_7361_5714;
const ARITH_SAMPLES: usize = 1_000_000;
const DIV_SAMPLES: usize = 1_000_000;
const BMT_PROGRAMS: usize = 1000;
const REGFILE_SCRIPTS: usize = 100_000;
const ROLLBACK_PROGRAMS: usize = 500;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ch6() -> Program {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../traces/ch6.trace");
    parse_program(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(text: &str, config: EngineConfig) -> Result<RunReport, String> {
    let program = parse_program(text).map_err(|e| e.to_string())?;
    run_program(config, &program).map_err(|e| e.to_string())
}

fn fu_latency(r: &RunReport, i: usize) -> Result<u64, String> {
    let t = &r.timeline[i];
    match (t.issue, t.complete) {
        (Some(s), Some(c)) => Ok(c - s),
        _ => Err(format!("instruction {i} never completed")),
    }
}

fn golden() -> Outcome {
    let program = ch6();
    let start = Instant::now();
    let configs = all_configs();
    for config in &configs {
        let report = run_program(config.clone(), &program).map_err(|e| e.to_string())?;
        let stored = report.stores.first().map(|c| c.value.0);
        ensure(
            stored == Some(GOLDEN),
            format!("{:?}/{}/bmt={} stored {stored:x?}", config.variant, config.regfile.name(), config.bmt_enabled),
        )?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!("{} configurations in {elapsed:.2?}", configs.len()))
}

fn rom() -> Outcome {
    let rom = rom_generate();
    ensure(rom[..3] == [0xFE02, 0xFA1A, 0xF649], format!("first rows {:04X?}", &rom[..3]))?;
    for (a, &v) in rom.iter().enumerate() {
        // v = floor(2^16 / (1 + a/128 + 1/256)^2), checked as a bracket.
        let d = (2 * a as u128 + 257).pow(2);
        ensure(v as u128 * d <= 1 << 32 && (v as u128 + 1) * d > 1 << 32, format!("row {a} = {v:#06x}"))?;
    }
    ensure(rom.windows(2).all(|w| w[0] > w[1]), "not strictly decreasing")?;
    Ok(format!("{} rows", rom.len()))
}

fn arith_sample(a: FpBits, b: FpBits, c: FpBits, mode: RoundingMode, flush: bool) -> Result<(), String> {
    let m = oracle_mode(mode);
    let checks = [
        ("add", add_sub(a, b, AddOp::Add, mode, flush), oracle::add(a.0, b.0, m, flush)),
        ("sub", add_sub(a, b, AddOp::Sub, mode, flush), oracle::sub(a.0, b.0, m, flush)),
        ("mul", mul(a, b, mode, flush), oracle::mul(a.0, b.0, m, flush)),
        ("madd", fmac(a, b, c, FmacOp::Madd, mode, flush), oracle::fma(a.0, b.0, c.0, false, m, flush)),
        ("msub", fmac(a, b, c, FmacOp::Msub, mode, flush), oracle::fma(a.0, b.0, c.0, true, m, flush)),
    ];
    for (name, got, want) in checks {
        ensure(
            got == oracle_result(want),
            format!("{name} {a} {b} {c} {mode:?} flush={flush}: {:?} vs {want:?}", got),
        )?;
    }
    Ok(())
}

fn arithmetic() -> Outcome {
    let edges = edge_values();
    let mut grid = 0;
    for mode in RoundingMode::ALL {
        for flush in [false, true] {
            for &a in &edges {
                for &b in &edges {
                    for &c in &edges {
                        arith_sample(a, b, c, mode, flush)?;
                        grid += 1;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    for mode in RoundingMode::ALL {
        for _ in 0..ARITH_SAMPLES {
            let anchor = random_anchor(&mut rng);
            let a = random_operand(&mut rng, anchor);
            let b = random_operand(&mut rng, anchor);
            let pe = a.biased_exponent() as i64 + b.biased_exponent() as i64 - 1023;
            let c = random_operand(&mut rng, pe.clamp(1, 0x7FE) as u32);
            arith_sample(a, b, c, mode, rng.gen_ratio(1, 8))?;
        }
    }
    Ok(format!("{grid} class triples, {ARITH_SAMPLES} random samples per rounding mode"))
}

fn division() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1F);
    let mut worst = 0;
    for _ in 0..DIV_SAMPLES {
        let mode = RoundingMode::ALL[rng.gen_range(0..4)];
        let (a, b) = (random_any(&mut rng), random_any(&mut rng));
        let got = div(a, b, mode, false).0 .0;
        let want = oracle::div(a.0, b.0, oracle_mode(mode), false).bits;
        let d = oracle::ulp_distance(got, want);
        ensure(d <= 2, format!("{a} / {b} {mode:?}: {d} ulp"))?;
        worst = worst.max(d);
    }
    // Relative error of the unrounded reciprocal: |x m - 2^112| <= 2^60.
    let mut worst_rel = 0u128;
    for i in 0..DIV_SAMPLES as u64 {
        let m = if i < 1 << 16 { 1 << 52 | i << 36 | (i * 0x9E37) & 0xFFFF } else { 1 << 52 | rng.gen::<u64>() >> 12 };
        let x = recip_unrounded(m) as u128;
        let err = (x * m as u128).abs_diff(1 << 112);
        ensure(err <= 1 << 60, format!("reciprocal of {m:#x} off by {err:#x}"))?;
        worst_rel = worst_rel.max(err);
    }
    // Power-of-two divisors only shift the exponent.
    for _ in 0..100_000 {
        let a = random_any(&mut rng);
        let k = rng.gen_range(-1074..=1023i32);
        let b = FpBits::from_f64(2f64.powi(k));
        let mode = RoundingMode::ALL[rng.gen_range(0..4)];
        let got = div(a, b, mode, false);
        let want = oracle_result(oracle::div(a.0, b.0, oracle_mode(mode), false));
        ensure(got == want, format!("{a} / 2^{k} {mode:?}"))?;
    }
    Ok(format!(
        "max {worst} ulp over {DIV_SAMPLES} pairs, reciprocal error <= 2^{:.1}",
        (worst_rel.max(1) as f64).log2() - 112.0
    ))
}

fn latencies() -> Outcome {
    let cases = [
        ("ADD.D $f1, $f2, $f3", 8),
        ("MUL.D $f1, $f2, $f3", 7),
        ("MADDF.D $f1, $f2, $f3, $f4", 13),
        ("DIV.D $f1, $f2, $f3", 14),
        ("ABS.D $f1, $f2", 1),
        ("BC1EQZ $f2", 1),
    ];
    let mut got = Vec::new();
    for (text, want) in cases {
        let l = fu_latency(&run(text, EngineConfig::v1())?, 0)?;
        ensure(l == want, format!("{text}: {l}"))?;
        got.push(l);
    }
    Ok(format!("{got:?}"))
}

fn fused() -> Outcome {
    let r = run("MUL.D $f4, $f1, $f2\nADD.D $f5, $f4, $f3\n", EngineConfig::v1())?;
    let separate = fu_latency(&r, 0)? + fu_latency(&r, 1)?;
    let fused = fu_latency(&run("MADDF.D $f5, $f1, $f2, $f3\n", EngineConfig::v1())?, 0)?;
    ensure(separate >= 15 && fused == 13, format!("separate {separate}, fused {fused}"))?;
    Ok(format!("separate {separate}, fused {fused}"))
}

fn lead() -> Outcome {
    let chain = "MADDF.D $f2, $f1, $f1, $f1\nMADDF.D $f3, $f2, $f1, $f1\nMADDF.D $f4, $f3, $f1, $f1\nMADDF.D $f5, $f4, $f1, $f1\n";
    let issue = |lead: u64| -> Result<Vec<u64>, String> {
        let r = run(chain, EngineConfig { broadcast_lead: lead, ..EngineConfig::v1() })?;
        r.timeline.iter().map(|t| t.issue.ok_or_else(|| "not issued".to_string())).collect()
    };
    let (fast, slow) = (issue(3)?, issue(0)?);
    let saved: Vec<u64> = (1..4).map(|i| (slow[i] - slow[i - 1]) - (fast[i] - fast[i - 1])).collect();
    ensure(saved == [3, 3, 3], format!("saved per edge {saved:?}"))?;
    Ok(format!("saved per edge {saved:?}"))
}

fn bmt() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB3);
    let (mut on, mut off) = (0, 0);
    for i in 0..BMT_PROGRAMS {
        let (base, opts) =
            if i % 2 == 0 { (EngineConfig::v1(), GenOptions::v1()) } else { (EngineConfig::v2(), GenOptions::v2()) };
        let program = random_program(&mut rng, opts);
        let (a, b) = check_bmt_pair(&program, &base).map_err(|e| format!("program {i}: {e}"))?;
        on += a;
        off += b;
    }
    let (a, b) = check_bmt_pair(&ch6(), &EngineConfig::v1())?;
    ensure(a < b, format!("golden trace: {a} comparisons with the table, {b} without"))?;
    Ok(format!("{BMT_PROGRAMS} programs, {on} vs {off} comparisons; golden trace {a} vs {b}"))
}

fn regfile() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4F);
    for i in 0..REGFILE_SCRIPTS {
        let ports = if i % 2 == 0 { PortConfig::V1 } else { PortConfig::V2 };
        check_regfile_script(&mut rng, ports).map_err(|e| format!("script {i}: {e}"))?;
    }
    let mut counts = Vec::new();
    for ports in [PortConfig::V1, PortConfig::V2] {
        let (m, n) = (ports.writes, ports.reads);
        let banks = Regfile::new(RegfileModel::Xor, ports).bank_count();
        ensure(banks == m * (m - 1 + n), format!("{m}W/{n}R: {banks} banks"))?;
        counts.push(banks);
    }
    Ok(format!("{REGFILE_SCRIPTS} scripts, xor banks {counts:?}"))
}

fn rollback() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7B);
    let (mut equivalent, mut evicted, mut drawn) = (0, 0, 0);
    while equivalent < ROLLBACK_PROGRAMS {
        drawn += 1;
        ensure(drawn <= 2 * ROLLBACK_PROGRAMS, "too many evicted checkpoints")?;
        let pair = random_mispredict_pair(&mut rng);
        match check_rollback(&pair, &EngineConfig::v1()).map_err(|e| format!("program {drawn}: {e}"))? {
            RollbackResult::Equivalent => equivalent += 1,
            RollbackResult::Evicted => evicted += 1,
        }
    }
    Ok(format!("{equivalent} programs equivalent to replay, {evicted} skipped for checkpoint eviction"))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut runs = 0;
    for config in all_configs() {
        let opts = if config.variant == fpengine::engine::Variant::V1 { GenOptions::v1() } else { GenOptions::v2() };
        for _ in 0..40 {
            let program = random_program(&mut rng, opts);
            check_dataflow(&program, &config)?;
            check_determinism(&program, &config)?;
            runs += 1;
        }
    }
    let (report, _) = run_checked(EngineConfig::v1(), &ch6()).map_err(|e| e.to_string())?;
    ensure(report.ipc <= 2.0, "golden trace ipc")?;
    Ok(format!("{runs} runs checked every cycle and repeated"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("golden trace store", golden),
        ("reciprocal seed table", rom),
        ("add/sub/mul/fmac bit-exact", arithmetic),
        ("division and reciprocal accuracy", division),
        ("single-op latencies", latencies),
        ("fused vs separate multiply-add", fused),
        ("early broadcast saving", lead),
        ("block mapping table equivalence", bmt),
        ("banked register files", regfile),
        ("misprediction rollback", rollback),
        ("conservation and determinism", conservation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
