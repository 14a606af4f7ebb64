//! Property checks shared by the focused suites and the acceptance run.
//! Each returns a description of the first violation.

use super::programs::{engine_stores, evaluate_in_order, run_checked, MispredictPair};
use fpengine::engine::log::CycleRecord;
use fpengine::engine::{Engine, EngineConfig, EngineError};
use fpengine::isa::Program;
use fpengine::regfile::{PortConfig, ReferenceFile, Regfile, RegfileModel, RegisterFile, REGS};
use fpengine::stats::RunReport;
use rand::seq::index::sample;
use rand::Rng;

fn structural(report: &RunReport) -> Result<(), String> {
    if !(report.committed <= report.issued && report.issued <= report.dispatched) {
        return Err(format!(
            "counter order violated: committed {} issued {} dispatched {}",
            report.committed, report.issued, report.dispatched
        ));
    }
    if report.ipc > 2.0 {
        return Err(format!("ipc {} above the issue width", report.ipc));
    }
    Ok(())
}

/// Engine stores and flags equal the in-order evaluation; structural
/// invariants hold every cycle.
pub fn check_dataflow(program: &Program, config: &EngineConfig) -> Result<RunReport, String> {
    let (report, _) = run_checked(config.clone(), program).map_err(|e| format!("engine error: {e}"))?;
    if !report.is_completed() {
        return Err(format!("unexpected outcome {:?}", report.outcome));
    }
    let reference = evaluate_in_order(program, config.rounding, config.flush);
    if engine_stores(&report) != reference.stores {
        return Err(format!("stores differ: engine {:?} reference {:?}", engine_stores(&report), reference.stores));
    }
    if report.flags != reference.flags {
        return Err(format!("flags differ: engine {} reference {}", report.flags, reference.flags));
    }
    let correct_path = program.instructions.iter().filter(|i| !i.wrong_path).count() as u64;
    if report.committed != correct_path {
        return Err(format!("committed {} of {correct_path}", report.committed));
    }
    structural(&report)?;
    Ok(report)
}

/// Issue schedule of one cycle, independent of comparison counts.
fn schedule(rec: &CycleRecord) -> Vec<(usize, usize, usize, usize)> {
    rec.issues.iter().map(|i| (i.inst, i.block, i.slot, i.issue_slot)).collect()
}

/// BMT on and off issue identically, store the same values, and the BMT
/// never costs more comparisons in any cycle. Returns the two totals.
pub fn check_bmt_pair(program: &Program, base: &EngineConfig) -> Result<(u64, u64), String> {
    let on = EngineConfig { bmt_enabled: true, ..base.clone() };
    let off = EngineConfig { bmt_enabled: false, ..base.clone() };
    let (r_on, log_on) = run_checked(on, program).map_err(|e| e.to_string())?;
    let (r_off, log_off) = run_checked(off, program).map_err(|e| e.to_string())?;
    if log_on.len() != log_off.len() {
        return Err(format!("cycle counts differ: {} vs {}", log_on.len(), log_off.len()));
    }
    for (a, b) in log_on.iter().zip(&log_off) {
        if schedule(a) != schedule(b) {
            return Err(format!("issue schedules differ at cycle {}", a.cycle));
        }
        if a.commits != b.commits || a.completions != b.completions || a.dispatches != b.dispatches {
            return Err(format!("pipeline events differ at cycle {}", a.cycle));
        }
        if a.comparisons > b.comparisons {
            return Err(format!(
                "cycle {}: {} comparisons with BMT, {} without",
                a.cycle, a.comparisons, b.comparisons
            ));
        }
    }
    if r_on.stores != r_off.stores {
        return Err("store values differ".into());
    }
    // Everything but the comparison and enable counters must match.
    let neutral = |r: &RunReport| RunReport {
        bmt_enabled: false,
        comparisons_total: 0,
        comparisons_per_committed: None,
        bmt_reads: 0,
        blocks_enabled_histogram: [0; 5],
        ..r.clone()
    };
    if neutral(&r_on) != neutral(&r_off) {
        return Err("reports differ outside the comparison counters".into());
    }
    Ok((r_on.comparisons_total, r_off.comparisons_total))
}

pub enum RollbackResult {
    Equivalent,
    /// The branch outlived its checkpoint; the run stopped with an error.
    Evicted,
}

/// Steps the program with its wrong path (A) and without it (B) in
/// lockstep. After A's rollback the scheduling state must equal B's, and
/// every later cycle must match event for event.
pub fn check_rollback(pair: &MispredictPair, config: &EngineConfig) -> Result<RollbackResult, String> {
    let mut a = Engine::new(config.clone(), &pair.with_wrong_path).map_err(|e| e.to_string())?;
    let mut b = Engine::new(config.clone(), &pair.without).map_err(|e| e.to_string())?;
    let shift = pair.wrong_path_len;
    let branch = pair.branch;
    // Wrong-path indices map to a value no correct-path event can carry.
    let norm = |i: usize| match i {
        i if i <= branch => i,
        i if i <= branch + shift => usize::MAX,
        i => i - shift,
    };
    let normalize = |mut r: CycleRecord| {
        for e in &mut r.completions {
            e.inst = norm(e.inst);
        }
        for e in &mut r.issues {
            e.inst = norm(e.inst);
        }
        for e in &mut r.dispatches {
            e.inst = norm(e.inst);
        }
        for e in &mut r.commits {
            e.inst = norm(e.inst);
        }
        r.rollback = None;
        r
    };
    let mut rolled = false;
    while !(a.is_finished() && b.is_finished()) {
        if a.cycle() > 10_000 {
            return Err("runaway simulation".into());
        }
        let ra = match a.step() {
            Ok(r) => r,
            Err(EngineError::CheckpointEvicted { .. }) => return Ok(RollbackResult::Evicted),
            Err(e) => return Err(format!("run with wrong path: {e}")),
        };
        let rb = b.step().map_err(|e| format!("run without wrong path: {e}"))?;
        if !a.queue().conservation_holds() || !a.queue().bmt_sound() {
            return Err(format!("queue invariants broken at cycle {}", ra.cycle));
        }
        if !rolled {
            if ra.rollback.is_none() {
                continue;
            }
            rolled = true;
            if rb.rollback.is_none() {
                return Err(format!("branch resolved at cycle {} only with the wrong path present", ra.cycle));
            }
            if a.scheduler_state() != b.scheduler_state() {
                return Err(format!(
                    "state after rollback at cycle {} differs from the replay:\n{:?}\n{:?}",
                    ra.cycle,
                    a.scheduler_state(),
                    b.scheduler_state()
                ));
            }
            if ra.commits.iter().map(|c| norm(c.inst)).ne(rb.commits.iter().map(|c| c.inst)) {
                return Err(format!("commits differ in the rollback cycle {}", ra.cycle));
            }
            continue;
        }
        if a.scheduler_state() != b.scheduler_state() {
            return Err(format!("scheduling state diverged at cycle {}", ra.cycle));
        }
        let (na, nb) = (normalize(ra), CycleRecord { rollback: None, ..rb });
        if na != nb {
            return Err(format!("cycle {} differs after rollback:\n{na:?}\n{nb:?}", na.cycle));
        }
    }
    if !rolled {
        return Err("no rollback happened".into());
    }
    let (ra, rb) = (a.report(vec![]), b.report(vec![]));
    if ra.stores != rb.stores || ra.fcsr != rb.fcsr || ra.cycles != rb.cycles {
        return Err("final results differ".into());
    }
    let reference = evaluate_in_order(&pair.without, config.rounding, config.flush);
    if engine_stores(&ra) != reference.stores {
        return Err("stores differ from the in-order evaluation".into());
    }
    if ra.squashed > shift as u64 {
        return Err(format!("squashed {} instructions, wrong path has {shift}", ra.squashed));
    }
    structural(&ra)?;
    Ok(RollbackResult::Equivalent)
}

/// Two runs of the same program produce byte-identical logs and reports.
pub fn check_determinism(program: &Program, config: &EngineConfig) -> Result<(), String> {
    let once = || -> Result<String, String> {
        let cfg = EngineConfig { record_cycles: true, ..config.clone() };
        let report = Engine::new(cfg, program).and_then(|mut e| e.run()).map_err(|e| e.to_string())?;
        let mut out = serde_json::to_string(&report).unwrap();
        for rec in &report.cycle_log {
            out.push('\n');
            out.push_str(&rec.to_json_line());
        }
        Ok(out)
    };
    if once()? != once()? {
        return Err("repeat run differs".into());
    }
    Ok(())
}

/// Random port-legal script: each cycle writes distinct registers through
/// distinct write ports, then reads through distinct read ports. The
/// banked models must return what a plain array holds.
pub fn check_regfile_script<R: Rng>(rng: &mut R, ports: PortConfig) -> Result<(), String> {
    let mut plain = [0u64; REGS];
    let mut reference = ReferenceFile::new(ports);
    let mut models = [Regfile::new(RegfileModel::Xor, ports), Regfile::new(RegfileModel::Lvt, ports)];
    // A narrow register window makes overwrites across ports common.
    let window = if rng.gen_bool(0.5) { 8 } else { REGS };
    for cycle in 0..rng.gen_range(1..=16) {
        let writes = rng.gen_range(0..=ports.writes);
        let wports = sample(rng, ports.writes, writes);
        let regs = sample(rng, window, writes);
        for (p, r) in wports.iter().zip(regs.iter()) {
            let v: u64 = rng.gen();
            plain[r] = v;
            reference.write(p, r as u8, fpengine::fpcore::FpBits(v));
            for m in &mut models {
                m.write(p, r as u8, fpengine::fpcore::FpBits(v));
            }
        }
        let reads = rng.gen_range(1..=ports.reads);
        for p in sample(rng, ports.reads, reads).iter() {
            let r = rng.gen_range(0..window) as u8;
            let want = plain[r as usize];
            if reference.read(p, r).0 != want {
                return Err(format!("reference array read {r} on port {p} at cycle {cycle}"));
            }
            for (m, name) in models.iter().zip(["xor", "lvt"]) {
                let got = m.read(p, r).0;
                if got != want {
                    return Err(format!("{name}: port {p} reg {r} cycle {cycle}: got {got:#x}, want {want:#x}"));
                }
            }
        }
    }
    Ok(())
}
