//! Run counters and the final report.

use crate::engine::log::CycleRecord;
use crate::fpcore::{ExceptionFlags, FpBits};
use crate::isa::{Program, Reg};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Raw counters accumulated while the engine steps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub dispatched: u64,
    /// Instructions sent to execution: queue issues, plus loads and stores,
    /// which go straight to the memory ports at dispatch.
    pub issued: u64,
    pub committed: u64,
    pub comparisons: u64,
    pub bmt_reads: u64,
    pub broadcasts: u64,
    /// Broadcasts by number of blocks enabled (0 to 4).
    pub blocks_enabled: [u64; 5],
    pub fu_busy: Vec<u64>,
    pub queue_occupancy: u64,
    pub rob_occupancy: u64,
    pub bypassed: u64,
    pub rollbacks: u64,
    pub squashed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstTiming {
    pub inst: usize,
    pub text: String,
    pub dispatch: Option<u64>,
    pub issue: Option<u64>,
    pub complete: Option<u64>,
    pub commit: Option<u64>,
    pub squashed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capture {
    pub reg: Reg,
    pub value: FpBits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Completed,
    /// Halted at an instruction whose exception was enabled, or which the
    /// variant does not implement.
    Trapped {
        inst: usize,
        cycle: u64,
        cause: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub index: usize,
    pub expected: Option<Capture>,
    pub actual: Option<Capture>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: String,
    pub bmt_enabled: bool,
    pub regfile: String,
    pub cycles: u64,
    pub dispatched: u64,
    pub issued: u64,
    pub committed: u64,
    pub ipc: f64,
    pub comparisons_total: u64,
    pub comparisons_per_committed: Option<f64>,
    pub bmt_reads: u64,
    pub broadcasts: u64,
    pub blocks_enabled_histogram: [u64; 5],
    pub fu_busy: Vec<(String, u64)>,
    pub mean_queue_occupancy: f64,
    pub mean_rob_occupancy: f64,
    pub bypassed: u64,
    pub rollbacks: u64,
    pub squashed: u64,
    pub stores: Vec<Capture>,
    pub fcsr: u32,
    pub flags: ExceptionFlags,
    pub timeline: Vec<InstTiming>,
    pub outcome: Outcome,
    #[serde(skip)]
    pub cycle_log: Vec<CycleRecord>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Report header fields that are not counters.
pub struct RunContext {
    pub variant: String,
    pub bmt_enabled: bool,
    pub regfile: String,
    pub unit_names: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn finalize(
    ctx: RunContext,
    counters: &Counters,
    cycles: u64,
    stores: Vec<Capture>,
    fcsr: u32,
    flags: ExceptionFlags,
    timeline: Vec<InstTiming>,
    outcome: Outcome,
    cycle_log: Vec<CycleRecord>,
) -> RunReport {
    RunReport {
        variant: ctx.variant,
        bmt_enabled: ctx.bmt_enabled,
        regfile: ctx.regfile,
        cycles,
        dispatched: counters.dispatched,
        issued: counters.issued,
        committed: counters.committed,
        ipc: ratio(counters.committed, cycles),
        comparisons_total: counters.comparisons,
        comparisons_per_committed: (counters.committed > 0).then(|| ratio(counters.comparisons, counters.committed)),
        bmt_reads: counters.bmt_reads,
        broadcasts: counters.broadcasts,
        blocks_enabled_histogram: counters.blocks_enabled,
        fu_busy: ctx.unit_names.into_iter().zip(counters.fu_busy.iter().copied()).collect(),
        mean_queue_occupancy: ratio(counters.queue_occupancy, cycles),
        mean_rob_occupancy: ratio(counters.rob_occupancy, cycles),
        bypassed: counters.bypassed,
        rollbacks: counters.rollbacks,
        squashed: counters.squashed,
        stores,
        fcsr,
        flags,
        timeline,
        outcome,
        cycle_log,
    }
}

impl RunReport {
    /// Compares store captures against the program's EXPECT footer.
    pub fn check_expected(&self, program: &Program) -> Result<(), Vec<Mismatch>> {
        let n = self.stores.len().max(program.expected.len());
        let bad: Vec<Mismatch> = (0..n)
            .filter_map(|i| {
                let expected = program.expected.get(i).map(|e| Capture { reg: e.reg, value: e.value });
                let actual = self.stores.get(i).copied();
                (expected != actual).then_some(Mismatch { index: i, expected, actual })
            })
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad)
        }
    }

    pub fn is_completed(&self) -> bool {
        self.outcome == Outcome::Completed
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}: {v}");
        };
        kv("variant", self.variant.clone());
        kv("bmt", self.bmt_enabled.to_string());
        kv("regfile", self.regfile.clone());
        kv(
            "outcome",
            match &self.outcome {
                Outcome::Completed => "completed".into(),
                Outcome::Trapped { inst, cycle, cause } => format!("trapped inst={inst} cycle={cycle} cause={cause}"),
            },
        );
        kv("cycles", self.cycles.to_string());
        kv("dispatched", self.dispatched.to_string());
        kv("issued", self.issued.to_string());
        kv("committed", self.committed.to_string());
        kv("ipc", format!("{:.4}", self.ipc));
        kv("comparisons_total", self.comparisons_total.to_string());
        kv("comparisons_per_committed", self.comparisons_per_committed.map_or("n/a".into(), |v| format!("{v:.4}")));
        kv("bmt_reads", self.bmt_reads.to_string());
        kv("broadcasts", self.broadcasts.to_string());
        kv(
            "blocks_enabled_histogram",
            self.blocks_enabled_histogram.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        for (unit, busy) in &self.fu_busy {
            kv(&format!("fu_busy_{unit}"), busy.to_string());
        }
        kv("mean_queue_occupancy", format!("{:.4}", self.mean_queue_occupancy));
        kv("mean_rob_occupancy", format!("{:.4}", self.mean_rob_occupancy));
        kv("bypassed", self.bypassed.to_string());
        kv("rollbacks", self.rollbacks.to_string());
        kv("squashed", self.squashed.to_string());
        kv("fcsr", format!("{:#010x}", self.fcsr));
        kv("flags", self.flags.to_string());
        for (i, c) in self.stores.iter().enumerate() {
            kv(&format!("store[{i}]"), format!("{} {}", c.reg, c.value));
        }
        s
    }

    pub fn csv_header() -> &'static str {
        "variant,bmt,regfile,outcome,cycles,dispatched,issued,committed,ipc,comparisons_total,comparisons_per_committed,bmt_reads,broadcasts,rollbacks"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.4},{},{},{},{},{}",
            self.variant,
            self.bmt_enabled,
            self.regfile,
            if self.is_completed() { "completed" } else { "trapped" },
            self.cycles,
            self.dispatched,
            self.issued,
            self.committed,
            self.ipc,
            self.comparisons_total,
            self.comparisons_per_committed.map_or(String::new(), |v| format!("{v:.4}")),
            self.bmt_reads,
            self.broadcasts,
            self.rollbacks,
        )
    }

    /// Per-instruction timeline as CSV.
    pub fn timeline_csv(&self) -> String {
        let cell = |c: Option<u64>| c.map_or(String::new(), |v| v.to_string());
        let mut s = String::from("inst,text,dispatch,issue,complete,commit,squashed\n");
        for t in &self.timeline {
            let _ = writeln!(
                s,
                "{},\"{}\",{},{},{},{},{}",
                t.inst,
                t.text,
                cell(t.dispatch),
                cell(t.issue),
                cell(t.complete),
                cell(t.commit),
                t.squashed
            );
        }
        s
    }
}
