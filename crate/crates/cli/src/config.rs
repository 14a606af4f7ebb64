//! Run configuration: a flat `key = value` file, overridden by flags.

use crate::error::CliError;
use fpengine::engine::{EngineConfig, Latencies, Variant};
use fpengine::fpcore::RoundingMode;
use fpengine::regfile::RegfileModel;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(format!("unknown output format `{s}` (expected text or csv)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub trace: Option<PathBuf>,
    pub variant: Variant,
    pub bmt: bool,
    pub regfile: RegfileModel,
    /// Overrides the rounding mode the trace starts with.
    pub rounding: Option<RoundingMode>,
    pub flush: bool,
    pub latencies: Latencies,
    pub broadcast_lead: u64,
    pub load_broadcast_lead: u64,
    pub max_cycles: u64,
    pub log: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for CliConfig {
    fn default() -> Self {
        let e = EngineConfig::v1();
        CliConfig {
            trace: None,
            variant: Variant::V1,
            bmt: e.bmt_enabled,
            regfile: e.regfile,
            rounding: None,
            flush: e.flush,
            latencies: e.latencies,
            broadcast_lead: e.broadcast_lead,
            load_broadcast_lead: e.load_broadcast_lead,
            max_cycles: e.max_cycles,
            log: None,
            format: OutputFormat::Text,
            seed: e.seed,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "trace",
    "engine",
    "bmt",
    "regfile",
    "rounding",
    "flush",
    "latency.add",
    "latency.mul",
    "latency.fmac",
    "latency.div",
    "latency.alu",
    "latency.branch",
    "broadcast_lead",
    "load_broadcast_lead",
    "max_cycles",
    "log",
    "format",
    "seed",
];

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on/off, got `{s}`")),
    }
}

fn parse_num(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

impl CliConfig {
    /// Sets one key. `base` resolves relative paths.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let path = || base.join(value);
        match key {
            "trace" => self.trace = Some(path()),
            "engine" => self.variant = value.parse()?,
            "bmt" => self.bmt = parse_bool(value)?,
            "regfile" => self.regfile = value.parse()?,
            "rounding" => self.rounding = Some(value.parse()?),
            "flush" => self.flush = parse_bool(value)?,
            "latency.add" => self.latencies.add = parse_num(value)?,
            "latency.mul" => self.latencies.mul = parse_num(value)?,
            "latency.fmac" => self.latencies.fmac = parse_num(value)?,
            "latency.div" => self.latencies.div = parse_num(value)?,
            "latency.alu" => self.latencies.alu = parse_num(value)?,
            "latency.branch" => self.latencies.branch = parse_num(value)?,
            "broadcast_lead" => self.broadcast_lead = parse_num(value)?,
            "load_broadcast_lead" => self.load_broadcast_lead = parse_num(value)?,
            "max_cycles" => self.max_cycles = parse_num(value)?,
            "log" => self.log = Some(path()),
            "format" => self.format = value.parse()?,
            "seed" => self.seed = parse_num(value)?,
            _ => return Err(format!("unknown key `{key}` (known keys: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Applies a config file. Blank lines and `#` comments are skipped.
    pub fn load(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| CliError::ConfigFile { path: path.into(), line: i + 1, message };
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            self.set(key.trim(), value.trim(), base).map_err(err)?;
        }
        Ok(())
    }

    pub fn engine_config(&self) -> EngineConfig {
        let base = match self.variant {
            Variant::V1 => EngineConfig::v1(),
            Variant::V2 => EngineConfig::v2(),
        };
        EngineConfig {
            bmt_enabled: self.bmt,
            regfile: self.regfile,
            rounding: self.rounding.unwrap_or(base.rounding),
            flush: self.flush,
            latencies: self.latencies,
            broadcast_lead: self.broadcast_lead,
            load_broadcast_lead: self.load_broadcast_lead,
            max_cycles: self.max_cycles,
            seed: self.seed,
            record_cycles: self.log.is_some(),
            ..base
        }
    }
}
