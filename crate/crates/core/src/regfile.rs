//! The 128 x 64-bit physical register file in three interchangeable models,
//! plus the ready-bit vector.
//!
//! The banked models are built from single-write memories the way an FPGA
//! would build them. The XOR model keeps, per write port, `m - 1 + n` copies
//! of one bank column: `m - 1` copies serve the other write ports' XOR reads
//! and `n` serve the read ports. The LVT model keeps `n` copies per write
//! port and a small table recording which port wrote each register last.

use crate::fpcore::FpBits;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub const REGS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PortConfig {
    pub reads: usize,
    pub writes: usize,
}

impl PortConfig {
    /// Dedicated units: three reads for issue slot 0, two for slot 1, one
    /// store port; one write port per unit plus loads.
    pub const V1: PortConfig = PortConfig { reads: 6, writes: 6 };
    /// Two unified FMACs: three reads per slot plus the store port; one
    /// write per FMAC plus loads.
    pub const V2: PortConfig = PortConfig { reads: 7, writes: 3 };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegfileModel {
    #[default]
    Reference,
    Xor,
    Lvt,
}

impl RegfileModel {
    pub const ALL: [RegfileModel; 3] = [RegfileModel::Reference, RegfileModel::Xor, RegfileModel::Lvt];

    pub fn name(self) -> &'static str {
        match self {
            RegfileModel::Reference => "reference",
            RegfileModel::Xor => "xor",
            RegfileModel::Lvt => "lvt",
        }
    }
}

impl FromStr for RegfileModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown regfile model `{s}` (expected reference, xor or lvt)"))
    }
}

/// One single-write, single-read memory block.
type Bank = Vec<u64>;

fn bank() -> Bank {
    vec![0; REGS]
}

pub trait RegisterFile {
    fn ports(&self) -> PortConfig;
    fn write(&mut self, port: usize, reg: u8, value: FpBits);
    fn read(&self, port: usize, reg: u8) -> FpBits;
    fn bank_count(&self) -> usize;
}

#[derive(Clone, Debug)]
pub struct ReferenceFile {
    ports: PortConfig,
    cells: Vec<u64>,
}

impl ReferenceFile {
    pub fn new(ports: PortConfig) -> Self {
        ReferenceFile { ports, cells: bank() }
    }
}

impl RegisterFile for ReferenceFile {
    fn ports(&self) -> PortConfig {
        self.ports
    }

    fn write(&mut self, port: usize, reg: u8, value: FpBits) {
        debug_assert!(port < self.ports.writes);
        self.cells[reg as usize] = value.0;
    }

    fn read(&self, port: usize, reg: u8) -> FpBits {
        debug_assert!(port < self.ports.reads);
        FpBits(self.cells[reg as usize])
    }

    fn bank_count(&self) -> usize {
        1
    }
}

#[derive(Clone, Debug)]
pub struct XorBankArray {
    ports: PortConfig,
    /// `banks[w][k]`: copy `k` of write port `w`'s column. Copies
    /// `0..m-1` feed the other write ports, `m-1..m-1+n` the read ports.
    banks: Vec<Vec<Bank>>,
}

impl XorBankArray {
    pub fn new(ports: PortConfig) -> Self {
        let per_port = ports.writes - 1 + ports.reads;
        XorBankArray { ports, banks: vec![vec![bank(); per_port]; ports.writes] }
    }

    /// Copy of port `owner`'s column that write port `writer` reads.
    fn feed_index(owner: usize, writer: usize) -> usize {
        if writer < owner {
            writer
        } else {
            writer - 1
        }
    }
}

impl RegisterFile for XorBankArray {
    fn ports(&self) -> PortConfig {
        self.ports
    }

    fn write(&mut self, port: usize, reg: u8, value: FpBits) {
        debug_assert!(port < self.ports.writes);
        let r = reg as usize;
        let mut encoded = value.0;
        for other in (0..self.ports.writes).filter(|&o| o != port) {
            encoded ^= self.banks[other][Self::feed_index(other, port)][r];
        }
        for copy in &mut self.banks[port] {
            copy[r] = encoded;
        }
    }

    fn read(&self, port: usize, reg: u8) -> FpBits {
        debug_assert!(port < self.ports.reads);
        let copy = self.ports.writes - 1 + port;
        FpBits(self.banks.iter().fold(0, |acc, col| acc ^ col[copy][reg as usize]))
    }

    fn bank_count(&self) -> usize {
        self.banks.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct LvtArray {
    ports: PortConfig,
    /// `banks[w][p]`: write port `w`'s copy for read port `p`.
    banks: Vec<Vec<Bank>>,
    lvt: Vec<u8>,
}

impl LvtArray {
    pub fn new(ports: PortConfig) -> Self {
        assert!(ports.writes <= 8, "LVT entries are 3 bits wide");
        LvtArray { ports, banks: vec![vec![bank(); ports.reads]; ports.writes], lvt: vec![0; REGS] }
    }

    pub fn live_port(&self, reg: u8) -> usize {
        self.lvt[reg as usize] as usize
    }
}

impl RegisterFile for LvtArray {
    fn ports(&self) -> PortConfig {
        self.ports
    }

    fn write(&mut self, port: usize, reg: u8, value: FpBits) {
        debug_assert!(port < self.ports.writes);
        for copy in &mut self.banks[port] {
            copy[reg as usize] = value.0;
        }
        self.lvt[reg as usize] = port as u8;
    }

    fn read(&self, port: usize, reg: u8) -> FpBits {
        debug_assert!(port < self.ports.reads);
        FpBits(self.banks[self.live_port(reg)][port][reg as usize])
    }

    fn bank_count(&self) -> usize {
        self.banks.iter().map(Vec::len).sum()
    }
}

/// Any of the three models behind one type.
#[derive(Clone, Debug)]
pub enum Regfile {
    Reference(ReferenceFile),
    Xor(XorBankArray),
    Lvt(LvtArray),
}

impl Regfile {
    pub fn new(model: RegfileModel, ports: PortConfig) -> Regfile {
        match model {
            RegfileModel::Reference => Regfile::Reference(ReferenceFile::new(ports)),
            RegfileModel::Xor => Regfile::Xor(XorBankArray::new(ports)),
            RegfileModel::Lvt => Regfile::Lvt(LvtArray::new(ports)),
        }
    }

    fn inner(&self) -> &dyn RegisterFile {
        match self {
            Regfile::Reference(f) => f,
            Regfile::Xor(f) => f,
            Regfile::Lvt(f) => f,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn RegisterFile {
        match self {
            Regfile::Reference(f) => f,
            Regfile::Xor(f) => f,
            Regfile::Lvt(f) => f,
        }
    }
}

impl RegisterFile for Regfile {
    fn ports(&self) -> PortConfig {
        self.inner().ports()
    }

    fn write(&mut self, port: usize, reg: u8, value: FpBits) {
        self.inner_mut().write(port, reg, value)
    }

    fn read(&self, port: usize, reg: u8) -> FpBits {
        self.inner().read(port, reg)
    }

    fn bank_count(&self) -> usize {
        self.inner().bank_count()
    }
}

/// One bit per physical register: set once its value has been produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReadyBitVector(u128);

impl Default for ReadyBitVector {
    fn default() -> Self {
        ReadyBitVector(u128::MAX)
    }
}

impl ReadyBitVector {
    pub fn get(&self, reg: u8) -> bool {
        self.0 >> reg & 1 == 1
    }

    pub fn set(&mut self, reg: u8) {
        self.0 |= 1 << reg;
    }

    pub fn clear(&mut self, reg: u8) {
        self.0 &= !(1 << reg);
    }

    pub fn snapshot(&self) -> u128 {
        self.0
    }

    pub fn restore(&mut self, snapshot: u128) {
        self.0 = snapshot;
    }
}
