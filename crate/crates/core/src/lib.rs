pub mod engine;
pub mod fpcore;
pub mod isa;
pub mod issueq;
pub mod regfile;
pub mod stats;
