//! Verification harness, expression parser, file formats and CLI for
//! `bsingular-core`.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod expr;
pub mod harness;
pub mod plot;
pub mod report;

pub use config::{Check, FunctionSpec, SweepConfig};
pub use corpus::{default_corpus, TestFunction};
pub use expr::Expr;
pub use harness::run_sweep;
pub use report::{Section, Status, SweepReport};
