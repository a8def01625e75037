//! Orchestration: loop databases and their text format, bottom-up
//! enumeration with isomorphism dedup, dimension reports and the
//! order-feasibility filter.

mod db;
mod enumerate;
mod io;
mod order_filter;

use std::path::PathBuf;

use thiserror::Error;

use crate::autiso::AutIsoError;
use crate::cocycles::CocycleError;
use crate::codeloops::CodeLoopError;
use crate::extend::ExtendError;
use crate::loopcore::LoopError;

pub use db::{IsoIndex, LoopDatabase, LoopEntry};
pub use enumerate::{
    bootstrap, dims_report, dims_tsv, enumerate_order, BaseReport, DimsRow, Enumeration, EnumerationStats, Mode,
    Route, RunConfig, SpaceDims, DEFAULT_BUDGET,
};
pub use io::{
    parse_loops, parse_triples, read_loops_file, read_triples_file, render_loops, render_triples, write_loops_file,
    write_triples_file,
};
pub use order_filter::{factorize, order_filter, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: loop {name}: {source}")]
    InvalidTable {
        line: usize,
        name: String,
        #[source]
        source: LoopError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid loop name {0:?}")]
    InvalidName(String),
    #[error("base {base}: complement has {size} elements, above the budget {budget}, and no other route applies")]
    BudgetExceeded { base: String, size: u128, budget: u128 },
    #[error("base {base}: extension {index} is not Moufang")]
    NotMoufang { base: String, index: usize },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    AutIso(#[from] AutIsoError),
    #[error(transparent)]
    CodeLoop(#[from] CodeLoopError),
}

impl PipelineError {
    /// Whether the error comes from malformed input rather than from the run.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PipelineError::Parse { .. }
                | PipelineError::InvalidTable { .. }
                | PipelineError::Config(_)
                | PipelineError::InvalidName(_)
                | PipelineError::CodeLoop(CodeLoopError::Dimension(_) | CodeLoopError::Parse(_))
        )
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
