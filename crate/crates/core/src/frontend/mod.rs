//! Text model format, result documents and the command-line interface.

mod cli;
mod document;
mod parse;
mod print;

pub use cli::run_cli;
pub use document::{
    export_strategy, import_strategy, mec_report, model_hash, ImportError, MecReportEntry, ResultDocument,
    StrategyDocument,
};
pub use parse::{parse_model, parse_raw, ParseError};
pub use print::print_model;
