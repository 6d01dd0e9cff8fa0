//! Error norms against exact solutions, convergence studies and table output.

mod norms;
mod study;
mod table;

pub use norms::{error_norms, error_norms_layered, ErrorNorms};
pub use study::{
    interp_convergence_study, solve_cell, solve_convergence_study, CellReport, CellResult,
    CellSolution, StudyConfig, StudyError, StudyResult, INTERP_COLUMNS,
};
pub use table::{
    emit_rates, emit_table, fitted_order, format_sci3, observed_order, parse_csv, ConvergenceTable,
    TableError, TableFormat, TableRow,
};
