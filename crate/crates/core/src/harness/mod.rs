//! Refinement studies for the two model problems: exact solutions, sweeps
//! over `(gamma, N)` with error and rate bookkeeping, and table output.

mod examples;
mod sweep;
mod table;

pub use examples::{ClampedSinSin, ExampleId, ExampleSpec, SinSin, SourceGap};
pub use sweep::{run_cases, run_sweep, solve_level, ConvergenceRecord, LevelResult, SweepOptions, DEFAULT_LEVELS};
pub use table::{emit_table, format_error, format_rate, parse_csv, TableFormat, CSV_HEADER};
