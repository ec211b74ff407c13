//! Tabular data: schema, loading, EM imputation and stratified splitting.

mod impute;
mod io;
mod matrix;
mod schema;
mod split;

pub use impute::{em_impute, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use io::{load_csv, read_csv, write_csv, write_csv_to, MISSING_MARKERS};
pub use matrix::DataMatrix;
pub use schema::{Category, Kind, Schema, VariableSpec};
pub use split::{train_test_split, SplitSpec};
