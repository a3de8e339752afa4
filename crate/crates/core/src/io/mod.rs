//! CSV data, JSON models and DOT drawings.

mod csv;
mod dot;
mod json;

pub use self::csv::{read_csv, read_csv_path, write_csv, write_results_csv, write_summary_csv};
pub use dot::{export_dot, DotOptions, PALETTE};
pub use json::{model_from_json, model_to_json, read_model, read_schema, write_model, MODEL_FORMAT_VERSION};
