//! Desk-scale reproduction harness for the `specden_core` estimators: runs
//! Monte-Carlo trials on a finite Markov chain, scores each estimate against
//! the chain's windowed expectation and writes the errors next to the
//! theoretical bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;

pub use analysis::{fit_decay_rate, median_curve};
pub use config::{Algorithm, ConfigFile, ExperimentConfig, Method, Window};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_to_files, worst_exceedance, ErrorRecord, Experiment, Metadata};
pub use io::{emit_csv, load_csv, load_series, write_csv, CSV_HEADER};
