//! Config-driven experiments writing CSV tables and a JSON manifest.

mod config;
mod runner;

pub use config::{
    Allocation, ChannelSection, CoverageSection, ExperimentConfig, ExperimentKind, ExperimentSection, SweepSection,
    TrainingSection,
};
pub use runner::{
    coverage_rows, csv_schema, design_codebook_rows, quantization_rows, run, single_path_error_rows, snap_to_grid,
    spectral_efficiency_rows, table_path, write_csv, CodebookRow, CoverageRow, ErrorRow, Manifest, OutputFile,
    QuantizationRow, RateRow, MANIFEST_SCHEMA,
};
