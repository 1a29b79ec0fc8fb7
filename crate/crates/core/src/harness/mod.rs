//! Experiment pipeline: configuration, stage commands and result tables.

mod commands;
mod config;
mod evaluate;
mod layout;
mod tables;

pub use commands::{cmd_report, Experiment};
pub use config::{
    ChannelSection, CurvesSection, EesmSection, EvaluateSection, ExperimentConfig, GenerateSection,
    LinkSection, NeuralSection, OracleFamily, OraclePreset, OracleSetting, SeedSection, Source,
    SweepSection,
};
pub use evaluate::{evaluate_sweep, FepPredictor, PointEvaluation, Reference, SweepEvaluation};
pub use layout::Layout;
pub use tables::{
    pretty_table, read_csv, write_csv, CalibrationRow, CsvSchema, DecisionRow, RmseRow,
    ThroughputRow, TrainLogRow,
};
