//! Experiment orchestration: coupled replications over a ladder of
//! population sizes, rate fits, bound validation and report files.

mod config;
mod records;
mod run;

pub use config::{BoundsConfig, CnRule, ExperimentConfig, ExperimentKind, LawConfig, Metric, SequenceConfig};
pub use records::{
    fit_rate, fit_rate_by, parse_records_csv, quantile, records_to_csv, summarize, Correction, LadderRecord,
    LevelSummary, RateFit,
};
pub use run::{
    fit_all, ladder_checks, run_coupled_replication, run_experiment, run_kmt_replication, run_ladder, slope_band,
    validate_bounds, write_replication, BoundsReport, Check, ExperimentReport, FitRow, FluidFit, KMT_RATIO_LIMIT,
};
