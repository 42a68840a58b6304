//! Statistical reporting for multi-seed benchmarks.
//!
//! A [`MetricTensor`] of per-(task, model, seed) final metrics goes in; a
//! [`BenchmarkReport`] with per-cell confidence intervals, Holm-corrected
//! seed-paired tests and a Friedman/Nemenyi critical-difference analysis
//! comes out. [`runner`] fills the tensor by driving trial executors over
//! a registry of tasks and models.

pub mod cli;
pub mod demo;
pub mod error;
pub mod model;
pub mod ranking;
pub mod render;
pub mod report;
pub mod runner;
pub mod stats;
pub mod synthetic;

mod serde_ext;

pub use error::{CacheError, Error, Result};
pub use model::{
    validate_tensor, CellRecord, CiMethod, MetricDirection, MetricTensor, ModelSpec,
    PairwiseMethod, ReportConfig, TaskSidecar, TaskSpec, TaskType, TensorDocument, Verdict,
    Violation,
};
pub use ranking::{
    cd_analysis, find_cliques, friedman, nemenyi_cd, rank_task, CdResult, Clique, RankTable,
};
pub use render::{render_cd_svg, render_cells_svg, CdStyle};
pub use report::{
    build_report, cache_load, cache_save, mark_cells, pairwise_table, summary_table, to_latex,
    BenchmarkReport, CellMark, LatexOptions, LatexTable, PairwiseRow, RowMarks, SummaryRow,
};
