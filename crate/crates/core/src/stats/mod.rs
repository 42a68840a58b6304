//! Numerical kernels: per-cell estimation, seed-paired tests and the Holm
//! correction. All functions are pure.

mod bootstrap;
mod cell;
mod holm;
mod paired;
mod pairwise;
pub mod special;
mod wilcoxon;

pub use bootstrap::{bootstrap_halfwidth, quantile_sorted, BootstrapSpec};
pub use cell::{cell_estimate, mean, sample_variance, CellEstimate, CellSummary};
pub use holm::holm_adjust;
pub use paired::{paired_t, PairedT};
pub use pairwise::{pairwise_task, PairwiseResult};
pub use special::{chi2_sf, t_quantile};
pub use wilcoxon::{average_ranks, wilcoxon_signed_rank, SignedRank, EXACT_LIMIT};
