//! Expertise grouping, error-direction statistics and the ablation grid.

mod ablation;
mod errors;
mod grouping;
mod stats;

pub use ablation::{ablation_grid, run_ablation, AblationCell, AblationResult, AblationSummary};
pub use errors::{error_stats, ErrorStats, Group, GroupSummary, PitcherError};
pub use grouping::{candidate_sets, eta, eta_from_stats, search_grouping, GroupingResult, GroupingSearch};
pub use stats::{incomplete_beta, ln_gamma, pooled_t_test, student_t_two_tailed, TestResult};
