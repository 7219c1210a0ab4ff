//! Counting tables with prescribed row and column sums.

mod exact;
mod formulas;
mod lowrank;
mod margins;
mod montecarlo;

pub use exact::{
    exact_count_01, exact_count_bruteforce, exact_count_dp, for_each_table, DEFAULT_EXACT_BUDGET,
};
pub use formulas::{
    bekessy_estimate, fisher_yates_count, margin_blocks, margin_factorials,
    weighted_block_matrix, weighted_fy_count,
};
pub use lowrank::{
    lowrank_01_count, lowrank_01_exact, lowrank_asymptotic_count, lowrank_column_sets_count,
    lowrank_column_sets_exact, lowrank_exact_count, lowrank_weighted_count, pair_row_product,
    row_sum_seed, LowRankOptions, LowRankResult, PairingRoute, RowProduct, Target,
};
pub use margins::{LowRankFactors, Margins, WeightMatrix, RANK_TOLERANCE};
pub use montecarlo::{
    block_permanent, bounded_margin_ratio_bound, chebyshev_sample_count, draw_cells,
    mc_estimate_count, mc_weighted_count, moment_ratio, sample_permanents, summarize,
    variance_ratio_report, weighted_variance_ratio_report, BoundedMarginBound, CountEstimate,
    VarianceReport, CHEBYSHEV_CONFIDENCE, CHEBYSHEV_EPSILON, Z_95,
};
