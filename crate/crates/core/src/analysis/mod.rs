//! Numerical checks behind the three lemmas and the regret search.

mod lemma1;
mod lemma2;
mod lemma3;
mod search;

pub use lemma1::{
    exact_bounds, lemma1_min_gap, lemma1_min_gap_with_grid, lemma1_twin_cases, relaxed_bounds, twin_cases_csv,
    MinGap, MinGapAtE, TwinBounds, TwinCase,
};
pub use lemma2::{lemma2_bound, lemma2_bound_with, lemma2_parity_failure_bound, quadratic, ChainAudit, Lemma2Bound, ParityFailureBound};
pub use lemma3::{
    g_map, lemma3_base_case, lemma3_iterate, lemma3_iterate_interval, lemma3_recursion_check, xor_convolution,
    BaseCase, Enclosure, Iteration,
};
pub use search::{min_regret_search, pure_corner_scan, pure_q_collapse, QCollapse, ScoredProfile, SearchOptions, SearchResult};
