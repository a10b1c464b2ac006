//! Finite-subset hyperspaces `F_k(X)` with the Hausdorff metric and the
//! induced maps `F_k(f)`.

mod subset;
mod symmetric;

pub use subset::{factor_map_check, hausdorff_distance, induced_map, FactorCheck, FiniteSubset};
pub use symmetric::{
    hyperspace_growth_trend, symmetric_product_system, HyperspaceTrend, SubsetNet, SymmetricProductSystem,
    TrendRow, MAX_SYMMETRIC_POWER, SYMMETRIC_SPAN_BUDGET,
};
