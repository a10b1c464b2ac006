//! Dynamic metrics, separated and spanning counts, exact small-instance
//! oracles and polynomial growth-exponent estimation.

mod counting;
mod growth;
mod net;
mod prepared;
mod system;

pub use counting::{
    exact_cov_oracle, exact_sep_oracle, exact_span_oracle, greedy_separated, greedy_spanning, ExactDn,
    MatrixSample, COVER_ORACLE_MAX, SEP_ORACLE_MAX,
};
pub use growth::{
    fit_line, growth_exponent, kato_bound_check, lap_bound_check, regress, CountRow, EstimationProtocol,
    GrowthReport, KatoReport, LapReport, SlopeFit,
};
pub use net::PlNet;
pub use prepared::{Prepared, ProductPrepared};
pub use system::{
    conjugate_system, dynamic_distance, pl_system, power_system, product_system, MetricSystem, NetOptions,
    PlSystem, ProductSystem, State,
};
pub(crate) use prepared::lazy_greedy_cover_with;
