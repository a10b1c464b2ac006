//! Piecewise-linear self-maps of metric graphs with exact rational data.

mod fixed;
mod float;
mod laps;
mod map;
mod validate;

pub use fixed::{
    exact_recurrent_set, fixed_points, periodic_points, wandering_status, FixedSet, Wandering,
    WanderingProbe, WanderingVerdict, CIRCLE_PERIOD_SEARCH,
};
pub use float::FloatMap;
pub use laps::{
    lap_number, lap_number_capped, phi, phi_capped, phi_candidates, phi_of_map,
    preimage_components,
};
pub use map::{
    compose, compose_capped, iterate, iterate_capped, profile_pieces, PLMap, Piece,
    DEFAULT_PIECE_CAP,
};
pub use validate::{
    homeo_certificate, validate_map, ContinuityViolation, HomeoCertificate, Orientation,
    ValidityReport,
};
