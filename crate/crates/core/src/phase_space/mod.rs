//! Finite metric graphs: intervals, circles, trees and local dendrites with
//! their geodesic metric.

mod float;
mod graph;

pub use float::{decode, FloatGraph, Loc};
pub use graph::{
    build_circle, build_graph, build_interval, Edge, GraphKind, GraphPoint, MetricGraph,
    PointClass, PointKind,
};
