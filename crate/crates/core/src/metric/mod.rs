//! Horizontal graphs and the distances computed on them.

pub mod cache;
pub(crate) mod graph;
mod probe;
mod search;
mod stencil;

pub use graph::{layer_spacing, GraphStats, HorizontalGraph, Metric};
pub use probe::{convergence_probe, fit_slope, loglog_slope, ProbeRow, ProbeTable};
pub use search::{
    bounded_search, dist_point, extract_path, search, shortest_distances, two_source_search, Direction, DistanceField,
    Path, SearchOptions, TwoLabels,
};
pub use stencil::{Stencil, StencilDescriptor};
