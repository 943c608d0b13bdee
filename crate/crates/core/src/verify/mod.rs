//! Numerical checks of Monge and pointwise solution properties.

mod checks;
mod residual;

pub use checks::{
    ae_subsolution_check, comparison_harness, lipschitz_vs_optical, stability_harness, AeReport, ComparisonReport,
    LipschitzReport, StabilityReport,
};
pub use residual::{
    monge_report, monge_residual, MongeRecord, MongeResidualReport, Requirement, ResidualClass, ResidualOptions, Side,
};
