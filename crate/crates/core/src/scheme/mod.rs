//! Multi-echelon distribution schemes built from layers.

mod builders;
mod compare;
mod layer;

pub use builders::{
    base_params, build_original, build_pi, build_ucc, presets, ClassRoute, ConsolidationConfig,
    FleetShare, HubConfig, Supplier,
};
pub use compare::{compare_schemes, ComparisonRow, ComparisonTable};
pub use layer::{
    evaluate_layer, evaluate_scheme, FleetAssignment, LayerMode, LayerReport, LayerSpec,
    SchemeReport, SchemeSpec, ShuttleLane,
};
