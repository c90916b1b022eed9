//! Domain types and the analytical cost model.

mod cost;
mod kpi;
mod tours;
mod types;

pub use cost::{
    distance_cost, external_cost, fill_rate, plan_time, time_cost, transport_cost, travel_time,
    ExternalCosts, KpiReport,
};
pub use kpi::{percent_delta, Kpi};
pub use tours::{
    demand_effective_capacity, effective_capacity, min_feasible_lead_time, route_distance,
    solve_tour_plan, LeadTimeThreshold, TourPlan, DEFAULT_LEAD_RESOLUTION_H, MAX_ITERATIONS,
};
pub use types::{
    DeliveryUnitType, DemandProfile, ExternalCostFactors, NetworkParams, TemperatureClass,
    VehicleType, EXTERNAL_CATEGORIES,
};
