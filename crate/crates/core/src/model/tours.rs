//! Tour counts and route lengths.
//!
//! The number of tours a vehicle type runs per day is the least integer
//! `m` with `m = max(capacity, shift, lead)`, each ceiling evaluated at the
//! route length implied by `m`. Route length is affine in `m`, so the map is
//! monotone and plain iteration from the capacity ceiling reaches the least
//! fixed point or diverges.

use serde::{Deserialize, Serialize};

use crate::error::{Constraint, Error, Result};
use crate::model::types::{DeliveryUnitType, DemandProfile, NetworkParams, VehicleType};

pub const MAX_ITERATIONS: usize = 10_000;
pub const DEFAULT_LEAD_RESOLUTION_H: f64 = 0.05;

/// Granularity of the square-root route term (2^-32 km). Keeps the
/// per-tour increment of the route length exact in binary arithmetic.
const ROUTE_QUANTUM: f64 = 1.0 / 4_294_967_296.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourPlan {
    pub vehicle: VehicleType,
    pub tours: u64,
    pub distance_km: f64,
    pub binding_constraint: Constraint,
    /// Weight carried over all tours.
    pub weight_kg: f64,
    pub stops: f64,
    pub effective_capacity_kg: f64,
}

/// Length of `tours` round trips from the depot plus the local tour term
/// over `stops` stops.
pub fn route_distance(tours: u64, stops: f64, params: &NetworkParams) -> Result<f64> {
    if !(stops >= 0.0 && stops.is_finite()) {
        return Err(Error::domain(format!(
            "stops must be non-negative, got {stops}"
        )));
    }
    let local = (params.daganzo_k * (params.area_km2 * stops).sqrt() / ROUTE_QUANTUM).round()
        * ROUTE_QUANTUM;
    Ok(2.0 * params.radius_km * tours as f64 + local)
}

/// Payload limit of `vehicle` when loaded with `unit`, the lesser of the
/// weight capacity and the floor positions filled with that unit.
pub fn effective_capacity(vehicle: &VehicleType, unit: &DeliveryUnitType) -> Result<f64> {
    if vehicle.max_units_footprint < 1 {
        return Err(Error::domain(format!(
            "vehicle `{}` has no floor positions",
            vehicle.id
        )));
    }
    Ok(vehicle
        .capacity_kg
        .min(vehicle.max_units_footprint as f64 * unit.footprint_weight_kg()))
}

/// Effective capacity against the dominant unit of a mixed load.
pub fn demand_effective_capacity(vehicle: &VehicleType, demand: &DemandProfile) -> Result<f64> {
    match demand.dominant_unit() {
        Some(unit) => effective_capacity(vehicle, unit),
        None => Ok(vehicle.capacity_kg),
    }
}

fn count_ceiling(x: f64) -> u64 {
    if x <= 0.0 || x.is_nan() {
        0
    } else if x >= 1e15 {
        u64::MAX / 2
    } else {
        x.ceil() as u64
    }
}

struct Ceilings {
    capacity: u64,
    shift: u64,
    lead: u64,
}

impl Ceilings {
    fn max(&self) -> (u64, Constraint) {
        let mut best = (self.capacity, Constraint::Capacity);
        if self.shift > best.0 {
            best = (self.shift, Constraint::Shift);
        }
        if self.lead > best.0 {
            best = (self.lead, Constraint::LeadTime);
        }
        best
    }
}

struct TourModel<'a> {
    params: &'a NetworkParams,
    speed: f64,
    weight: f64,
    stops: f64,
    capacity_kg: f64,
}

impl TourModel<'_> {
    fn ceilings(&self, tours: u64) -> Result<Ceilings> {
        let p = self.params;
        let d = route_distance(tours, self.stops, p)?;
        let shift = (d / self.speed + p.stop_time_h * self.stops) / p.shift_duration_h;
        let lead = ((d - p.radius_km) / self.speed + p.stop_time_h * (self.stops - 1.0).max(0.0))
            / p.lead_time_h;
        Ok(Ceilings {
            capacity: count_ceiling(self.weight / self.capacity_kg),
            shift: count_ceiling(shift),
            lead: count_ceiling(lead),
        })
    }

    /// Tours added to a ceiling per extra tour.
    fn slope(&self, constraint: Constraint) -> f64 {
        let p = self.params;
        match constraint {
            Constraint::Capacity => 0.0,
            Constraint::Shift => 2.0 * p.radius_km / (self.speed * p.shift_duration_h),
            Constraint::LeadTime => 2.0 * p.radius_km / (self.speed * p.lead_time_h),
        }
    }
}

/// Least fixed point of the tour-count recursion for one vehicle type
/// serving `demand`.
pub fn solve_tour_plan(
    vehicle: &VehicleType,
    demand: &DemandProfile,
    params: &NetworkParams,
) -> Result<TourPlan> {
    vehicle.validate()?;
    demand.validate()?;
    params.validate()?;
    let capacity_kg = demand_effective_capacity(vehicle, demand)?;
    let model = TourModel {
        params,
        speed: params.travel_speed(vehicle),
        weight: demand.total_weight_kg,
        stops: demand.total_stops,
        capacity_kg,
    };

    let mut tours = model.ceilings(0)?.capacity;
    for _ in 0..MAX_ITERATIONS {
        let (next, binding) = model.ceilings(tours)?.max();
        if next == tours {
            return Ok(TourPlan {
                vehicle: vehicle.clone(),
                tours,
                distance_km: route_distance(tours, model.stops, params)?,
                binding_constraint: binding,
                weight_kg: model.weight,
                stops: model.stops,
                effective_capacity_kg: capacity_kg,
            });
        }
        debug_assert!(next > tours, "tour iteration must be nondecreasing");
        if model.slope(binding) >= 1.0 {
            return Err(diverges(binding, vehicle, next));
        }
        tours = next;
    }
    let (_, binding) = model.ceilings(tours)?.max();
    Err(diverges(binding, vehicle, tours))
}

fn diverges(constraint: Constraint, vehicle: &VehicleType, tours: u64) -> Error {
    Error::Infeasible {
        constraint,
        context: format!("vehicle `{}` reached {tours} tours", vehicle.id),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadTimeThreshold {
    /// Smallest lead time on the grid with a converging plan.
    Feasible(f64),
    /// Diverges even with a full-day lead time.
    Never,
}

/// Smallest lead time on a `resolution`-hour grid in (0, 24] for which the
/// tour plan converges.
pub fn min_feasible_lead_time(
    vehicle: &VehicleType,
    demand: &DemandProfile,
    params: &NetworkParams,
    resolution: f64,
) -> Result<LeadTimeThreshold> {
    if !(resolution > 0.0 && resolution <= 24.0) {
        return Err(Error::domain(format!(
            "lead time resolution must lie in (0, 24] h, got {resolution}"
        )));
    }
    vehicle.validate()?;
    demand.validate()?;
    params.validate()?;

    let steps = (24.0 / resolution + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (1..=steps).map(|j| j as f64 * resolution).collect();
    if grid.last().is_none_or(|&last| last < 24.0 - 1e-9) {
        grid.push(24.0);
    }

    let feasible_at = |lt: f64| -> Result<bool> {
        let trial = NetworkParams {
            lead_time_h: lt.min(24.0),
            ..params.clone()
        };
        match solve_tour_plan(vehicle, demand, &trial) {
            Ok(_) => Ok(true),
            Err(e) if e.is_infeasible() => Ok(false),
            Err(e) => Err(e),
        }
    };

    if !feasible_at(24.0)? {
        return Ok(LeadTimeThreshold::Never);
    }
    // Feasibility is monotone in the lead time.
    let (mut lo, mut hi) = (0usize, grid.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible_at(grid[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(LeadTimeThreshold::Feasible(grid[lo].min(24.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::TemperatureClass;

    fn truck(capacity_kg: f64, speed_kmh: f64) -> VehicleType {
        VehicleType {
            id: "truck".into(),
            capacity_kg,
            speed_kmh,
            cost_per_km: 8.0,
            cost_per_hour: 30.0,
            temperature_class: TemperatureClass::T,
            max_units_footprint: 33,
        }
    }

    fn params(radius_km: f64, stop_time_h: f64, shift: f64, lead: f64) -> NetworkParams {
        NetworkParams {
            radius_km,
            area_km2: 186.0,
            daganzo_k: 0.57,
            congestion_factor: 1.0,
            stop_time_h,
            shift_duration_h: shift,
            lead_time_h: lead,
            speed_kmh: None,
        }
    }

    #[test]
    fn zero_demand_needs_no_tours() {
        let plan = solve_tour_plan(
            &truck(25_000.0, 30.0),
            &DemandProfile::zero(),
            &params(20.0, 0.5, 8.0, 24.0),
        )
        .unwrap();
        assert_eq!(plan.tours, 0);
        assert_eq!(plan.distance_km, 0.0);
    }

    #[test]
    fn route_distance_without_tours_or_stops_is_zero() {
        assert_eq!(
            route_distance(0, 0.0, &params(30.0, 0.25, 8.0, 8.0)).unwrap(),
            0.0
        );
        assert!(route_distance(1, -1.0, &params(30.0, 0.25, 8.0, 8.0)).is_err());
    }

    #[test]
    fn steep_lead_ceiling_diverges() {
        // r = 30 km at 20 km/h gives a lead slope of 3/lt.
        let err = solve_tour_plan(
            &truck(25_000.0, 20.0),
            &DemandProfile::aggregate(5_000.0, 10.0),
            &params(30.0, 0.25, 24.0, 2.0),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Infeasible {
                constraint: Constraint::LeadTime,
                ..
            }
        ));
    }

    #[test]
    fn footprint_free_vehicle_is_rejected() {
        let mut v = truck(17_000.0, 20.0);
        v.max_units_footprint = 0;
        let unit = DeliveryUnitType::new("pallet", 450.0, 1.0);
        assert!(effective_capacity(&v, &unit).is_err());
    }

    #[test]
    fn lead_resolution_must_fit_in_a_day() {
        let r = min_feasible_lead_time(
            &truck(25_000.0, 20.0),
            &DemandProfile::aggregate(5_000.0, 10.0),
            &params(30.0, 0.25, 24.0, 4.0),
            25.0,
        );
        assert!(r.is_err());
    }
}
