use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::tours::TourPlan;
use crate::model::types::{
    compensated_sum, DeliveryUnitType, ExternalCostFactors, NetworkParams, VehicleType,
};

/// Kilometre-based operating cost of the plans.
pub fn distance_cost(plans: &[TourPlan]) -> f64 {
    plans
        .iter()
        .map(|p| p.distance_km * p.vehicle.cost_per_km)
        .sum()
}

/// Driving plus stop time of one plan.
pub fn plan_time(plan: &TourPlan, params: &NetworkParams) -> Result<f64> {
    let speed = params.travel_speed(&plan.vehicle);
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::domain(format!(
            "vehicle `{}` has zero speed",
            plan.vehicle.id
        )));
    }
    Ok(plan.distance_km / speed + params.stop_time_h * plan.stops)
}

/// Total working time of the plans.
pub fn travel_time(plans: &[TourPlan], params: &NetworkParams) -> Result<f64> {
    plans.iter().map(|p| plan_time(p, params)).sum()
}

/// Wage cost of the working time of the plans.
pub fn time_cost(plans: &[TourPlan], params: &NetworkParams) -> Result<f64> {
    plans
        .iter()
        .map(|p| Ok(plan_time(p, params)? * p.vehicle.cost_per_hour))
        .sum()
}

pub fn transport_cost(plans: &[TourPlan], params: &NetworkParams) -> Result<f64> {
    Ok(distance_cost(plans) + time_cost(plans, params)?)
}

/// External costs by category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalCosts {
    pub accident: f64,
    pub air_pollution: f64,
    pub climate_change: f64,
    pub noise: f64,
    pub congestion: f64,
}

impl ExternalCosts {
    pub fn categories(&self) -> [f64; 5] {
        [
            self.accident,
            self.air_pollution,
            self.climate_change,
            self.noise,
            self.congestion,
        ]
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.categories())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ExternalCosts {
            accident: self.accident * factor,
            air_pollution: self.air_pollution * factor,
            climate_change: self.climate_change * factor,
            noise: self.noise * factor,
            congestion: self.congestion * factor,
        }
    }
}

impl AddAssign for ExternalCosts {
    fn add_assign(&mut self, rhs: Self) {
        self.accident += rhs.accident;
        self.air_pollution += rhs.air_pollution;
        self.climate_change += rhs.climate_change;
        self.noise += rhs.noise;
        self.congestion += rhs.congestion;
    }
}

/// External costs of driving `distance_km` vehicle-kilometres.
pub fn external_cost(distance_km: f64, factors: &ExternalCostFactors) -> Result<ExternalCosts> {
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(Error::domain(format!(
            "distance must be non-negative, got {distance_km}"
        )));
    }
    Ok(ExternalCosts {
        accident: factors.accident * distance_km,
        air_pollution: factors.air_pollution * distance_km,
        climate_change: factors.climate_change * distance_km,
        noise: factors.noise * distance_km,
        congestion: factors.congestion * distance_km,
    })
}

/// Average load per tour as a fraction of the effective capacity.
pub fn fill_rate(
    loaded_weight_kg: f64,
    vehicle: &VehicleType,
    dominant_unit: Option<&DeliveryUnitType>,
    tours: u64,
) -> Result<f64> {
    if !(loaded_weight_kg >= 0.0 && loaded_weight_kg.is_finite()) {
        return Err(Error::domain(format!(
            "loaded weight must be non-negative, got {loaded_weight_kg}"
        )));
    }
    if loaded_weight_kg == 0.0 {
        return Ok(0.0);
    }
    if tours == 0 {
        return Err(Error::domain(format!(
            "vehicle `{}` carries {loaded_weight_kg} kg without tours",
            vehicle.id
        )));
    }
    let capacity = match dominant_unit {
        Some(unit) => crate::model::tours::effective_capacity(vehicle, unit)?,
        None => vehicle.capacity_kg,
    };
    let rate = loaded_weight_kg / tours as f64 / capacity;
    if rate > 1.0 + 1e-12 {
        return Err(Error::Consistency(format!(
            "vehicle `{}` loads {:.2} kg per tour against an effective capacity of {capacity:.2} kg",
            vehicle.id,
            loaded_weight_kg / tours as f64
        )));
    }
    Ok(rate.min(1.0))
}

/// Key performance indicators of a plan, layer or scheme.
///
/// Only additive quantities are stored. Transport cost, external cost
/// total and fill rate are derived on read, so summing reports is exact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub total_distance_km: f64,
    pub total_time_h: f64,
    pub distance_cost: f64,
    pub time_cost: f64,
    pub handling_cost: f64,
    pub external: ExternalCosts,
    pub loaded_weight_kg: f64,
    /// Sum over plans of weight times fill rate.
    pub fill_weight_kg: f64,
    pub deliveries: f64,
    /// Sum of weight over effective capacity; fractional tour average.
    pub weight_implied_tours: f64,
    pub tours_by_vehicle: BTreeMap<String, u64>,
}

impl KpiReport {
    pub fn transport_cost(&self) -> f64 {
        self.distance_cost + self.time_cost
    }

    pub fn external_cost_total(&self) -> f64 {
        self.external.total()
    }

    /// Transport plus handling cost.
    pub fn total_cost(&self) -> f64 {
        self.transport_cost() + self.handling_cost
    }

    /// Weight-weighted mean fill rate.
    pub fn fill_rate(&self) -> f64 {
        if self.loaded_weight_kg == 0.0 {
            0.0
        } else {
            (self.fill_weight_kg / self.loaded_weight_kg).min(1.0)
        }
    }

    /// Tour-weighted mean fill rate: average load per tour over its capacity.
    pub fn tour_fill_rate(&self) -> f64 {
        match self.total_tours() {
            0 => 0.0,
            n => (self.weight_implied_tours / n as f64).min(1.0),
        }
    }

    pub fn total_tours(&self) -> u64 {
        self.tours_by_vehicle.values().sum()
    }

    /// Report of one solved plan.
    pub fn from_plan(
        plan: &TourPlan,
        dominant_unit: Option<&DeliveryUnitType>,
        params: &NetworkParams,
        factors: &ExternalCostFactors,
    ) -> Result<Self> {
        let time = plan_time(plan, params)?;
        let fill = fill_rate(plan.weight_kg, &plan.vehicle, dominant_unit, plan.tours)?;
        let mut tours_by_vehicle = BTreeMap::new();
        tours_by_vehicle.insert(plan.vehicle.id.clone(), plan.tours);
        Ok(KpiReport {
            total_distance_km: plan.distance_km,
            total_time_h: time,
            distance_cost: plan.distance_km * plan.vehicle.cost_per_km,
            time_cost: time * plan.vehicle.cost_per_hour,
            handling_cost: 0.0,
            external: external_cost(plan.distance_km, factors)?,
            loaded_weight_kg: plan.weight_kg,
            fill_weight_kg: plan.weight_kg * fill,
            deliveries: 0.0,
            weight_implied_tours: if plan.weight_kg > 0.0 {
                plan.weight_kg / plan.effective_capacity_kg
            } else {
                0.0
            },
            tours_by_vehicle,
        })
    }

    /// Every additive field multiplied by `n`.
    pub fn scaled(&self, n: u32) -> Self {
        let f = n as f64;
        KpiReport {
            total_distance_km: self.total_distance_km * f,
            total_time_h: self.total_time_h * f,
            distance_cost: self.distance_cost * f,
            time_cost: self.time_cost * f,
            handling_cost: self.handling_cost * f,
            external: self.external.scaled(f),
            loaded_weight_kg: self.loaded_weight_kg * f,
            fill_weight_kg: self.fill_weight_kg * f,
            deliveries: self.deliveries * f,
            weight_implied_tours: self.weight_implied_tours * f,
            tours_by_vehicle: self
                .tours_by_vehicle
                .iter()
                .map(|(k, v)| (k.clone(), v * n as u64))
                .collect(),
        }
    }
}

impl AddAssign<&KpiReport> for KpiReport {
    fn add_assign(&mut self, rhs: &KpiReport) {
        self.total_distance_km += rhs.total_distance_km;
        self.total_time_h += rhs.total_time_h;
        self.distance_cost += rhs.distance_cost;
        self.time_cost += rhs.time_cost;
        self.handling_cost += rhs.handling_cost;
        self.external += rhs.external;
        self.loaded_weight_kg += rhs.loaded_weight_kg;
        self.fill_weight_kg += rhs.fill_weight_kg;
        self.deliveries += rhs.deliveries;
        self.weight_implied_tours += rhs.weight_implied_tours;
        for (k, v) in &rhs.tours_by_vehicle {
            *self.tours_by_vehicle.entry(k.clone()).or_insert(0) += v;
        }
    }
}

impl<'a> std::iter::Sum<&'a KpiReport> for KpiReport {
    fn sum<I: Iterator<Item = &'a KpiReport>>(iter: I) -> Self {
        let mut total = KpiReport::default();
        for r in iter {
            total += r;
        }
        total
    }
}
