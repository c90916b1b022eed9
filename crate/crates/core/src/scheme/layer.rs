use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    demand_effective_capacity, external_cost, fill_rate, solve_tour_plan, DemandProfile,
    ExternalCostFactors, KpiReport, NetworkParams, VehicleType,
};

/// A vehicle type with the demand it serves in one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetAssignment {
    pub vehicle: VehicleType,
    pub demand: DemandProfile,
}

/// Round trips from an origin to one consolidation node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuttleLane {
    pub label: String,
    pub demand: DemandProfile,
    /// Pinned tour count. Derived from weight and capacity when unset.
    pub tours: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LayerMode {
    Analytical {
        fleet: Vec<FleetAssignment>,
    },
    FixedShuttle {
        vehicle: VehicleType,
        lanes: Vec<ShuttleLane>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub params: NetworkParams,
    pub mode: LayerMode,
    /// Charged per delivery dispatched by this layer.
    pub handling_cost_per_delivery: f64,
    /// Identical subregions; demand in `mode` is per subregion and the
    /// area in `params` covers all of them.
    pub subregion_count: u32,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let scoped = |e: Error| e.within(&format!("layer `{}`", self.name));
        self.params.validate().map_err(scoped)?;
        if self.subregion_count < 1 {
            return Err(scoped(Error::domain("subregion_count must be at least 1")));
        }
        if !(self.handling_cost_per_delivery >= 0.0 && self.handling_cost_per_delivery.is_finite())
        {
            return Err(scoped(Error::domain(
                "handling_cost_per_delivery must be non-negative",
            )));
        }
        match &self.mode {
            LayerMode::Analytical { fleet } => {
                for a in fleet {
                    a.vehicle.validate().map_err(scoped)?;
                    a.demand.validate().map_err(scoped)?;
                    check_classes(&a.vehicle, &a.demand).map_err(scoped)?;
                }
            }
            LayerMode::FixedShuttle { vehicle, lanes } => {
                vehicle.validate().map_err(scoped)?;
                for lane in lanes {
                    lane.demand.validate().map_err(scoped)?;
                    if lane.tours == Some(0) && lane.demand.total_weight_kg > 0.0 {
                        return Err(scoped(Error::domain(format!(
                            "lane `{}` carries weight with zero pinned tours",
                            lane.label
                        ))));
                    }
                }
            }
        }
        Ok(())
    }

    /// Weight moved by the layer over all subregions.
    pub fn weight_kg(&self) -> f64 {
        let per_subregion: f64 = match &self.mode {
            LayerMode::Analytical { fleet } => fleet.iter().map(|a| a.demand.total_weight_kg).sum(),
            LayerMode::FixedShuttle { lanes, .. } => {
                lanes.iter().map(|l| l.demand.total_weight_kg).sum()
            }
        };
        per_subregion * self.subregion_count as f64
    }

    /// Network parameters of a single subregion.
    pub fn subregion_params(&self) -> NetworkParams {
        NetworkParams {
            area_km2: self.params.area_km2 / self.subregion_count as f64,
            ..self.params.clone()
        }
    }
}

pub(crate) fn check_classes(vehicle: &VehicleType, demand: &DemandProfile) -> Result<()> {
    for unit in demand.units.iter().filter(|u| u.stops > 0.0) {
        if !vehicle.temperature_class.carries(unit.temperature_class) {
            return Err(Error::domain(format!(
                "vehicle `{}` (class {}) cannot carry `{}` goods of class {}",
                vehicle.id, vehicle.temperature_class, unit.id, unit.temperature_class
            )));
        }
    }
    Ok(())
}

/// KPIs of one layer, summed over its subregions.
pub fn evaluate_layer(layer: &LayerSpec, factors: &ExternalCostFactors) -> Result<KpiReport> {
    layer.validate()?;
    let scope = format!("layer `{}`", layer.name);
    let params = layer.subregion_params();
    let mut report = KpiReport::default();
    match &layer.mode {
        LayerMode::Analytical { fleet } => {
            for a in fleet {
                let plan = solve_tour_plan(&a.vehicle, &a.demand, &params)
                    .map_err(|e| e.within(&scope))?;
                let part = KpiReport::from_plan(&plan, a.demand.dominant_unit(), &params, factors)
                    .map_err(|e| e.within(&scope))?;
                report += &part;
                report.deliveries += a.demand.total_stops;
            }
        }
        LayerMode::FixedShuttle { vehicle, lanes } => {
            for lane in lanes {
                let part =
                    shuttle_lane(vehicle, lane, &params, factors).map_err(|e| e.within(&scope))?;
                report += &part;
            }
        }
    }
    report.handling_cost = layer.handling_cost_per_delivery * report.deliveries;
    Ok(report.scaled(layer.subregion_count))
}

fn shuttle_lane(
    vehicle: &VehicleType,
    lane: &ShuttleLane,
    params: &NetworkParams,
    factors: &ExternalCostFactors,
) -> Result<KpiReport> {
    let weight = lane.demand.total_weight_kg;
    let capacity = demand_effective_capacity(vehicle, &lane.demand)?;
    let tours = match lane.tours {
        Some(t) => t,
        None if weight > 0.0 => ((weight / capacity).ceil() as u64).max(1),
        None => 0,
    };
    let fill = fill_rate(weight, vehicle, lane.demand.dominant_unit(), tours)
        .map_err(|e| e.within(&format!("lane `{}`", lane.label)))?;
    let distance = 2.0 * params.radius_km * tours as f64;
    let time = distance / params.travel_speed(vehicle) + params.stop_time_h * tours as f64;
    let mut report = KpiReport {
        total_distance_km: distance,
        total_time_h: time,
        distance_cost: distance * vehicle.cost_per_km,
        time_cost: time * vehicle.cost_per_hour,
        external: external_cost(distance, factors)?,
        loaded_weight_kg: weight,
        fill_weight_kg: weight * fill,
        weight_implied_tours: if weight > 0.0 { weight / capacity } else { 0.0 },
        ..KpiReport::default()
    };
    report.tours_by_vehicle.insert(vehicle.id.clone(), tours);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub name: String,
    pub layers: Vec<LayerSpec>,
    pub external_factors: ExternalCostFactors,
}

impl SchemeSpec {
    pub fn validate(&self) -> Result<()> {
        let scoped = |e: Error| e.within(&format!("scheme `{}`", self.name));
        if self.layers.is_empty() {
            return Err(scoped(Error::domain("a scheme needs at least one layer")));
        }
        self.external_factors.validate().map_err(scoped)?;
        for layer in &self.layers {
            layer.validate().map_err(scoped)?;
        }
        let inbound: f64 = self
            .layers
            .iter()
            .filter(|l| matches!(l.mode, LayerMode::FixedShuttle { .. }))
            .map(LayerSpec::weight_kg)
            .sum();
        let has_shuttle = self
            .layers
            .iter()
            .any(|l| matches!(l.mode, LayerMode::FixedShuttle { .. }));
        if has_shuttle {
            let outbound: f64 = self
                .layers
                .iter()
                .filter(|l| matches!(l.mode, LayerMode::Analytical { .. }))
                .map(LayerSpec::weight_kg)
                .sum();
            if (inbound - outbound).abs() > 1e-9 * inbound.abs().max(outbound.abs()).max(1.0) {
                return Err(scoped(Error::domain(format!(
                    "weight into consolidation nodes ({inbound} kg) differs from weight dispatched ({outbound} kg)"
                ))));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub name: String,
    pub kpis: KpiReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub name: String,
    pub layers: Vec<LayerReport>,
    pub total: KpiReport,
}

/// Evaluates every layer and sums the reports in declaration order.
pub fn evaluate_scheme(scheme: &SchemeSpec) -> Result<SchemeReport> {
    scheme.validate()?;
    let scope = format!("scheme `{}`", scheme.name);
    let outcomes: Vec<Result<KpiReport>> = scheme
        .layers
        .par_iter()
        .map(|layer| evaluate_layer(layer, &scheme.external_factors))
        .collect();
    let mut layers = Vec::with_capacity(outcomes.len());
    for (layer, outcome) in scheme.layers.iter().zip(outcomes) {
        layers.push(LayerReport {
            name: layer.name.clone(),
            kpis: outcome.map_err(|e| e.within(&scope))?,
        });
    }
    let total = layers.iter().map(|l| &l.kpis).sum();
    Ok(SchemeReport {
        name: scheme.name.clone(),
        layers,
        total,
    })
}
