use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    demand_effective_capacity, route_distance, solve_tour_plan, transport_cost, DeliveryUnitType,
    DemandProfile, ExternalCostFactors, KpiReport, NetworkParams, TourPlan, VehicleType,
};
use crate::optimizer::allocation::AllocationMatrix;
use crate::scheme::{evaluate_layer, FleetAssignment, LayerMode, LayerSpec};

/// Slack above which a constraint counts as violated.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Signed constraint slacks of one vehicle type; positive means violated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    pub capacity: f64,
    pub shift: f64,
    pub lead_time: f64,
}

impl Slacks {
    pub fn violation(&self) -> f64 {
        self.capacity.max(0.0) + self.shift.max(0.0) + self.lead_time.max(0.0)
    }

    pub fn satisfied(&self) -> bool {
        self.capacity <= FEASIBILITY_TOLERANCE
            && self.shift <= FEASIBILITY_TOLERANCE
            && self.lead_time <= FEASIBILITY_TOLERANCE
    }
}

/// Cost and constraint state of one vehicle column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ColumnEval {
    pub cost: f64,
    pub slacks: Slacks,
    /// The tour recursion had no fixed point; cost uses the capacity bound.
    pub diverged: bool,
}

impl ColumnEval {
    pub fn feasible(&self) -> bool {
        !self.diverged && self.slacks.satisfied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Transport cost over all subregions.
    pub objective: f64,
    pub slacks: Vec<Slacks>,
    pub diverged: Vec<bool>,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        !self.diverged.iter().any(|&d| d) && self.slacks.iter().all(Slacks::satisfied)
    }

    pub fn violation(&self) -> f64 {
        self.slacks.iter().map(Slacks::violation).sum()
    }

    pub fn energy(&self, penalty_weight: f64) -> f64 {
        self.objective + penalty_weight * self.violation()
    }
}

/// Assignment of delivery units to a vehicle mix within one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub fleet: Vec<VehicleType>,
    /// Demand lines of one subregion.
    pub units: Vec<DeliveryUnitType>,
    /// Area covers all subregions.
    pub params: NetworkParams,
    pub subregion_count: u32,
    pub external_factors: ExternalCostFactors,
}

impl AllocationProblem {
    pub fn validate(&self) -> Result<()> {
        if self.fleet.is_empty() {
            return Err(Error::domain(
                "allocation problem needs at least one vehicle",
            ));
        }
        if self.units.is_empty() {
            return Err(Error::domain(
                "allocation problem needs at least one delivery unit",
            ));
        }
        if self.subregion_count < 1 {
            return Err(Error::domain("subregion_count must be at least 1"));
        }
        for v in &self.fleet {
            v.validate()?;
        }
        for u in &self.units {
            u.validate()?;
        }
        self.params.validate()
    }

    fn check_shape(&self, allocation: &AllocationMatrix) -> Result<()> {
        if allocation.units() != self.units.len() || allocation.vehicles() != self.fleet.len() {
            return Err(Error::domain(format!(
                "allocation is {}x{} but the problem has {} units and {} vehicles",
                allocation.units(),
                allocation.vehicles(),
                self.units.len(),
                self.fleet.len()
            )));
        }
        allocation.validate()
    }

    pub(crate) fn subregion_params(&self) -> NetworkParams {
        NetworkParams {
            area_km2: self.params.area_km2 / self.subregion_count as f64,
            ..self.params.clone()
        }
    }

    /// Demand carried by one vehicle type given its column of fractions.
    pub(crate) fn column_demand(&self, fractions: &[f64]) -> DemandProfile {
        DemandProfile::from_units(
            self.units
                .iter()
                .zip(fractions)
                .map(|(u, &f)| u.scaled(f))
                .collect(),
        )
    }

    /// Per-vehicle demand of one subregion.
    pub fn induced_demand(&self, allocation: &AllocationMatrix) -> Result<Vec<DemandProfile>> {
        self.check_shape(allocation)?;
        Ok((0..self.fleet.len())
            .map(|i| self.column_demand(&allocation.column(i)))
            .collect())
    }

    pub(crate) fn evaluate_column(
        &self,
        vehicle: usize,
        fractions: &[f64],
        params: &NetworkParams,
    ) -> Result<ColumnEval> {
        let v = &self.fleet[vehicle];
        let demand = self.column_demand(fractions);
        if demand.total_stops == 0.0 && demand.total_weight_kg == 0.0 {
            return Ok(ColumnEval {
                cost: 0.0,
                slacks: Slacks::default(),
                diverged: false,
            });
        }
        let (plan, diverged) = match solve_tour_plan(v, &demand, params) {
            Ok(plan) => (plan, false),
            Err(e) if e.is_infeasible() => {
                let capacity = demand_effective_capacity(v, &demand)?;
                let tours = ((demand.total_weight_kg / capacity).ceil() as u64).max(1);
                let plan = TourPlan {
                    vehicle: v.clone(),
                    tours,
                    distance_km: route_distance(tours, demand.total_stops, params)?,
                    binding_constraint: crate::error::Constraint::Capacity,
                    weight_kg: demand.total_weight_kg,
                    stops: demand.total_stops,
                    effective_capacity_kg: capacity,
                };
                (plan, true)
            }
            Err(e) => return Err(e),
        };
        let cost = transport_cost(std::slice::from_ref(&plan), params)?;
        Ok(ColumnEval {
            cost,
            slacks: slacks_of(&plan, params),
            diverged,
        })
    }

    pub fn evaluate(&self, allocation: &AllocationMatrix) -> Result<Evaluation> {
        self.check_shape(allocation)?;
        let params = self.subregion_params();
        let mut objective = 0.0;
        let mut slacks = Vec::with_capacity(self.fleet.len());
        let mut diverged = Vec::with_capacity(self.fleet.len());
        for i in 0..self.fleet.len() {
            let col = self.evaluate_column(i, &allocation.column(i), &params)?;
            objective += col.cost;
            slacks.push(col.slacks);
            diverged.push(col.diverged);
        }
        Ok(Evaluation {
            objective: objective * self.subregion_count as f64,
            slacks,
            diverged,
        })
    }

    pub fn objective_value(&self, allocation: &AllocationMatrix) -> Result<f64> {
        Ok(self.evaluate(allocation)?.objective)
    }

    /// Capacity, shift and lead-time slacks per vehicle type, per subregion.
    pub fn constraint_violations(&self, allocation: &AllocationMatrix) -> Result<Vec<Slacks>> {
        Ok(self.evaluate(allocation)?.slacks)
    }

    /// The allocation as an analytical layer.
    pub fn as_layer(&self, name: &str, allocation: &AllocationMatrix) -> Result<LayerSpec> {
        let fleet = self
            .fleet
            .iter()
            .zip(self.induced_demand(allocation)?)
            .map(|(vehicle, demand)| FleetAssignment {
                vehicle: vehicle.clone(),
                demand,
            })
            .collect();
        Ok(LayerSpec {
            name: name.to_string(),
            params: self.params.clone(),
            mode: LayerMode::Analytical { fleet },
            handling_cost_per_delivery: 0.0,
            subregion_count: self.subregion_count,
        })
    }

    /// Layer KPIs of the allocation.
    pub fn kpis(&self, allocation: &AllocationMatrix) -> Result<KpiReport> {
        evaluate_layer(
            &self.as_layer("allocation", allocation)?,
            &self.external_factors,
        )
    }
}

fn slacks_of(plan: &TourPlan, params: &NetworkParams) -> Slacks {
    let speed = params.travel_speed(&plan.vehicle);
    let m = plan.tours as f64;
    let working = plan.distance_km / speed + params.stop_time_h * plan.stops;
    Slacks {
        capacity: plan.weight_kg - m * plan.vehicle.capacity_kg,
        shift: working - m * params.shift_duration_h,
        lead_time: (plan.distance_km - params.radius_km * m) / speed
            + params.stop_time_h * plan.stops
            - m * params.lead_time_h,
    }
}
