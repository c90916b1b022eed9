#![allow(dead_code)]

use cityfreight_core::model::{
    DeliveryUnitType, DemandProfile, ExternalCostFactors, NetworkParams, TemperatureClass,
    VehicleType,
};

pub fn vehicle(id: &str, capacity_kg: f64, cost_per_km: f64, cost_per_hour: f64) -> VehicleType {
    VehicleType {
        id: id.into(),
        capacity_kg,
        speed_kmh: 20.0,
        cost_per_km,
        cost_per_hour,
        temperature_class: TemperatureClass::T,
        max_units_footprint: 33,
    }
}

pub fn params(radius_km: f64, area_km2: f64) -> NetworkParams {
    NetworkParams {
        radius_km,
        area_km2,
        daganzo_k: 0.57,
        congestion_factor: 1.0,
        stop_time_h: 0.25,
        shift_duration_h: 8.0,
        lead_time_h: 8.0,
        speed_kmh: None,
    }
}

pub fn table_factors() -> ExternalCostFactors {
    ExternalCostFactors {
        accident: 3.4,
        air_pollution: 20.5,
        climate_change: 6.3,
        noise: 27.4,
        congestion: 4.0,
    }
}

pub fn pallets(stops: f64) -> DemandProfile {
    DemandProfile::from_units(vec![DeliveryUnitType::new("pallet", 450.0, stops)])
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Plain inputs of the tour recursion.
#[derive(Debug, Clone, Copy)]
pub struct TourInstance {
    pub weight: f64,
    pub capacity: f64,
    pub stops: f64,
    pub radius: f64,
    pub k: f64,
    pub area: f64,
    pub speed: f64,
    pub beta: f64,
    pub stop_time: f64,
    pub shift: f64,
    pub lead: f64,
}

impl TourInstance {
    pub fn distance(&self, m: u64) -> f64 {
        2.0 * self.radius * m as f64 + self.k * (self.area * self.stops).sqrt()
    }

    /// Largest of the three ceilings at `m` tours.
    pub fn ceiling(&self, m: u64) -> i64 {
        let d = self.distance(m);
        let v = self.speed / self.beta;
        let cap = (self.weight / self.capacity).ceil() as i64;
        let shift = ((d / v + self.stop_time * self.stops) / self.shift).ceil() as i64;
        let lead_stops = if self.stops >= 1.0 {
            self.stops - 1.0
        } else {
            0.0
        };
        let lead =
            (((d - self.radius) / v + self.stop_time * lead_stops) / self.lead).ceil() as i64;
        cap.max(shift).max(lead).max(0)
    }

    /// Smallest m in 0..=limit with ceiling(m) == m.
    pub fn scan(&self, limit: u64) -> Option<(u64, f64)> {
        (0..=limit)
            .find(|&m| self.ceiling(m) == m as i64)
            .map(|m| (m, self.distance(m)))
    }

    pub fn vehicle(&self) -> VehicleType {
        VehicleType {
            id: "v".into(),
            capacity_kg: self.capacity,
            speed_kmh: self.speed,
            cost_per_km: 6.0,
            cost_per_hour: 27.0,
            temperature_class: TemperatureClass::A,
            max_units_footprint: 1000,
        }
    }

    pub fn demand(&self) -> DemandProfile {
        DemandProfile::aggregate(self.weight, self.stops)
    }

    pub fn params(&self) -> NetworkParams {
        NetworkParams {
            radius_km: self.radius,
            area_km2: self.area,
            daganzo_k: self.k,
            congestion_factor: self.beta,
            stop_time_h: self.stop_time,
            shift_duration_h: self.shift,
            lead_time_h: self.lead,
            speed_kmh: None,
        }
    }
}
