use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature regime of goods and of the vehicles carrying them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemperatureClass {
    /// Ambient.
    A,
    /// Fresh.
    F,
    /// Frozen.
    S,
    /// Three-temperature (multi-compartment).
    T,
    /// Special handling.
    U,
}

impl TemperatureClass {
    pub const ALL: [TemperatureClass; 5] = [
        TemperatureClass::A,
        TemperatureClass::F,
        TemperatureClass::S,
        TemperatureClass::T,
        TemperatureClass::U,
    ];

    /// Whether a vehicle of this class may carry goods of class `goods`.
    ///
    /// Multi-temperature vehicles carry everything except special goods;
    /// refrigerated vehicles carry both fresh and frozen goods.
    pub fn carries(self, goods: TemperatureClass) -> bool {
        use TemperatureClass::*;
        match self {
            A => goods == A,
            F | S => matches!(goods, F | S),
            T => matches!(goods, A | F | S | T),
            U => goods == U,
        }
    }
}

impl fmt::Display for TemperatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TemperatureClass::A => "A",
            TemperatureClass::F => "F",
            TemperatureClass::S => "S",
            TemperatureClass::T => "T",
            TemperatureClass::U => "U",
        };
        f.write_str(s)
    }
}

impl FromStr for TemperatureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(TemperatureClass::A),
            "F" | "f" => Ok(TemperatureClass::F),
            "S" | "s" => Ok(TemperatureClass::S),
            "T" | "t" => Ok(TemperatureClass::T),
            "U" | "u" => Ok(TemperatureClass::U),
            other => Err(Error::domain(format!(
                "unknown temperature class `{other}` (expected one of A, F, S, T, U)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleType {
    pub id: String,
    pub capacity_kg: f64,
    pub speed_kmh: f64,
    pub cost_per_km: f64,
    pub cost_per_hour: f64,
    pub temperature_class: TemperatureClass,
    /// Pallet-equivalent floor positions.
    pub max_units_footprint: u32,
}

impl VehicleType {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::domain(format!("vehicle `{}`: {what}", self.id)));
        if !(self.capacity_kg > 0.0 && self.capacity_kg.is_finite()) {
            return bad("capacity_kg must be positive");
        }
        if !(self.speed_kmh > 0.0 && self.speed_kmh.is_finite()) {
            return bad("speed_kmh must be positive");
        }
        if !(self.cost_per_km >= 0.0 && self.cost_per_km.is_finite()) {
            return bad("cost_per_km must be non-negative");
        }
        if !(self.cost_per_hour >= 0.0 && self.cost_per_hour.is_finite()) {
            return bad("cost_per_hour must be non-negative");
        }
        if self.max_units_footprint < 1 {
            return bad("max_units_footprint must be at least 1");
        }
        Ok(())
    }
}

/// One line of demand: a delivery unit kind with its per-stop weight and stop count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryUnitType {
    pub id: String,
    /// Average weight delivered per stop.
    pub avg_weight_kg: f64,
    pub stops: f64,
    /// Weight of one floor position (a single pallet, roll or parcel).
    /// Falls back to `avg_weight_kg` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piece_weight_kg: Option<f64>,
    pub temperature_class: TemperatureClass,
}

impl DeliveryUnitType {
    pub fn new(id: impl Into<String>, avg_weight_kg: f64, stops: f64) -> Self {
        DeliveryUnitType {
            id: id.into(),
            avg_weight_kg,
            stops,
            piece_weight_kg: None,
            temperature_class: TemperatureClass::A,
        }
    }

    pub fn with_piece_weight(mut self, kg: f64) -> Self {
        self.piece_weight_kg = Some(kg);
        self
    }

    pub fn with_class(mut self, class: TemperatureClass) -> Self {
        self.temperature_class = class;
        self
    }

    pub fn footprint_weight_kg(&self) -> f64 {
        self.piece_weight_kg.unwrap_or(self.avg_weight_kg)
    }

    pub fn total_weight_kg(&self) -> f64 {
        self.avg_weight_kg * self.stops
    }

    pub fn scaled(&self, share: f64) -> Self {
        DeliveryUnitType {
            stops: self.stops * share,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::domain(format!(
                "delivery unit `{}`: {what}",
                self.id
            )))
        };
        if !(self.avg_weight_kg > 0.0 && self.avg_weight_kg.is_finite()) {
            return bad("avg_weight_kg must be positive");
        }
        if !(self.stops >= 0.0 && self.stops.is_finite()) {
            return bad("stops must be non-negative");
        }
        if let Some(p) = self.piece_weight_kg {
            if !(p > 0.0 && p.is_finite()) {
                return bad("piece_weight_kg must be positive");
            }
        }
        Ok(())
    }
}

/// Daily demand served by one vehicle type or one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub units: Vec<DeliveryUnitType>,
    pub total_weight_kg: f64,
    pub total_stops: f64,
}

impl DemandProfile {
    pub fn zero() -> Self {
        DemandProfile {
            units: Vec::new(),
            total_weight_kg: 0.0,
            total_stops: 0.0,
        }
    }

    /// Totals only, no unit breakdown.
    pub fn aggregate(total_weight_kg: f64, total_stops: f64) -> Self {
        DemandProfile {
            units: Vec::new(),
            total_weight_kg,
            total_stops,
        }
    }

    pub fn from_units(units: Vec<DeliveryUnitType>) -> Self {
        let total_weight_kg = units.iter().map(DeliveryUnitType::total_weight_kg).sum();
        let total_stops = units.iter().map(|u| u.stops).sum();
        DemandProfile {
            units,
            total_weight_kg,
            total_stops,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total_weight_kg == 0.0 && self.total_stops == 0.0
    }

    /// Every unit line multiplied by `share` (stops and weight).
    pub fn scaled(&self, share: f64) -> Self {
        if self.units.is_empty() {
            DemandProfile::aggregate(self.total_weight_kg * share, self.total_stops * share)
        } else {
            DemandProfile::from_units(self.units.iter().map(|u| u.scaled(share)).collect())
        }
    }

    /// Concatenates unit lines of several profiles.
    pub fn merged<'a>(profiles: impl IntoIterator<Item = &'a DemandProfile>) -> Self {
        let mut units = Vec::new();
        let mut weight = 0.0;
        let mut stops = 0.0;
        let mut aggregate_only = false;
        for p in profiles {
            if p.units.is_empty() && !p.is_empty() {
                aggregate_only = true;
            }
            units.extend(p.units.iter().cloned());
            weight += p.total_weight_kg;
            stops += p.total_stops;
        }
        if aggregate_only {
            DemandProfile::aggregate(weight, stops)
        } else {
            DemandProfile::from_units(units)
        }
    }

    /// Heaviest-per-position unit among lines that actually have stops.
    pub fn dominant_unit(&self) -> Option<&DeliveryUnitType> {
        self.units.iter().filter(|u| u.stops > 0.0).fold(
            None,
            |best: Option<&DeliveryUnitType>, u| match best {
                Some(b) if b.footprint_weight_kg() >= u.footprint_weight_kg() => Some(b),
                _ => Some(u),
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_weight_kg >= 0.0 && self.total_weight_kg.is_finite()) {
            return Err(Error::domain("demand total_weight_kg must be non-negative"));
        }
        if !(self.total_stops >= 0.0 && self.total_stops.is_finite()) {
            return Err(Error::domain("demand total_stops must be non-negative"));
        }
        if self.units.is_empty() {
            return Ok(());
        }
        for u in &self.units {
            u.validate()?;
        }
        let weight: f64 = self
            .units
            .iter()
            .map(DeliveryUnitType::total_weight_kg)
            .sum();
        let stops: f64 = self.units.iter().map(|u| u.stops).sum();
        if !close(weight, self.total_weight_kg) || !close(stops, self.total_stops) {
            return Err(Error::domain(format!(
                "demand totals ({} kg, {} stops) disagree with unit lines ({} kg, {} stops)",
                self.total_weight_kg, self.total_stops, weight, stops
            )));
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Average distance from the origin depot to the served points.
    pub radius_km: f64,
    pub area_km2: f64,
    /// Coefficient of the square-root tour length term.
    pub daganzo_k: f64,
    /// Divisor applied to nominal speed.
    pub congestion_factor: f64,
    pub stop_time_h: f64,
    pub shift_duration_h: f64,
    pub lead_time_h: f64,
    /// Overrides the nominal speed of every vehicle in the layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_kmh: Option<f64>,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius_km", self.radius_km),
            ("area_km2", self.area_km2),
            ("daganzo_k", self.daganzo_k),
            ("shift_duration_h", self.shift_duration_h),
            ("lead_time_h", self.lead_time_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.stop_time_h >= 0.0 && self.stop_time_h.is_finite()) {
            return Err(Error::domain(format!(
                "stop_time_h must be non-negative, got {}",
                self.stop_time_h
            )));
        }
        if !(self.congestion_factor >= 1.0 && self.congestion_factor.is_finite()) {
            return Err(Error::domain(format!(
                "congestion_factor must be at least 1, got {}",
                self.congestion_factor
            )));
        }
        if self.lead_time_h > 24.0 {
            return Err(Error::domain(format!(
                "lead_time_h must not exceed 24, got {}",
                self.lead_time_h
            )));
        }
        if let Some(v) = self.speed_kmh {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "speed_kmh must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Congested travel speed of `vehicle` in this layer.
    pub fn travel_speed(&self, vehicle: &VehicleType) -> f64 {
        self.speed_kmh.unwrap_or(vehicle.speed_kmh) / self.congestion_factor
    }
}

/// Monetary external cost per vehicle-kilometre, by category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalCostFactors {
    pub accident: f64,
    pub air_pollution: f64,
    pub climate_change: f64,
    pub noise: f64,
    pub congestion: f64,
}

impl ExternalCostFactors {
    pub fn zero() -> Self {
        ExternalCostFactors {
            accident: 0.0,
            air_pollution: 0.0,
            climate_change: 0.0,
            noise: 0.0,
            congestion: 0.0,
        }
    }

    pub fn categories(&self) -> [f64; 5] {
        [
            self.accident,
            self.air_pollution,
            self.climate_change,
            self.noise,
            self.congestion,
        ]
    }

    /// Sum of the five categories, correctly rounded.
    pub fn total(&self) -> f64 {
        compensated_sum(self.categories())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ExternalCostFactors {
            accident: self.accident * factor,
            air_pollution: self.air_pollution * factor,
            climate_change: self.climate_change * factor,
            noise: self.noise * factor,
            congestion: self.congestion * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in EXTERNAL_CATEGORIES.iter().zip(self.categories()) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "external cost factor {name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub const EXTERNAL_CATEGORIES: [&str; 5] = [
    "accident",
    "air_pollution",
    "climate_change",
    "noise",
    "congestion",
];

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_temperature_vehicle_carries_everything_but_special() {
        for c in TemperatureClass::ALL {
            assert_eq!(TemperatureClass::T.carries(c), c != TemperatureClass::U);
        }
        assert!(TemperatureClass::F.carries(TemperatureClass::S));
        assert!(!TemperatureClass::A.carries(TemperatureClass::F));
        assert!(!TemperatureClass::U.carries(TemperatureClass::A));
    }

    #[test]
    fn dominant_unit_ignores_lines_without_stops() {
        let demand = DemandProfile::from_units(vec![
            DeliveryUnitType::new("parcel", 10.0, 5.0),
            DeliveryUnitType::new("pallet", 450.0, 0.0),
            DeliveryUnitType::new("roll", 180.0, 2.0),
        ]);
        assert_eq!(demand.dominant_unit().unwrap().id, "roll");
        assert!(DemandProfile::zero().dominant_unit().is_none());
    }

    #[test]
    fn totals_mismatch_is_rejected() {
        let mut demand =
            DemandProfile::from_units(vec![DeliveryUnitType::new("pallet", 450.0, 4.0)]);
        assert!(demand.validate().is_ok());
        demand.total_stops = 5.0;
        assert!(demand.validate().is_err());
    }

    #[test]
    fn lead_time_above_a_day_is_rejected() {
        let mut p = NetworkParams {
            radius_km: 30.0,
            area_km2: 186.0,
            daganzo_k: 0.57,
            congestion_factor: 1.0,
            stop_time_h: 0.25,
            shift_duration_h: 8.0,
            lead_time_h: 24.0,
            speed_kmh: None,
        };
        assert!(p.validate().is_ok());
        p.lead_time_h = 24.5;
        assert!(p.validate().is_err());
        p.lead_time_h = 8.0;
        p.congestion_factor = 0.9;
        assert!(p.validate().is_err());
    }

    #[test]
    fn compensated_sum_is_exact_on_small_decimals() {
        assert_eq!(compensated_sum([3.4, 20.5, 6.3, 27.4, 4.0]), 61.6);
        assert_eq!(compensated_sum([0.1; 10]), 1.0);
    }
}
