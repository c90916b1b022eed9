//! Scenario files.
//!
//! A scenario is one TOML document: default network parameters, external
//! cost factors, a vehicle and delivery-unit catalog, suppliers with their
//! demand and fleets, and the schemes to evaluate. Demand lines may also come
//! from a CSV file named by `demand_csv`, relative to the scenario file.

use std::collections::HashMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use cityfreight_core::model::{
    DeliveryUnitType, DemandProfile, ExternalCostFactors, NetworkParams, TemperatureClass,
    VehicleType,
};
use cityfreight_core::optimizer::SaConfig;
use cityfreight_core::scheme::{
    build_original, build_pi, build_ucc, ClassRoute, ConsolidationConfig, FleetShare, HubConfig,
    SchemeSpec, Supplier,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{CliError, ErrorClass, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Extra demand lines, merged into `suppliers` at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_csv: Option<String>,
    pub defaults: Spanned<ParamsEntry>,
    pub external_factors: Spanned<FactorsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sa: Option<Spanned<SaEntry>>,
    #[serde(default)]
    pub unit_types: Vec<Spanned<UnitTypeEntry>>,
    pub vehicles: Vec<Spanned<VehicleEntry>>,
    pub suppliers: Vec<Spanned<SupplierEntry>>,
    #[serde(default)]
    pub schemes: Vec<Spanned<SchemeEntry>>,
}

/// Network parameters; every field optional so a block can override defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_km2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daganzo_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congestion_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_time_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_duration_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_time_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_kmh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorsEntry {
    pub accident: f64,
    pub air_pollution: f64,
    pub climate_change: f64,
    pub noise: f64,
    pub congestion: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooling_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_temperature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitTypeEntry {
    pub id: String,
    /// Weight of one piece occupying one floor position.
    pub piece_weight_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleEntry {
    pub id: String,
    pub capacity_kg: f64,
    pub speed_kmh: f64,
    pub cost_per_km: f64,
    /// Required; optional here only so the error can name the vehicle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_per_hour: Option<f64>,
    pub temperature_class: TemperatureClass,
    pub max_units_footprint: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandLine {
    pub unit: String,
    pub stops: f64,
    /// Weight delivered per stop.
    pub avg_weight_kg: f64,
    pub temperature_class: TemperatureClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetEntry {
    pub vehicle: String,
    pub share: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<TemperatureClass>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplierEntry {
    pub name: String,
    #[serde(default)]
    pub demand: Vec<DemandLine>,
    pub fleet: Vec<FleetEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Original,
    Ucc,
    Pi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteEntry {
    pub classes: Vec<TemperatureClass>,
    pub vehicle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeEntry {
    pub name: String,
    pub kind: SchemeKind,
    /// Overrides for direct delivery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuttle_vehicle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuttle_params: Option<ParamsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city_params: Option<ParamsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city_routes: Option<Vec<RouteEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handling_cost_per_delivery: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hubs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hub_shares: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tours_per_hub: Option<u64>,
}

/// The scenario turned into model types.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub defaults: NetworkParams,
    pub factors: ExternalCostFactors,
    pub sa: SaConfig,
    /// In declaration order.
    pub vehicles: Vec<VehicleType>,
    pub suppliers: Vec<Supplier>,
    pub schemes: Vec<SchemeSpec>,
}

impl Resolved {
    pub fn vehicle(&self, id: &str) -> Option<&VehicleType> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn scheme(&self, name: &str) -> Result<&SchemeSpec> {
        self.schemes.iter().find(|s| s.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.schemes.iter().map(|s| s.name.as_str()).collect();
            CliError::usage(format!(
                "unknown scheme `{name}` (scenario defines: {})",
                known.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub resolved: Resolved,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(ErrorClass::Io, format!("cannot read scenario: {e}")).at(&origin)
    })?;
    parse_scenario(&text, &origin, path.parent())
}

/// Parses and validates scenario text. `base_dir` anchors `demand_csv`.
pub fn parse_scenario(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<LoadedScenario> {
    let src = Source { origin, text };
    if let Err(e) = text.parse::<toml::Table>() {
        return Err(src.toml_error(ErrorClass::Syntax, &e));
    }
    let mut scenario: Scenario =
        toml::from_str(text).map_err(|e| src.toml_error(ErrorClass::Schema, &e))?;
    if let Some(csv_name) = scenario.demand_csv.take() {
        let path = base_dir.map_or_else(|| PathBuf::from(&csv_name), |d| d.join(&csv_name));
        ingest_demand_csv(&mut scenario, &path, &src)?;
    }
    let resolved = resolve(&scenario, &src)?;
    Ok(LoadedScenario { scenario, resolved })
}

/// Validates a scenario built in memory or emitted earlier.
pub fn resolve_scenario(scenario: &Scenario) -> Result<Resolved> {
    if scenario.demand_csv.is_some() {
        return Err(CliError::usage(
            "demand_csv is only read when loading a scenario file",
        ));
    }
    resolve(
        scenario,
        &Source {
            origin: &scenario.name,
            text: "",
        },
    )
}

pub fn emit_scenario(scenario: &Scenario) -> Result<String> {
    toml::to_string(scenario).map_err(|e| {
        CliError::new(
            ErrorClass::Internal,
            format!("cannot serialize scenario: {e}"),
        )
    })
}

struct Source<'a> {
    origin: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, offset: usize) -> Option<usize> {
        if self.text.is_empty() || offset > self.text.len() {
            return None;
        }
        Some(
            self.text.as_bytes()[..offset]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1,
        )
    }

    fn locate(&self, span: Range<usize>) -> String {
        match self.line_of(span.start) {
            Some(line) => format!("{}:{line}", self.origin),
            None => self.origin.to_string(),
        }
    }

    fn toml_error(&self, class: ErrorClass, e: &toml::de::Error) -> CliError {
        let err = CliError::new(class, e.message().trim().to_string());
        match e.span() {
            Some(span) => err.at(self.locate(span)),
            None => err.at(self.origin),
        }
    }

    fn error<T>(
        &self,
        class: ErrorClass,
        span: Range<usize>,
        message: impl Into<String>,
    ) -> Result<T> {
        Err(CliError::new(class, message).at(self.locate(span)))
    }
}

fn model_error(e: cityfreight_core::Error) -> CliError {
    CliError::from(e)
}

fn ingest_demand_csv(scenario: &mut Scenario, path: &Path, src: &Source) -> Result<()> {
    #[derive(Deserialize)]
    struct Row {
        supplier: String,
        unit_type: String,
        stops: f64,
        avg_weight_kg: f64,
        temperature_class: TemperatureClass,
    }
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| {
        CliError::new(ErrorClass::Io, format!("cannot read demand table: {e}"))
            .at(format!("{} (demand_csv of {})", origin, src.origin))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_error = |e: csv::Error| {
        let loc = e
            .position()
            .map_or_else(|| origin.clone(), |p| format!("{origin}:{}", p.line()));
        let class = match e.kind() {
            csv::ErrorKind::Io(_) => ErrorClass::Io,
            csv::ErrorKind::Deserialize { .. } => ErrorClass::Schema,
            _ => ErrorClass::Syntax,
        };
        CliError::new(class, e.to_string()).at(loc)
    };
    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(Some(&headers)).map_err(csv_error)?;
        let supplier = scenario
            .suppliers
            .iter_mut()
            .find(|s| s.get_ref().name == row.supplier)
            .ok_or_else(|| {
                CliError::new(
                    ErrorClass::Reference,
                    format!("unknown supplier `{}`", row.supplier),
                )
                .at(format!("{origin}:{line}"))
            })?;
        supplier.get_mut().demand.push(DemandLine {
            unit: row.unit_type,
            stops: row.stops,
            avg_weight_kg: row.avg_weight_kg,
            temperature_class: row.temperature_class,
        });
    }
    Ok(())
}

impl ParamsEntry {
    fn over(&self, base: &NetworkParams) -> NetworkParams {
        NetworkParams {
            radius_km: self.radius_km.unwrap_or(base.radius_km),
            area_km2: self.area_km2.unwrap_or(base.area_km2),
            daganzo_k: self.daganzo_k.unwrap_or(base.daganzo_k),
            congestion_factor: self.congestion_factor.unwrap_or(base.congestion_factor),
            stop_time_h: self.stop_time_h.unwrap_or(base.stop_time_h),
            shift_duration_h: self.shift_duration_h.unwrap_or(base.shift_duration_h),
            lead_time_h: self.lead_time_h.unwrap_or(base.lead_time_h),
            speed_kmh: self.speed_kmh.or(base.speed_kmh),
        }
    }

    fn complete(&self) -> std::result::Result<NetworkParams, &'static str> {
        Ok(NetworkParams {
            radius_km: self.radius_km.ok_or("radius_km")?,
            area_km2: self.area_km2.ok_or("area_km2")?,
            daganzo_k: self.daganzo_k.ok_or("daganzo_k")?,
            congestion_factor: self.congestion_factor.ok_or("congestion_factor")?,
            stop_time_h: self.stop_time_h.ok_or("stop_time_h")?,
            shift_duration_h: self.shift_duration_h.ok_or("shift_duration_h")?,
            lead_time_h: self.lead_time_h.ok_or("lead_time_h")?,
            speed_kmh: self.speed_kmh,
        })
    }
}

impl SaEntry {
    fn config(&self) -> SaConfig {
        let d = SaConfig::default();
        SaConfig {
            seed: self.seed.unwrap_or(d.seed),
            initial_temperature: self.initial_temperature.or(d.initial_temperature),
            cooling_rate: self.cooling_rate.unwrap_or(d.cooling_rate),
            steps_per_temperature: self
                .steps_per_temperature
                .unwrap_or(d.steps_per_temperature),
            min_temperature: self.min_temperature.or(d.min_temperature),
            restarts: self.restarts.unwrap_or(d.restarts),
            penalty_weight: self.penalty_weight.unwrap_or(d.penalty_weight),
            grid_step: self.grid_step.unwrap_or(d.grid_step),
        }
    }
}

fn unique<'a, T>(
    src: &Source,
    what: &str,
    items: &'a [Spanned<T>],
    key: impl Fn(&T) -> &str,
) -> Result<HashMap<&'a str, usize>> {
    let mut seen = HashMap::new();
    for (i, item) in items.iter().enumerate() {
        let k = key(item.get_ref());
        if seen.insert(k, i).is_some() {
            return src.error(
                ErrorClass::Reference,
                item.span(),
                format!("duplicate {what} `{k}`"),
            );
        }
    }
    Ok(seen)
}

fn resolve(s: &Scenario, src: &Source) -> Result<Resolved> {
    let defaults = s.defaults.get_ref().complete().or_else(|field| {
        src.error(
            ErrorClass::Schema,
            s.defaults.span(),
            format!("defaults: missing field `{field}`"),
        )
    })?;
    defaults
        .validate()
        .map_err(|e| model_error(e.within("defaults")).at(src.locate(s.defaults.span())))?;

    let f = s.external_factors.get_ref();
    let factors = ExternalCostFactors {
        accident: f.accident,
        air_pollution: f.air_pollution,
        climate_change: f.climate_change,
        noise: f.noise,
        congestion: f.congestion,
    };
    factors.validate().map_err(|e| {
        model_error(e.within("external_factors")).at(src.locate(s.external_factors.span()))
    })?;

    let sa =
        s.sa.as_ref()
            .map_or_else(SaConfig::default, |e| e.get_ref().config());
    if let Some(entry) = &s.sa {
        sa.validate()
            .map_err(|e| model_error(e.within("sa")).at(src.locate(entry.span())))?;
    }

    let unit_index = unique(src, "unit type", &s.unit_types, |u| &u.id)?;
    for u in &s.unit_types {
        let w = u.get_ref().piece_weight_kg;
        if !(w > 0.0 && w.is_finite()) {
            return src.error(
                ErrorClass::Invariant,
                u.span(),
                format!(
                    "unit type `{}`: piece_weight_kg must be positive",
                    u.get_ref().id
                ),
            );
        }
    }

    unique(src, "vehicle", &s.vehicles, |v| &v.id)?;
    let mut vehicles = Vec::with_capacity(s.vehicles.len());
    for entry in &s.vehicles {
        let v = entry.get_ref();
        let Some(cost_per_hour) = v.cost_per_hour else {
            return src.error(
                ErrorClass::Schema,
                entry.span(),
                format!("vehicle `{}`: missing field `cost_per_hour`", v.id),
            );
        };
        let vehicle = VehicleType {
            id: v.id.clone(),
            capacity_kg: v.capacity_kg,
            speed_kmh: v.speed_kmh,
            cost_per_km: v.cost_per_km,
            cost_per_hour,
            temperature_class: v.temperature_class,
            max_units_footprint: v.max_units_footprint,
        };
        vehicle
            .validate()
            .map_err(|e| model_error(e).at(src.locate(entry.span())))?;
        vehicles.push(vehicle);
    }
    let vehicle_by_id = |id: &str, span: Range<usize>, context: &str| -> Result<VehicleType> {
        match vehicles.iter().find(|v| v.id == id) {
            Some(v) => Ok(v.clone()),
            None => src.error(
                ErrorClass::Reference,
                span,
                format!("{context}: unknown vehicle `{id}`"),
            ),
        }
    };

    unique(src, "supplier", &s.suppliers, |x| &x.name)?;
    let mut suppliers = Vec::with_capacity(s.suppliers.len());
    for entry in &s.suppliers {
        let sup = entry.get_ref();
        let context = format!("supplier `{}`", sup.name);
        let mut units = Vec::with_capacity(sup.demand.len());
        for line in &sup.demand {
            let Some(&ui) = unit_index.get(line.unit.as_str()) else {
                return src.error(
                    ErrorClass::Reference,
                    entry.span(),
                    format!("{context}: unknown unit type `{}`", line.unit),
                );
            };
            units.push(
                DeliveryUnitType::new(line.unit.clone(), line.avg_weight_kg, line.stops)
                    .with_piece_weight(s.unit_types[ui].get_ref().piece_weight_kg)
                    .with_class(line.temperature_class),
            );
        }
        let fleet = sup
            .fleet
            .iter()
            .map(|f| {
                Ok(FleetShare {
                    vehicle: vehicle_by_id(&f.vehicle, entry.span(), &context)?,
                    share: f.share,
                    classes: f.classes.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let supplier = Supplier {
            name: sup.name.clone(),
            demand: DemandProfile::from_units(units),
            fleet,
        };
        supplier
            .assignments()
            .map_err(|e| model_error(e).at(src.locate(entry.span())))?;
        suppliers.push(supplier);
    }

    unique(src, "scheme", &s.schemes, |x| &x.name)?;
    let mut schemes = Vec::with_capacity(s.schemes.len());
    for entry in &s.schemes {
        let scheme = build_scheme(entry, &defaults, &factors, &suppliers, &vehicle_by_id, src)?;
        scheme
            .validate()
            .map_err(|e| model_error(e).at(src.locate(entry.span())))?;
        schemes.push(scheme);
    }

    Ok(Resolved {
        defaults,
        factors,
        sa,
        vehicles,
        suppliers,
        schemes,
    })
}

type VehicleLookup<'a> = dyn Fn(&str, Range<usize>, &str) -> Result<VehicleType> + 'a;

fn build_scheme(
    entry: &Spanned<SchemeEntry>,
    defaults: &NetworkParams,
    factors: &ExternalCostFactors,
    suppliers: &[Supplier],
    vehicle_by_id: &VehicleLookup,
    src: &Source,
) -> Result<SchemeSpec> {
    let e = entry.get_ref();
    let span = entry.span();
    let context = format!("scheme `{}`", e.name);
    let present: Vec<&str> = [
        ("params", e.params.is_some()),
        ("shuttle_vehicle", e.shuttle_vehicle.is_some()),
        ("shuttle_params", e.shuttle_params.is_some()),
        ("city_params", e.city_params.is_some()),
        ("city_routes", e.city_routes.is_some()),
        (
            "handling_cost_per_delivery",
            e.handling_cost_per_delivery.is_some(),
        ),
        ("hubs", e.hubs.is_some()),
        ("hub_shares", e.hub_shares.is_some()),
        ("tours_per_hub", e.tours_per_hub.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.then_some(k))
    .collect();
    let allowed: &[&str] = match e.kind {
        SchemeKind::Original => &["params"],
        SchemeKind::Ucc => &[
            "shuttle_vehicle",
            "shuttle_params",
            "city_params",
            "city_routes",
            "handling_cost_per_delivery",
        ],
        SchemeKind::Pi => &[
            "shuttle_vehicle",
            "shuttle_params",
            "city_params",
            "city_routes",
            "handling_cost_per_delivery",
            "hubs",
            "hub_shares",
            "tours_per_hub",
        ],
    };
    if let Some(extra) = present.iter().find(|k| !allowed.contains(k)) {
        return src.error(
            ErrorClass::Schema,
            span,
            format!("{context}: field `{extra}` does not apply to this kind of scheme"),
        );
    }
    let built = match e.kind {
        SchemeKind::Original => {
            let params = e.params.clone().unwrap_or_default().over(defaults);
            build_original(&e.name, suppliers, &params, *factors)
        }
        SchemeKind::Ucc | SchemeKind::Pi => {
            let Some(shuttle) = &e.shuttle_vehicle else {
                return src.error(
                    ErrorClass::Schema,
                    span,
                    format!("{context}: missing field `shuttle_vehicle`"),
                );
            };
            let Some(routes) = &e.city_routes else {
                return src.error(
                    ErrorClass::Schema,
                    span,
                    format!("{context}: missing field `city_routes`"),
                );
            };
            let city_routes = routes
                .iter()
                .map(|r| {
                    Ok(ClassRoute {
                        classes: r.classes.clone(),
                        vehicle: vehicle_by_id(&r.vehicle, span.clone(), &context)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let consolidation = ConsolidationConfig {
                shuttle_vehicle: vehicle_by_id(shuttle, span.clone(), &context)?,
                shuttle_params: e.shuttle_params.clone().unwrap_or_default().over(defaults),
                city_params: e.city_params.clone().unwrap_or_default().over(defaults),
                city_routes,
                handling_cost_per_delivery: e.handling_cost_per_delivery.unwrap_or(0.0),
            };
            if e.kind == SchemeKind::Ucc {
                build_ucc(&e.name, suppliers, &consolidation, *factors)
            } else {
                let Some(hubs) = e.hubs else {
                    return src.error(
                        ErrorClass::Schema,
                        span,
                        format!("{context}: missing field `hubs`"),
                    );
                };
                let config = HubConfig {
                    consolidation,
                    hubs,
                    hub_shares: e.hub_shares.clone(),
                    tours_per_hub: e.tours_per_hub,
                };
                build_pi(&e.name, suppliers, &config, *factors)
            }
        }
    };
    built.map_err(|err| model_error(err.within(&context)).at(src.locate(span)))
}
