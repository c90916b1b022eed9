use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DeliveryUnitType, DemandProfile, ExternalCostFactors, NetworkParams, TemperatureClass,
    VehicleType,
};
use crate::scheme::layer::{
    check_classes, FleetAssignment, LayerMode, LayerSpec, SchemeSpec, ShuttleLane,
};

/// Share of a supplier's demand carried by one vehicle type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetShare {
    pub vehicle: VehicleType,
    pub share: f64,
    /// Goods classes this entry applies to; all classes when unset.
    pub classes: Option<Vec<TemperatureClass>>,
}

impl FleetShare {
    fn applies_to(&self, class: TemperatureClass) -> bool {
        self.classes.as_ref().is_none_or(|c| c.contains(&class))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supplier {
    pub name: String,
    pub demand: DemandProfile,
    pub fleet: Vec<FleetShare>,
}

impl Supplier {
    /// Splits the demand over the fleet entries.
    ///
    /// Each unit line must be allocated in full: the shares of the entries
    /// applying to its class sum to one.
    pub fn assignments(&self) -> Result<Vec<FleetAssignment>> {
        let scoped = |e: Error| e.within(&format!("supplier `{}`", self.name));
        self.demand.validate().map_err(scoped)?;
        if self.fleet.is_empty() {
            return Err(scoped(Error::domain("no fleet defined")));
        }
        for entry in &self.fleet {
            entry.vehicle.validate().map_err(scoped)?;
            if !(0.0..=1.0).contains(&entry.share) {
                return Err(scoped(Error::domain(format!(
                    "share of vehicle `{}` must lie in [0, 1], got {}",
                    entry.vehicle.id, entry.share
                ))));
            }
        }

        if self.demand.units.is_empty() {
            let total: f64 = self.fleet.iter().map(|f| f.share).sum();
            check_share_sum(total, "aggregate demand").map_err(scoped)?;
            return Ok(self
                .fleet
                .iter()
                .map(|f| FleetAssignment {
                    vehicle: f.vehicle.clone(),
                    demand: self.demand.scaled(f.share),
                })
                .collect());
        }

        for unit in &self.demand.units {
            let total: f64 = self
                .fleet
                .iter()
                .filter(|f| f.applies_to(unit.temperature_class))
                .map(|f| f.share)
                .sum();
            check_share_sum(total, &format!("delivery unit `{}`", unit.id)).map_err(scoped)?;
        }

        let mut out = Vec::with_capacity(self.fleet.len());
        for entry in &self.fleet {
            let lines: Vec<DeliveryUnitType> = self
                .demand
                .units
                .iter()
                .filter(|u| entry.applies_to(u.temperature_class))
                .map(|u| u.scaled(entry.share))
                .collect();
            let demand = DemandProfile::from_units(lines);
            check_classes(&entry.vehicle, &demand).map_err(scoped)?;
            out.push(FleetAssignment {
                vehicle: entry.vehicle.clone(),
                demand,
            });
        }
        Ok(out)
    }
}

fn check_share_sum(total: f64, what: &str) -> Result<()> {
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "allocation shares for {what} sum to {total}; every delivery unit must be allocated in full (shares sum to 1)"
        )));
    }
    Ok(())
}

/// City vehicle serving the goods classes listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRoute {
    pub classes: Vec<TemperatureClass>,
    pub vehicle: VehicleType,
}

/// Settings of a consolidation scheme: one shuttle layer into the
/// node(s) and one city layer out of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationConfig {
    pub shuttle_vehicle: VehicleType,
    pub shuttle_params: NetworkParams,
    pub city_params: NetworkParams,
    pub city_routes: Vec<ClassRoute>,
    pub handling_cost_per_delivery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubConfig {
    pub consolidation: ConsolidationConfig,
    pub hubs: u32,
    /// Fraction of demand handled by each hub; equal split when unset.
    pub hub_shares: Option<Vec<f64>>,
    /// Shuttle tours into each hub. Derived from weight when unset.
    pub tours_per_hub: Option<u64>,
}

impl HubConfig {
    fn shares(&self) -> Result<Vec<f64>> {
        if self.hubs < 1 {
            return Err(Error::domain("hub count must be at least 1"));
        }
        let shares = match &self.hub_shares {
            None => vec![1.0 / self.hubs as f64; self.hubs as usize],
            Some(s) => s.clone(),
        };
        if shares.len() != self.hubs as usize {
            return Err(Error::domain(format!(
                "{} hub shares given for {} hubs",
                shares.len(),
                self.hubs
            )));
        }
        if shares.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::domain("hub shares must lie in [0, 1]"));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "hub demand split sums to {total} of the total demand"
            )));
        }
        Ok(shares)
    }
}

/// Default network parameters shared by all presets.
pub fn base_params() -> NetworkParams {
    NetworkParams {
        radius_km: 30.0,
        area_km2: 186.0,
        daganzo_k: 0.57,
        congestion_factor: 1.0,
        stop_time_h: 0.25,
        shift_duration_h: 8.0,
        lead_time_h: 8.0,
        speed_kmh: Some(20.0),
    }
}

pub mod presets {
    use super::base_params;
    use crate::model::NetworkParams;

    pub fn direct() -> NetworkParams {
        base_params()
    }

    pub fn ucc_shuttle() -> NetworkParams {
        NetworkParams {
            radius_km: 20.0,
            stop_time_h: 0.5,
            speed_kmh: Some(30.0),
            ..base_params()
        }
    }

    pub fn ucc_city() -> NetworkParams {
        NetworkParams {
            radius_km: 10.0,
            ..base_params()
        }
    }

    pub fn hub_shuttle() -> NetworkParams {
        NetworkParams {
            radius_km: 30.0,
            stop_time_h: 0.5,
            speed_kmh: Some(30.0),
            ..base_params()
        }
    }

    pub fn hub_city() -> NetworkParams {
        NetworkParams {
            radius_km: 5.0,
            ..base_params()
        }
    }
}

/// Every supplier delivers its own demand from its own depot.
pub fn build_original(
    name: &str,
    suppliers: &[Supplier],
    params: &NetworkParams,
    factors: ExternalCostFactors,
) -> Result<SchemeSpec> {
    if suppliers.is_empty() {
        return Err(Error::domain(format!("scheme `{name}` has no suppliers")));
    }
    let layers = suppliers
        .iter()
        .map(|s| {
            Ok(LayerSpec {
                name: s.name.clone(),
                params: params.clone(),
                mode: LayerMode::Analytical {
                    fleet: s.assignments()?,
                },
                handling_cost_per_delivery: 0.0,
                subregion_count: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchemeSpec {
        name: name.to_string(),
        layers,
        external_factors: factors,
    })
}

/// Suppliers shuttle to one consolidation center which serves the city.
pub fn build_ucc(
    name: &str,
    suppliers: &[Supplier],
    config: &ConsolidationConfig,
    factors: ExternalCostFactors,
) -> Result<SchemeSpec> {
    if suppliers.is_empty() {
        return Err(Error::domain(format!("scheme `{name}` has no suppliers")));
    }
    let lanes = suppliers
        .iter()
        .map(|s| ShuttleLane {
            label: s.name.clone(),
            demand: s.demand.clone(),
            tours: None,
        })
        .collect();
    let pooled = DemandProfile::merged(suppliers.iter().map(|s| &s.demand));
    let layers = vec![
        LayerSpec {
            name: "supplier-ucc".into(),
            params: config.shuttle_params.clone(),
            mode: LayerMode::FixedShuttle {
                vehicle: config.shuttle_vehicle.clone(),
                lanes,
            },
            handling_cost_per_delivery: 0.0,
            subregion_count: 1,
        },
        LayerSpec {
            name: "ucc-pos".into(),
            params: config.city_params.clone(),
            mode: LayerMode::Analytical {
                fleet: route_by_class(&pooled, &config.city_routes)?,
            },
            handling_cost_per_delivery: config.handling_cost_per_delivery,
            subregion_count: 1,
        },
    ];
    Ok(SchemeSpec {
        name: name.to_string(),
        layers,
        external_factors: factors,
    })
}

/// Suppliers shuttle to several hubs, each serving its own subregion.
pub fn build_pi(
    name: &str,
    suppliers: &[Supplier],
    config: &HubConfig,
    factors: ExternalCostFactors,
) -> Result<SchemeSpec> {
    if suppliers.is_empty() {
        return Err(Error::domain(format!("scheme `{name}` has no suppliers")));
    }
    let shares = config
        .shares()
        .map_err(|e| e.within(&format!("scheme `{name}`")))?;
    let cc = &config.consolidation;
    let pooled = DemandProfile::merged(suppliers.iter().map(|s| &s.demand));

    let lanes: Vec<ShuttleLane> = match config.tours_per_hub {
        Some(tours) => shares
            .iter()
            .enumerate()
            .map(|(h, &share)| ShuttleLane {
                label: format!("hub-{}", h + 1),
                demand: pooled.scaled(share),
                tours: Some(tours),
            })
            .collect(),
        None => suppliers
            .iter()
            .flat_map(|s| {
                shares
                    .iter()
                    .enumerate()
                    .map(move |(h, &share)| ShuttleLane {
                        label: format!("{}-hub-{}", s.name, h + 1),
                        demand: s.demand.scaled(share),
                        tours: None,
                    })
            })
            .collect(),
    };

    let mut layers = vec![LayerSpec {
        name: "supplier-hubs".into(),
        params: cc.shuttle_params.clone(),
        mode: LayerMode::FixedShuttle {
            vehicle: cc.shuttle_vehicle.clone(),
            lanes,
        },
        handling_cost_per_delivery: 0.0,
        subregion_count: 1,
    }];

    let equal = shares.iter().all(|&s| s == shares[0]);
    if equal {
        layers.push(LayerSpec {
            name: "hubs-pos".into(),
            params: cc.city_params.clone(),
            mode: LayerMode::Analytical {
                fleet: route_by_class(&pooled.scaled(shares[0]), &cc.city_routes)?,
            },
            handling_cost_per_delivery: cc.handling_cost_per_delivery,
            subregion_count: config.hubs,
        });
    } else {
        for (h, &share) in shares.iter().enumerate() {
            let params = NetworkParams {
                area_km2: cc.city_params.area_km2 / config.hubs as f64,
                ..cc.city_params.clone()
            };
            layers.push(LayerSpec {
                name: format!("hub-{}-pos", h + 1),
                params,
                mode: LayerMode::Analytical {
                    fleet: route_by_class(&pooled.scaled(share), &cc.city_routes)?,
                },
                handling_cost_per_delivery: cc.handling_cost_per_delivery,
                subregion_count: 1,
            });
        }
    }
    Ok(SchemeSpec {
        name: name.to_string(),
        layers,
        external_factors: factors,
    })
}

/// Groups unit lines by the first route accepting their class.
fn route_by_class(demand: &DemandProfile, routes: &[ClassRoute]) -> Result<Vec<FleetAssignment>> {
    if routes.is_empty() {
        return Err(Error::domain("no city vehicles defined"));
    }
    if demand.units.is_empty() {
        if routes.len() != 1 && !demand.is_empty() {
            return Err(Error::domain(
                "demand without unit lines cannot be split across several city vehicles",
            ));
        }
        return Ok(routes
            .iter()
            .enumerate()
            .map(|(i, r)| FleetAssignment {
                vehicle: r.vehicle.clone(),
                demand: if i == 0 {
                    demand.clone()
                } else {
                    DemandProfile::zero()
                },
            })
            .collect());
    }
    let mut groups: Vec<Vec<DeliveryUnitType>> = vec![Vec::new(); routes.len()];
    for unit in &demand.units {
        let idx = routes
            .iter()
            .position(|r| r.classes.contains(&unit.temperature_class))
            .ok_or_else(|| {
                Error::domain(format!(
                    "no city vehicle covers class {} of `{}`",
                    unit.temperature_class, unit.id
                ))
            })?;
        groups[idx].push(unit.clone());
    }
    routes
        .iter()
        .zip(groups)
        .map(|(r, lines)| {
            let demand = DemandProfile::from_units(lines);
            check_classes(&r.vehicle, &demand)?;
            Ok(FleetAssignment {
                vehicle: r.vehicle.clone(),
                demand,
            })
        })
        .collect()
}
