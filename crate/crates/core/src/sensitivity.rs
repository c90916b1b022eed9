//! One-dimensional parameter sweeps over a layer of a scheme.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DemandProfile, ExternalCostFactors, KpiReport, NetworkParams, VehicleType};
use crate::scheme::{
    evaluate_layer, evaluate_scheme, FleetAssignment, LayerMode, LayerSpec, SchemeSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    RadiusKm,
    AreaKm2,
    DaganzoK,
    CongestionFactor,
    StopTimeH,
    ShiftDurationH,
    LeadTimeH,
    SpeedKmh,
}

/// End of the range on which the parameter constrains the least.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackEnd {
    Low,
    High,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 8] = [
        SweepParameter::RadiusKm,
        SweepParameter::AreaKm2,
        SweepParameter::DaganzoK,
        SweepParameter::CongestionFactor,
        SweepParameter::StopTimeH,
        SweepParameter::ShiftDurationH,
        SweepParameter::LeadTimeH,
        SweepParameter::SpeedKmh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::RadiusKm => "radius_km",
            SweepParameter::AreaKm2 => "area_km2",
            SweepParameter::DaganzoK => "daganzo_k",
            SweepParameter::CongestionFactor => "congestion_factor",
            SweepParameter::StopTimeH => "stop_time_h",
            SweepParameter::ShiftDurationH => "shift_duration_h",
            SweepParameter::LeadTimeH => "lead_time_h",
            SweepParameter::SpeedKmh => "speed_kmh",
        }
    }

    pub fn apply(self, params: &mut NetworkParams, value: f64) {
        match self {
            SweepParameter::RadiusKm => params.radius_km = value,
            SweepParameter::AreaKm2 => params.area_km2 = value,
            SweepParameter::DaganzoK => params.daganzo_k = value,
            SweepParameter::CongestionFactor => params.congestion_factor = value,
            SweepParameter::StopTimeH => params.stop_time_h = value,
            SweepParameter::ShiftDurationH => params.shift_duration_h = value,
            SweepParameter::LeadTimeH => params.lead_time_h = value,
            SweepParameter::SpeedKmh => params.speed_kmh = Some(value),
        }
    }

    pub fn slack_end(self) -> SlackEnd {
        match self {
            SweepParameter::ShiftDurationH
            | SweepParameter::LeadTimeH
            | SweepParameter::SpeedKmh => SlackEnd::High,
            _ => SlackEnd::Low,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
                Error::domain(format!(
                    "unknown sweep parameter `{s}` (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// One layer of a scheme, by index.
    Scheme { scheme: SchemeSpec, layer: usize },
    /// A single vehicle type serving one demand.
    Single {
        vehicle: VehicleType,
        demand: DemandProfile,
        params: NetworkParams,
        external_factors: ExternalCostFactors,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub target: SweepTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum SweepOutcome {
    Feasible {
        /// Whole target.
        total: KpiReport,
        /// The swept layer alone.
        layer: KpiReport,
    },
    Infeasible {
        reason: String,
    },
}

impl SweepOutcome {
    pub fn total(&self) -> Option<&KpiReport> {
        match self {
            SweepOutcome::Feasible { total, .. } => Some(total),
            SweepOutcome::Infeasible { .. } => None,
        }
    }

    pub fn layer(&self) -> Option<&KpiReport> {
        match self {
            SweepOutcome::Feasible { layer, .. } => Some(layer),
            SweepOutcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SweepOutcome::Feasible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    /// Ascending parameter values.
    pub rows: Vec<SweepRow>,
    pub detected_threshold: Option<f64>,
    /// Largest infeasible value when small values are the tight side.
    pub infeasible_below: Option<f64>,
    /// Smallest infeasible value when large values are the tight side.
    pub infeasible_above: Option<f64>,
}

/// Grid from `start` to `stop` in steps of `step`; the last point snaps to
/// `stop` when it lands within half a step of it.
pub fn grid_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain(format!(
            "sweep step must be positive, got {step}"
        )));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::domain("sweep bounds must be finite"));
    }
    if start > stop {
        return Err(Error::domain(format!(
            "empty sweep grid: start {start} exceeds stop {stop}"
        )));
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    let mut points: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
    points.push(if n == 0 { start } else { stop });
    Ok(points)
}

fn check_target(target: &SweepTarget) -> Result<()> {
    if let SweepTarget::Scheme { scheme, layer } = target {
        if *layer >= scheme.layers.len() {
            return Err(Error::domain(format!(
                "scheme `{}` has {} layers, cannot sweep layer {}",
                scheme.name,
                scheme.layers.len(),
                layer + 1
            )));
        }
    }
    Ok(())
}

/// Evaluates the target with the parameter set to `value`.
pub fn evaluate_point(
    parameter: SweepParameter,
    target: &SweepTarget,
    value: f64,
) -> Result<SweepOutcome> {
    check_target(target)?;
    let outcome = match target {
        SweepTarget::Scheme { scheme, layer } => {
            let mut scheme = scheme.clone();
            parameter.apply(&mut scheme.layers[*layer].params, value);
            evaluate_scheme(&scheme).map(|r| SweepOutcome::Feasible {
                layer: r.layers[*layer].kpis.clone(),
                total: r.total,
            })
        }
        SweepTarget::Single {
            vehicle,
            demand,
            params,
            external_factors,
        } => {
            let mut params = params.clone();
            parameter.apply(&mut params, value);
            let layer = LayerSpec {
                name: vehicle.id.clone(),
                params,
                mode: LayerMode::Analytical {
                    fleet: vec![FleetAssignment {
                        vehicle: vehicle.clone(),
                        demand: demand.clone(),
                    }],
                },
                handling_cost_per_delivery: 0.0,
                subregion_count: 1,
            };
            evaluate_layer(&layer, external_factors).map(|r| SweepOutcome::Feasible {
                total: r.clone(),
                layer: r,
            })
        }
    };
    match outcome {
        Ok(o) => Ok(o),
        Err(e) if e.is_infeasible() => Ok(SweepOutcome::Infeasible {
            reason: e.to_string(),
        }),
        Err(e) => Err(e),
    }
}

pub fn sweep_parameter(spec: &SweepSpec) -> Result<SweepReport> {
    check_target(&spec.target)?;
    let points = grid_points(spec.start, spec.stop, spec.step)?;
    let outcomes: Vec<Result<SweepOutcome>> = points
        .par_iter()
        .map(|&v| evaluate_point(spec.parameter, &spec.target, v))
        .collect();
    let rows = points
        .into_iter()
        .zip(outcomes)
        .map(|(value, outcome)| {
            Ok(SweepRow {
                value,
                outcome: outcome?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = SweepReport {
        parameter: spec.parameter,
        rows,
        detected_threshold: None,
        infeasible_below: None,
        infeasible_above: None,
    };
    let first_infeasible = scan_order(&report)
        .find(|r| !r.outcome.is_feasible())
        .map(|r| r.value);
    match spec.parameter.slack_end() {
        SlackEnd::High => report.infeasible_below = first_infeasible,
        SlackEnd::Low => report.infeasible_above = first_infeasible,
    }
    report.detected_threshold = detect_threshold(&report);
    Ok(report)
}

fn scan_order(report: &SweepReport) -> Box<dyn Iterator<Item = &SweepRow> + '_> {
    match report.parameter.slack_end() {
        SlackEnd::High => Box::new(report.rows.iter().rev()),
        SlackEnd::Low => Box::new(report.rows.iter()),
    }
}

/// First value, scanning from the slack end, whose tours per vehicle
/// differ from those of the first feasible row.
pub fn detect_threshold(report: &SweepReport) -> Option<f64> {
    if report.rows.len() < 2 {
        return None;
    }
    let mut reference: Option<&BTreeMap<String, u64>> = None;
    for row in scan_order(report) {
        let Some(total) = row.outcome.total() else {
            continue;
        };
        match reference {
            None => reference = Some(&total.tours_by_vehicle),
            Some(r) if *r != total.tours_by_vehicle => return Some(row.value),
            Some(_) => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, tours: Option<u64>) -> SweepRow {
        SweepRow {
            value,
            outcome: match tours {
                Some(t) => {
                    let mut k = KpiReport::default();
                    k.tours_by_vehicle.insert("17t".into(), t);
                    SweepOutcome::Feasible {
                        total: k.clone(),
                        layer: k,
                    }
                }
                None => SweepOutcome::Infeasible {
                    reason: "diverges".into(),
                },
            },
        }
    }

    fn report(rows: Vec<SweepRow>) -> SweepReport {
        SweepReport {
            parameter: SweepParameter::LeadTimeH,
            rows,
            detected_threshold: None,
            infeasible_below: None,
            infeasible_above: None,
        }
    }

    #[test]
    fn threshold_is_first_change_from_slack_end() {
        // lead times 4..=8 with tours 3,3,2,2,2
        let r = report(vec![
            row(4.0, Some(3)),
            row(5.0, Some(3)),
            row(6.0, Some(2)),
            row(7.0, Some(2)),
            row(8.0, Some(2)),
        ]);
        assert_eq!(detect_threshold(&r), Some(5.0));
    }

    #[test]
    fn constant_or_infeasible_reports_have_no_threshold() {
        let r = report(vec![row(4.0, Some(2)), row(5.0, Some(2))]);
        assert_eq!(detect_threshold(&r), None);
        let r = report(vec![row(4.0, None), row(5.0, None)]);
        assert_eq!(detect_threshold(&r), None);
        assert_eq!(detect_threshold(&report(vec![row(4.0, Some(1))])), None);
    }

    #[test]
    fn grid_includes_stop_and_rejects_reversed_bounds() {
        assert_eq!(
            grid_points(15.0, 30.0, 5.0).unwrap(),
            vec![15.0, 20.0, 25.0, 30.0]
        );
        assert_eq!(grid_points(3.0, 3.0, 0.5).unwrap(), vec![3.0]);
        assert_eq!(
            grid_points(0.0, 1.0, 0.4).unwrap(),
            vec![0.0, 0.4, 0.8, 1.0]
        );
        assert!(grid_points(8.0, 3.0, 1.0).is_err());
        assert!(grid_points(3.0, 8.0, 0.0).is_err());
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in SweepParameter::ALL {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
        assert!("radius".parse::<SweepParameter>().is_err());
    }
}
