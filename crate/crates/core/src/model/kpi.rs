use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::cost::KpiReport;

/// Scalar indicators read off a [`KpiReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kpi {
    TotalDistanceKm,
    TotalTimeH,
    DistanceCost,
    TimeCost,
    TransportCost,
    HandlingCost,
    TotalCost,
    ExternalCostTotal,
    FillRate,
    Tours,
}

impl Kpi {
    pub const ALL: [Kpi; 10] = [
        Kpi::TotalDistanceKm,
        Kpi::TotalTimeH,
        Kpi::DistanceCost,
        Kpi::TimeCost,
        Kpi::TransportCost,
        Kpi::HandlingCost,
        Kpi::TotalCost,
        Kpi::ExternalCostTotal,
        Kpi::FillRate,
        Kpi::Tours,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kpi::TotalDistanceKm => "total_distance_km",
            Kpi::TotalTimeH => "total_time_h",
            Kpi::DistanceCost => "distance_cost",
            Kpi::TimeCost => "time_cost",
            Kpi::TransportCost => "transport_cost",
            Kpi::HandlingCost => "handling_cost",
            Kpi::TotalCost => "total_cost",
            Kpi::ExternalCostTotal => "external_cost_total",
            Kpi::FillRate => "fill_rate",
            Kpi::Tours => "tours",
        }
    }

    pub fn value(self, report: &KpiReport) -> f64 {
        match self {
            Kpi::TotalDistanceKm => report.total_distance_km,
            Kpi::TotalTimeH => report.total_time_h,
            Kpi::DistanceCost => report.distance_cost,
            Kpi::TimeCost => report.time_cost,
            Kpi::TransportCost => report.transport_cost(),
            Kpi::HandlingCost => report.handling_cost,
            Kpi::TotalCost => report.total_cost(),
            Kpi::ExternalCostTotal => report.external_cost_total(),
            Kpi::FillRate => report.fill_rate(),
            Kpi::Tours => report.total_tours() as f64,
        }
    }
}

impl fmt::Display for Kpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kpi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Kpi::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown KPI `{s}`")))
    }
}

/// Relative change of `value` against `base`, in percent.
pub fn percent_delta(base: f64, value: f64) -> Option<f64> {
    if base == 0.0 {
        (value == 0.0).then_some(0.0)
    } else {
        Some((value - base) / base * 100.0)
    }
}
