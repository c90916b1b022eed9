//! Rendering of reports as aligned text, CSV or JSON.
//!
//! Text and CSV round money, distances and times to 2 decimals. JSON keeps
//! full precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cityfreight_core::model::{percent_delta, KpiReport};
use cityfreight_core::optimizer::OptimizationResult;
use cityfreight_core::scheme::{ComparisonTable, SchemeReport};
use cityfreight_core::sensitivity::{SweepOutcome, SweepReport};
use serde::Serialize;

use crate::error::{CliError, ErrorClass, Result};

/// Marker placed in rows without a feasible plan.
pub const INFEASIBLE: &str = "infeasible";
/// Placeholder for undefined cells.
pub const MISSING: &str = "-";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

/// Fixed header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, header: Vec<String>) -> Self {
        Table {
            title: title.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    fn text(&self, out: &mut String) {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |out: &mut String, cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i == 0 {
                    let _ = write!(s, "{cell:<w$}");
                } else {
                    let _ = write!(s, "  {cell:>w$}");
                }
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        let _ = writeln!(out, "{}", self.title);
        line(out, &self.header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(out, &rule);
        for row in &self.rows {
            line(out, row);
        }
    }

    fn csv(&self, out: &mut String) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let internal = |e: csv::Error| CliError::new(ErrorClass::Internal, e.to_string());
        w.write_record(&self.header).map_err(internal)?;
        for row in &self.rows {
            w.write_record(row).map_err(internal)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::new(ErrorClass::Internal, e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(())
    }
}

/// A report that can be rendered in every format.
pub trait Render {
    fn tables(&self) -> Vec<Table>;
    /// Lines appended after the tables in text output.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
    fn json(&self) -> serde_json::Value;
}

pub fn render(report: &dyn Render, format: Format) -> Result<String> {
    let mut out = String::new();
    match format {
        Format::Table => {
            for (i, t) in report.tables().iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                t.text(&mut out);
            }
            for note in report.notes() {
                let _ = writeln!(out, "{note}");
            }
        }
        Format::Csv => {
            // several tables are separated by one blank line
            for (i, t) in report.tables().iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                t.csv(&mut out)?;
            }
        }
        Format::Json => {
            out = serde_json::to_string_pretty(&report.json())
                .map_err(|e| CliError::new(ErrorClass::Internal, e.to_string()))?;
            out.push('\n');
        }
    }
    Ok(out)
}

pub const KPI_COLUMNS: [&str; 11] = [
    "tours",
    "deliveries",
    "distance_km",
    "time_h",
    "distance_cost",
    "time_cost",
    "transport_cost",
    "handling_cost",
    "total_cost",
    "external_cost",
    "fill_rate_pct",
];

fn fixed(x: f64) -> String {
    let s = format!("{x:.2}");
    // no negative zero in rounded output
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Values behind `KPI_COLUMNS`, unrounded.
pub fn kpi_values(k: &KpiReport) -> [f64; 11] {
    [
        k.total_tours() as f64,
        k.deliveries,
        k.total_distance_km,
        k.total_time_h,
        k.distance_cost,
        k.time_cost,
        k.transport_cost(),
        k.handling_cost,
        k.total_cost(),
        k.external_cost_total(),
        k.fill_rate() * 100.0,
    ]
}

fn kpi_cells(k: &KpiReport) -> Vec<String> {
    kpi_values(k)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i == 0 {
                format!("{}", v as u64)
            } else {
                fixed(v)
            }
        })
        .collect()
}

fn kpi_header(first: &[&str]) -> Vec<String> {
    first
        .iter()
        .chain(KPI_COLUMNS.iter())
        .map(|s| s.to_string())
        .collect()
}

/// A KPI report with its derived quantities spelled out.
#[derive(Debug, Clone, Serialize)]
pub struct KpiView {
    pub tours: u64,
    pub tours_by_vehicle: BTreeMap<String, u64>,
    pub deliveries: f64,
    pub distance_km: f64,
    pub time_h: f64,
    pub distance_cost: f64,
    pub time_cost: f64,
    pub transport_cost: f64,
    pub handling_cost: f64,
    pub total_cost: f64,
    pub external_cost: f64,
    pub external_by_category: BTreeMap<&'static str, f64>,
    pub fill_rate: f64,
    pub tour_fill_rate: f64,
    pub loaded_weight_kg: f64,
}

impl From<&KpiReport> for KpiView {
    fn from(k: &KpiReport) -> Self {
        let names = [
            "accident",
            "air_pollution",
            "climate_change",
            "noise",
            "congestion",
        ];
        KpiView {
            tours: k.total_tours(),
            tours_by_vehicle: k.tours_by_vehicle.clone(),
            deliveries: k.deliveries,
            distance_km: k.total_distance_km,
            time_h: k.total_time_h,
            distance_cost: k.distance_cost,
            time_cost: k.time_cost,
            transport_cost: k.transport_cost(),
            handling_cost: k.handling_cost,
            total_cost: k.total_cost(),
            external_cost: k.external_cost_total(),
            external_by_category: names.into_iter().zip(k.external.categories()).collect(),
            fill_rate: k.fill_rate(),
            tour_fill_rate: k.tour_fill_rate(),
            loaded_weight_kg: k.loaded_weight_kg,
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl Render for KpiReport {
    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("kpis", kpi_header(&["scope"]));
        let mut row = vec!["total".to_string()];
        row.extend(kpi_cells(self));
        t.rows.push(row);
        vec![t]
    }

    fn json(&self) -> serde_json::Value {
        to_json(&KpiView::from(self))
    }
}

impl Render for SchemeReport {
    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(&format!("scheme {}", self.name), kpi_header(&["scope"]));
        for layer in &self.layers {
            let mut row = vec![layer.name.clone()];
            row.extend(kpi_cells(&layer.kpis));
            t.rows.push(row);
        }
        let mut row = vec!["total".to_string()];
        row.extend(kpi_cells(&self.total));
        t.rows.push(row);
        vec![t]
    }

    fn json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Layer<'a> {
            name: &'a str,
            kpis: KpiView,
        }
        #[derive(Serialize)]
        struct View<'a> {
            scheme: &'a str,
            layers: Vec<Layer<'a>>,
            total: KpiView,
        }
        to_json(&View {
            scheme: &self.name,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    name: &l.name,
                    kpis: (&l.kpis).into(),
                })
                .collect(),
            total: (&self.total).into(),
        })
    }
}

/// KPIs given a delta column in comparisons, in column order.
const DELTA_COLUMNS: [(&str, usize); 6] = [
    ("distance_km", 2),
    ("time_h", 3),
    ("transport_cost", 6),
    ("total_cost", 8),
    ("external_cost", 9),
    ("fill_rate", 10),
];

fn delta_values(base: &KpiReport, k: &KpiReport) -> Vec<Option<f64>> {
    let (b, v) = (kpi_values(base), kpi_values(k));
    DELTA_COLUMNS
        .iter()
        .map(|&(_, i)| percent_delta(b[i], v[i]))
        .collect()
}

fn delta_header() -> Vec<String> {
    DELTA_COLUMNS
        .iter()
        .map(|(name, _)| format!("delta_{name}_pct"))
        .collect()
}

fn opt_cell(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), fixed)
}

impl Render for ComparisonTable {
    fn tables(&self) -> Vec<Table> {
        let mut header = kpi_header(&["scheme", "status"]);
        header.extend(delta_header());
        let mut t = Table::new("comparison", header);
        let base = self.baseline().report.as_ref().map(|r| &r.total);
        for row in &self.rows {
            let mut cells = vec![row.scheme.clone()];
            match &row.report {
                Some(r) => {
                    cells.push("ok".into());
                    cells.extend(kpi_cells(&r.total));
                    match base {
                        Some(b) => {
                            cells.extend(delta_values(b, &r.total).into_iter().map(opt_cell))
                        }
                        None => cells.extend(DELTA_COLUMNS.iter().map(|_| MISSING.to_string())),
                    }
                }
                None => {
                    cells.push(INFEASIBLE.into());
                    cells.extend(
                        (0..KPI_COLUMNS.len() + DELTA_COLUMNS.len()).map(|_| MISSING.to_string()),
                    );
                }
            }
            t.rows.push(cells);
        }
        vec![t]
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = vec![format!("baseline: {}", self.baseline().scheme)];
        for row in &self.rows {
            if let Some(reason) = &row.infeasible_reason {
                notes.push(format!("{}: {reason}", row.scheme));
            }
        }
        notes
    }

    fn json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row<'a> {
            scheme: &'a str,
            status: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            reason: Option<&'a str>,
            #[serde(skip_serializing_if = "Option::is_none")]
            total: Option<KpiView>,
            #[serde(skip_serializing_if = "Option::is_none")]
            deltas_pct: Option<BTreeMap<String, Option<f64>>>,
        }
        #[derive(Serialize)]
        struct View<'a> {
            baseline: &'a str,
            rows: Vec<Row<'a>>,
        }
        let base = self.baseline().report.as_ref().map(|r| &r.total);
        to_json(&View {
            baseline: &self.baseline().scheme,
            rows: self
                .rows
                .iter()
                .map(|row| Row {
                    scheme: &row.scheme,
                    status: if row.report.is_some() {
                        "ok"
                    } else {
                        INFEASIBLE
                    },
                    reason: row.infeasible_reason.as_deref(),
                    total: row.report.as_ref().map(|r| (&r.total).into()),
                    deltas_pct: row.report.as_ref().zip(base).map(|(r, b)| {
                        DELTA_COLUMNS
                            .iter()
                            .map(|(n, _)| n.to_string())
                            .zip(delta_values(b, &r.total))
                            .collect()
                    }),
                })
                .collect(),
        })
    }
}

/// Sweep rows plus which layer was swept.
#[derive(Debug, Clone)]
pub struct SweepView<'a> {
    pub scheme: &'a str,
    pub layer: &'a str,
    pub report: &'a SweepReport,
}

impl Render for SweepView<'_> {
    fn tables(&self) -> Vec<Table> {
        let param = self.report.parameter.name();
        let mut header = kpi_header(&[param, "status"]);
        header.push("scheme_total_cost".into());
        let mut t = Table::new(
            &format!(
                "sweep of {param} on layer {} of {}",
                self.layer, self.scheme
            ),
            header,
        );
        for row in &self.report.rows {
            let mut cells = vec![fixed(row.value)];
            match &row.outcome {
                SweepOutcome::Feasible { total, layer } => {
                    cells.push("ok".into());
                    cells.extend(kpi_cells(layer));
                    cells.push(fixed(total.total_cost()));
                }
                SweepOutcome::Infeasible { .. } => {
                    cells.push(INFEASIBLE.into());
                    cells.extend((0..=KPI_COLUMNS.len()).map(|_| MISSING.to_string()));
                }
            }
            t.rows.push(cells);
        }
        vec![t]
    }

    fn notes(&self) -> Vec<String> {
        let r = self.report;
        vec![
            format!("threshold: {}", opt_cell(r.detected_threshold)),
            format!("infeasible at or below: {}", opt_cell(r.infeasible_below)),
            format!("infeasible at or above: {}", opt_cell(r.infeasible_above)),
        ]
    }

    fn json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row<'a> {
            value: f64,
            status: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            reason: Option<&'a str>,
            #[serde(skip_serializing_if = "Option::is_none")]
            layer: Option<KpiView>,
            #[serde(skip_serializing_if = "Option::is_none")]
            scheme_total: Option<KpiView>,
        }
        #[derive(Serialize)]
        struct View<'a> {
            scheme: &'a str,
            layer: &'a str,
            parameter: &'static str,
            detected_threshold: Option<f64>,
            infeasible_below: Option<f64>,
            infeasible_above: Option<f64>,
            rows: Vec<Row<'a>>,
        }
        let r = self.report;
        to_json(&View {
            scheme: self.scheme,
            layer: self.layer,
            parameter: r.parameter.name(),
            detected_threshold: r.detected_threshold,
            infeasible_below: r.infeasible_below,
            infeasible_above: r.infeasible_above,
            rows: r
                .rows
                .iter()
                .map(|row| match &row.outcome {
                    SweepOutcome::Feasible { total, layer } => Row {
                        value: row.value,
                        status: "ok",
                        reason: None,
                        layer: Some(layer.into()),
                        scheme_total: Some(total.into()),
                    },
                    SweepOutcome::Infeasible { reason } => Row {
                        value: row.value,
                        status: INFEASIBLE,
                        reason: Some(reason),
                        layer: None,
                        scheme_total: None,
                    },
                })
                .collect(),
        })
    }
}

/// Optimized layer against the layer as configured.
#[derive(Debug, Clone)]
pub struct OptimizeView {
    pub scheme: String,
    pub layer: String,
    pub vehicles: Vec<String>,
    pub units: Vec<String>,
    /// Mass moved by the optimizer, per candidate vehicle.
    pub mass_kg: Vec<f64>,
    pub baseline: KpiReport,
    /// Layer with the optimized allocation; `None` when it has no plan.
    pub optimized: Option<KpiReport>,
    pub result: OptimizationResult,
    /// Grid optimum, when requested.
    pub oracle: Option<OptimizationResult>,
    pub show_trace: bool,
}

impl OptimizeView {
    pub fn mass_shares(&self) -> Vec<f64> {
        let total: f64 = self.mass_kg.iter().sum();
        self.mass_kg
            .iter()
            .map(|m| if total > 0.0 { m / total } else { 0.0 })
            .collect()
    }
}

impl Render for OptimizeView {
    fn tables(&self) -> Vec<Table> {
        let mut header = kpi_header(&["scope"]);
        header.extend(delta_header());
        let mut kpis = Table::new(&format!("layer {} of {}", self.layer, self.scheme), header);
        let mut row = vec!["baseline".to_string()];
        row.extend(kpi_cells(&self.baseline));
        row.extend(DELTA_COLUMNS.iter().map(|_| "0.00".to_string()));
        kpis.rows.push(row);
        let mut row = vec!["optimized".to_string()];
        match &self.optimized {
            Some(k) => {
                row.extend(kpi_cells(k));
                row.extend(delta_values(&self.baseline, k).into_iter().map(opt_cell));
            }
            None => row.extend(
                (0..KPI_COLUMNS.len() + DELTA_COLUMNS.len()).map(|_| INFEASIBLE.to_string()),
            ),
        }
        kpis.rows.push(row);

        let mut header = vec![
            "vehicle".to_string(),
            "mass_kg".into(),
            "mass_share_pct".into(),
        ];
        header.extend(self.units.iter().map(|u| format!("share_{u}_pct")));
        let mut alloc = Table::new("allocation", header);
        for (v, (id, (&m, s))) in self
            .vehicles
            .iter()
            .zip(self.mass_kg.iter().zip(self.mass_shares()))
            .enumerate()
        {
            let mut row = vec![id.clone(), fixed(m), fixed(s * 100.0)];
            row.extend(
                (0..self.units.len()).map(|j| fixed(self.result.allocation.get(j, v) * 100.0)),
            );
            alloc.rows.push(row);
        }

        let mut search = Table::new(
            "search",
            ["method", "objective", "feasible", "evaluations"]
                .map(String::from)
                .to_vec(),
        );
        let mut push = |name: &str, r: &OptimizationResult| {
            search.rows.push(vec![
                name.to_string(),
                fixed(r.objective),
                r.feasible.to_string(),
                r.evaluations.to_string(),
            ])
        };
        push("annealing", &self.result);
        if let Some(o) = &self.oracle {
            push("grid", o);
        }

        let mut tables = vec![kpis, alloc, search];
        if self.show_trace {
            let mut trace = Table::new("trace", vec!["level".into(), "best_energy".into()]);
            for (i, e) in self.result.trace.iter().enumerate() {
                trace.rows.push(vec![i.to_string(), fixed(*e)]);
            }
            tables.push(trace);
        }
        tables
    }

    fn json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Search<'a> {
            objective: f64,
            feasible: bool,
            evaluations: u64,
            allocation: Vec<&'a [f64]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            trace: Option<&'a [f64]>,
        }
        #[derive(Serialize)]
        struct View<'a> {
            scheme: &'a str,
            layer: &'a str,
            vehicles: &'a [String],
            units: &'a [String],
            mass_kg: &'a [f64],
            mass_share: Vec<f64>,
            baseline: KpiView,
            optimized: Option<KpiView>,
            deltas_pct: Option<BTreeMap<String, Option<f64>>>,
            annealing: Search<'a>,
            #[serde(skip_serializing_if = "Option::is_none")]
            grid: Option<Search<'a>>,
        }
        fn search_of<'a>(r: &'a OptimizationResult, trace: bool) -> Search<'a> {
            Search {
                objective: r.objective,
                feasible: r.feasible,
                evaluations: r.evaluations,
                allocation: r.allocation.rows().collect(),
                trace: trace.then_some(r.trace.as_slice()),
            }
        }
        to_json(&View {
            scheme: &self.scheme,
            layer: &self.layer,
            vehicles: &self.vehicles,
            units: &self.units,
            mass_kg: &self.mass_kg,
            mass_share: self.mass_shares(),
            baseline: (&self.baseline).into(),
            optimized: self.optimized.as_ref().map(Into::into),
            deltas_pct: self.optimized.as_ref().map(|k| {
                DELTA_COLUMNS
                    .iter()
                    .map(|(n, _)| n.to_string())
                    .zip(delta_values(&self.baseline, k))
                    .collect()
            }),
            annealing: search_of(&self.result, self.show_trace),
            grid: self.oracle.as_ref().map(|o| search_of(o, false)),
        })
    }
}

/// Messages for `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationView {
    pub scenario: String,
    pub vehicles: usize,
    pub suppliers: usize,
    pub schemes: Vec<String>,
    pub total_weight_kg: f64,
    pub total_stops: f64,
}

impl Render for ValidationView {
    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            &format!("scenario {} is valid", self.scenario),
            ["vehicles", "suppliers", "schemes", "weight_kg", "stops"]
                .map(String::from)
                .to_vec(),
        );
        t.rows.push(vec![
            self.vehicles.to_string(),
            self.suppliers.to_string(),
            self.schemes.join(" "),
            fixed(self.total_weight_kg),
            fixed(self.total_stops),
        ]);
        vec![t]
    }

    fn json(&self) -> serde_json::Value {
        to_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_report_is_a_full_zero_row() {
        let csv = render(&KpiReport::default(), Format::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), KPI_COLUMNS.len() + 1);
        assert_eq!(
            lines[1],
            "total,0,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00"
        );
    }

    #[test]
    fn rounding_never_prints_negative_zero() {
        assert_eq!(fixed(-0.001), "0.00");
        assert_eq!(fixed(-0.0), "0.00");
        assert_eq!(fixed(-1.5), "-1.50");
        assert_eq!(fixed(2.345_01), "2.35");
    }

    #[test]
    fn text_table_aligns_columns() {
        let mut out = String::new();
        let mut t = Table::new("t", vec!["a".into(), "bbb".into()]);
        t.rows.push(vec!["xx".into(), "1".into()]);
        t.text(&mut out);
        assert_eq!(out, "t\na   bbb\n--  ---\nxx    1\n");
    }
}
