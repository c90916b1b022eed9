use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{percent_delta, Kpi};
use crate::scheme::layer::{evaluate_scheme, SchemeReport, SchemeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: String,
    /// `None` when the scheme is infeasible.
    pub report: Option<SchemeReport>,
    pub infeasible_reason: Option<String>,
    /// Percent change against the baseline row, per KPI.
    pub deltas: Option<BTreeMap<Kpi, Option<f64>>>,
}

/// Schemes side by side; the first row is the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn baseline(&self) -> &ComparisonRow {
        &self.rows[0]
    }

    pub fn row(&self, scheme: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

pub fn compare_schemes(schemes: &[SchemeSpec]) -> Result<ComparisonTable> {
    if schemes.len() < 2 {
        return Err(Error::domain(format!(
            "a comparison needs at least two schemes, got {}",
            schemes.len()
        )));
    }
    let mut rows = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let (report, infeasible_reason) = match evaluate_scheme(scheme) {
            Ok(r) => (Some(r), None),
            Err(e) if e.is_infeasible() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        rows.push(ComparisonRow {
            scheme: scheme.name.clone(),
            report,
            infeasible_reason,
            deltas: None,
        });
    }
    if let Some(base) = rows[0].report.as_ref().map(|r| r.total.clone()) {
        for row in &mut rows {
            if let Some(report) = &row.report {
                row.deltas = Some(
                    Kpi::ALL
                        .iter()
                        .map(|&k| (k, percent_delta(k.value(&base), k.value(&report.total))))
                        .collect(),
                );
            }
        }
    }
    Ok(ComparisonTable { rows })
}
