use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cityfreight_core::model::{DeliveryUnitType, DemandProfile};
use cityfreight_core::optimizer::{
    brute_force_grid, simulated_annealing, AllocationProblem, OptimizationResult,
    DEFAULT_GRID_LIMIT,
};
use cityfreight_core::scheme::{
    compare_schemes, evaluate_layer, evaluate_scheme, FleetAssignment, LayerMode, LayerSpec,
    SchemeSpec,
};
use cityfreight_core::sensitivity::{sweep_parameter, SweepParameter, SweepSpec, SweepTarget};
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, ErrorClass, Result};
use crate::report::{render, Format, OptimizeView, Render, SweepView, ValidationView};
use crate::scenario::{load_scenario, LoadedScenario};

/// Cost and external-impact evaluation of urban freight distribution schemes.
#[derive(Debug, Parser)]
#[command(name = "cityfreight", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// KPIs of one scheme, per layer and in total.
    Evaluate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        scheme: String,
    },
    /// Schemes side by side with percent changes against a baseline.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Comma-separated scheme names; all schemes when omitted.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        /// Scheme the deltas refer to; the first listed when omitted.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Reallocates delivery units over candidate vehicles in one layer.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        scheme: String,
        /// 1-based layer index.
        #[arg(long)]
        layer: usize,
        /// Comma-separated candidate vehicle ids.
        #[arg(long, value_delimiter = ',', required = true)]
        vehicles: Vec<String>,
        /// Defaults to the scenario's annealing seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the exhaustive grid search.
        #[arg(long)]
        oracle: bool,
        /// Include the annealing trace.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluates a scheme over a range of one network parameter of one layer.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        scheme: String,
        /// 1-based layer index.
        #[arg(long)]
        layer: usize,
        #[arg(long)]
        param: String,
        /// start:stop:step
        #[arg(long)]
        range: String,
    },
    /// Loads and checks a scenario.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    #[arg(long = "scenario")]
    pub path: PathBuf,
}

impl ScenarioArg {
    fn load(&self) -> Result<LoadedScenario> {
        load_scenario(&self.path)
    }
}

/// Runs the command and returns the rendered report.
pub fn run(cli: &Cli) -> Result<String> {
    let report: Box<dyn Render> = match &cli.command {
        Command::Evaluate { scenario, scheme } => {
            let loaded = scenario.load()?;
            Box::new(evaluate_scheme(loaded.resolved.scheme(scheme)?)?)
        }
        Command::Compare {
            scenario,
            schemes,
            baseline,
        } => {
            let loaded = scenario.load()?;
            let specs = compare_selection(&loaded, schemes, baseline.as_deref())?;
            Box::new(compare_schemes(&specs)?)
        }
        Command::Optimize {
            scenario,
            scheme,
            layer,
            vehicles,
            seed,
            oracle,
            trace,
        } => {
            let loaded = scenario.load()?;
            let request = OptimizeRequest {
                scheme,
                layer: *layer,
                vehicles,
                seed: *seed,
                oracle: *oracle,
                trace: *trace,
            };
            Box::new(optimize(&loaded, &request)?)
        }
        Command::Sweep {
            scenario,
            scheme,
            layer,
            param,
            range,
        } => {
            let loaded = scenario.load()?;
            let spec = sweep_spec(&loaded, scheme, *layer, param, range)?;
            let report = sweep_parameter(&spec)?;
            let layer_name = &loaded.resolved.scheme(scheme)?.layers[*layer - 1].name;
            return render(
                &SweepView {
                    scheme,
                    layer: layer_name,
                    report: &report,
                },
                cli.format,
            );
        }
        Command::Validate { scenario } => {
            let loaded = scenario.load()?;
            let r = &loaded.resolved;
            Box::new(ValidationView {
                scenario: loaded.scenario.name.clone(),
                vehicles: r.vehicles.len(),
                suppliers: r.suppliers.len(),
                schemes: r.schemes.iter().map(|s| s.name.clone()).collect(),
                total_weight_kg: r.suppliers.iter().map(|s| s.demand.total_weight_kg).sum(),
                total_stops: r.suppliers.iter().map(|s| s.demand.total_stops).sum(),
            })
        }
    };
    render(report.as_ref(), cli.format)
}

/// Writes `text` to `path`, or to standard output when unset.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            CliError::new(ErrorClass::Io, format!("cannot write report: {e}"))
                .at(p.display().to_string())
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::new(ErrorClass::Io, format!("cannot write report: {e}")))
        }
    }
}

fn compare_selection(
    loaded: &LoadedScenario,
    names: &[String],
    baseline: Option<&str>,
) -> Result<Vec<SchemeSpec>> {
    let mut order: Vec<&str> = if names.is_empty() {
        loaded
            .resolved
            .schemes
            .iter()
            .map(|s| s.name.as_str())
            .collect()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if let Some(b) = baseline {
        order.retain(|n| *n != b);
        order.insert(0, b);
    }
    let mut seen = Vec::new();
    for n in &order {
        if seen.contains(n) {
            return Err(CliError::usage(format!("scheme `{n}` listed twice")));
        }
        seen.push(n);
    }
    order
        .into_iter()
        .map(|n| loaded.resolved.scheme(n).cloned())
        .collect()
}

fn layer_index(scheme: &SchemeSpec, layer: usize) -> Result<usize> {
    if layer == 0 || layer > scheme.layers.len() {
        return Err(CliError::usage(format!(
            "scheme `{}` has layers 1 to {}, got {layer}",
            scheme.name,
            scheme.layers.len()
        )));
    }
    Ok(layer - 1)
}

pub fn parse_range(range: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = range.split(':').collect();
    let bad = || CliError::usage(format!("range `{range}` is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

pub fn sweep_spec(
    loaded: &LoadedScenario,
    scheme: &str,
    layer: usize,
    param: &str,
    range: &str,
) -> Result<SweepSpec> {
    let spec = loaded.resolved.scheme(scheme)?;
    let layer = layer_index(spec, layer)?;
    let parameter: SweepParameter = param
        .parse()
        .map_err(|e: cityfreight_core::Error| CliError::usage(e.to_string()))?;
    let (start, stop, step) = parse_range(range)?;
    let (start, stop) = if start <= stop {
        (start, stop)
    } else {
        (stop, start)
    };
    Ok(SweepSpec {
        parameter,
        start,
        stop,
        step,
        target: SweepTarget::Scheme {
            scheme: spec.clone(),
            layer,
        },
    })
}

#[derive(Debug, Clone)]
pub struct OptimizeRequest<'a> {
    pub scheme: &'a str,
    /// 1-based.
    pub layer: usize,
    pub vehicles: &'a [String],
    pub seed: Option<u64>,
    pub oracle: bool,
    pub trace: bool,
}

/// Allocation problem of one analytical layer.
///
/// Unit lines every candidate can carry are pooled by unit id and become
/// the rows of the problem. Other lines stay on their current vehicle.
pub struct LayerProblem {
    pub problem: AllocationProblem,
    pub fixed: Vec<FleetAssignment>,
    pub base_layer: LayerSpec,
}

pub fn layer_problem(
    loaded: &LoadedScenario,
    scheme: &str,
    layer: usize,
    vehicles: &[String],
) -> Result<LayerProblem> {
    let spec = loaded.resolved.scheme(scheme)?;
    let layer = &spec.layers[layer_index(spec, layer)?];
    let LayerMode::Analytical { fleet } = &layer.mode else {
        return Err(CliError::usage(format!(
            "layer `{}` of scheme `{scheme}` is a fixed shuttle; only analytical layers can be optimized",
            layer.name
        )));
    };
    let mut candidates = Vec::new();
    for id in vehicles {
        let v = loaded.resolved.vehicle(id).ok_or_else(|| {
            CliError::new(ErrorClass::Reference, format!("unknown vehicle `{id}`"))
        })?;
        if candidates
            .iter()
            .any(|c: &cityfreight_core::model::VehicleType| c.id == *id)
        {
            return Err(CliError::usage(format!("vehicle `{id}` listed twice")));
        }
        candidates.push(v.clone());
    }
    if candidates.is_empty() {
        return Err(CliError::usage("no candidate vehicles given"));
    }

    // unit id -> (weight, stops, first line)
    let mut pooled: BTreeMap<String, (f64, f64, DeliveryUnitType)> = BTreeMap::new();
    let mut order = Vec::new();
    let mut fixed: Vec<FleetAssignment> = Vec::new();
    for assignment in fleet {
        let mut kept = Vec::new();
        for unit in &assignment.demand.units {
            if candidates
                .iter()
                .all(|c| c.temperature_class.carries(unit.temperature_class))
            {
                let entry = pooled.entry(unit.id.clone()).or_insert_with(|| {
                    order.push(unit.id.clone());
                    (0.0, 0.0, unit.clone())
                });
                entry.0 += unit.total_weight_kg();
                entry.1 += unit.stops;
            } else {
                kept.push(unit.clone());
            }
        }
        if !kept.is_empty() {
            fixed.push(FleetAssignment {
                vehicle: assignment.vehicle.clone(),
                demand: DemandProfile::from_units(kept),
            });
        }
    }
    let units: Vec<DeliveryUnitType> = order
        .iter()
        .filter_map(|id| {
            let (w, n, first) = &pooled[id];
            (*n > 0.0).then(|| DeliveryUnitType {
                avg_weight_kg: w / n,
                stops: *n,
                ..first.clone()
            })
        })
        .collect();
    if units.is_empty() {
        return Err(CliError::usage(format!(
            "no demand in layer `{}` can be carried by every candidate vehicle",
            layer.name
        )));
    }
    Ok(LayerProblem {
        problem: AllocationProblem {
            fleet: candidates,
            units,
            params: layer.params.clone(),
            subregion_count: layer.subregion_count,
            external_factors: spec.external_factors,
        },
        fixed,
        base_layer: layer.clone(),
    })
}

impl LayerProblem {
    /// The layer with the problem's rows allocated as given.
    pub fn layer_with(&self, result: &OptimizationResult) -> Result<LayerSpec> {
        let induced = self.problem.induced_demand(&result.allocation)?;
        let mut fleet = self.fixed.clone();
        for (vehicle, demand) in self.problem.fleet.iter().zip(induced) {
            if demand.is_empty() {
                continue;
            }
            match fleet.iter_mut().find(|a| a.vehicle.id == vehicle.id) {
                Some(a) => a.demand = DemandProfile::merged([&a.demand, &demand]),
                None => fleet.push(FleetAssignment {
                    vehicle: vehicle.clone(),
                    demand,
                }),
            }
        }
        Ok(LayerSpec {
            mode: LayerMode::Analytical { fleet },
            ..self.base_layer.clone()
        })
    }

    pub fn mass_kg(&self, result: &OptimizationResult) -> Result<Vec<f64>> {
        Ok(self
            .problem
            .induced_demand(&result.allocation)?
            .iter()
            .map(|d| d.total_weight_kg * self.problem.subregion_count as f64)
            .collect())
    }
}

pub fn optimize(loaded: &LoadedScenario, req: &OptimizeRequest) -> Result<OptimizeView> {
    let lp = layer_problem(loaded, req.scheme, req.layer, req.vehicles)?;
    let mut config = loaded.resolved.sa.clone();
    if let Some(seed) = req.seed {
        config.seed = seed;
    }
    let result = simulated_annealing(&lp.problem, &config)?;
    let oracle = if req.oracle {
        Some(brute_force_grid(
            &lp.problem,
            config.grid_step,
            DEFAULT_GRID_LIMIT,
        )?)
    } else {
        None
    };
    let factors = &loaded.resolved.scheme(req.scheme)?.external_factors;
    let baseline = evaluate_layer(&lp.base_layer, factors)?;
    let optimized = match evaluate_layer(&lp.layer_with(&result)?, factors) {
        Ok(k) => Some(k),
        Err(e) if e.is_infeasible() => None,
        Err(e) => return Err(e.into()),
    };
    Ok(OptimizeView {
        scheme: req.scheme.to_string(),
        layer: lp.base_layer.name.clone(),
        vehicles: lp.problem.fleet.iter().map(|v| v.id.clone()).collect(),
        units: lp.problem.units.iter().map(|u| u.id.clone()).collect(),
        mass_kg: lp.mass_kg(&result)?,
        baseline,
        optimized,
        result,
        oracle,
        show_trace: req.trace,
    })
}
