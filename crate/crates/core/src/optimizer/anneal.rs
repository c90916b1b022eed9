use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::KpiReport;
use crate::optimizer::allocation::{neighbor_move, AllocationMatrix};
use crate::optimizer::problem::{AllocationProblem, Evaluation, Slacks};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub seed: u64,
    /// Starting temperature; a tenth of the initial objective when unset.
    pub initial_temperature: Option<f64>,
    pub cooling_rate: f64,
    pub steps_per_temperature: usize,
    /// Stopping temperature; 1e-4 of the starting one when unset.
    pub min_temperature: Option<f64>,
    pub restarts: usize,
    pub penalty_weight: f64,
    /// Step of the verification grid.
    pub grid_step: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            seed: 0,
            initial_temperature: None,
            cooling_rate: 0.95,
            steps_per_temperature: 200,
            min_temperature: None,
            restarts: 5,
            penalty_weight: 1e3,
            grid_step: 0.05,
        }
    }
}

impl SaConfig {
    pub fn with_seed(seed: u64) -> Self {
        SaConfig {
            seed,
            ..SaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::domain(format!(
                "cooling_rate must lie in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if self.steps_per_temperature < 1 || self.restarts < 1 {
            return Err(Error::domain(
                "steps_per_temperature and restarts must be at least 1",
            ));
        }
        for (name, t) in [
            ("initial_temperature", self.initial_temperature),
            ("min_temperature", self.min_temperature),
        ] {
            if let Some(t) = t {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::domain(format!("{name} must be positive, got {t}")));
                }
            }
        }
        if !(self.penalty_weight > 0.0 && self.penalty_weight.is_finite()) {
            return Err(Error::domain("penalty_weight must be positive"));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(Error::domain(format!(
                "grid_step must lie in (0, 1], got {}",
                self.grid_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub allocation: AllocationMatrix,
    pub objective: f64,
    pub feasible: bool,
    pub violations: Vec<Slacks>,
    /// Layer KPIs of the allocation; absent when its tour plan diverges.
    pub kpis: Option<KpiReport>,
    /// Best penalized objective after each temperature level.
    pub trace: Vec<f64>,
    /// Candidate allocations evaluated.
    pub evaluations: u64,
}

impl OptimizationResult {
    pub(crate) fn from_evaluation(
        problem: &AllocationProblem,
        allocation: AllocationMatrix,
        eval: Evaluation,
        trace: Vec<f64>,
        evaluations: u64,
    ) -> Result<Self> {
        let feasible = eval.feasible();
        let kpis = match problem.kpis(&allocation) {
            Ok(k) => Some(k),
            Err(e) if e.is_infeasible() => None,
            Err(e) => return Err(e),
        };
        Ok(OptimizationResult {
            allocation,
            objective: eval.objective,
            feasible,
            violations: eval.slacks,
            kpis,
            trace,
            evaluations,
        })
    }
}

/// Ranking of candidates: feasible before infeasible, then lower objective,
/// or lower violation among infeasible ones.
pub(crate) fn better(a: &Evaluation, b: &Evaluation) -> bool {
    match (a.feasible(), b.feasible()) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.objective < b.objective,
        (false, false) => {
            let (va, vb) = (a.violation(), b.violation());
            va < vb || (va == vb && a.objective < b.objective)
        }
    }
}

struct RestartOutcome {
    allocation: AllocationMatrix,
    eval: Evaluation,
    trace: Vec<f64>,
    evaluations: u64,
}

fn anneal(
    problem: &AllocationProblem,
    config: &SaConfig,
    restart: usize,
) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
    let mut current = AllocationMatrix::uniform(problem.units.len(), problem.fleet.len())?;
    let initial = problem.evaluate(&current)?;
    let mut current_energy = initial.energy(config.penalty_weight);
    let start = config
        .initial_temperature
        .unwrap_or(0.1 * initial.objective);
    let mut best = (current.clone(), initial);
    let mut best_energy = current_energy;
    let mut evaluations = 1u64;
    let mut trace = Vec::new();

    if !(start > 0.0 && start.is_finite()) {
        // Nothing to improve on a zero-cost problem.
        return Ok(RestartOutcome {
            allocation: best.0,
            eval: best.1,
            trace,
            evaluations,
        });
    }
    let stop = config.min_temperature.unwrap_or(1e-4 * start);

    let mut temperature = start;
    while temperature > stop {
        for _ in 0..config.steps_per_temperature {
            let candidate = neighbor_move(&current, &mut rng);
            let eval = problem.evaluate(&candidate)?;
            evaluations += 1;
            let energy = eval.energy(config.penalty_weight);
            best_energy = best_energy.min(energy);
            let accept = {
                let delta = energy - current_energy;
                delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp()
            };
            if better(&eval, &best.1) {
                best = (candidate.clone(), eval);
            }
            if accept {
                current = candidate;
                current_energy = energy;
            }
        }
        trace.push(best_energy);
        temperature *= config.cooling_rate;
    }

    let polished = consolidate(problem, best, &mut evaluations)?;
    trace.push(best_energy.min(polished.1.energy(config.penalty_weight)));
    best = polished;
    Ok(RestartOutcome {
        allocation: best.0,
        eval: best.1,
        trace,
        evaluations,
    })
}

/// Steepest descent over moves that hand a whole entry, or a whole column,
/// to another vehicle. Annealing steps are too short to empty a column, and
/// an emptied column is where a vehicle's fixed tour cost disappears.
fn consolidate(
    problem: &AllocationProblem,
    start: (AllocationMatrix, Evaluation),
    evaluations: &mut u64,
) -> Result<(AllocationMatrix, Evaluation)> {
    let (units, vehicles) = (problem.units.len(), problem.fleet.len());
    let mut best = start;
    loop {
        let mut step: Option<(AllocationMatrix, Evaluation)> = None;
        for from in 0..vehicles {
            for to in (0..vehicles).filter(|&t| t != from) {
                let column = (0..units).fold(best.0.clone(), |a, j| {
                    let x = a.get(j, from);
                    if x > 0.0 {
                        a.transfer(j, from, to, x)
                    } else {
                        a
                    }
                });
                let rows = (0..units)
                    .filter(|&j| best.0.get(j, from) > 0.0)
                    .map(|j| best.0.transfer(j, from, to, best.0.get(j, from)));
                for candidate in std::iter::once(column).chain(rows) {
                    if candidate == best.0 {
                        continue;
                    }
                    let eval = problem.evaluate(&candidate)?;
                    *evaluations += 1;
                    let target = step.as_ref().map_or(&best.1, |s| &s.1);
                    if better(&eval, target) {
                        step = Some((candidate, eval));
                    }
                }
            }
        }
        match step {
            Some(s) => best = s,
            None => return Ok(best),
        }
    }
}

/// Simulated annealing over allocations from the row-uniform start.
///
/// Restarts run in parallel with seeds `seed + k`; the best restart wins,
/// ties going to the lowest index.
pub fn simulated_annealing(
    problem: &AllocationProblem,
    config: &SaConfig,
) -> Result<OptimizationResult> {
    problem.validate()?;
    config.validate()?;
    if problem.fleet.len() == 1 {
        let allocation = AllocationMatrix::single(problem.units.len(), 1, 0)?;
        let eval = problem.evaluate(&allocation)?;
        return OptimizationResult::from_evaluation(problem, allocation, eval, Vec::new(), 1);
    }

    let outcomes: Vec<Result<RestartOutcome>> = (0..config.restarts)
        .into_par_iter()
        .map(|k| anneal(problem, config, k))
        .collect();
    let mut chosen: Option<RestartOutcome> = None;
    let mut evaluations = 0;
    for outcome in outcomes {
        let outcome = outcome?;
        evaluations += outcome.evaluations;
        if chosen
            .as_ref()
            .is_none_or(|c| better(&outcome.eval, &c.eval))
        {
            chosen = Some(outcome);
        }
    }
    let chosen = chosen.expect("at least one restart");
    OptimizationResult::from_evaluation(
        problem,
        chosen.allocation,
        chosen.eval,
        chosen.trace,
        evaluations,
    )
}
