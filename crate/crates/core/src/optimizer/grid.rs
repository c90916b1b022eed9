use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::optimizer::allocation::AllocationMatrix;
use crate::optimizer::anneal::OptimizationResult;
use crate::optimizer::problem::{AllocationProblem, ColumnEval};

pub const DEFAULT_GRID_LIMIT: u64 = 10_000_000;

const DENSE_CACHE_LIMIT: usize = 1 << 22;

/// Number of allocations on the simplex grid with `divisions` steps per unit.
pub fn grid_size(units: usize, vehicles: usize, divisions: u32) -> f64 {
    let per_row = binomial(divisions as u64 + vehicles as u64 - 1, vehicles as u64 - 1);
    per_row.powi(units as i32)
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Compositions of `total` into `parts` non-negative parts, lexicographically ascending.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn fill(rest: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=rest {
            prefix.push(k);
            fill(rest - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

enum ColumnCache {
    Dense(Vec<Option<ColumnEval>>),
    Sparse(HashMap<usize, ColumnEval>),
}

impl ColumnCache {
    fn new(size: usize) -> Self {
        if size <= DENSE_CACHE_LIMIT {
            ColumnCache::Dense(vec![None; size])
        } else {
            ColumnCache::Sparse(HashMap::new())
        }
    }

    fn get_or_try_insert(
        &mut self,
        key: usize,
        eval: impl FnOnce() -> Result<ColumnEval>,
    ) -> Result<ColumnEval> {
        match self {
            ColumnCache::Dense(slots) => match slots[key] {
                Some(c) => Ok(c),
                None => {
                    let c = eval()?;
                    slots[key] = Some(c);
                    Ok(c)
                }
            },
            ColumnCache::Sparse(map) => {
                if let Some(c) = map.get(&key) {
                    return Ok(*c);
                }
                let c = eval()?;
                map.insert(key, c);
                Ok(c)
            }
        }
    }
}

/// Exhaustive search over allocations whose entries are multiples of `step`.
///
/// Returns the feasible allocation of least objective, the lexicographically
/// smallest among ties; the least-violating one when none is feasible.
pub fn brute_force_grid(
    problem: &AllocationProblem,
    step: f64,
    max_points: u64,
) -> Result<OptimizationResult> {
    problem.validate()?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::domain(format!(
            "grid step must lie in (0, 1], got {step}"
        )));
    }
    let divisions = (1.0 / step).round();
    if (divisions * step - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "grid step {step} does not divide 1 evenly"
        )));
    }
    let divisions = divisions as u32;
    let units = problem.units.len();
    let vehicles = problem.fleet.len();
    let points = grid_size(units, vehicles, divisions);
    if points > max_points as f64 {
        return Err(Error::GridTooLarge {
            points,
            limit: max_points,
        });
    }

    let rows = compositions(divisions, vehicles);
    let base = divisions as usize + 1;
    let cache_size = base.pow(units as u32);
    let mut caches: Vec<ColumnCache> = (0..vehicles)
        .map(|_| ColumnCache::new(cache_size))
        .collect();
    let params = problem.subregion_params();
    let scale: Vec<usize> = (0..units).map(|j| base.pow(j as u32)).collect();

    let mut index = vec![0usize; units];
    let mut best: Option<(Vec<usize>, f64, f64, bool)> = None;
    let mut evaluations = 0u64;
    let mut fractions = vec![0.0; units];
    loop {
        evaluations += 1;
        let mut objective = 0.0;
        let mut violation = 0.0;
        let mut feasible = true;
        for (i, cache) in caches.iter_mut().enumerate() {
            let key: usize = (0..units)
                .map(|j| rows[index[j]][i] as usize * scale[j])
                .sum();
            let col = cache.get_or_try_insert(key, || {
                for j in 0..units {
                    fractions[j] = rows[index[j]][i] as f64 / divisions as f64;
                }
                problem.evaluate_column(i, &fractions, &params)
            })?;
            objective += col.cost;
            violation += col.slacks.violation();
            feasible &= col.feasible();
        }
        let improves = match &best {
            None => true,
            Some((_, b_obj, b_vio, b_feas)) => match (feasible, *b_feas) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => objective < *b_obj,
                (false, false) => violation < *b_vio || (violation == *b_vio && objective < *b_obj),
            },
        };
        if improves {
            best = Some((index.clone(), objective, violation, feasible));
        }

        // Odometer with the first row most significant.
        let mut pos = units;
        let exhausted = loop {
            if pos == 0 {
                break true;
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < rows.len() {
                break false;
            }
            index[pos] = 0;
        };
        if exhausted {
            break;
        }
    }

    let (index, ..) = best.expect("grid has at least one point");
    let entries: Vec<f64> = index
        .iter()
        .flat_map(|&r| rows[r].iter().map(|&k| k as f64 / divisions as f64))
        .collect();
    let allocation = AllocationMatrix::new(units, vehicles, entries)?;
    let eval = problem.evaluate(&allocation)?;
    OptimizationResult::from_evaluation(problem, allocation, eval, Vec::new(), evaluations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_are_lexicographic() {
        let c = compositions(2, 3);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0, 0, 2]);
        assert_eq!(c[5], vec![2, 0, 0]);
        let mut sorted = c.clone();
        sorted.sort();
        assert_eq!(c, sorted);
    }

    #[test]
    fn grid_size_counts_simplex_points() {
        assert_eq!(grid_size(1, 2, 100), 101.0);
        assert_eq!(grid_size(3, 3, 20), 231.0_f64.powi(3));
        assert_eq!(grid_size(2, 1, 20), 1.0);
    }
}
