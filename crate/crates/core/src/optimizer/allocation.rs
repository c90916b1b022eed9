use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;
const MAX_TRANSFER: f64 = 0.2;

/// Fraction of each delivery unit (row) carried by each vehicle type (column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    units: usize,
    vehicles: usize,
    entries: Vec<f64>,
}

impl AllocationMatrix {
    pub fn new(units: usize, vehicles: usize, entries: Vec<f64>) -> Result<Self> {
        if units == 0 || vehicles == 0 {
            return Err(Error::domain(
                "allocation needs at least one unit and one vehicle",
            ));
        }
        if entries.len() != units * vehicles {
            return Err(Error::domain(format!(
                "allocation of {units}x{vehicles} needs {} entries, got {}",
                units * vehicles,
                entries.len()
            )));
        }
        let m = AllocationMatrix {
            units,
            vehicles,
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let vehicles = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != vehicles) {
            return Err(Error::domain("allocation rows differ in length"));
        }
        Self::new(rows.len(), vehicles, rows.concat())
    }

    /// Every unit split evenly across the vehicles.
    pub fn uniform(units: usize, vehicles: usize) -> Result<Self> {
        Self::new(
            units,
            vehicles,
            vec![1.0 / vehicles as f64; units * vehicles],
        )
    }

    /// Everything on vehicle `column`.
    pub fn single(units: usize, vehicles: usize, column: usize) -> Result<Self> {
        if column >= vehicles {
            return Err(Error::domain(format!(
                "vehicle column {column} out of range"
            )));
        }
        let mut entries = vec![0.0; units * vehicles];
        for j in 0..units {
            entries[j * vehicles + column] = 1.0;
        }
        Self::new(units, vehicles, entries)
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    pub fn get(&self, unit: usize, vehicle: usize) -> f64 {
        self.entries[unit * self.vehicles + vehicle]
    }

    pub fn row(&self, unit: usize) -> &[f64] {
        &self.entries[unit * self.vehicles..(unit + 1) * self.vehicles]
    }

    pub fn column(&self, vehicle: usize) -> Vec<f64> {
        (0..self.units).map(|j| self.get(j, vehicle)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.vehicles)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row sums equal one and entries lie in [0, 1].
    pub fn validate(&self) -> Result<()> {
        for (j, row) in self.rows().enumerate() {
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::domain(format!(
                    "allocation entry {x} of unit row {j} lies outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::domain(format!(
                    "allocation shares of unit row {j} sum to {sum}; every delivery unit must be allocated in full (shares sum to 1)"
                )));
            }
        }
        Ok(())
    }

    /// Moves `delta` of row `unit` from column `from` to column `to`, then
    /// clamps to [0, 1] and rescales the row to sum to one.
    pub fn transfer(&self, unit: usize, from: usize, to: usize, delta: f64) -> Self {
        let mut next = self.clone();
        let v = self.vehicles;
        let row = &mut next.entries[unit * v..(unit + 1) * v];
        row[from] -= delta;
        row[to] += delta;
        for x in row.iter_mut() {
            *x = x.clamp(0.0, 1.0);
        }
        let sum: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= sum;
        }
        next
    }
}

/// Random transfer of up to a fifth of one row between two vehicles.
pub fn neighbor_move<R: Rng + ?Sized>(
    allocation: &AllocationMatrix,
    rng: &mut R,
) -> AllocationMatrix {
    let v = allocation.vehicles();
    if v < 2 {
        return allocation.clone();
    }
    let unit = rng.gen_range(0..allocation.units());
    let from = rng.gen_range(0..v);
    let mut to = rng.gen_range(0..v - 1);
    if to >= from {
        to += 1;
    }
    // (0, MAX_TRANSFER]
    let delta = MAX_TRANSFER * (1.0 - rng.gen::<f64>());
    allocation.transfer(unit, from, to, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transfer_moves_mass_between_columns() {
        let m = AllocationMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let next = m.transfer(0, 0, 1, 0.2);
        assert_eq!(next.row(0), &[0.8, 0.2]);
    }

    #[test]
    fn single_vehicle_move_is_identity() {
        let m = AllocationMatrix::uniform(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(neighbor_move(&m, &mut rng), m);
    }

    #[test]
    fn zero_row_is_rejected() {
        let err = AllocationMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("sum to 0"));
        assert!(AllocationMatrix::from_rows(&[vec![0.6, 0.3]]).is_err());
        assert!(AllocationMatrix::from_rows(&[vec![1.2, -0.2]]).is_err());
    }
}
