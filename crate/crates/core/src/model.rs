//! Observations `Y_{τ_{i+1}} = a·τ_{i+1} + ΔW_{τ_{i+1}}` on a realized grid.

use crate::error::{Error, Result};
use crate::sampling::TimeGrid;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    grid: TimeGrid,
    drift: f64,
    y: Vec<f64>,
}

impl ObservationSet {
    /// Builds the observations from explicit Brownian increments.
    pub fn from_increments(grid: TimeGrid, drift: f64, increments: &[f64]) -> Result<Self> {
        if increments.len() != grid.n_obs() {
            return Err(Error::InvalidInput(format!(
                "expected {} increments, got {}",
                grid.n_obs(),
                increments.len()
            )));
        }
        let y = grid
            .observed_times()
            .iter()
            .zip(increments)
            .map(|(&t, &dw)| drift * t + dw)
            .collect();
        Ok(Self { grid, drift, y })
    }

    /// Wraps observed values without a known generating increment path.
    pub fn from_values(grid: TimeGrid, drift: f64, y: Vec<f64>) -> Result<Self> {
        if y.len() != grid.n_obs() {
            return Err(Error::InvalidInput(format!(
                "expected {} observations, got {}",
                grid.n_obs(),
                y.len()
            )));
        }
        Ok(Self { grid, drift, y })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// The drift the set was generated with.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }
}

/// `ΔW_i ~ N(0, τ_{i+1} − τ_i)` for every observed gap, independently.
pub fn sample_increments<R: Rng + ?Sized>(grid: &TimeGrid, rng: &mut R) -> Vec<f64> {
    grid.observed_gaps()
        .map(|gap| {
            let z: f64 = rng.sample(StandardNormal);
            gap.sqrt() * z
        })
        .collect()
}

pub fn synthesize<R: Rng + ?Sized>(grid: TimeGrid, drift: f64, rng: &mut R) -> ObservationSet {
    let dw = sample_increments(&grid, rng);
    ObservationSet::from_increments(grid, drift, &dw).expect("increment count matches grid")
}
