//! Run parameterisation.

use serde::{Deserialize, Serialize};

use crate::choice::ChoiceVector;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_CHECKPOINT_START: u64 = 10;
pub const DEFAULT_CHECKPOINT_RATIO: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLocations {
    /// Distinct uniform draws taken from the run RNG before the first step.
    Random,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointSchedule {
    /// `round(start * ratio^k)` for k = 0, 1, ..., deduplicated.
    Geometric { start: u64, ratio: f64 },
    Explicit(Vec<u64>),
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        Self::Geometric {
            start: DEFAULT_CHECKPOINT_START,
            ratio: DEFAULT_CHECKPOINT_RATIO,
        }
    }
}

impl CheckpointSchedule {
    /// Step indices at which a run records a row. Always starts with 0 and
    /// ends with `steps`.
    pub fn resolve(&self, steps: u64) -> Vec<u64> {
        let mut out = vec![0];
        match self {
            Self::Geometric { start, ratio } => {
                let mut k = 0i32;
                loop {
                    let n = (*start as f64 * ratio.powi(k)).round() as u64;
                    if n >= steps {
                        break;
                    }
                    out.push(n);
                    k += 1;
                }
            }
            Self::Explicit(list) => out.extend(list.iter().copied().filter(|&n| n <= steps)),
        }
        out.push(steps);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Geometric { start, ratio } if *start == 0 || ratio.is_nan() || *ratio <= 1.0 => {
                Err(Error::InvalidConfig(format!(
                    "geometric checkpoints need start >= 1 and ratio > 1 (got {start}, {ratio})"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// `n` evenly spaced points covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least its two endpoints");
    let cells = (points - 1) as f64;
    (0..points).map(|i| i as f64 / cells).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub xi: ChoiceVector,
    pub alpha: f64,
    pub n0: usize,
    pub initial_locations: InitialLocations,
    pub steps: u64,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub checkpoints: CheckpointSchedule,
    /// Initial-vertex indices whose weight share is recorded.
    pub tracked: Vec<usize>,
}

impl ModelConfig {
    /// Two-vertex path with random locations, default grid and checkpoints,
    /// and both initial vertices tracked.
    pub fn new(xi: ChoiceVector, alpha: f64, steps: u64, seed: u64) -> Self {
        Self {
            xi,
            alpha,
            n0: 2,
            initial_locations: InitialLocations::Random,
            steps,
            seed,
            grid: uniform_grid(DEFAULT_GRID_POINTS),
            checkpoints: CheckpointSchedule::default(),
            tracked: vec![0, 1],
        }
    }

    pub fn r(&self) -> usize {
        self.xi.r()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= -1.0 {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if self.n0 < 2 {
            return Err(Error::InvalidConfig(format!(
                "initial tree needs at least 2 vertices (n0 = {})",
                self.n0
            )));
        }
        if let InitialLocations::Explicit(locs) = &self.initial_locations {
            if locs.len() != self.n0 {
                return Err(Error::InvalidConfig(format!(
                    "{} initial locations given for n0 = {}",
                    locs.len(),
                    self.n0
                )));
            }
            if let Some(x) = locs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
                return Err(Error::InvalidConfig(format!(
                    "initial location {x} is outside (0, 1)"
                )));
            }
            let mut sorted = locs.clone();
            sorted.sort_by(f64::total_cmp);
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateLocations(w[0]));
            }
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("measurement grid is empty".into()));
        }
        if let Some(x) = self.grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidConfig(format!("grid point {x} is outside [0, 1]")));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "grid must be strictly increasing".into(),
            ));
        }
        if let Some(v) = self.tracked.iter().find(|&&v| v >= self.n0) {
            return Err(Error::InvalidConfig(format!(
                "tracked vertex {v} is not an initial vertex (n0 = {})",
                self.n0
            )));
        }
        self.checkpoints.validate()
    }
}
