//! Running a configured simulation and recording checkpoints.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{GraphState, VertexId};
use crate::model::{InitialLocations, ModelConfig};

/// Identifier of the generator behind every run; reproducibility is per
/// `(RNG_ALGORITHM, seed)`.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub n: u64,
    /// Psi_n at each grid location.
    pub psi: Vec<f64>,
    /// Weight share of each tracked vertex.
    pub tracked_share: Vec<f64>,
    pub max_degree_vertex: VertexId,
    pub max_degree: u32,
    pub max_degree_location: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: ModelConfig,
    /// Locations actually used for the initial tree.
    pub initial_locations: Vec<f64>,
    pub rows: Vec<CheckpointRow>,
    pub rng: RngInfo,
    pub wall_seconds: f64,
}

/// Cumulative weight of vertices binned by measurement cell, kept in exact
/// integer form so that Psi_n(1) = 1 exactly and rows are monotone.
struct GridMass {
    grid: Vec<f64>,
    degree_sum: Vec<u64>,
    count: Vec<u64>,
}

impl GridMass {
    fn new(grid: &[f64]) -> Self {
        Self {
            grid: grid.to_vec(),
            degree_sum: vec![0; grid.len() + 1],
            count: vec![0; grid.len() + 1],
        }
    }

    // first grid index j with grid[j] >= x; len for x above the grid
    fn cell(&self, x: f64) -> usize {
        self.grid.partition_point(|&g| g < x)
    }

    fn add_vertex(&mut self, x: f64, degree: u32) {
        let c = self.cell(x);
        self.count[c] += 1;
        self.degree_sum[c] += degree as u64;
    }

    fn add_degree(&mut self, x: f64) {
        let c = self.cell(x);
        self.degree_sum[c] += 1;
    }

    fn psi(&self, alpha: f64, total: f64) -> Vec<f64> {
        let mut deg = 0u64;
        let mut cnt = 0u64;
        (0..self.grid.len())
            .map(|j| {
                deg += self.degree_sum[j];
                cnt += self.count[j];
                (deg as f64 + alpha * cnt as f64) / total
            })
            .collect()
    }
}

fn record(state: &GraphState, mass: &GridMass, tracked: &[usize]) -> CheckpointRow {
    let max = state.max_degree_vertex();
    CheckpointRow {
        n: state.steps(),
        psi: mass.psi(state.alpha(), state.total_weight()),
        tracked_share: tracked.iter().map(|&v| state.share(v)).collect(),
        max_degree_vertex: max,
        max_degree: state.degree(max),
        max_degree_location: state.location(max),
    }
}

/// Execute `config.steps` growth steps, recording a row at every checkpoint.
///
/// Deterministic given `(RNG_ALGORITHM, config.seed)`; the trajectory holds
/// everything except `wall_seconds` bit-identically across invocations.
pub fn run(config: &ModelConfig) -> Result<Trajectory> {
    let started = Instant::now();
    let mut rng = seeded_rng(config.seed);
    let mut state = GraphState::init(config, &mut rng)?;
    let checkpoints = config.checkpoints.resolve(config.steps);

    let mut mass = GridMass::new(&config.grid);
    for v in 0..state.vertex_count() {
        mass.add_vertex(state.location(v), state.degree(v));
    }

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut buf = Vec::with_capacity(config.r());
    let mut next = checkpoints.iter().copied().peekable();
    loop {
        while next.peek() == Some(&state.steps()) {
            rows.push(record(&state, &mass, &config.tracked));
            next.next();
        }
        if state.steps() >= config.steps {
            break;
        }
        let step = state.step(&config.xi, &mut rng, &mut buf);
        mass.add_vertex(step.location, 1);
        mass.add_degree(state.location(step.target));
    }

    let initial_locations = state.locations()[..config.n0].to_vec();
    Ok(Trajectory {
        config: config.clone(),
        initial_locations,
        rows,
        rng: RngInfo {
            algorithm: RNG_ALGORITHM.to_string(),
            seed: config.seed,
        },
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Full round-trip formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Metadata written next to the trajectory CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub config: ModelConfig,
    pub initial_locations: Vec<f64>,
    pub initial_locations_source: String,
    pub rng: RngInfo,
    pub wall_seconds: f64,
    pub checkpoints: usize,
}

impl Trajectory {
    pub fn grid(&self) -> &[f64] {
        &self.config.grid
    }

    pub fn final_row(&self) -> &CheckpointRow {
        self.rows.last().expect("a trajectory always has the initial row")
    }

    /// Total attachment weight after `n` steps.
    pub fn total_weight_at(&self, n: u64) -> f64 {
        let alpha = self.config.alpha;
        (n as f64 + self.config.n0 as f64 - 1.0) * (2.0 + alpha) + alpha
    }

    /// Weight share of the row's maximum-degree vertex.
    pub fn max_vertex_share(&self, row: &CheckpointRow) -> f64 {
        (row.max_degree as f64 + self.config.alpha) / self.total_weight_at(row.n)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["n".to_string()];
        header.extend(self.config.grid.iter().map(|x| format!("psi@{x}")));
        header.extend(self.config.tracked.iter().map(|v| format!("D_v{v}")));
        header.extend(
            ["max_degree_vertex_id", "max_degree", "max_degree_location"].map(String::from),
        );
        header
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for row in &self.rows {
            let mut rec = vec![row.n.to_string()];
            rec.extend(row.psi.iter().map(|&v| fmt_f64(v)));
            rec.extend(row.tracked_share.iter().map(|&v| fmt_f64(v)));
            rec.push(row.max_degree_vertex.to_string());
            rec.push(row.max_degree.to_string());
            rec.push(fmt_f64(row.max_degree_location));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata(&self) -> TrajectoryMetadata {
        let source = match self.config.initial_locations {
            InitialLocations::Random => "random (uniform draws from the run RNG)",
            InitialLocations::Explicit(_) => "explicit",
        };
        TrajectoryMetadata {
            config: self.config.clone(),
            initial_locations: self.initial_locations.clone(),
            initial_locations_source: source.to_string(),
            rng: self.rng.clone(),
            wall_seconds: self.wall_seconds,
            checkpoints: self.rows.len(),
        }
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn save_metadata(&self, path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &self.metadata())?;
        f.flush()?;
        Ok(())
    }
}
