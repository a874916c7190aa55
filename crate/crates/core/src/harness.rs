//! Turning simulated trajectories into condensation diagnoses.
//!
//! The thresholds used here (jump size, hub persistence windows) are
//! heuristics for finite runs, not properties of the limit. They are plain
//! fields on [`DiagnosisSettings`] so they can be tuned per experiment.

use serde::{Deserialize, Serialize};

use crate::choice::ChoiceVector;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::parallel;
use crate::phase::PhaseReport;
use crate::roots::{find_roots, BranchClass, RootKind};
use crate::trajectory::{run, Trajectory};

/// Default per-cell increment above which a jump is reported.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.1;
/// Fewest checkpoints from which a limit estimate is formed.
pub const MIN_ESTIMATE_CHECKPOINTS: usize = 3;
/// Fewer checkpoints than this always give an undecided hub classification.
pub const MIN_HUB_CHECKPOINTS: usize = 6;

/// Final `Psi_n` on the grid, with the per-point change over the last three
/// checkpoints as a convergence measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub alpha: f64,
    pub xi: ChoiceVector,
    pub n: u64,
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub convergence: Vec<f64>,
}

impl LimitEstimate {
    /// An estimate from an explicit curve (no convergence information).
    pub fn from_curve(alpha: f64, xi: ChoiceVector, grid: Vec<f64>, psi: Vec<f64>) -> Self {
        let convergence = vec![0.0; grid.len()];
        Self {
            alpha,
            xi,
            n: 0,
            grid,
            psi,
            convergence,
        }
    }

    pub fn max_convergence(&self) -> f64 {
        self.convergence.iter().copied().fold(0.0, f64::max)
    }
}

pub fn estimate_limit(traj: &Trajectory) -> Result<LimitEstimate> {
    let rows = &traj.rows;
    if rows.len() < MIN_ESTIMATE_CHECKPOINTS {
        return Err(Error::TooFewCheckpoints {
            found: rows.len(),
            needed: MIN_ESTIMATE_CHECKPOINTS,
        });
    }
    let tail = &rows[rows.len() - MIN_ESTIMATE_CHECKPOINTS..];
    let last = &tail[tail.len() - 1];
    let convergence = (0..last.psi.len())
        .map(|j| {
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.psi[j]), hi.max(r.psi[j]))
            });
            hi - lo
        })
        .collect();
    Ok(LimitEstimate {
        alpha: traj.config.alpha,
        xi: traj.config.xi.clone(),
        n: last.n,
        grid: traj.config.grid.clone(),
        psi: last.psi.clone(),
        convergence,
    })
}

/// A single-cell increment of the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Right endpoint of the cell carrying the increment.
    pub location: f64,
    pub size: f64,
    /// Index of the right endpoint in the grid.
    pub cell: usize,
}

/// The largest increment over one grid cell, whether or not it is a jump.
pub fn largest_increment(grid: &[f64], psi: &[f64]) -> Option<Jump> {
    (1..psi.len())
        .map(|j| Jump {
            location: grid[j],
            size: psi[j] - psi[j - 1],
            cell: j,
        })
        .fold(None, |best: Option<Jump>, c| match best {
            Some(b) if b.size >= c.size => Some(b),
            _ => Some(c),
        })
}

/// The largest single-cell increment, reported when it exceeds `threshold`.
pub fn detect_jump(estimate: &LimitEstimate, threshold: f64) -> Option<Jump> {
    largest_increment(&estimate.grid, &estimate.psi).filter(|j| j.size > threshold)
}

/// All separate jumps: runs of consecutive cells each exceeding `threshold`
/// count as one jump, located at the largest cell and sized by the run total.
pub fn detect_jumps(estimate: &LimitEstimate, threshold: f64) -> Vec<Jump> {
    let psi = &estimate.psi;
    let mut jumps: Vec<Jump> = Vec::new();
    let mut previous_exceeded = false;
    for j in 1..psi.len() {
        let inc = psi[j] - psi[j - 1];
        if inc > threshold {
            let cell = Jump {
                location: estimate.grid[j],
                size: inc,
                cell: j,
            };
            match jumps.last_mut() {
                Some(run) if previous_exceeded => {
                    let total = run.size + inc;
                    if inc > psi[run.cell] - psi[run.cell - 1] {
                        *run = Jump { size: total, ..cell };
                    } else {
                        run.size = total;
                    }
                }
                _ => jumps.push(cell),
            }
            previous_exceeded = true;
        } else {
            previous_exceeded = false;
        }
    }
    jumps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HubClass {
    PersistentHub,
    NonHub,
    Undecided,
}

/// Heuristic constants for diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisSettings {
    pub jump_threshold: f64,
    /// Share of checkpoints (from the end) over which a hub must persist.
    pub hub_window: f64,
    /// Largest relative change of the hub's share across the window.
    pub hub_relative_change: f64,
    /// Final share below this fraction of the jump size means no hub.
    pub hub_min_fraction: f64,
    /// Grid cells of slack between hub location and jump location.
    pub hub_location_cells: usize,
}

impl Default for DiagnosisSettings {
    fn default() -> Self {
        Self {
            jump_threshold: DEFAULT_JUMP_THRESHOLD,
            hub_window: 0.5,
            hub_relative_change: 0.05,
            hub_min_fraction: 0.1,
            hub_location_cells: 1,
        }
    }
}

/// Classify whether a detected jump is carried by one persistent vertex.
///
/// * persistent hub: the maximum-degree vertex is the same over the final
///   window, its share changes by less than the relative tolerance across
///   the window, and it sits within the allowed cells of the jump;
/// * non-hub: the maximum-degree vertex changes in the final window, or its
///   final share is below the minimum fraction of the jump size;
/// * undecided otherwise, and always with too few checkpoints.
pub fn classify_hub(traj: &Trajectory, jump: Option<&Jump>, settings: &DiagnosisSettings) -> HubClass {
    let rows = &traj.rows;
    if rows.len() < MIN_HUB_CHECKPOINTS {
        return HubClass::Undecided;
    }
    let span = ((rows.len() as f64 * settings.hub_window).ceil() as usize).clamp(2, rows.len());
    let window = &rows[rows.len() - span..];
    let first = &window[0];
    let last = &window[window.len() - 1];
    let same_vertex = window.iter().all(|r| r.max_degree_vertex == first.max_degree_vertex);
    let final_share = traj.max_vertex_share(last);

    let Some(jump) = jump else {
        return if same_vertex { HubClass::Undecided } else { HubClass::NonHub };
    };
    if !same_vertex || final_share < settings.hub_min_fraction * jump.size {
        return HubClass::NonHub;
    }
    let start_share = traj.max_vertex_share(first);
    let relative = (final_share - start_share).abs() / final_share;
    let grid = traj.grid();
    let cell_width = if grid.len() > 1 { grid[1] - grid[0] } else { 1.0 };
    // the jump sits in the cell (location - width, location]
    let near = (last.max_degree_location - (jump.location - 0.5 * cell_width)).abs()
        <= (0.5 + settings.hub_location_cells as f64) * cell_width + 1e-12;
    if relative < settings.hub_relative_change && near {
        HubClass::PersistentHub
    } else {
        HubClass::Undecided
    }
}

/// Assignment of one grid point to a predicted root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAssignment {
    pub x: f64,
    pub estimate: f64,
    /// Label of the nearest stable branch (`None` if no stable branch covers `x`).
    pub branch: Option<String>,
    pub predicted: Option<f64>,
    pub residual: Option<f64>,
    /// The estimate is closer to an unstable root than to any stable one.
    pub near_unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub points: Vec<PointAssignment>,
    /// Distinct consecutive branch labels along the grid.
    pub sequence: Vec<String>,
    pub max_residual: f64,
}

/// Assign each interior grid point to the nearest stable branch of `report`.
pub fn compare(estimate: &LimitEstimate, report: &PhaseReport) -> Result<Comparison> {
    if estimate.alpha != report.alpha || estimate.xi.weights() != report.xi.as_slice() {
        return Err(Error::Mismatch(format!(
            "estimate is for alpha = {}, xi = {:?}; report is for alpha = {}, xi = {:?}",
            estimate.alpha,
            estimate.xi.weights(),
            report.alpha,
            report.xi
        )));
    }
    let stable: Vec<_> = report
        .branches
        .iter()
        .filter(|b| b.class != BranchClass::Unstable)
        .collect();
    let mut points = Vec::with_capacity(estimate.grid.len());
    for (&x, &value) in estimate.grid.iter().zip(&estimate.psi) {
        let best = stable
            .iter()
            .filter_map(|b| b.value_at(x).map(|y| (b, y)))
            .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()));
        let near_unstable = match (x > 0.0 && x < 1.0, best) {
            (true, Some((_, y))) => find_roots(x, report.alpha, &estimate.xi)?
                .roots
                .iter()
                .filter(|r| r.kind == RootKind::Unstable)
                .any(|r| (r.y - value).abs() < (y - value).abs()),
            _ => false,
        };
        points.push(PointAssignment {
            x,
            estimate: value,
            branch: best.map(|(b, _)| b.label.clone()),
            predicted: best.map(|(_, y)| y),
            residual: best.map(|(_, y)| (y - value).abs()),
            near_unstable,
        });
    }
    let mut sequence: Vec<String> = Vec::new();
    for label in points.iter().filter_map(|p| p.branch.as_ref()) {
        if sequence.last() != Some(label) {
            sequence.push(label.clone());
        }
    }
    let max_residual = points.iter().filter_map(|p| p.residual).fold(0.0, f64::max);
    Ok(Comparison {
        points,
        sequence,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationDiagnosis {
    pub seed: u64,
    pub n: u64,
    pub jump_detected: bool,
    /// Location and size of the largest cell increment (even below threshold).
    pub jump_location: f64,
    pub jump_size: f64,
    /// Every separate jump above threshold.
    pub jumps: Vec<Jump>,
    pub hub: HubClass,
    pub max_convergence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Full diagnosis of one trajectory, optionally against a prediction.
pub fn diagnose(
    traj: &Trajectory,
    report: Option<&PhaseReport>,
    settings: &DiagnosisSettings,
) -> Result<CondensationDiagnosis> {
    let estimate = estimate_limit(traj)?;
    let largest = largest_increment(&estimate.grid, &estimate.psi);
    let jump = largest.filter(|j| j.size > settings.jump_threshold);
    let hub = classify_hub(traj, jump.as_ref(), settings);
    let comparison = report.map(|r| compare(&estimate, r)).transpose()?;
    Ok(CondensationDiagnosis {
        seed: traj.config.seed,
        n: estimate.n,
        jump_detected: jump.is_some(),
        jump_location: largest.map_or(f64::NAN, |j| j.location),
        jump_size: largest.map_or(0.0, |j| j.size.clamp(0.0, 1.0)),
        jumps: detect_jumps(&estimate, settings.jump_threshold),
        hub,
        max_convergence: estimate.max_convergence(),
        comparison,
    })
}

/// Result of one ensemble member.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub trajectory: Trajectory,
    pub diagnosis: CondensationDiagnosis,
}

/// Run `base` once per seed (concurrently when the `parallel` feature is on)
/// and diagnose each run.
pub fn run_ensemble(
    base: &ModelConfig,
    seeds: &[u64],
    report: Option<&PhaseReport>,
    settings: &DiagnosisSettings,
) -> Result<Vec<EnsembleRun>> {
    parallel::map(seeds, |&seed| -> Result<EnsembleRun> {
        let trajectory = run(&base.with_seed(seed))?;
        let diagnosis = diagnose(&trajectory, report, settings)?;
        Ok(EnsembleRun {
            trajectory,
            diagnosis,
        })
    })
    .into_iter()
    .collect()
}

/// Diagnoses only, dropping trajectories as soon as they are summarised.
pub fn diagnose_ensemble(
    base: &ModelConfig,
    seeds: &[u64],
    report: Option<&PhaseReport>,
    settings: &DiagnosisSettings,
) -> Result<Vec<CondensationDiagnosis>> {
    parallel::map(seeds, |&seed| diagnose(&run(&base.with_seed(seed))?, report, settings))
        .into_iter()
        .collect()
}

/// Frequencies over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub jump_detected: usize,
    pub persistent_hub: usize,
    pub non_hub: usize,
    pub undecided: usize,
    pub one_jump: usize,
    pub two_or_more_jumps: usize,
}

pub fn summarize(diagnoses: &[CondensationDiagnosis]) -> EnsembleSummary {
    diagnoses.iter().fold(EnsembleSummary::default(), |mut s, d| {
        s.runs += 1;
        s.jump_detected += d.jump_detected as usize;
        match d.hub {
            HubClass::PersistentHub => s.persistent_hub += 1,
            HubClass::NonHub => s.non_hub += 1,
            HubClass::Undecided => s.undecided += 1,
        }
        match d.jumps.len() {
            0 => {}
            1 => s.one_jump += 1,
            _ => s.two_or_more_jumps += 1,
        }
        s
    })
}
