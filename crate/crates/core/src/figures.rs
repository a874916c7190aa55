//! Plot data for the standard experiments, written as CSV plus a JSON
//! manifest. Nothing here renders; external tools consume the files.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::choice::{lambda1, lambda2_polynomial, ChoiceVector};
use crate::error::{Error, Result};
use crate::harness::{run_ensemble, CondensationDiagnosis, DiagnosisSettings};
use crate::model::{uniform_grid, ModelConfig};
use crate::roots::BranchClass;
use crate::phase::{analysis_grid, condensation_predict, mid3_deltas, second_or_sixth_of_seven, PhaseReport};
use crate::trajectory::{fmt_f64, RNG_ALGORITHM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "mid3-sims")]
    Mid3Sims,
    #[serde(rename = "sec6-85")]
    Sec6At85,
    #[serde(rename = "sec6-95")]
    Sec6At95,
    #[serde(rename = "mid3-roots")]
    Mid3Roots,
    #[serde(rename = "eigen-plot")]
    EigenPlot,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Mid3Sims,
        FigureId::Sec6At85,
        FigureId::Sec6At95,
        FigureId::Mid3Roots,
        FigureId::EigenPlot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Mid3Sims => "mid3-sims",
            FigureId::Sec6At85 => "sec6-85",
            FigureId::Sec6At95 => "sec6-95",
            FigureId::Mid3Roots => "mid3-roots",
            FigureId::EigenPlot => "eigen-plot",
        }
    }

    pub fn available() -> String {
        Self::ALL.map(|f| f.name()).join(", ")
    }

    /// `(xi, alpha)` behind the figure.
    pub fn parameters(self) -> (ChoiceVector, f64) {
        let mid = ChoiceVector::basis(2, 3).expect("valid basis vector");
        match self {
            FigureId::Mid3Sims | FigureId::Mid3Roots | FigureId::EigenPlot => (mid, -0.75),
            FigureId::Sec6At85 => (second_or_sixth_of_seven(), -0.85),
            FigureId::Sec6At95 => (second_or_sixth_of_seven(), -0.95),
        }
    }

    pub fn simulates(self) -> bool {
        matches!(self, FigureId::Mid3Sims | FigureId::Sec6At85 | FigureId::Sec6At95)
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string(), Self::available()))
    }
}

/// Desk-scale defaults.
pub const DEFAULT_FIGURE_STEPS: u64 = 1_000_000;
pub const DEFAULT_FIGURE_SEEDS: [u64; 2] = [1, 2];
pub const DEFAULT_ANALYSIS_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRequest {
    pub figure: FigureId,
    pub steps: u64,
    pub seeds: Vec<u64>,
    pub grid_points: usize,
    pub analysis_points: usize,
    pub settings: DiagnosisSettings,
}

impl FigureRequest {
    pub fn new(figure: FigureId) -> Self {
        Self {
            figure,
            steps: DEFAULT_FIGURE_STEPS,
            seeds: DEFAULT_FIGURE_SEEDS.to_vec(),
            grid_points: crate::model::DEFAULT_GRID_POINTS,
            analysis_points: DEFAULT_ANALYSIS_POINTS,
            settings: DiagnosisSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub file: PathBuf,
    pub diagnosis: CondensationDiagnosis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureManifest {
    pub figure: FigureId,
    pub xi: Vec<f64>,
    pub alpha: f64,
    pub steps: Option<u64>,
    pub seeds: Vec<u64>,
    pub rng_algorithm: String,
    /// File names relative to the output directory.
    pub files: Vec<PathBuf>,
    pub runs: Vec<SeedResult>,
    pub thresholds: std::collections::BTreeMap<String, f64>,
    pub predicted_jump_intervals: Vec<(f64, f64)>,
    pub predicted_points: (usize, usize),
}

fn write_rows<P: AsRef<Path>>(path: P, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Branch points as `branch, class, x, y` rows.
pub fn write_root_curves(report: &PhaseReport, path: &Path) -> Result<()> {
    let rows = report.branches.iter().flat_map(|b| {
        let class = class_name(b.class);
        b.x.iter().zip(&b.y).map(move |(x, y)| {
            vec![b.label.clone(), class.clone(), fmt_f64(*x), fmt_f64(*y)]
        })
    });
    write_rows(path, &["branch", "class", "x", "y"], rows)
}

/// One row per branch: `branch, class, x_start, x_end`, with ends refined
/// to fold locations.
pub fn write_branch_domains(report: &PhaseReport, path: &Path) -> Result<()> {
    let rows = report.branches.iter().map(|b| {
        vec![b.label.clone(), class_name(b.class), fmt_f64(b.domain.0), fmt_f64(b.domain.1)]
    });
    write_rows(path, &["branch", "class", "x_start", "x_end"], rows)
}

fn class_name(class: BranchClass) -> String {
    match class {
        BranchClass::Stable => "stable",
        BranchClass::Unstable => "unstable",
        BranchClass::Touchpoint => "touchpoint",
    }
    .to_string()
}

/// Eigenvalue curves for the middle-of-three model: `lambda1(y)` over the
/// range where both `delta` roots are real, and `lambda2(y, delta_i(y))`.
pub fn write_eigen_curves(alpha: f64, points: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let xi = ChoiceVector::basis(2, 3)?;
    // both roots are real where 12 (y - 1/2)^2 <= -4 - 8 alpha
    let half = ((-4.0 - 8.0 * alpha) / 12.0).max(0.0).sqrt();
    let ys: Vec<f64> = (0..points)
        .map(|i| 0.5 - half + 2.0 * half * i as f64 / (points - 1).max(1) as f64)
        .collect();

    let names = ["lambda1.csv", "lambda2_delta2.csv", "lambda2_delta3.csv"];
    write_rows(
        dir.join(names[0]),
        &["y", "lambda1"],
        ys.iter().map(|&y| vec![fmt_f64(y), fmt_f64(lambda1(y, alpha, &xi))]),
    )?;
    for (which, name) in names[1..].iter().enumerate() {
        let rows = ys.iter().filter_map(|&y| {
            let (d2, d3) = mid3_deltas(y, alpha)?;
            let d = if which == 0 { d2 } else { d3 };
            let admissible = (0.0..=y).contains(&d);
            Some(vec![
                fmt_f64(y),
                fmt_f64(d),
                fmt_f64(lambda2_polynomial(y, d, alpha, &xi)),
                admissible.to_string(),
            ])
        });
        write_rows(dir.join(name), &["y", "delta", "lambda2", "admissible"], rows)?;
    }
    Ok(names.iter().map(PathBuf::from).collect())
}

/// Produce the files for `request` inside `out_dir` (created if needed).
pub fn reproduce(request: &FigureRequest, out_dir: &Path) -> Result<FigureManifest> {
    std::fs::create_dir_all(out_dir)?;
    let (xi, alpha) = request.figure.parameters();
    let report = condensation_predict(alpha, &xi, &analysis_grid(request.analysis_points))?;
    let mut files = Vec::new();
    let mut runs = Vec::new();

    match request.figure {
        FigureId::EigenPlot => {
            files.extend(write_eigen_curves(alpha, request.analysis_points + 1, out_dir)?);
        }
        _ => {
            write_root_curves(&report, &out_dir.join("root_curves.csv"))?;
            write_branch_domains(&report, &out_dir.join("branches.csv"))?;
            files.push(PathBuf::from("root_curves.csv"));
            files.push(PathBuf::from("branches.csv"));
        }
    }
    if request.figure.simulates() {
        let mut base = ModelConfig::new(xi.clone(), alpha, request.steps, 0);
        base.grid = uniform_grid(request.grid_points);
        for member in run_ensemble(&base, &request.seeds, Some(&report), &request.settings)? {
            let name = PathBuf::from(format!("trajectory_seed{}.csv", member.diagnosis.seed));
            member.trajectory.save_csv(&out_dir.join(&name))?;
            files.push(name.clone());
            runs.push(SeedResult {
                seed: member.diagnosis.seed,
                file: name,
                diagnosis: member.diagnosis,
            });
        }
    }

    let manifest = FigureManifest {
        figure: request.figure,
        xi: xi.weights().to_vec(),
        alpha,
        steps: request.figure.simulates().then_some(request.steps),
        seeds: if request.figure.simulates() { request.seeds.clone() } else { vec![] },
        rng_algorithm: RNG_ALGORITHM.to_string(),
        files,
        runs,
        thresholds: report.thresholds.clone(),
        predicted_jump_intervals: report.prediction.jump_intervals.clone(),
        predicted_points: (report.prediction.min_points, report.prediction.max_points),
    };
    let mut f = BufWriter::new(File::create(out_dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.flush()?;
    Ok(manifest)
}
