//! Condensation predictions and phase-transition constants.
//!
//! The limit `Psi` is non-decreasing and, for almost every `x`, sits on a
//! stable root branch. Starting from the branch through `(0, 0)` and ending
//! on the branch through `(1, 1)`, every change of branch is an upward jump,
//! i.e. a point of condensation. The prediction below counts the fewest and
//! the most jumps any admissible branch path needs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::choice::{dg, g, ChoiceVector};
use crate::error::{Error, Result};
use crate::roots::{
    critical_points, root_curves, slope_extrema, turning_points, Branch, BranchClass,
    Fold,
};

/// Default analysis grid: `x = i / 1000` for `i = 1..=999`.
pub fn analysis_grid(points: usize) -> Vec<f64> {
    (1..points).map(|i| i as f64 / points as f64).collect()
}

/// Which form of the half-width of the middle-of-three multi-root window to
/// evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfWidthForm {
    /// `sqrt(-(1+2a)^3 / (108 (1+a)^2))`; agrees with the boundary values
    /// `s(-3/4) = sqrt(6)/18` and `s(-7/8) = 1/2`.
    Squared,
    /// `sqrt(-(1+2a)^3 / (108 (1+a)))`. Documentation only; never used for
    /// predictions.
    Linear,
}

/// Half-width `s(alpha)` of the `x`-window where `F1(.; x, e_2^3)` has three
/// roots, for `-1 < alpha < -1/2`.
pub fn mid3_s(alpha: f64) -> Result<f64> {
    mid3_half_width(alpha, HalfWidthForm::Squared)
}

pub fn mid3_half_width(alpha: f64, form: HalfWidthForm) -> Result<f64> {
    if !(alpha > -1.0 && alpha < -0.5) {
        return Err(Error::Domain(format!(
            "half-width defined for -1 < alpha < -1/2, got {alpha}"
        )));
    }
    let cube = -(1.0 + 2.0 * alpha).powi(3);
    let denom = match form {
        HalfWidthForm::Squared => 108.0 * (1.0 + alpha).powi(2),
        HalfWidthForm::Linear => 108.0 * (1.0 + alpha),
    };
    Ok((cube / denom).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "regime")]
pub enum Mid3Regime {
    /// `alpha >= -1/2`: a single continuous limit.
    UniqueLimit,
    /// `-7/8 < alpha < -1/2`: one jump located in `[lo, hi]`.
    WindowJump { lo: f64, hi: f64 },
    /// `alpha <= -7/8`: one jump anywhere in `(0, 1)`.
    FullSupportJump,
}

pub fn mid3_phase(alpha: f64) -> Result<Mid3Regime> {
    if alpha.is_nan() || alpha <= -1.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(if alpha >= -0.5 {
        Mid3Regime::UniqueLimit
    } else if alpha > -0.875 {
        let s = mid3_s(alpha)?;
        Mid3Regime::WindowJump {
            lo: 0.5 - s,
            hi: 0.5 + s,
        }
    } else {
        Mid3Regime::FullSupportJump
    })
}

/// Non-zero roots `(delta_2, delta_3)` in `d` of `F2(psi, d; e_2^3) = 0`, when
/// real.
pub fn mid3_deltas(psi: f64, alpha: f64) -> Option<(f64, f64)> {
    let disc = -12.0 * psi * psi + 12.0 * psi - 7.0 - 8.0 * alpha;
    if disc < 0.0 {
        return None;
    }
    let centre = 0.75 * (2.0 * psi - 1.0);
    let half = 0.25 * disc.sqrt();
    Some((centre + half, centre - half))
}

/// `Xi = (0, 1/2, 0, 0, 0, 1/2, 0)`: second or sixth of seven.
pub fn second_or_sixth_of_seven() -> ChoiceVector {
    ChoiceVector::new(vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0]).expect("valid choice vector")
}

/// Bisection tolerance on alpha for threshold constants.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sec6Thresholds {
    /// Numerical `max_y g'(y) - 2`.
    pub alpha1: f64,
    /// `(35 sqrt(10) - 116) / 9`.
    pub alpha1_closed_form: f64,
    /// Maximisers of `g'`, symmetric about 1/2.
    pub alpha1_maximisers: (f64, f64),
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
}

/// `F1(y; 0) = g(y) - (2 + alpha) y`; the `x`-term shifts all critical values
/// equally so comparisons between them ignore it.
fn shape(y: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    g(y, xi) - (2.0 + alpha) * y
}

/// `sup { alpha : cond(alpha) >= 0 }` by bisection on `[lo, hi]`, given
/// `cond(lo) >= 0 > cond(hi)`.
fn threshold<F: Fn(f64) -> Result<f64>>(cond: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    if cond(lo)? < 0.0 || cond(hi)? >= 0.0 {
        return Err(Error::Domain(format!(
            "threshold condition does not change sign on [{lo}, {hi}]"
        )));
    }
    let mut iterations = 0;
    while hi - lo > THRESHOLD_TOLERANCE {
        iterations += 1;
        if iterations > crate::roots::MAX_BISECTIONS {
            return Err(Error::NoConvergence(crate::roots::MAX_BISECTIONS));
        }
        let mid = 0.5 * (lo + hi);
        if cond(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest alpha at which `F1` is monotone in `y`: `max_y g'(y) - 2`,
/// together with the maximisers.
pub fn monotonicity_threshold(xi: &ChoiceVector) -> Result<(f64, Vec<f64>)> {
    let extrema = slope_extrema(xi)?;
    let best = extrema
        .iter()
        .map(|&y| dg(y, xi))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(dg(0.0, xi))
        .max(dg(1.0, xi));
    let maximisers = extrema
        .into_iter()
        .filter(|&y| (dg(y, xi) - best).abs() < 1e-12)
        .collect();
    Ok((best - 2.0, maximisers))
}

pub fn sec6_thresholds() -> Result<Sec6Thresholds> {
    let xi = second_or_sixth_of_seven();
    let (alpha1, maximisers) = monotonicity_threshold(&xi)?;
    if maximisers.len() != 2 {
        return Err(Error::Domain(format!(
            "expected two maximisers of the slope, found {}",
            maximisers.len()
        )));
    }
    let etas = |alpha: f64| -> Result<[f64; 4]> {
        let c = critical_points(alpha, &xi)?;
        <[f64; 4]>::try_from(c.as_slice()).map_err(|_| {
            Error::Domain(format!("expected four critical points at alpha = {alpha}, found {}", c.len()))
        })
    };
    let lo = -1.0 + 1e-6;
    let hi = alpha1 - 1e-6;
    let alpha2 = threshold(
        |a| {
            let e = etas(a)?;
            Ok(shape(e[1], a, &xi))
        },
        lo,
        hi,
    )?;
    let alpha3 = threshold(
        |a| {
            let e = etas(a)?;
            Ok(shape(e[3], a, &xi) - shape(e[0], a, &xi))
        },
        lo,
        hi,
    )?;
    let alpha4 = threshold(
        |a| {
            let e = etas(a)?;
            Ok(shape(e[3], a, &xi))
        },
        lo,
        hi,
    )?;
    Ok(Sec6Thresholds {
        alpha1,
        alpha1_closed_form: (35.0 * 10f64.sqrt() - 116.0) / 9.0,
        alpha1_maximisers: (maximisers[0], maximisers[1]),
        alpha2,
        alpha3,
        alpha4,
    })
}

/// One admissible upward jump between stable branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    /// Closed interval of locations where the jump can happen.
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationPrediction {
    /// Fewest jumps of any admissible path (the almost-sure minimum).
    pub min_points: usize,
    /// Most jumps of any admissible path.
    pub max_points: usize,
    /// Branch labels along a shortest path.
    pub path: Vec<String>,
    /// Jump supports along the shortest path.
    pub jump_intervals: Vec<(f64, f64)>,
    /// Every admissible single jump between stable branches.
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCount {
    pub x: f64,
    pub roots: usize,
    pub stable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub xi: Vec<f64>,
    pub alpha: f64,
    pub root_counts: Vec<RootCount>,
    pub branches: Vec<Branch>,
    pub folds: Vec<Fold>,
    pub prediction: CondensationPrediction,
    /// Named constants for recognised choice vectors.
    pub thresholds: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mid3_regime: Option<Mid3Regime>,
}

impl PhaseReport {
    pub fn branch(&self, label: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    /// Stable branches, lowest first.
    pub fn stable_branches(&self) -> Vec<&Branch> {
        let mut out: Vec<&Branch> = self
            .branches
            .iter()
            .filter(|b| b.class == BranchClass::Stable)
            .collect();
        out.sort_by(|a, b| a.mean_y().total_cmp(&b.mean_y()));
        out
    }
}

const EDGE_TOLERANCE: f64 = 1e-12;

fn predict(branches: &[&Branch]) -> CondensationPrediction {
    let n = branches.len();
    let mut transitions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (branches[i].domain, branches[j].domain);
            let lo = a.0.max(b.0);
            let hi = a.1.min(b.1);
            if lo <= hi {
                transitions.push((i, j, (lo, hi)));
            }
        }
    }

    let start = (0..n).find(|&i| branches[i].domain.0 <= EDGE_TOLERANCE);
    let end = (0..n).rev().find(|&i| branches[i].domain.1 >= 1.0 - EDGE_TOLERANCE);
    let (Some(start), Some(end)) = (start, end) else {
        return CondensationPrediction {
            min_points: 0,
            max_points: 0,
            path: vec![],
            jump_intervals: vec![],
            transitions: vec![],
        };
    };

    // Depth-first over paths; `entry` is the earliest location at which the
    // current branch can have been reached.
    struct Search<'a> {
        branches: &'a [&'a Branch],
        transitions: &'a [(usize, usize, (f64, f64))],
        end: usize,
        best: Option<Vec<(usize, (f64, f64))>>,
        most: Option<usize>,
    }
    impl Search<'_> {
        fn walk(&mut self, at: usize, entry: f64, path: &mut Vec<(usize, (f64, f64))>) {
            if at == self.end {
                if self.best.as_ref().is_none_or(|b| path.len() < b.len()) {
                    self.best = Some(path.clone());
                }
                self.most = Some(self.most.map_or(path.len(), |m| m.max(path.len())));
            }
            let next: Vec<_> = self
                .transitions
                .iter()
                .filter(|t| t.0 == at && t.2 .1 >= entry)
                .copied()
                .collect();
            for (_, j, (lo, hi)) in next {
                let interval = (lo.max(entry), hi);
                path.push((j, interval));
                self.walk(j, interval.0, path);
                path.pop();
            }
            let _ = self.branches;
        }
    }
    let mut search = Search {
        branches,
        transitions: &transitions,
        end,
        best: None,
        most: None,
    };
    let mut path = Vec::new();
    search.walk(start, 0.0, &mut path);

    let best = search.best.unwrap_or_default();
    let mut labels = vec![branches[start].label.clone()];
    labels.extend(best.iter().map(|(j, _)| branches[*j].label.clone()));
    CondensationPrediction {
        min_points: best.len(),
        max_points: search.most.unwrap_or(0),
        path: labels,
        jump_intervals: best.iter().map(|(_, iv)| *iv).collect(),
        transitions: transitions
            .iter()
            .map(|&(i, j, interval)| Transition {
                from: branches[i].label.clone(),
                to: branches[j].label.clone(),
                interval,
            })
            .collect(),
    }
}

/// Full phase analysis of `(alpha, xi)` over `x_grid` (inside `(0, 1)`).
pub fn condensation_predict(alpha: f64, xi: &ChoiceVector, x_grid: &[f64]) -> Result<PhaseReport> {
    if alpha.is_nan() || alpha <= -1.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let branches = root_curves(alpha, xi, x_grid)?;
    let folds = crate::roots::folds(alpha, xi)?;

    let mut root_counts: Vec<RootCount> = x_grid
        .iter()
        .map(|&x| RootCount { x, roots: 0, stable: 0 })
        .collect();
    for b in &branches {
        for &x in &b.x {
            let i = x_grid.partition_point(|&v| v < x);
            root_counts[i].roots += 1;
            if b.class == BranchClass::Stable {
                root_counts[i].stable += 1;
            }
        }
    }

    let mut report = PhaseReport {
        xi: xi.weights().to_vec(),
        alpha,
        root_counts,
        branches,
        folds,
        prediction: CondensationPrediction {
            min_points: 0,
            max_points: 0,
            path: vec![],
            jump_intervals: vec![],
            transitions: vec![],
        },
        thresholds: BTreeMap::new(),
        mid3_regime: None,
    };
    let mut prediction = predict(&report.stable_branches());

    if let Some(k) = xi.basis_rank() {
        // same-rank choice: at most one point of condensation
        prediction.min_points = prediction.min_points.min(1);
        prediction.max_points = prediction.max_points.min(1);
        for (i, t) in turning_points(alpha, k, xi.r())?.into_iter().enumerate() {
            report.thresholds.insert(format!("turning_point_{}", i + 1), t);
        }
        if k == 2 && xi.r() == 3 {
            let regime = mid3_phase(alpha)?;
            if let Mid3Regime::WindowJump { lo, hi } = regime {
                report.thresholds.insert("s".into(), hi - 0.5);
                report.thresholds.insert("window_lo".into(), lo);
                report.thresholds.insert("window_hi".into(), hi);
            }
            report.mid3_regime = Some(regime);
        }
    }

    if xi == &second_or_sixth_of_seven() {
        let t = sec6_thresholds()?;
        report.thresholds.insert("alpha1".into(), t.alpha1);
        report.thresholds.insert("alpha2".into(), t.alpha2);
        report.thresholds.insert("alpha3".into(), t.alpha3);
        report.thresholds.insert("alpha4".into(), t.alpha4);
        let stable: Vec<(f64, f64)> = report.stable_branches().iter().map(|b| b.domain).collect();
        if let [low, mid, high] = stable[..] {
            if mid.0 > EDGE_TOLERANCE {
                report.thresholds.insert("beta1".into(), mid.0);
                report.thresholds.insert("beta2".into(), low.1);
            } else {
                report.thresholds.insert("beta".into(), high.0);
            }
        }
    }

    report.prediction = prediction;
    Ok(report)
}

impl PhaseReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
