//! Zeros of the drift `F1(.; x, xi)`, their stability, and the branches they
//! trace out as the location `x` varies.
//!
//! The critical points of `F1` (zeros of `lambda1`) do not depend on `x`.
//! They are located once from the monotone pieces of `lambda1` and then used
//! as breakpoints, so every monotone piece of `F1` holds at most one zero.

use serde::{Deserialize, Serialize};

use crate::choice::{binomial, d2g, f1, g, lambda1, lambda2, ChoiceVector};
use crate::error::{Error, Result};
use crate::parallel;

pub const SCAN_STEP: f64 = 1e-3;
pub const ROOT_TOLERANCE: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 200;
pub const TOUCH_TOLERANCE: f64 = 1e-10;
pub const TOUCH_RADIUS: f64 = 1e-4;
/// Largest allowed change in `y` between neighbouring points of one branch,
/// per `1e-3` of `x`.
pub const BRANCH_JUMP_GUARD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// `F1` crosses from positive to negative.
    Stable,
    /// `F1` crosses from negative to positive.
    Unstable,
    /// `F1` touches zero without changing sign.
    Touchpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub y: f64,
    pub kind: RootKind,
    pub lambda1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootProfile {
    pub x: f64,
    /// Ascending in `y`.
    pub roots: Vec<Root>,
}

impl RootProfile {
    pub fn stable(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.kind == RootKind::Stable)
    }

    /// Stable zeros and touchpoints: the values the limit can take.
    pub fn attainable(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.kind != RootKind::Unstable)
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Bisection on a bracket with `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if b - a <= tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if sign(fm) == sign(fa) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Err(Error::NoConvergence(MAX_BISECTIONS))
}

/// Zeros of `f` on `[0, 1]` found by sign changes over the scan grid joined
/// with `breakpoints`. Each zero comes with the sign of `f` on its left.
fn sign_change_zeros<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64]) -> Result<Vec<(f64, i8)>> {
    let steps = (1.0 / SCAN_STEP).round() as usize;
    let mut pts: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    pts.extend(breakpoints.iter().copied().filter(|p| *p > 0.0 && *p < 1.0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut out = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for &p in &pts {
        let s = sign(f(p));
        if s == 0 {
            continue;
        }
        if let Some((lp, ls)) = last {
            if ls != s {
                out.push((bisect(&f, lp, p, ROOT_TOLERANCE)?, ls));
            }
        }
        last = Some((p, s));
    }
    Ok(out)
}

/// Zeros of a function that is monotone between consecutive `breakpoints`.
fn piecewise_monotone_zeros<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64]) -> Result<Vec<f64>> {
    let mut pts = vec![0.0];
    pts.extend(breakpoints.iter().copied().filter(|p| *p > 0.0 && *p < 1.0));
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if sign(fa) * sign(fb) < 0 {
            out.push(bisect(&f, w[0], w[1], ROOT_TOLERANCE)?);
        }
    }
    Ok(out)
}

/// Interior extrema of `dg/dy` (zeros of `g''`); independent of `alpha`.
pub fn slope_extrema(xi: &ChoiceVector) -> Result<Vec<f64>> {
    Ok(sign_change_zeros(|y| d2g(y, xi), &[])?
        .into_iter()
        .map(|(y, _)| y)
        .collect())
}

/// Critical points of `F1` in `(0, 1)`: zeros of `lambda1`. Same for all `x`.
pub fn critical_points(alpha: f64, xi: &ChoiceVector) -> Result<Vec<f64>> {
    let extrema = slope_extrema(xi)?;
    critical_points_with(alpha, xi, &extrema)
}

fn critical_points_with(alpha: f64, xi: &ChoiceVector, extrema: &[f64]) -> Result<Vec<f64>> {
    piecewise_monotone_zeros(|y| lambda1(y, alpha, xi), extrema)
}

fn check_location(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("location x = {x} must lie in (0, 1)")));
    }
    Ok(())
}

/// All zeros of `F1(.; x, xi)` in `(0, 1)`, classified.
pub fn find_roots(x: f64, alpha: f64, xi: &ChoiceVector) -> Result<RootProfile> {
    let crit = critical_points(alpha, xi)?;
    find_roots_with(x, alpha, xi, &crit)
}

/// [`find_roots`] with precomputed critical points.
pub fn find_roots_with(x: f64, alpha: f64, xi: &ChoiceVector, crit: &[f64]) -> Result<RootProfile> {
    check_location(x)?;
    let f = |y: f64| f1(y, x, alpha, xi);

    let mut touch = Vec::new();
    for &c in crit {
        let (left, right) = (sign(f(c - TOUCH_RADIUS)), sign(f(c + TOUCH_RADIUS)));
        if f(c).abs() < TOUCH_TOLERANCE && left == right && left != 0 {
            touch.push(c);
        }
    }

    let mut roots: Vec<Root> = sign_change_zeros(f, crit)?
        .into_iter()
        .filter(|(y, _)| touch.iter().all(|t| (t - y).abs() > TOUCH_RADIUS))
        .map(|(y, left)| Root {
            y,
            kind: if left > 0 { RootKind::Stable } else { RootKind::Unstable },
            lambda1: lambda1(y, alpha, xi),
        })
        .collect();
    roots.extend(touch.into_iter().map(|y| Root {
        y,
        kind: RootKind::Touchpoint,
        lambda1: lambda1(y, alpha, xi),
    }));
    roots.sort_by(|a, b| a.y.total_cmp(&b.y));
    Ok(RootProfile { x, roots })
}

/// Equilibrium `(y, d) = (y_i, y_i - y_j)` of the joint drift of the mass below
/// `z` and the share of a vertex located at `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub y: f64,
    pub d: f64,
    pub stable: bool,
    /// `(lambda1(y), lambda2(y, d))`; the second equals `lambda1(y - d)`.
    pub eigenvalues: (f64, f64),
}

pub fn stationary_points(z: f64, alpha: f64, xi: &ChoiceVector) -> Result<Vec<StationaryPoint>> {
    let profile = find_roots(z, alpha, xi)?;
    let mut out = Vec::new();
    for upper in &profile.roots {
        for lower in profile.roots.iter().filter(|r| r.y <= upper.y) {
            let d = upper.y - lower.y;
            let e1 = lambda1(upper.y, alpha, xi);
            let e2 = lambda2(upper.y, d, alpha, xi)?;
            let stable = upper.kind == RootKind::Stable
                && lower.kind == RootKind::Stable
                && e1 < 0.0
                && e2 < 0.0;
            out.push(StationaryPoint {
                y: upper.y,
                d,
                stable,
                eigenvalues: (e1, e2),
            });
        }
    }
    Ok(out)
}

/// Left side of the turning-point equation for `e_k^r`:
/// `r C(r-1, k-1) y^(k-1) (1-y)^(r-k) - (2 + alpha)`.
pub fn turning_equation(y: f64, alpha: f64, k: usize, r: usize) -> f64 {
    r as f64 * binomial(r - 1, k - 1) as f64 * y.powi(k as i32 - 1) * (1.0 - y).powi((r - k) as i32)
        - (2.0 + alpha)
}

/// Zeros of [`turning_equation`] in `(0, 1)`; at most two.
pub fn turning_points(alpha: f64, k: usize, r: usize) -> Result<Vec<f64>> {
    if k == 0 || k > r || r < 2 {
        return Err(Error::Domain(format!("rank {k} of {r} is not a valid choice")));
    }
    // the left side increases on (0, peak) and decreases on (peak, 1)
    let peak = (k - 1) as f64 / (r - 1) as f64;
    piecewise_monotone_zeros(|y| turning_equation(y, alpha, k, r), &[peak])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    LocalMin,
    LocalMax,
}

/// A critical point `y` of `F1` together with the location `x` at which
/// `F1(y; x) = 0`, i.e. where two roots are born or annihilate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub y: f64,
    pub x: f64,
    pub kind: FoldKind,
}

pub fn folds(alpha: f64, xi: &ChoiceVector) -> Result<Vec<Fold>> {
    Ok(critical_points(alpha, xi)?
        .into_iter()
        .map(|c| Fold {
            y: c,
            x: fold_location(c, alpha, xi),
            kind: if d2g(c, xi) > 0.0 {
                FoldKind::LocalMin
            } else {
                FoldKind::LocalMax
            },
        })
        .collect())
}

/// The location `x` solving `F1(y; x) = 0` for given `y`.
pub fn fold_location(y: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    -(g(y, xi) - (2.0 + alpha) * y) / (1.0 + alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchClass {
    Stable,
    Unstable,
    Touchpoint,
}

/// A continuous curve `x -> psi_i(x)` of roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub class: BranchClass,
    /// Closed `x`-interval on which the branch exists, refined to fold
    /// locations where it begins or ends between grid points.
    pub domain: (f64, f64),
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kinds: Vec<RootKind>,
}

impl Branch {
    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.y.len() as f64
    }

    /// Linear interpolation of the branch at `x`, if within its sampled span.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let (first, last) = (*self.x.first()?, *self.x.last()?);
        if x < first || x > last {
            return None;
        }
        let i = self.x.partition_point(|&v| v < x);
        if self.x[i] == x || i == 0 {
            return Some(self.y[i]);
        }
        let t = (x - self.x[i - 1]) / (self.x[i] - self.x[i - 1]);
        Some(self.y[i - 1] + t * (self.y[i] - self.y[i - 1]))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }
}

fn compatible(class: Option<BranchClass>, kind: RootKind) -> bool {
    matches!(
        (class, kind),
        (None, _)
            | (_, RootKind::Touchpoint)
            | (Some(BranchClass::Stable), RootKind::Stable)
            | (Some(BranchClass::Unstable), RootKind::Unstable)
            | (Some(BranchClass::Touchpoint), _)
    )
}

fn class_of(kind: RootKind) -> Option<BranchClass> {
    match kind {
        RootKind::Stable => Some(BranchClass::Stable),
        RootKind::Unstable => Some(BranchClass::Unstable),
        RootKind::Touchpoint => None,
    }
}

/// Root profiles on `x_grid`, evaluated in parallel.
pub fn root_profiles(alpha: f64, xi: &ChoiceVector, x_grid: &[f64]) -> Result<Vec<RootProfile>> {
    let crit = critical_points(alpha, xi)?;
    parallel::map(x_grid, |&x| find_roots_with(x, alpha, xi, &crit))
        .into_iter()
        .collect()
}

/// Assemble root branches across an increasing grid inside `(0, 1)`.
pub fn root_curves(alpha: f64, xi: &ChoiceVector, x_grid: &[f64]) -> Result<Vec<Branch>> {
    if x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("x grid must be strictly increasing".into()));
    }
    let profiles = root_profiles(alpha, xi, x_grid)?;
    let fold_list = folds(alpha, xi)?;
    Ok(assemble(&profiles, &fold_list))
}

struct Building {
    class: Option<BranchClass>,
    x: Vec<f64>,
    y: Vec<f64>,
    kinds: Vec<RootKind>,
    open: bool,
}

fn assemble(profiles: &[RootProfile], fold_list: &[Fold]) -> Vec<Branch> {
    let mut building: Vec<Building> = Vec::new();
    for (t, profile) in profiles.iter().enumerate() {
        let dx = if t > 0 { profile.x - profiles[t - 1].x } else { SCAN_STEP };
        let guard = BRANCH_JUMP_GUARD * (dx / SCAN_STEP).max(1.0);

        let mut pairs = Vec::new();
        for (b, branch) in building.iter().enumerate().filter(|(_, b)| b.open) {
            let last = *branch.y.last().unwrap();
            for (i, root) in profile.roots.iter().enumerate() {
                let dist = (root.y - last).abs();
                if dist <= guard && compatible(branch.class, root.kind) {
                    pairs.push((dist, b, i));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut branch_used = vec![false; building.len()];
        let mut root_used = vec![false; profile.roots.len()];
        for (_, b, i) in pairs {
            if branch_used[b] || root_used[i] {
                continue;
            }
            branch_used[b] = true;
            root_used[i] = true;
            let root = profile.roots[i];
            let branch = &mut building[b];
            branch.x.push(profile.x);
            branch.y.push(root.y);
            branch.kinds.push(root.kind);
            if branch.class.is_none() {
                branch.class = class_of(root.kind);
            }
        }
        for (b, branch) in building.iter_mut().enumerate() {
            if branch.open && !branch_used[b] {
                branch.open = false;
            }
        }
        for (i, root) in profile.roots.iter().enumerate() {
            if !root_used[i] {
                building.push(Building {
                    class: class_of(root.kind),
                    x: vec![profile.x],
                    y: vec![root.y],
                    kinds: vec![root.kind],
                    open: true,
                });
            }
        }
    }

    let grid_first = profiles.first().map(|p| p.x).unwrap_or(0.0);
    let grid_last = profiles.last().map(|p| p.x).unwrap_or(1.0);
    let xs: Vec<f64> = profiles.iter().map(|p| p.x).collect();

    let mut branches: Vec<Branch> = building
        .into_iter()
        .map(|b| {
            let start = refine_end(&xs, b.x[0], b.y[0], fold_list, grid_first, true);
            let end = refine_end(&xs, *b.x.last().unwrap(), *b.y.last().unwrap(), fold_list, grid_last, false);
            Branch {
                label: String::new(),
                class: b.class.unwrap_or(BranchClass::Touchpoint),
                domain: (start, end),
                x: b.x,
                y: b.y,
                kinds: b.kinds,
            }
        })
        .collect();
    label_branches(&mut branches);
    branches
}

/// Move a branch end from its outermost grid point to the fold location in
/// the adjacent grid gap (or to 0 / 1 when the branch reaches the grid edge
/// without a fold in between).
fn refine_end(xs: &[f64], x: f64, y: f64, fold_list: &[Fold], edge: f64, is_start: bool) -> f64 {
    let (lo, hi) = if is_start {
        let i = xs.partition_point(|&v| v < x);
        (if i == 0 { 0.0 } else { xs[i - 1] }, x)
    } else {
        let i = xs.partition_point(|&v| v <= x);
        (x, if i >= xs.len() { 1.0 } else { xs[i] })
    };
    let candidate = fold_list
        .iter()
        .filter(|f| f.x >= lo && f.x <= hi)
        .min_by(|a, b| (a.y - y).abs().total_cmp(&(b.y - y).abs()));
    match candidate {
        Some(f) => f.x,
        None if x == edge => {
            if is_start {
                0.0
            } else {
                1.0
            }
        }
        None => x,
    }
}

fn label_branches(branches: &mut [Branch]) {
    let mut stable: Vec<usize> = (0..branches.len())
        .filter(|&i| branches[i].class == BranchClass::Stable)
        .collect();
    let mut unstable: Vec<usize> = (0..branches.len())
        .filter(|&i| branches[i].class == BranchClass::Unstable)
        .collect();
    stable.sort_by(|&a, &b| branches[a].mean_y().total_cmp(&branches[b].mean_y()));
    unstable.sort_by(|&a, &b| branches[a].mean_y().total_cmp(&branches[b].mean_y()));
    if branches.len() == 1 {
        branches[0].label = "psi".into();
        return;
    }
    for (n, &i) in stable.iter().enumerate() {
        branches[i].label = format!("psi{}", 2 * n + 1);
    }
    for (n, &i) in unstable.iter().enumerate() {
        branches[i].label = format!("psi{}", 2 * n + 2);
    }
    let mut touch = 0;
    for b in branches.iter_mut().filter(|b| b.class == BranchClass::Touchpoint) {
        touch += 1;
        b.label = format!("touch{touch}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid3() -> ChoiceVector {
        ChoiceVector::basis(2, 3).unwrap()
    }

    #[test]
    fn unique_root_when_alpha_nonnegative_half() {
        for x in [0.01, 0.3, 0.5, 0.77, 0.99] {
            for alpha in [-0.5, 0.0, 1.0] {
                let p = find_roots(x, alpha, &mid3()).unwrap();
                assert_eq!(p.roots.len(), 1, "x={x} alpha={alpha}");
                assert_eq!(p.roots[0].kind, RootKind::Stable);
            }
        }
    }

    #[test]
    fn three_roots_at_half() {
        let p = find_roots(0.5, -0.75, &mid3()).unwrap();
        let s2 = 2f64.sqrt();
        let expected = [(2.0 - s2) / 4.0, 0.5, (2.0 + s2) / 4.0];
        let kinds = [RootKind::Stable, RootKind::Unstable, RootKind::Stable];
        assert_eq!(p.roots.len(), 3);
        for (root, (y, k)) in p.roots.iter().zip(expected.iter().zip(kinds)) {
            assert!((root.y - y).abs() < 1e-10);
            assert_eq!(root.kind, k);
            assert!(f1(root.y, 0.5, -0.75, &mid3()).abs() < 1e-10);
        }
    }

    #[test]
    fn touchpoint_at_window_edge() {
        let x = (9.0 - 6f64.sqrt()) / 18.0;
        let p = find_roots(x, -0.75, &mid3()).unwrap();
        assert_eq!(p.roots.len(), 2, "{p:?}");
        let touch = p.roots.iter().find(|r| r.kind == RootKind::Touchpoint).unwrap();
        assert!((touch.y - (0.5 + (1.0f64 / 24.0).sqrt())).abs() < 1e-8);
        assert_eq!(p.stable().count(), 1);
    }

    #[test]
    fn rejects_locations_outside_unit_interval() {
        assert!(find_roots(0.0, 0.0, &mid3()).is_err());
        assert!(find_roots(1.0, 0.0, &mid3()).is_err());
    }

    #[test]
    fn turning_point_examples() {
        let t = turning_points(-0.75, 2, 3).unwrap();
        let w = (1.0f64 / 24.0).sqrt();
        assert_eq!(t.len(), 2);
        assert!((t[0] - (0.5 - w)).abs() < 1e-12);
        assert!((t[1] - (0.5 + w)).abs() < 1e-12);
        // k = 1: strictly decreasing left side
        for i in 1..100 {
            let y = i as f64 / 100.0;
            assert!(turning_equation(y, 0.0, 1, 4) > turning_equation(y + 0.01, 0.0, 1, 4));
        }
        // above the bound there are no zeros
        let peak = turning_equation(0.5, -2.0, 2, 3);
        assert!(turning_points(peak - 2.0 + 1e-9, 2, 3).unwrap().is_empty());
    }

    #[test]
    fn stationary_points_mid3() {
        let pts = stationary_points(0.5, -0.75, &mid3()).unwrap();
        assert_eq!(pts.len(), 6);
        let s2 = 2f64.sqrt();
        let hub = pts
            .iter()
            .find(|p| (p.y - (2.0 + s2) / 4.0).abs() < 1e-9 && (p.d - s2 / 2.0).abs() < 1e-9)
            .unwrap();
        assert!(hub.stable);
        assert!(hub.eigenvalues.0 < 0.0 && hub.eigenvalues.1 < 0.0);
        let unique = stationary_points(0.3, 0.0, &mid3()).unwrap();
        assert_eq!(unique.len(), 1);
        assert_eq!(unique[0].d, 0.0);
    }

    #[test]
    fn mid3_curves_have_three_branches() {
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let branches = root_curves(-0.75, &mid3(), &grid).unwrap();
        assert_eq!(branches.len(), 3);
        let lo = (9.0 - 6f64.sqrt()) / 18.0;
        let hi = (9.0 + 6f64.sqrt()) / 18.0;
        let by_label = |l: &str| branches.iter().find(|b| b.label == l).unwrap();
        assert!((by_label("psi1").domain.0 - 0.0).abs() < 1e-15);
        assert!((by_label("psi1").domain.1 - hi).abs() < 1e-10);
        assert!((by_label("psi3").domain.0 - lo).abs() < 1e-10);
        assert_eq!(by_label("psi3").domain.1, 1.0);
        assert!((by_label("psi2").domain.0 - lo).abs() < 1e-10);
        assert!((by_label("psi2").domain.1 - hi).abs() < 1e-10);
    }

    #[test]
    fn single_branch_when_no_condensation() {
        let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        let branches = root_curves(0.0, &mid3(), &grid).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].domain, (0.0, 1.0));
        assert!(branches[0].y[0] < 0.01 && *branches[0].y.last().unwrap() > 0.99);
        assert!(branches[0].y.windows(2).all(|w| w[0] < w[1]));
    }
}
