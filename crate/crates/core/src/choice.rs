//! Selection kernels and drift functions for rank-based choice.
//!
//! A new vertex samples `r` existing vertices, ranks them by location and
//! attaches to the rank-`k` sample with probability `xi[k-1]`. Everything in
//! this module is a pure polynomial evaluation in the weight fractions
//! `y` (mass at locations `<= x`) and `d` (mass of one tracked vertex).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sample size with exactly representable binomial coefficients.
pub const MAX_SAMPLE_SIZE: usize = 60;

const SUM_TOLERANCE: f64 = 1e-12;

fn binomial_table() -> &'static Vec<Vec<u64>> {
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(MAX_SAMPLE_SIZE + 1);
        for n in 0..=MAX_SAMPLE_SIZE {
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        rows
    })
}

/// Exact binomial coefficient `C(n, k)` for `n <= 60`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    assert!(n <= MAX_SAMPLE_SIZE, "binomial table only covers n <= {MAX_SAMPLE_SIZE}");
    if k > n {
        0
    } else {
        binomial_table()[n][k]
    }
}

fn binom_f(n: usize, k: usize) -> f64 {
    binomial(n, k) as f64
}

/// `base^0, base^1, ..., base^n` by repeated multiplication, with `0^0 = 1`.
fn powers(base: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    out.push(acc);
    for _ in 0..n {
        acc *= base;
        out.push(acc);
    }
    out
}

/// Probabilities over the `r` rank positions of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChoiceVector {
    weights: Vec<f64>,
}

impl ChoiceVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let r = weights.len();
        if !(2..=MAX_SAMPLE_SIZE).contains(&r) {
            return Err(Error::InvalidChoice(format!(
                "sample size r = {r} must lie in 2..={MAX_SAMPLE_SIZE}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidChoice(format!("weight {w} is outside [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidChoice(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// The basis vector `e_k^r`: always choose the rank-`k` sample (1-based).
    pub fn basis(k: usize, r: usize) -> Result<Self> {
        if k == 0 || k > r {
            return Err(Error::InvalidChoice(format!("rank {k} is not in 1..={r}")));
        }
        let mut weights = vec![0.0; r];
        weights[k - 1] = 1.0;
        Self::new(weights)
    }

    pub fn r(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of 1-based rank `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k - 1]
    }

    /// `(rank, weight)` pairs with non-zero weight, ranks 1-based.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (i + 1, *w))
    }

    /// `Some(k)` when this is the basis vector `e_k^r`.
    pub fn basis_rank(&self) -> Option<usize> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some((k, 1.0)), None) => Some(k),
            _ => None,
        }
    }

    /// Pick a 1-based rank given a uniform draw `u` in `[0, 1)`.
    pub fn rank_for(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 1;
        for (k, w) in self.support() {
            acc += w;
            last = k;
            if u < acc {
                return k;
            }
        }
        last
    }
}

impl TryFrom<Vec<f64>> for ChoiceVector {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<ChoiceVector> for Vec<f64> {
    fn from(xi: ChoiceVector) -> Self {
        xi.weights
    }
}

/// Probability that the attached vertex has location `<= x` when a
/// fraction `y` of the attachment weight lies at locations `<= x`.
pub fn g(y: f64, xi: &ChoiceVector) -> f64 {
    let r = xi.r();
    let yp = powers(y, r);
    let qp = powers(1.0 - y, r);
    // tail[l] = P(Binomial(r, y) >= l)
    let mut tail = vec![0.0; r + 2];
    for i in (0..=r).rev() {
        tail[i] = tail[i + 1] + binom_f(r, i) * yp[i] * qp[r - i];
    }
    xi.support().map(|(l, w)| w * tail[l]).sum()
}

/// Probability of attaching to one tracked vertex of weight share `d` whose
/// location carries cumulative share `y` (so `y - d` lies strictly below it).
pub fn h(y: f64, d: f64, xi: &ChoiceVector) -> Result<f64> {
    check_pair(y, d)?;
    let r = xi.r();
    let below = powers(y - d, r);
    let at = powers(d, r);
    let above = powers(1.0 - y, r);
    let mut total = 0.0;
    for (l, w) in xi.support() {
        let mut s = 0.0;
        for j in 0..l {
            for i in l..=r {
                s += binom_f(r, i) * binom_f(i, j) * below[j] * at[i - j] * above[r - i];
            }
        }
        total += w * s;
    }
    Ok(total)
}

fn check_pair(y: f64, d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&y) || d < 0.0 || d > y {
        return Err(Error::Domain(format!(
            "need 0 <= d <= y <= 1, got y = {y}, d = {d}"
        )));
    }
    Ok(())
}

/// Drift of the mass below `x`: `g(y) - (2 + alpha) y + x (1 + alpha)`.
pub fn f1(y: f64, x: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    g(y, xi) - (2.0 + alpha) * y + x * (1.0 + alpha)
}

/// Drift of the tracked vertex share: `h(y, d) - (2 + alpha) d`.
pub fn f2(y: f64, d: f64, alpha: f64, xi: &ChoiceVector) -> Result<f64> {
    Ok(h(y, d, xi)? - (2.0 + alpha) * d)
}

/// `dg/dy`, using the telescoped form `r C(r-1, k-1) y^(k-1) (1-y)^(r-k)`.
pub fn dg(y: f64, xi: &ChoiceVector) -> f64 {
    let r = xi.r();
    let yp = powers(y, r);
    let qp = powers(1.0 - y, r);
    xi.support()
        .map(|(k, w)| w * r as f64 * binom_f(r - 1, k - 1) * yp[k - 1] * qp[r - k])
        .sum()
}

/// `d^2 g / dy^2`.
pub fn d2g(y: f64, xi: &ChoiceVector) -> f64 {
    let r = xi.r();
    let yp = powers(y, r);
    let qp = powers(1.0 - y, r);
    xi.support()
        .map(|(k, w)| {
            let c = r as f64 * binom_f(r - 1, k - 1);
            let mut v = 0.0;
            if k > 1 {
                v += (k - 1) as f64 * yp[k - 2] * qp[r - k];
            }
            if r > k {
                v -= (r - k) as f64 * yp[k - 1] * qp[r - k - 1];
            }
            w * c * v
        })
        .sum()
}

/// First eigenvalue of the linearised drift: `dF1/dy`, independent of `x`.
pub fn lambda1(y: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    dg(y, xi) - (2.0 + alpha)
}

/// `dF1/dy` from the untelescoped binomial sum
/// `sum_i C(r,i) y^(i-1) (1-y)^(r-i-1) (i - r y) - (2 + alpha)`.
///
/// Only meaningful for `y` strictly inside `(0, 1)`; kept as an independent
/// route to [`lambda1`].
pub fn lambda1_sum_form(y: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    let r = xi.r() as i32;
    let mut total = 0.0;
    for (l, w) in xi.support() {
        let mut s = 0.0;
        for i in l as i32..=r {
            s += binom_f(r as usize, i as usize)
                * y.powi(i - 1)
                * (1.0 - y).powi(r - i - 1)
                * (i as f64 - r as f64 * y);
        }
        total += w * s;
    }
    total - (2.0 + alpha)
}

/// Second eigenvalue: `dF2/dd` at fixed `y`. Equals `lambda1(y - d)`.
pub fn lambda2(y: f64, d: f64, alpha: f64, xi: &ChoiceVector) -> Result<f64> {
    check_pair(y, d)?;
    Ok(lambda2_polynomial(y, d, alpha, xi))
}

/// [`lambda2`] evaluated as a polynomial without the `0 <= d <= y` check.
///
/// Used for plotting eigenvalue curves along root-difference branches that
/// leave the admissible region.
pub fn lambda2_polynomial(y: f64, d: f64, alpha: f64, xi: &ChoiceVector) -> f64 {
    let r = xi.r();
    let below = powers(y - d, r);
    let at = powers(d, r);
    let above = powers(1.0 - y, r);
    let mut total = 0.0;
    for (l, w) in xi.support() {
        let mut s = 0.0;
        for j in 0..l {
            for i in l..=r {
                let c = binom_f(r, i) * binom_f(i, j) * above[r - i];
                // d/dd [(y-d)^j d^(i-j)], i > j always
                let mut v = (i - j) as f64 * below[j] * at[i - j - 1];
                if j > 0 {
                    v -= j as f64 * below[j - 1] * at[i - j];
                }
                s += c * v;
            }
        }
        total += w * s;
    }
    total - (2.0 + alpha)
}

/// All kernel values at one `(y, x, d, alpha)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEvaluation {
    pub y: f64,
    pub x: f64,
    pub d: f64,
    pub alpha: f64,
    pub g: f64,
    pub h: f64,
    pub f1: f64,
    pub f2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl DriftEvaluation {
    pub fn evaluate(y: f64, x: f64, d: f64, alpha: f64, xi: &ChoiceVector) -> Result<Self> {
        Ok(Self {
            y,
            x,
            d,
            alpha,
            g: g(y, xi),
            h: h(y, d, xi)?,
            f1: f1(y, x, alpha, xi),
            f2: f2(y, d, alpha, xi)?,
            lambda1: lambda1(y, alpha, xi),
            lambda2: lambda2(y, d, alpha, xi)?,
        })
    }
}
