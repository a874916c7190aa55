//! Independent oracles shared by the integration tests. Nothing here calls
//! the kernel functions under test.

#![allow(dead_code)]

/// Every labelled tree on `n >= 2` vertices, as degree sequences, via Prüfer
/// codes (n^(n-2) codes, so duplicates of a degree sequence are expected).
pub fn tree_degree_sequences(n: usize) -> Vec<Vec<u32>> {
    if n == 2 {
        return vec![vec![1, 1]];
    }
    let len = n - 2;
    let mut out = Vec::new();
    let mut code = vec![0usize; len];
    loop {
        let mut deg = vec![1u32; n];
        for &c in &code {
            deg[c] += 1;
        }
        out.push(deg);
        // odometer increment
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            code[i] += 1;
            if code[i] < n {
                break;
            }
            code[i] = 0;
            i += 1;
        }
    }
}

/// Exact one-step attachment probabilities per vertex, by enumerating every
/// ordered `r`-tuple of draws. `locations` must be distinct.
pub fn attachment_probabilities(degrees: &[u32], locations: &[f64], alpha: f64, xi: &[f64]) -> Vec<f64> {
    let n = degrees.len();
    let r = xi.len();
    let total: f64 = degrees.iter().map(|&d| d as f64 + alpha).sum();
    let p: Vec<f64> = degrees.iter().map(|&d| (d as f64 + alpha) / total).collect();
    let mut out = vec![0.0; n];
    let mut tuple = vec![0usize; r];
    let tuples = n.pow(r as u32);
    for _ in 0..tuples {
        let weight: f64 = tuple.iter().map(|&v| p[v]).product();
        let mut sorted = tuple.clone();
        sorted.sort_by(|&a, &b| locations[a].partial_cmp(&locations[b]).unwrap());
        for (k, &w) in xi.iter().enumerate() {
            out[sorted[k]] += weight * w;
        }
        for slot in tuple.iter_mut() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    out
}

/// Share of weight at locations `<= x`.
pub fn mass_at_or_below(degrees: &[u32], locations: &[f64], alpha: f64, x: f64) -> f64 {
    let total: f64 = degrees.iter().map(|&d| d as f64 + alpha).sum();
    degrees
        .iter()
        .zip(locations)
        .filter(|(_, &l)| l <= x)
        .map(|(&d, _)| d as f64 + alpha)
        .sum::<f64>()
        / total
}

pub fn basis(k: usize, r: usize) -> Vec<f64> {
    let mut v = vec![0.0; r];
    v[k - 1] = 1.0;
    v
}

/// A root of a continuous function with a sign change on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    assert!(fa * fb <= 0.0, "no sign change on [{a}, {b}]");
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Polynomial coefficients (lowest degree first) of `F1(y; 0)` for the
/// middle-of-three choice: `3 y^2 - 2 y^3 - (2 + alpha) y`.
pub fn mid3_shape(y: f64, alpha: f64) -> f64 {
    3.0 * y * y - 2.0 * y.powi(3) - (2.0 + alpha) * y
}
