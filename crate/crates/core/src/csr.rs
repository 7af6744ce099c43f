//! Complete-spatial-randomness test with the centered L-function and an
//! extreme rank length (ERL) global envelope.
//!
//! No edge correction is applied to the K-function estimator.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::rng::replicate_rng;
use crate::sampler::uniform_point;

pub const DEFAULT_R_STEPS: usize = 513;

/// `steps` equally spaced distances from 0 to `r_max` inclusive.
pub fn r_grid(r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(r_max > 0.0 && r_max.is_finite()) || steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "r grid needs r_max > 0 and at least 2 points, got ({r_max}, {steps})"
        )));
    }
    Ok((0..steps)
        .map(|i| r_max * i as f64 / (steps - 1) as f64)
        .collect())
}

fn check_inputs(points: &[Point], window: &Window, r_grid: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!(
            "K-function needs at least 2 points, got {}",
            points.len()
        )));
    }
    let half = window.shorter_side() / 2.0;
    if let Some(&r_max) = r_grid.iter().max_by(|a, b| a.total_cmp(b)) {
        if r_max > half * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "largest distance {r_max} exceeds half the shorter window side {half}"
            )));
        }
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidParameter(
            "distances must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Uncorrected Ripley's K: `|W| / (n (n - 1)) * #{ordered pairs within r}`.
pub fn k_estimate(points: &[Point], window: &Window, r_grid: &[f64]) -> Result<Vec<f64>> {
    check_inputs(points, window, r_grid)?;
    Ok(k_values(points, window, r_grid))
}

fn k_values(points: &[Point], window: &Window, r_grid: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut d2 = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d2.push(points[i].distance_sq(points[j]));
        }
    }
    d2.sort_by(|a, b| a.total_cmp(b));
    let scale = window.area() / (n as f64 * (n - 1) as f64);
    r_grid
        .iter()
        .map(|&r| {
            let pairs = d2.partition_point(|&v| v <= r * r);
            scale * 2.0 * pairs as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LCurve {
    pub r_grid: Vec<f64>,
    /// `L(r) - r` at each grid distance.
    pub values: Vec<f64>,
    pub n_points: usize,
    pub window: Window,
}

/// `sqrt(K(r) / pi) - r`.
pub fn centered_l(points: &[Point], window: &Window, r_grid: &[f64]) -> Result<LCurve> {
    let k = k_estimate(points, window, r_grid)?;
    Ok(LCurve {
        r_grid: r_grid.to_vec(),
        values: centered_from_k(&k, r_grid),
        n_points: points.len(),
        window: *window,
    })
}

pub fn centered_from_k(k: &[f64], r_grid: &[f64]) -> Vec<f64> {
    k.iter()
        .zip(r_grid)
        .map(|(k, r)| (k / PI).sqrt() - r)
        .collect()
}

/// Pointwise two-sided extreme ranks: for curve `i` at grid point `j`, the
/// smaller of its rank from below and from above among all curves (ties share
/// the larger, less extreme rank). Returns one sorted rank vector per curve.
pub fn erl_rank_vectors(curves: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = curves.len();
    if n == 0 {
        return Vec::new();
    }
    let m = curves[0].len();
    let mut ranks = vec![Vec::with_capacity(m); n];
    let mut column: Vec<f64> = vec![0.0; n];
    for j in 0..m {
        for (slot, c) in column.iter_mut().zip(curves) {
            *slot = c[j];
        }
        let mut sorted = column.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        for (i, &v) in column.iter().enumerate() {
            let below = sorted.partition_point(|&x| x.total_cmp(&v) != Ordering::Greater);
            let above = n - sorted.partition_point(|&x| x.total_cmp(&v) == Ordering::Less);
            ranks[i].push(below.min(above));
        }
    }
    for r in &mut ranks {
        r.sort_unstable();
    }
    ranks
}

/// Lexicographic comparison of sorted rank vectors: `Less` means more extreme.
pub fn erl_compare(a: &[usize], b: &[usize]) -> Ordering {
    a.cmp(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnvelopeResult {
    pub data_curve: LCurve,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Pointwise mean of the simulated curves.
    pub central: Vec<f64>,
    pub p_value: f64,
    pub n_sim: usize,
    /// Significance level of the band.
    pub alpha: f64,
    pub seed: u64,
    pub ordering: String,
    /// Simulated curves whose rank vector equals the data's.
    pub ties_with_data: usize,
}

impl GlobalEnvelopeResult {
    pub fn rejects(&self) -> bool {
        self.p_value <= self.alpha
    }
}

/// ERL test on precomputed curves; `curves[0]` is the data curve.
/// Returns `(p_value, lower, upper, ties_with_data)`.
pub fn erl_test_from_curves(
    curves: &[Vec<f64>],
    alpha: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>, usize)> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter(
            "need the data curve and at least one simulation".into(),
        ));
    }
    let m = curves[0].len();
    if curves.iter().any(|c| c.len() != m) {
        return Err(Error::InvalidParameter(
            "curves have different lengths".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let ranks = erl_rank_vectors(curves);
    let total = curves.len();
    let data = &ranks[0];
    let mut at_least_as_extreme = 0;
    let mut ties = 0;
    for r in &ranks[1..] {
        match erl_compare(r, data) {
            Ordering::Less => at_least_as_extreme += 1,
            Ordering::Equal => {
                at_least_as_extreme += 1;
                ties += 1;
            }
            Ordering::Greater => {}
        }
    }
    let p_value = (1 + at_least_as_extreme) as f64 / total as f64;

    // order by extremeness, ties by curve index, and keep the central part
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| erl_compare(&ranks[a], &ranks[b]).then(a.cmp(&b)));
    let dropped = ((alpha * total as f64) + 1e-9).floor() as usize;
    let central = &order[dropped.min(total - 1)..];
    let mut lower = vec![f64::INFINITY; m];
    let mut upper = vec![f64::NEG_INFINITY; m];
    for &i in central {
        for j in 0..m {
            lower[j] = lower[j].min(curves[i][j]);
            upper[j] = upper[j].max(curves[i][j]);
        }
    }
    Ok((p_value, lower, upper, ties))
}

/// Global envelope test of CSR: `n_sim` binomial patterns with the observed
/// number of points, centered L for all curves, ERL ranking.
pub fn erl_global_test(
    points: &[Point],
    window: &Window,
    n_sim: usize,
    r_grid: &[f64],
    alpha: f64,
    seed: u64,
) -> Result<GlobalEnvelopeResult> {
    if n_sim < 99 {
        return Err(Error::InvalidParameter(format!(
            "need at least 99 simulations, got {n_sim}"
        )));
    }
    let data_curve = centered_l(points, window, r_grid)?;
    let n = points.len();
    let sims: Vec<Vec<f64>> = (0..n_sim)
        .into_par_iter()
        .map(|j| {
            let mut rng = replicate_rng(seed, j as u64);
            let pattern: Vec<Point> = (0..n).map(|_| uniform_point(window, &mut rng)).collect();
            centered_from_k(&k_values(&pattern, window, r_grid), r_grid)
        })
        .collect();
    let central: Vec<f64> = (0..r_grid.len())
        .map(|j| sims.iter().map(|c| c[j]).sum::<f64>() / n_sim as f64)
        .collect();
    let mut curves = Vec::with_capacity(n_sim + 1);
    curves.push(data_curve.values.clone());
    curves.extend(sims);
    let (p_value, lower, upper, ties) = erl_test_from_curves(&curves, alpha)?;
    Ok(GlobalEnvelopeResult {
        data_curve,
        lower,
        upper,
        central,
        p_value,
        n_sim,
        alpha,
        seed,
        ordering: "erl".into(),
        ties_with_data: ties,
    })
}
