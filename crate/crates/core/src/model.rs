//! The self-interactive sequential model.
//!
//! Given the first `k` points, the next point has density proportional to
//! `theta` inside the union of the closed balls `B(x_i, r)` and `1 - theta`
//! outside it. The normalizing constant is therefore affine in the covered
//! area `A_k`: `alpha_k = theta * A_k + (1 - theta) * (|W| - A_k)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CoverageRaster, Point, Window};

/// Self-interaction parameters on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    theta: f64,
    radius: f64,
    window: Window,
}

impl ModelParams {
    /// `theta` must lie strictly inside `(0, 1)` and `radius` must be positive.
    pub fn new(theta: f64, radius: f64, window: Window) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in the open interval (0, 1), got {theta}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            theta,
            radius,
            window,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Largest value of the self-interaction function.
    pub fn envelope(&self) -> f64 {
        self.theta.max(1.0 - self.theta)
    }
}

/// An ordered sequence of distinct points in a window, with optional marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSequence {
    points: Vec<Point>,
    marks: Option<Vec<f64>>,
    window: Window,
}

impl PointSequence {
    pub fn new(points: Vec<Point>, window: Window) -> Result<Self> {
        Self::with_marks(points, None, window)
    }

    pub fn with_marks(points: Vec<Point>, marks: Option<Vec<f64>>, window: Window) -> Result<Self> {
        if let Some(m) = &marks {
            if m.len() != points.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} marks for {} points",
                    m.len(),
                    points.len()
                )));
            }
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "point {} is not finite",
                    i + 1
                )));
            }
            window.check_contains(*p)?;
            if !seen.insert(point_key(*p)) {
                return Err(Error::Degenerate(format!(
                    "point {} at ({}, {}) repeats an earlier point",
                    i + 1,
                    p.x,
                    p.y
                )));
            }
        }
        Ok(Self {
            points,
            marks,
            window,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first `k` points.
    pub fn prefix(&self, k: usize) -> &[Point] {
        &self.points[..k]
    }

    /// Same points in a new order; `order[i]` is the source index of entry `i`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.points.len() {
            return Err(Error::InvalidParameter(
                "permutation length mismatch".into(),
            ));
        }
        let points = order.iter().map(|&i| self.points[i]).collect();
        let marks = self
            .marks
            .as_ref()
            .map(|m| order.iter().map(|&i| m[i]).collect());
        Self::with_marks(points, marks, self.window)
    }
}

fn point_key(p: Point) -> (u64, u64) {
    // normalise -0.0 so that it collides with 0.0
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

/// Number of past points within (closed) distance `radius` of `y`.
pub fn lagged_clustering(past: &[Point], y: Point, radius: f64) -> usize {
    let r2 = radius * radius;
    past.iter().filter(|p| p.distance_sq(y) <= r2).count()
}

/// True iff `y` lies in at least one closed past ball.
pub fn in_past_union(past: &[Point], y: Point, radius: f64) -> bool {
    let r2 = radius * radius;
    past.iter().any(|p| p.distance_sq(y) <= r2)
}

/// `theta` when at least one past ball contains the point, `1 - theta` otherwise.
pub fn self_interaction(count: usize, params: &ModelParams) -> f64 {
    if count >= 1 {
        params.theta
    } else {
        1.0 - params.theta
    }
}

/// `theta * A + (1 - theta) * (|W| - A)`, written so that `theta = 0.5`
/// yields exactly `|W| / 2` whatever the covered area.
pub fn normalizer_from_area(theta: f64, window_area: f64, covered_area: f64) -> f64 {
    (1.0 - theta) * window_area + (2.0 * theta - 1.0) * covered_area
}

/// Normalizing constant of the next conditional density. The raster must
/// hold the union of the past balls of radius `params.radius()`.
pub fn normalizer(params: &ModelParams, raster: &CoverageRaster) -> f64 {
    normalizer_from_area(params.theta, params.window.area(), raster.covered_area())
}

/// Log conditional density of `y` given `past`, with the normalizer taken
/// from `raster` (which must hold the past union).
pub fn conditional_log_density(
    past: &[Point],
    y: Point,
    params: &ModelParams,
    raster: &CoverageRaster,
) -> Result<f64> {
    params.window.check_contains(y)?;
    if past.is_empty() {
        return first_point_log_density(y, &params.window);
    }
    let s = lagged_clustering(past, y, params.radius);
    Ok(self_interaction(s, params).ln() - normalizer(params, raster).ln())
}

/// Uniform density of the first point.
pub fn first_point_log_density(x1: Point, window: &Window) -> Result<f64> {
    window.check_contains(x1)?;
    Ok(-window.area().ln())
}

/// Full sequential log-density, including the uniform first-point term.
pub fn sequential_log_density(
    seq: &PointSequence,
    params: &ModelParams,
    cell_size: f64,
) -> Result<f64> {
    if seq.is_empty() {
        return Ok(0.0);
    }
    let first = first_point_log_density(seq.points()[0], seq.window())?;
    if seq.len() == 1 {
        return Ok(first);
    }
    Ok(first + crate::inference::log_likelihood(seq, params, cell_size)?)
}

/// One constant piece of the self-interaction function viewed as a function
/// of distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiSegment {
    pub from: f64,
    /// `None` means unbounded.
    pub to: Option<f64>,
    pub value: f64,
}

/// Piecewise-constant interaction profile: zero below the stem size, `theta`
/// up to the fitted radius, `1 - theta` beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiOfR {
    /// Largest mark divided by 200, in meters when marks are DBH in cm.
    pub stem_radius: f64,
    /// Largest mark divided by 100: the knot printed in published tables.
    pub printed_knot: f64,
    pub radius: f64,
    pub segments: Vec<PiSegment>,
}

pub fn pi_of_r_report(params: &ModelParams, mark_max: f64) -> Result<PiOfR> {
    if !(mark_max.is_finite() && mark_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "maximum mark must be positive, got {mark_max}"
        )));
    }
    let stem_radius = mark_max / 200.0;
    let r = params.radius;
    Ok(PiOfR {
        stem_radius,
        printed_knot: mark_max / 100.0,
        radius: r,
        segments: vec![
            PiSegment {
                from: 0.0,
                to: Some(stem_radius),
                value: 0.0,
            },
            PiSegment {
                from: stem_radius,
                to: Some(r),
                value: params.theta,
            },
            PiSegment {
                from: r,
                to: None,
                value: 1.0 - params.theta,
            },
        ],
    })
}
