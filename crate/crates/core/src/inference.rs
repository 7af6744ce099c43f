//! Likelihood evaluation, grid + simplex maximum likelihood and parametric
//! bootstrap intervals for `(theta, r)`.
//!
//! For a fixed radius the log-likelihood only depends on the data through
//! which points fell inside the past union and on the covered areas `A_k`.
//! [`SequenceTerms`] holds exactly that, so a whole theta column of the
//! likelihood surface costs one raster pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CoverageRaster;
use crate::model::{in_past_union, normalizer_from_area, ModelParams, PointSequence};
use crate::optim::NelderMead;
use crate::rng::{derive_seed, replicate_rng};
use crate::sampler::{simulate_with_rng, SimulationConfig};
use crate::stats::{quantile_linear, sort_floats};

/// Sufficient statistics of a sequence for one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTerms {
    pub radius: f64,
    pub window_area: f64,
    /// `inside[k - 1]` tells whether `x_{k+1}` lies in the union of the first `k` balls.
    pub inside: Vec<bool>,
    /// `covered[k - 1]` is the rasterized area of the union of the first `k` balls.
    pub covered: Vec<f64>,
}

impl SequenceTerms {
    pub fn compute(seq: &PointSequence, radius: f64, cell_size: f64) -> Result<Self> {
        if seq.len() < 2 {
            return Err(Error::Degenerate(format!(
                "the likelihood needs at least 2 points, got {}",
                seq.len()
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let window = *seq.window();
        let mut raster = CoverageRaster::new(window, cell_size)?;
        let points = seq.points();
        let n = points.len();
        let mut inside = Vec::with_capacity(n - 1);
        let mut covered = Vec::with_capacity(n - 1);
        for k in 1..n {
            raster.add_disc(points[k - 1], radius)?;
            covered.push(raster.covered_area());
            inside.push(in_past_union(&points[..k], points[k], radius));
        }
        Ok(Self {
            radius,
            window_area: window.area(),
            inside,
            covered,
        })
    }

    pub fn n_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn n_transitions(&self) -> usize {
        self.inside.len()
    }

    /// `sum_k log pi(x_{k+1}) - log alpha_k`, accumulated in sequence order.
    pub fn log_likelihood(&self, theta: f64) -> f64 {
        let (log_in, log_out) = (theta.ln(), (1.0 - theta).ln());
        self.inside
            .iter()
            .zip(&self.covered)
            .map(|(&inside, &area)| {
                let log_pi = if inside { log_in } else { log_out };
                log_pi - normalizer_from_area(theta, self.window_area, area).ln()
            })
            .sum()
    }
}

/// Log-likelihood of the transitions `x_1 -> ... -> x_n`; the first-point
/// term is not included.
pub fn log_likelihood(seq: &PointSequence, params: &ModelParams, cell_size: f64) -> Result<f64> {
    if seq.window() != params.window() {
        return Err(Error::InvalidParameter(
            "sequence and parameters use different windows".into(),
        ));
    }
    Ok(SequenceTerms::compute(seq, params.radius(), cell_size)?.log_likelihood(params.theta()))
}

/// Evenly spaced values `lo, lo + step, ...` not exceeding `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub theta_grid: GridSpec,
    /// Lower end of the radius grid; derived from the data when `None`.
    pub r_lower: Option<f64>,
    pub r_upper: f64,
    pub r_step: f64,
    /// Nelder-Mead polish from the best grid point.
    pub refine: bool,
    /// Raster cell size; the window default when `None`.
    pub cell_size: Option<f64>,
    pub bootstrap_replicates: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            theta_grid: GridSpec::new(0.025, 0.975, 0.05),
            r_lower: None,
            r_upper: 5.0,
            r_step: 0.1,
            refine: true,
            cell_size: None,
            bootstrap_replicates: 20,
            seed: 0,
        }
    }
}

impl FitConfig {
    /// Radius of the largest stem (max DBH in cm / 200, in meters) when the
    /// sequence carries marks, otherwise a thousandth of the shorter side.
    pub fn resolved_r_lower(&self, seq: &PointSequence) -> f64 {
        if let Some(r) = self.r_lower {
            return r;
        }
        match seq.marks() {
            Some(m) if !m.is_empty() => m.iter().copied().fold(f64::MIN, f64::max) / 200.0,
            _ => 1e-3 * seq.window().shorter_side(),
        }
    }

    pub fn resolved_cell_size(&self, seq: &PointSequence) -> f64 {
        self.cell_size
            .unwrap_or_else(|| seq.window().default_cell_size())
    }

    pub fn validate(&self, seq: &PointSequence) -> Result<()> {
        let t = &self.theta_grid;
        if !(t.lo > 0.0 && t.lo < t.hi && t.hi < 1.0 && t.step > 0.0) {
            return Err(Error::Config(format!(
                "theta grid needs 0 < lo < hi < 1 and step > 0, got ({}, {}, {})",
                t.lo, t.hi, t.step
            )));
        }
        let r_lower = self.resolved_r_lower(seq);
        if !(r_lower > 0.0 && r_lower < self.r_upper && self.r_step > 0.0) {
            return Err(Error::Config(format!(
                "radius grid needs 0 < r_lower < r_upper and step > 0, got ({r_lower}, {}, {})",
                self.r_upper, self.r_step
            )));
        }
        if let Some(h) = self.cell_size {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::Config(format!(
                    "cell size must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub theta: f64,
    pub r: f64,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub cell_size: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub grid_theta_hat: f64,
    pub grid_r_hat: f64,
    pub grid_max_loglik: f64,
    pub refine_iterations: usize,
    pub refine_converged: bool,
    /// Best `(theta, r, loglik)` after each simplex iteration.
    pub refine_trace: Vec<[f64; 3]>,
    /// Log-likelihood at the estimate on a raster with half the cell size.
    pub half_cell_loglik: f64,
    pub half_cell_delta: f64,
    /// Smallest absolute change of the log-likelihood between the best grid
    /// point and its grid neighbours.
    pub adjacent_grid_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: f64,
    pub r_hat: f64,
    pub max_loglik: f64,
    pub n_points: usize,
    pub surface: Vec<SurfacePoint>,
    pub theta_ci: Option<(f64, f64)>,
    pub r_ci: Option<(f64, f64)>,
    pub warnings: Vec<String>,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn params(&self, window: crate::geometry::Window) -> Result<ModelParams> {
        ModelParams::new(self.theta_hat, self.r_hat, window)
    }
}

/// Grid search over `(theta, r)` followed by an optional simplex polish.
pub fn fit(seq: &PointSequence, config: &FitConfig) -> Result<FitResult> {
    config.validate(seq)?;
    if seq.len() < 2 {
        return Err(Error::Estimation(format!(
            "need at least 2 points to fit, got {}",
            seq.len()
        )));
    }
    let h = config.resolved_cell_size(seq);
    let r_lower = config.resolved_r_lower(seq);
    let thetas = config.theta_grid.values();
    let radii = GridSpec::new(r_lower, config.r_upper, config.r_step).values();

    let columns: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&r| {
            let terms = SequenceTerms::compute(seq, r, h)?;
            Ok(thetas.iter().map(|&t| terms.log_likelihood(t)).collect())
        })
        .collect::<Result<_>>()?;

    // ties go to the lowest theta, then the lowest r
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for (ti, _) in thetas.iter().enumerate() {
        for (ri, col) in columns.iter().enumerate() {
            if col[ti] > best.2 {
                best = (ti, ri, col[ti]);
            }
        }
    }
    if !best.2.is_finite() {
        return Err(Error::Estimation(
            "log-likelihood is not finite anywhere on the grid".into(),
        ));
    }
    let (bt, br, grid_max) = best;

    let mut surface = Vec::with_capacity(thetas.len() * radii.len());
    for (ri, &r) in radii.iter().enumerate() {
        for (ti, &theta) in thetas.iter().enumerate() {
            surface.push(SurfacePoint {
                theta,
                r,
                loglik: columns[ri][ti],
            });
        }
    }

    let mut neighbours = Vec::new();
    if bt > 0 {
        neighbours.push(columns[br][bt - 1]);
    }
    if bt + 1 < thetas.len() {
        neighbours.push(columns[br][bt + 1]);
    }
    if br > 0 {
        neighbours.push(columns[br - 1][bt]);
    }
    if br + 1 < radii.len() {
        neighbours.push(columns[br + 1][bt]);
    }
    let adjacent_grid_delta = neighbours
        .iter()
        .map(|v| (grid_max - v).abs())
        .fold(f64::INFINITY, f64::min);

    let (mut theta_hat, mut r_hat, mut max_loglik) = (thetas[bt], radii[br], grid_max);
    let mut refine_iterations = 0;
    let mut refine_converged = false;
    let mut refine_trace = Vec::new();
    if config.refine {
        let span = config.r_upper - r_lower;
        let to_params = |x: &[f64; 2]| {
            let theta = x[0].clamp(1e-6, 1.0 - 1e-6);
            let r = (r_lower + x[1] * span).clamp(r_lower, config.r_upper);
            (theta, r)
        };
        let objective = |x: &[f64; 2]| {
            let (theta, r) = to_params(x);
            match SequenceTerms::compute(seq, r, h) {
                Ok(terms) => -terms.log_likelihood(theta),
                Err(_) => f64::INFINITY,
            }
        };
        let x0 = [theta_hat, (r_hat - r_lower) / span];
        let steps = [config.theta_grid.step, config.r_step / span];
        let res = NelderMead::default().minimize(objective, x0, steps);
        refine_iterations = res.iterations;
        refine_converged = res.converged;
        refine_trace = res
            .trace
            .iter()
            .map(|e| {
                let (t, r) = to_params(&e.x);
                [t, r, -e.value]
            })
            .collect();
        if -res.value > max_loglik {
            let (t, r) = to_params(&res.x);
            theta_hat = t;
            r_hat = r;
            max_loglik = -res.value;
        }
    }

    let half_cell_loglik = SequenceTerms::compute(seq, r_hat, h / 2.0)?.log_likelihood(theta_hat);
    let half_cell_delta = (half_cell_loglik - max_loglik).abs();
    let mut warnings = Vec::new();
    if adjacent_grid_delta.is_finite() && half_cell_delta >= adjacent_grid_delta {
        warnings.push(format!(
            "raster resolution: halving the cell size moves the maximum by {half_cell_delta:.3e}, \
             not less than the smallest adjacent grid change {adjacent_grid_delta:.3e}"
        ));
    }

    Ok(FitResult {
        theta_hat,
        r_hat,
        max_loglik,
        n_points: seq.len(),
        surface,
        theta_ci: None,
        r_ci: None,
        warnings,
        diagnostics: FitDiagnostics {
            cell_size: h,
            r_lower,
            r_upper: config.r_upper,
            grid_theta_hat: thetas[bt],
            grid_r_hat: radii[br],
            grid_max_loglik: grid_max,
            refine_iterations,
            refine_converged,
            refine_trace,
            half_cell_loglik,
            half_cell_delta,
            adjacent_grid_delta,
        },
    })
}

/// Maximizes the log-likelihood over theta for a fixed radius: grid scan
/// followed by a one-dimensional simplex polish. Returns `(theta, loglik)`.
pub fn fit_theta(seq: &PointSequence, radius: f64, config: &FitConfig) -> Result<(f64, f64)> {
    config.validate(seq)?;
    let terms = SequenceTerms::compute(seq, radius, config.resolved_cell_size(seq))?;
    let mut best = (0.0, f64::NEG_INFINITY);
    for t in config.theta_grid.values() {
        let l = terms.log_likelihood(t);
        if l > best.1 {
            best = (t, l);
        }
    }
    if config.refine {
        let nm = NelderMead {
            diameter_tol: 1e-7,
            ..Default::default()
        };
        let res = nm.minimize(
            |x: &[f64; 1]| -terms.log_likelihood(x[0].clamp(1e-9, 1.0 - 1e-9)),
            [best.0],
            [config.theta_grid.step],
        );
        if -res.value > best.1 {
            best = (res.x[0].clamp(1e-9, 1.0 - 1e-9), -res.value);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub theta_ci: (f64, f64),
    pub r_ci: (f64, f64),
    /// `(theta_hat, r_hat)` of each successful replicate, by replicate index.
    pub estimates: Vec<(f64, f64)>,
    pub failures: Vec<(usize, String)>,
    pub warnings: Vec<String>,
}

pub const MIN_BOOTSTRAP_SUCCESSES: usize = 10;

/// Percentile intervals from refits of sequences simulated under the fitted
/// parameters, with the observed first two points held fixed.
pub fn bootstrap_ci(
    seq: &PointSequence,
    fit: &FitResult,
    config: &FitConfig,
) -> Result<BootstrapResult> {
    let params = ModelParams::new(fit.theta_hat, fit.r_hat, *seq.window())?;
    let start = seq.points()[..seq.len().min(2)].to_vec();
    let mut sim = SimulationConfig::new(params, seq.len(), derive_seed(config.seed, "bootstrap"));
    sim.start_points = start;
    sim.validate()?;
    let refit_config = FitConfig {
        r_lower: Some(fit.diagnostics.r_lower),
        cell_size: Some(fit.diagnostics.cell_size),
        ..config.clone()
    };

    let outcomes: Vec<Result<(f64, f64)>> = (0..config.bootstrap_replicates)
        .into_par_iter()
        .map(|j| {
            let mut rng = replicate_rng(sim.seed, j as u64);
            let replicate = simulate_with_rng(&sim, &mut rng)?;
            let f = self::fit(&replicate, &refit_config)?;
            Ok((f.theta_hat, f.r_hat))
        })
        .collect();

    let mut estimates = Vec::new();
    let mut failures = Vec::new();
    for (j, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(e) => estimates.push(e),
            Err(e) => failures.push((j, e.to_string())),
        }
    }
    if estimates.len() < MIN_BOOTSTRAP_SUCCESSES {
        return Err(Error::Estimation(format!(
            "only {} of {} bootstrap replicates succeeded, need at least {MIN_BOOTSTRAP_SUCCESSES}",
            estimates.len(),
            config.bootstrap_replicates
        )));
    }
    let interval = |mut v: Vec<f64>| {
        sort_floats(&mut v);
        (quantile_linear(&v, 0.025), quantile_linear(&v, 0.975))
    };
    let theta_ci = interval(estimates.iter().map(|e| e.0).collect());
    let r_ci = interval(estimates.iter().map(|e| e.1).collect());

    let mut warnings = Vec::new();
    if !(theta_ci.0 <= fit.theta_hat && fit.theta_hat <= theta_ci.1) {
        warnings.push(format!(
            "small-sample bootstrap: theta interval ({:.4}, {:.4}) does not contain the estimate {:.4}",
            theta_ci.0, theta_ci.1, fit.theta_hat
        ));
    }
    if !(r_ci.0 <= fit.r_hat && fit.r_hat <= r_ci.1) {
        warnings.push(format!(
            "small-sample bootstrap: r interval ({:.4}, {:.4}) does not contain the estimate {:.4}",
            r_ci.0, r_ci.1, fit.r_hat
        ));
    }
    Ok(BootstrapResult {
        theta_ci,
        r_ci,
        estimates,
        failures,
        warnings,
    })
}

/// Runs [`fit`] and, when `bootstrap_replicates > 0`, [`bootstrap_ci`],
/// storing the intervals on the returned result.
pub fn fit_with_bootstrap(
    seq: &PointSequence,
    config: &FitConfig,
) -> Result<(FitResult, Option<BootstrapResult>)> {
    let mut result = fit(seq, config)?;
    if config.bootstrap_replicates == 0 {
        return Ok((result, None));
    }
    let boot = bootstrap_ci(seq, &result, config)?;
    result.theta_ci = Some(boot.theta_ci);
    result.r_ci = Some(boot.r_ci);
    result.warnings.extend(boot.warnings.iter().cloned());
    Ok((result, Some(boot)))
}
