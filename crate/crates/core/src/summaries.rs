//! Order-aware functional summaries and pointwise Monte-Carlo envelopes.
//!
//! Index conventions (1-based sequence positions):
//!
//! * lagged clustering and first contact start at index 2,
//! * proper zone starts at index 1 with value 1,
//! * ball coverage starts at index 1.
//!
//! Proper zone and coverage share a single incremental raster pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CoverageRaster;
use crate::model::{lagged_clustering, ModelParams, PointSequence};
use crate::rng::replicate_rng;
use crate::sampler::{simulate_with_rng, SimulationConfig};
use crate::stats::{band_rank, sort_floats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    LaggedClustering,
    FirstContact,
    ProperZone,
    BallCoverage,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [
        StatisticKind::LaggedClustering,
        StatisticKind::FirstContact,
        StatisticKind::ProperZone,
        StatisticKind::BallCoverage,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::LaggedClustering => "lagged_clustering",
            StatisticKind::FirstContact => "first_contact",
            StatisticKind::ProperZone => "proper_zone",
            StatisticKind::BallCoverage => "ball_coverage",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            StatisticKind::LaggedClustering => "Lagged clustering",
            StatisticKind::FirstContact => "First contact distance",
            StatisticKind::ProperZone => "Proper zone",
            StatisticKind::BallCoverage => "Ball union coverage",
        }
    }

    fn first_index(&self) -> usize {
        match self {
            StatisticKind::LaggedClustering | StatisticKind::FirstContact => 2,
            StatisticKind::ProperZone | StatisticKind::BallCoverage => 1,
        }
    }
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Parse(format!("unknown statistic '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub kind: StatisticKind,
    /// 1-based sequence positions.
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub cumulative: bool,
    /// Radius used, for the radius-dependent statistics.
    pub r_used: Option<f64>,
}

impl SummaryCurve {
    fn from_per_point(
        kind: StatisticKind,
        per_point: Vec<f64>,
        cumulative: bool,
        r_used: Option<f64>,
    ) -> Self {
        let first = kind.first_index();
        let index = (first..first + per_point.len()).collect();
        let values = if cumulative {
            per_point
                .iter()
                .scan(0.0, |acc, v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect()
        } else {
            per_point
        };
        Self {
            kind,
            index,
            values,
            cumulative,
            r_used,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-point values of all four statistics, computed in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PerPointSummaries {
    pub radius: f64,
    /// Indices 2..=n.
    pub lagged_clustering: Vec<f64>,
    /// Indices 2..=n.
    pub first_contact: Vec<f64>,
    /// Indices 1..=n.
    pub proper_zone: Vec<f64>,
    /// Indices 1..=n.
    pub ball_coverage: Vec<f64>,
}

impl PerPointSummaries {
    pub fn compute(seq: &PointSequence, radius: f64, cell_size: f64) -> Result<Self> {
        let window = *seq.window();
        let mut raster = CoverageRaster::new(window, cell_size)?;
        let points = seq.points();
        let n = points.len();
        let mut lagged = Vec::with_capacity(n.saturating_sub(1));
        let mut contact = Vec::with_capacity(n.saturating_sub(1));
        let mut zone = Vec::with_capacity(n);
        let mut coverage = Vec::with_capacity(n);
        for (k, &p) in points.iter().enumerate() {
            if k > 0 {
                let past = &points[..k];
                lagged.push(lagged_clustering(past, p, radius) as f64);
                contact.push(nearest_distance(past, p));
            }
            let update = raster.add_disc(p, radius)?;
            zone.push(if k == 0 || update.disc_area == 0.0 {
                1.0
            } else {
                update.delta_area / update.disc_area
            });
            coverage.push(raster.covered_area() / window.area());
        }
        Ok(Self {
            radius,
            lagged_clustering: lagged,
            first_contact: contact,
            proper_zone: zone,
            ball_coverage: coverage,
        })
    }

    pub fn curve(&self, kind: StatisticKind, cumulative: bool) -> SummaryCurve {
        let r = Some(self.radius);
        match kind {
            StatisticKind::LaggedClustering => {
                SummaryCurve::from_per_point(kind, self.lagged_clustering.clone(), cumulative, r)
            }
            StatisticKind::FirstContact => {
                SummaryCurve::from_per_point(kind, self.first_contact.clone(), cumulative, None)
            }
            StatisticKind::ProperZone => {
                SummaryCurve::from_per_point(kind, self.proper_zone.clone(), cumulative, r)
            }
            // coverage of the union is already cumulative by nature
            StatisticKind::BallCoverage => {
                SummaryCurve::from_per_point(kind, self.ball_coverage.clone(), false, r)
            }
        }
    }
}

fn nearest_distance(past: &[crate::geometry::Point], y: crate::geometry::Point) -> f64 {
    past.iter()
        .map(|p| p.distance_sq(y))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )))
    }
}

pub fn lagged_clustering_curve(
    seq: &PointSequence,
    r: f64,
    cumulative: bool,
) -> Result<SummaryCurve> {
    check_radius(r)?;
    let points = seq.points();
    let per_point = (1..points.len())
        .map(|k| lagged_clustering(&points[..k], points[k], r) as f64)
        .collect();
    Ok(SummaryCurve::from_per_point(
        StatisticKind::LaggedClustering,
        per_point,
        cumulative,
        Some(r),
    ))
}

pub fn first_contact_curve(seq: &PointSequence, cumulative: bool) -> Result<SummaryCurve> {
    if seq.len() < 2 {
        return Err(Error::Degenerate(
            "first contact distances need at least 2 points".into(),
        ));
    }
    let points = seq.points();
    let per_point = (1..points.len())
        .map(|k| nearest_distance(&points[..k], points[k]))
        .collect();
    Ok(SummaryCurve::from_per_point(
        StatisticKind::FirstContact,
        per_point,
        cumulative,
        None,
    ))
}

pub fn proper_zone_curve(
    seq: &PointSequence,
    r: f64,
    cell_size: f64,
    cumulative: bool,
) -> Result<SummaryCurve> {
    check_radius(r)?;
    Ok(PerPointSummaries::compute(seq, r, cell_size)?.curve(StatisticKind::ProperZone, cumulative))
}

pub fn ball_coverage_curve(seq: &PointSequence, r: f64, cell_size: f64) -> Result<SummaryCurve> {
    check_radius(r)?;
    Ok(PerPointSummaries::compute(seq, r, cell_size)?.curve(StatisticKind::BallCoverage, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    pub replicates: usize,
    /// Nominal pointwise coverage; 1.0 gives min/max bands.
    pub level: f64,
    pub seed: u64,
    pub cell_size: Option<f64>,
    pub cumulative: bool,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            replicates: 999,
            level: 0.95,
            seed: 0,
            cell_size: None,
            cumulative: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBand {
    pub kind: StatisticKind,
    pub index: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub n_replicates: usize,
    pub seed: u64,
    pub cell_size: f64,
    pub data_curve: SummaryCurve,
    /// Per index: the data curve lies outside the band.
    pub outside: Vec<bool>,
    pub n_outside: usize,
}

impl EnvelopeBand {
    pub fn inside_fraction(&self) -> f64 {
        1.0 - self.n_outside as f64 / self.outside.len().max(1) as f64
    }
}

/// Pointwise band for one statistic.
pub fn envelope(
    data: &PointSequence,
    params: &ModelParams,
    kind: StatisticKind,
    config: &EnvelopeConfig,
) -> Result<EnvelopeBand> {
    Ok(envelopes(data, params, &[kind], config)?.remove(0))
}

/// Pointwise bands for several statistics from one set of simulations.
///
/// Replicates are simulated from `params` with the data's first two points
/// fixed; replicate `j` uses stream `j` of `config.seed`.
pub fn envelopes(
    data: &PointSequence,
    params: &ModelParams,
    kinds: &[StatisticKind],
    config: &EnvelopeConfig,
) -> Result<Vec<EnvelopeBand>> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("no statistics requested".into()));
    }
    if !(config.level > 0.0 && config.level <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0, 1], got {}",
            config.level
        )));
    }
    let alpha = (1.0 - config.level) / 2.0;
    if config.replicates == 0
        || (config.level < 1.0
            && (config.replicates as f64) < 1.0 / (1.0 - config.level) - 1.0 - 1e-9)
    {
        return Err(Error::InvalidParameter(format!(
            "{} replicates are too few for a {} pointwise band",
            config.replicates, config.level
        )));
    }
    if data.window() != params.window() {
        return Err(Error::InvalidParameter(
            "data and parameters use different windows".into(),
        ));
    }
    let h = config
        .cell_size
        .unwrap_or_else(|| data.window().default_cell_size());
    let r = params.radius();
    let data_summaries = PerPointSummaries::compute(data, r, h)?;

    let mut sim = SimulationConfig::new(*params, data.len(), config.seed);
    sim.start_points = data.points()[..data.len().min(2)].to_vec();
    sim.validate()?;

    let replicate_curves: Vec<Vec<Vec<f64>>> = (0..config.replicates)
        .into_par_iter()
        .map(|j| {
            let mut rng = replicate_rng(config.seed, j as u64);
            let seq = simulate_with_rng(&sim, &mut rng).map_err(|e| Error::Replicate {
                index: j,
                source: Box::new(e),
            })?;
            let s = PerPointSummaries::compute(&seq, r, h)?;
            Ok(kinds
                .iter()
                .map(|&k| s.curve(k, config.cumulative).values)
                .collect())
        })
        .collect::<Result<_>>()?;

    let m = config.replicates;
    let rank = band_rank(alpha, m);
    kinds
        .iter()
        .enumerate()
        .map(|(ki, &kind)| {
            let data_curve = data_summaries.curve(kind, config.cumulative);
            let len = data_curve.len();
            let mut lower = Vec::with_capacity(len);
            let mut upper = Vec::with_capacity(len);
            let mut column = vec![0.0; m];
            for i in 0..len {
                for (slot, rep) in column.iter_mut().zip(&replicate_curves) {
                    *slot = rep[ki][i];
                }
                sort_floats(&mut column);
                lower.push(column[rank - 1]);
                upper.push(column[m - rank]);
            }
            let outside: Vec<bool> = data_curve
                .values
                .iter()
                .zip(lower.iter().zip(&upper))
                .map(|(v, (lo, hi))| v < lo || v > hi)
                .collect();
            let n_outside = outside.iter().filter(|&&b| b).count();
            Ok(EnvelopeBand {
                kind,
                index: data_curve.index.clone(),
                lower,
                upper,
                level: config.level,
                n_replicates: m,
                seed: config.seed,
                cell_size: h,
                data_curve,
                outside,
                n_outside,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Window};
    use std::f64::consts::PI;

    fn seq(points: &[(f64, f64)], w: Window) -> PointSequence {
        PointSequence::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect(), w).unwrap()
    }

    #[test]
    fn far_apart_points_have_zero_lagged_clustering() {
        let s = seq(&[(0.1, 0.1), (0.9, 0.1), (0.5, 0.9)], Window::unit());
        let c = lagged_clustering_curve(&s, 0.2, false).unwrap();
        assert_eq!(c.values, vec![0.0, 0.0]);
        assert_eq!(c.index, vec![2, 3]);
    }

    #[test]
    fn collinear_cumulative_lagged_clustering() {
        let s = seq(
            &[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)],
            Window::new(0.0, -1.0, 2.0, 1.0).unwrap(),
        );
        let c = lagged_clustering_curve(&s, 0.6, true).unwrap();
        assert_eq!(c.values, vec![1.0, 2.0]);
    }

    #[test]
    fn first_contact_examples() {
        let s = seq(&[(0.1, 0.2), (0.4, 0.6)], Window::unit());
        let c = first_contact_curve(&s, false).unwrap();
        assert_eq!(c.values.len(), 1);
        assert!((c.values[0] - 0.5).abs() < 1e-15);
        let s = seq(&[(0.5, 0.5), (0.9, 0.9), (0.5 + 1e-9, 0.5)], Window::unit());
        let c = first_contact_curve(&s, false).unwrap();
        assert!(c.values[1] < 1e-8);
        let one = seq(&[(0.5, 0.5)], Window::unit());
        assert!(first_contact_curve(&one, false).is_err());
    }

    #[test]
    fn proper_zone_first_point_and_near_coincidence() {
        let s = seq(&[(0.5, 0.5), (0.5 + 1e-7, 0.5)], Window::unit());
        let c = proper_zone_curve(&s, 0.1, 0.005, false).unwrap();
        assert_eq!(c.values[0], 1.0);
        assert!(c.values[1] < 0.01);
    }

    #[test]
    fn proper_zone_matches_lens_area() {
        let r = 0.1;
        let d = r;
        let s = seq(&[(0.45, 0.5), (0.45 + d, 0.5)], Window::unit());
        let c = proper_zone_curve(&s, r, r / 100.0, false).unwrap();
        let lens = 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt();
        let expected = 1.0 - lens / (PI * r * r);
        assert!(
            (c.values[1] - expected).abs() / expected < 0.01,
            "{} vs {expected}",
            c.values[1]
        );
    }

    #[test]
    fn ball_coverage_of_one_disc() {
        let w = Window::square(25.0).unwrap();
        let s = seq(&[(12.0, 12.0)], w);
        let c = ball_coverage_curve(&s, 2.0, 0.125).unwrap();
        let expected = 4.0 * PI / 625.0;
        assert!((c.values[0] - expected).abs() / expected < 0.01);
    }

    #[test]
    fn cumulative_is_prefix_sum() {
        let w = Window::unit();
        let p = ModelParams::new(0.7, 0.15, w).unwrap();
        let s = crate::sampler::simulate(&SimulationConfig::new(p, 40, 3)).unwrap();
        let all = PerPointSummaries::compute(&s, 0.15, 0.01).unwrap();
        for kind in [
            StatisticKind::LaggedClustering,
            StatisticKind::FirstContact,
            StatisticKind::ProperZone,
        ] {
            let per = all.curve(kind, false).values;
            let cum = all.curve(kind, true).values;
            let mut acc = 0.0;
            for (a, b) in per.iter().zip(&cum) {
                acc += a;
                assert_eq!(acc, *b);
            }
        }
        assert_eq!(
            all.curve(StatisticKind::LaggedClustering, true),
            lagged_clustering_curve(&s, 0.15, true).unwrap()
        );
        assert_eq!(
            all.curve(StatisticKind::FirstContact, true),
            first_contact_curve(&s, true).unwrap()
        );
    }

    #[test]
    fn lagged_positive_iff_contact_within_radius() {
        let w = Window::unit();
        let p = ModelParams::new(0.6, 0.12, w).unwrap();
        let s = crate::sampler::simulate(&SimulationConfig::new(p, 80, 8)).unwrap();
        let lag = lagged_clustering_curve(&s, 0.12, false).unwrap();
        let fc = first_contact_curve(&s, false).unwrap();
        for (l, d) in lag.values.iter().zip(&fc.values) {
            assert_eq!(*l >= 1.0, *d <= 0.12);
        }
    }

    #[test]
    fn statistic_names_roundtrip() {
        for k in StatisticKind::ALL {
            assert_eq!(k.name().parse::<StatisticKind>().unwrap(), k);
        }
        assert_eq!(
            "ball-coverage".parse::<StatisticKind>().unwrap(),
            StatisticKind::BallCoverage
        );
        assert!("ripley".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn min_max_band_contains_all_replicates() {
        let w = Window::unit();
        let p = ModelParams::new(0.3, 0.1, w).unwrap();
        let data = crate::sampler::simulate(&SimulationConfig::new(p, 30, 1)).unwrap();
        let cfg = EnvelopeConfig {
            replicates: 25,
            level: 1.0,
            seed: 4,
            cell_size: Some(0.01),
            cumulative: true,
        };
        let band = envelope(&data, &p, StatisticKind::FirstContact, &cfg).unwrap();

        let mut sim = SimulationConfig::new(p, 30, 4);
        sim.start_points = data.points()[..2].to_vec();
        for j in 0..25 {
            let s = simulate_with_rng(&sim, &mut replicate_rng(4, j)).unwrap();
            let c = first_contact_curve(&s, true).unwrap();
            for (i, v) in c.values.iter().enumerate() {
                assert!(band.lower[i] <= *v && *v <= band.upper[i]);
            }
        }
        assert!(band.lower.iter().zip(&band.upper).all(|(a, b)| a <= b));
    }

    #[test]
    fn envelope_rejects_too_few_replicates() {
        let w = Window::unit();
        let p = ModelParams::new(0.3, 0.1, w).unwrap();
        let data = crate::sampler::simulate(&SimulationConfig::new(p, 10, 1)).unwrap();
        let cfg = EnvelopeConfig {
            replicates: 10,
            ..Default::default()
        };
        assert!(envelope(&data, &p, StatisticKind::BallCoverage, &cfg).is_err());
        let cfg = EnvelopeConfig {
            replicates: 19,
            cell_size: Some(0.02),
            ..Default::default()
        };
        assert!(envelope(&data, &p, StatisticKind::BallCoverage, &cfg).is_ok());
    }
}
