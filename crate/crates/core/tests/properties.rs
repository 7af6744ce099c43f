mod common;

use common::golden_section_max;
use proptest::prelude::*;
use sspp::csr::{erl_compare, erl_rank_vectors, erl_test_from_curves, k_estimate, r_grid};
use sspp::inference::{fit_theta, SequenceTerms};
use sspp::model::{lagged_clustering, normalizer};
use sspp::summaries::{PerPointSummaries, StatisticKind};
use sspp::{
    log_likelihood, simulate, CoverageRaster, FitConfig, ModelParams, Point, PointSequence,
    SimulationConfig, Window,
};

fn window_strategy() -> impl Strategy<Value = Window> {
    (-5.0..5.0f64, -5.0..5.0f64, 0.5..4.0f64, 0.5..4.0f64)
        .prop_map(|(x, y, w, h)| Window::new(x, y, x + w, y + h).unwrap())
}

fn points_in(window: Window, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), n).prop_map(move |v| {
        v.into_iter()
            .map(|(u, t)| {
                Point::new(
                    window.xmin() + u * window.width(),
                    window.ymin() + t * window.height(),
                )
            })
            .collect()
    })
}

fn scene() -> impl Strategy<Value = (Window, Vec<Point>)> {
    window_strategy().prop_flat_map(|w| (Just(w), points_in(w, 2..25)))
}

fn distinct(points: &[Point]) -> bool {
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .all(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn covered_area_is_monotone_and_bounded((w, pts) in scene(), rf in 0.01..0.5f64) {
        let r = rf * w.shorter_side();
        let mut raster = CoverageRaster::with_default_cells(w);
        let mut last = 0.0;
        for p in &pts {
            let u = raster.add_disc(*p, r).unwrap();
            prop_assert!(u.delta_area >= 0.0);
            prop_assert!(raster.covered_area() >= last);
            prop_assert!(raster.covered_area() <= w.area() * (1.0 + 1e-12));
            last = raster.covered_area();
        }
    }

    #[test]
    fn covered_area_ignores_insertion_order((w, pts) in scene(), rf in 0.01..0.5f64, shift in 0usize..25) {
        let r = rf * w.shorter_side();
        let mut forward = CoverageRaster::with_default_cells(w);
        for p in &pts {
            forward.add_disc(*p, r).unwrap();
        }
        let mut rotated = CoverageRaster::with_default_cells(w);
        let k = shift % pts.len();
        for p in pts[k..].iter().chain(&pts[..k]).rev() {
            rotated.add_disc(*p, r).unwrap();
        }
        prop_assert_eq!(forward.covered_area().to_bits(), rotated.covered_area().to_bits());
        prop_assert_eq!(forward.covered_count(), rotated.covered_count());
    }

    #[test]
    fn half_theta_loglik_is_order_free((w, pts) in scene(), rf in 0.01..0.5f64, shift in 1usize..25) {
        prop_assume!(distinct(&pts));
        let r = rf * w.shorter_side();
        let params = ModelParams::new(0.5, r, w).unwrap();
        let seq = PointSequence::new(pts.clone(), w).unwrap();
        let k = shift % pts.len();
        let mut rotated: Vec<Point> = pts[k..].iter().chain(&pts[..k]).copied().collect();
        rotated.reverse();
        let other = PointSequence::new(rotated, w).unwrap();
        let h = w.default_cell_size();
        let a = log_likelihood(&seq, &params, h).unwrap();
        let b = log_likelihood(&other, &params, h).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        let expected = -((pts.len() - 1) as f64) * w.area().ln();
        prop_assert!((a - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn normalizer_stays_between_envelope_bounds((w, pts) in scene(), rf in 0.01..0.5f64, theta in 0.01..0.99f64) {
        let r = rf * w.shorter_side();
        let params = ModelParams::new(theta, r, w).unwrap();
        let mut raster = CoverageRaster::with_default_cells(w);
        for p in &pts {
            raster.add_disc(*p, r).unwrap();
            let a = normalizer(&params, &raster);
            let lo = theta.min(1.0 - theta) * w.area();
            let hi = theta.max(1.0 - theta) * w.area();
            prop_assert!(a >= lo * (1.0 - 1e-12) && a <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lagged_clustering_is_monotone_in_radius((w, pts) in scene(), r1 in 0.0..2.0f64, dr in 0.0..2.0f64) {
        let (past, y) = pts.split_at(pts.len() - 1);
        prop_assert!(lagged_clustering(past, y[0], r1) <= lagged_clustering(past, y[0], r1 + dr));
        let _ = w;
    }

    #[test]
    fn marks_do_not_change_the_likelihood((w, pts) in scene(), theta in 0.05..0.95f64, rf in 0.02..0.3f64) {
        prop_assume!(distinct(&pts));
        let r = rf * w.shorter_side();
        let params = ModelParams::new(theta, r, w).unwrap();
        let plain = PointSequence::new(pts.clone(), w).unwrap();
        let marks: Vec<f64> = (0..pts.len()).map(|i| 5.0 + i as f64).collect();
        let marked = PointSequence::with_marks(pts.clone(), Some(marks), w).unwrap();
        let h = w.default_cell_size();
        prop_assert_eq!(
            log_likelihood(&plain, &params, h).unwrap().to_bits(),
            log_likelihood(&marked, &params, h).unwrap().to_bits()
        );
    }

    #[test]
    fn summary_curve_invariants((w, pts) in scene(), rf in 0.02..0.3f64, grow in 1.0..2.0f64) {
        prop_assume!(distinct(&pts));
        let r = rf * w.shorter_side();
        let seq = PointSequence::new(pts, w).unwrap();
        let h = w.default_cell_size();
        let s = PerPointSummaries::compute(&seq, r, h).unwrap();
        let wide = PerPointSummaries::compute(&seq, r * grow, h).unwrap();
        for k in 0..s.ball_coverage.len() {
            if k > 0 {
                prop_assert!(s.ball_coverage[k] >= s.ball_coverage[k - 1]);
            }
            prop_assert!(wide.ball_coverage[k] >= s.ball_coverage[k]);
            prop_assert!((0.0..=1.0).contains(&s.proper_zone[k]));
        }
        for (lag, contact) in s.lagged_clustering.iter().zip(&s.first_contact) {
            prop_assert_eq!(*lag >= 1.0, *contact <= r);
        }
        for kind in StatisticKind::ALL {
            let per = s.curve(kind, false).values;
            let cum = s.curve(kind, true).values;
            if kind == StatisticKind::BallCoverage {
                prop_assert_eq!(per, cum);
            } else {
                let mut acc = 0.0;
                for (p, c) in per.iter().zip(&cum) {
                    acc += p;
                    prop_assert_eq!(acc.to_bits(), c.to_bits());
                }
            }
        }
    }

    #[test]
    fn k_function_is_non_decreasing((w, pts) in scene()) {
        let grid = r_grid(w.shorter_side() / 2.0, 65).unwrap();
        let k = k_estimate(&pts, &w, &grid).unwrap();
        prop_assert_eq!(k[0], 0.0);
        prop_assert!(k.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn erl_p_value_survives_monotone_rescaling_and_grid_permutation(
        curves in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 12), 20..40),
        scale in 0.1..10.0f64,
        offset in -5.0..5.0f64,
        shift in 1usize..12,
    ) {
        let (p, _, _, ties) = erl_test_from_curves(&curves, 0.05).unwrap();
        let rescaled: Vec<Vec<f64>> = curves.iter().map(|c| c.iter().map(|v| (scale * v + offset).exp()).collect()).collect();
        let (p2, _, _, ties2) = erl_test_from_curves(&rescaled, 0.05).unwrap();
        prop_assert_eq!(p, p2);
        prop_assert_eq!(ties, ties2);
        let permuted: Vec<Vec<f64>> = curves.iter().map(|c| {
            let mut c = c.clone();
            c.rotate_left(shift);
            c
        }).collect();
        prop_assert_eq!(erl_rank_vectors(&curves), erl_rank_vectors(&permuted));
        let n_sim = curves.len() - 1;
        let scaled = p * (n_sim + 1) as f64;
        prop_assert!((scaled - scaled.round()).abs() < 1e-9);
    }

    #[test]
    fn erl_ordering_is_a_total_preorder(curves in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 6), 3..15)) {
        use std::cmp::Ordering;
        let ranks = erl_rank_vectors(&curves);
        for a in &ranks {
            prop_assert_eq!(erl_compare(a, a), Ordering::Equal);
            for b in &ranks {
                prop_assert_eq!(erl_compare(a, b), erl_compare(b, a).reverse());
                for c in &ranks {
                    if erl_compare(a, b) != Ordering::Greater && erl_compare(b, c) != Ordering::Greater {
                        prop_assert_ne!(erl_compare(a, c), Ordering::Greater);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta_profile_matches_golden_section(theta in 0.1..0.9f64, rf in 0.05..0.2f64, seed in 0u64..1000) {
        let w = Window::unit();
        let r = rf;
        let seq = simulate(&SimulationConfig::new(ModelParams::new(theta, r, w).unwrap(), 60, seed)).unwrap();
        let config = FitConfig::default();
        let (t_hat, _) = fit_theta(&seq, r, &config).unwrap();
        let terms = SequenceTerms::compute(&seq, r, w.default_cell_size()).unwrap();
        let oracle = golden_section_max(|t| terms.log_likelihood(t), 1e-6, 1.0 - 1e-6, 1e-9);
        prop_assert!((t_hat - oracle).abs() < 1e-3, "grid+polish {} golden {}", t_hat, oracle);
    }

    #[test]
    fn simulated_points_stay_inside_and_repeat(theta in 0.05..0.95f64, rf in 0.01..0.3f64, seed in 0u64..1000, w in window_strategy()) {
        let params = ModelParams::new(theta, rf * w.shorter_side(), w).unwrap();
        let cfg = SimulationConfig::new(params, 40, seed);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        for p in a.points() {
            prop_assert!(p.x > w.xmin() && p.x < w.xmax() && p.y > w.ymin() && p.y < w.ymax());
        }
    }
}
