//! Simulates the three reference models (inhibition, random walk, clustering)
//! on the unit square and prints the end-of-sequence summaries per seed.
//!
//! Run with `cargo run --release --example simulation_models [seeds]`.

use sspp::summaries::{PerPointSummaries, StatisticKind};
use sspp::{simulate, ModelParams, Point, Result, SimulationConfig, Window};

const MODELS: [(&str, f64); 3] = [("model 1", 0.05), ("model 2", 0.5), ("model 3", 0.95)];

fn main() -> Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let window = Window::unit();
    let r = 0.1;
    let start = vec![Point::new(0.90, 0.50), Point::new(0.60, 0.92)];

    println!("seed  lagged(m1,m2,m3)  coverage(m1,m2,m3)");
    for seed in 0..seeds {
        let mut lagged = Vec::new();
        let mut coverage = Vec::new();
        for &(_, theta) in &MODELS {
            let params = ModelParams::new(theta, r, window)?;
            let cfg = SimulationConfig::new(params, 100, seed).with_start_points(start.clone());
            let seq = simulate(&cfg)?;
            let s = PerPointSummaries::compute(&seq, r, window.default_cell_size())?;
            lagged.push(
                *s.curve(StatisticKind::LaggedClustering, true)
                    .values
                    .last()
                    .unwrap(),
            );
            coverage.push(
                *s.curve(StatisticKind::BallCoverage, false)
                    .values
                    .last()
                    .unwrap(),
            );
        }
        println!(
            "{seed:>4}  {:>5} {:>5} {:>5}   {:.3} {:.3} {:.3}",
            lagged[0], lagged[1], lagged[2], coverage[0], coverage[1], coverage[2]
        );
    }
    Ok(())
}
