//! Global ERL envelope test of complete spatial randomness on a uniform
//! pattern and on a strongly clustered sequence.
//!
//! Run with `cargo run --release --example csr_test`.

use sspp::csr::{erl_global_test, r_grid};
use sspp::rng::replicate_rng;
use sspp::sampler::uniform_point;
use sspp::{simulate, ModelParams, Point, Result, SimulationConfig, Window};

fn main() -> Result<()> {
    let window = Window::unit();
    let grid = r_grid(0.25, 257)?;

    let mut rng = replicate_rng(3, 0);
    let uniform: Vec<Point> = (0..100).map(|_| uniform_point(&window, &mut rng)).collect();
    let res = erl_global_test(&uniform, &window, 999, &grid, 0.05, 5)?;
    println!(
        "uniform pattern:   p = {:.3}  reject = {}",
        res.p_value,
        res.rejects()
    );

    let clustered = simulate(&SimulationConfig::new(
        ModelParams::new(0.97, 0.08, window)?,
        100,
        3,
    ))?;
    let res = erl_global_test(clustered.points(), &window, 999, &grid, 0.05, 5)?;
    println!(
        "clustered pattern: p = {:.3}  reject = {}",
        res.p_value,
        res.rejects()
    );
    Ok(())
}
