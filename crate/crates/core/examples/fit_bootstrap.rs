//! Simulates a stand resembling a regular forest plot, fits (theta, r) by
//! maximum likelihood and adds bootstrap intervals.
//!
//! Run with `cargo run --release --example fit_bootstrap [seed]`.

use sspp::inference::fit_with_bootstrap;
use sspp::{simulate, FitConfig, ModelParams, Result, SimulationConfig, Window};

fn main() -> Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let window = Window::square(25.0)?;
    let truth = ModelParams::new(0.17, 2.18, window)?;
    let seq = simulate(&SimulationConfig::new(truth, 120, seed))?;

    let config = FitConfig {
        r_lower: Some(0.11575),
        bootstrap_replicates: 50,
        seed,
        ..FitConfig::default()
    };
    let (fit, boot) = fit_with_bootstrap(&seq, &config)?;
    let d = &fit.diagnostics;
    println!("true      theta = 0.17   r = 2.18");
    println!(
        "grid      theta = {:.3}  r = {:.3}",
        d.grid_theta_hat, d.grid_r_hat
    );
    println!(
        "polished  theta = {:.4} r = {:.4}  loglik = {:.4}",
        fit.theta_hat, fit.r_hat, fit.max_loglik
    );
    println!(
        "surface   {} points, cell size {}",
        fit.surface.len(),
        d.cell_size
    );
    if let Some(b) = boot {
        println!(
            "bootstrap {} fits, {} failures",
            b.estimates.len(),
            b.failures.len()
        );
        println!("  theta 95% CI ({:.3}, {:.3})", b.theta_ci.0, b.theta_ci.1);
        println!("  r     95% CI ({:.3}, {:.3})", b.r_ci.0, b.r_ci.1);
    }
    for w in &fit.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
